#pragma once

// Pseudo-Gibbs classifier over population assignments. Each update removes
// one haplotype, scores it as the next draw from every cluster (cluster k as
// the focal group, everyone else pooled as the other group) and resamples its
// label from the normalised scores. The prior over labels is uniform.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lsstruct/random.hpp"
#include "lsstruct/structured_model.hpp"
#include "lsstruct/types.hpp"

namespace lsstruct {

struct RunConfig {
  int clusters = 2;
  double alpha = 0.1;
  double effective_population_size = 15000.0;
  int burnin = 200;
  int kept = 1000;
  std::uint64_t seed = 1;
  std::optional<double> theta_override;
  // Worker threads for the per-cluster likelihoods of one update.
  int threads = 1;

  ModelParams model_params() const {
    return {effective_population_size, alpha, theta_override};
  }
};

void validate_config(const RunConfig& config);

// Cluster labels are 0-based: z[i] in [0, clusters).
struct AssignmentState {
  std::vector<int> z;
  int clusters = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(z.size()); }
  bool operator==(const AssignmentState&) const = default;
};

struct GibbsTrace {
  std::vector<std::vector<int>> kept_assignments;
  // coassign(i, j): kept iterations in which i and j shared a cluster.
  Eigen::MatrixXi coassign;
  int clusters = 0;
  int burnin = 0;
  int kept = 0;
  std::uint64_t seed = 0;
};

// Likelihood engine bound to one data set. Caches the transition schedule
// and mutation rate per focal-group size, which is all they depend on.
class AssignmentModel {
 public:
  AssignmentModel(const HaplotypePanel& panel, const GeneticMap& map,
                  const RegionLayout& layout, const RunConfig& config);

  Eigen::Index size() const { return panel_->size(); }
  const RunConfig& config() const { return config_; }

  // Normalised P(z_i = k | h, z_-i) for k = 0..clusters-1.
  Eigen::VectorXd conditional_probs(Eigen::Index i,
                                    const AssignmentState& state);

  // Unnormalised log scores behind conditional_probs.
  Eigen::VectorXd log_scores(Eigen::Index i, const AssignmentState& state);

 private:
  struct SizeEntry {
    bool ready = false;
    TransitionSchedule<double> schedule;
    EmissionPair<double> emission{};
  };
  const SizeEntry& entry_for(Eigen::Index n1, int cluster, Eigen::Index i);

  const HaplotypePanel* panel_;
  const GeneticMap* map_;
  const RegionLayout* layout_;
  RunConfig config_;
  std::vector<SizeEntry> by_focal_size_;
};

Eigen::VectorXd conditional_assignment_probs(Eigen::Index i,
                                             const HaplotypePanel& panel,
                                             const AssignmentState& state,
                                             const RunConfig& config,
                                             const GeneticMap& map,
                                             const RegionLayout& layout);

AssignmentState random_assignment(Eigen::Index haplotypes, int clusters,
                                  Rng& rng);

// Updates every haplotype once, in index order.
AssignmentState gibbs_sweep(AssignmentState state, AssignmentModel& model,
                            Rng& rng);
AssignmentState gibbs_sweep(AssignmentState state, const HaplotypePanel& panel,
                            const RunConfig& config, const GeneticMap& map,
                            const RegionLayout& layout, Rng& rng);

GibbsTrace run_classifier(const HaplotypePanel& panel, const RunConfig& config,
                          const GeneticMap& map, const RegionLayout& layout);

// Modal cluster over the kept snapshots; ties go to the lowest label.
AssignmentState majority_assignment(const GibbsTrace& trace);

// Fraction of kept snapshots spent in each cluster (haplotypes x clusters).
Eigen::MatrixXd cluster_fractions(const GibbsTrace& trace);

struct AccuracyReport {
  // Truth label each cluster is mapped to, -1 for empty clusters.
  std::vector<int> cluster_label;
  // Proportion of each truth population assigned correctly.
  std::vector<double> per_population;
  std::vector<Eigen::Index> population_size;
  double total = 0.0;
};

// truth[i] in [0, populations). Clusters are named after the truth label of
// the majority of their members (ties to the smaller label).
AccuracyReport accuracy_report(const AssignmentState& assignment,
                               const std::vector<int>& truth, int populations);

struct CoassignmentBlocks {
  double within = 0.0;   // mean rate over pairs with equal truth labels
  double between = 0.0;  // mean rate over pairs with different labels
};

CoassignmentBlocks coassignment_blocks(const GibbsTrace& trace,
                                       const std::vector<int>& truth);

// Fraction of haplotypes on which two labelings agree under the best
// relabeling of clusters.
double assignment_agreement(const AssignmentState& a, const AssignmentState& b);

}  // namespace lsstruct
