#pragma once

// Coalescent simulation of labelled haplotype panels.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lsstruct/random.hpp"
#include "lsstruct/types.hpp"

namespace lsstruct {

// Binary genealogy. Leaves are nodes 0..n-1; internal nodes are numbered in
// creation order, so children always precede their parent. Heights are in
// coalescent units.
class CoalescentTree {
 public:
  explicit CoalescentTree(Eigen::Index leaves);

  Eigen::Index leaves() const { return leaves_; }
  Eigen::Index nodes() const { return static_cast<Eigen::Index>(height_.size()); }
  Eigen::Index root() const { return nodes() - 1; }
  double height(Eigen::Index node) const { return height_[static_cast<std::size_t>(node)]; }
  Eigen::Index parent(Eigen::Index node) const { return parent_[static_cast<std::size_t>(node)]; }
  double branch_length(Eigen::Index node) const;
  double depth() const { return height_.back(); }
  double total_branch_length() const;

  // Waiting time while k lineages remain (T_k), k = n..2. For a structured
  // genealogy this is the gap between consecutive coalescence events.
  double waiting_time(Eigen::Index k) const;

  // Joins two current lineages at the given height; returns the new node.
  Eigen::Index join(Eigen::Index a, Eigen::Index b, double at_height);
  // Fills waiting times and checks the tree is complete.
  void finish();

  // Leaves below each node.
  std::vector<std::vector<Eigen::Index>> descendant_leaves() const;

 private:
  Eigen::Index leaves_;
  std::vector<Eigen::Index> parent_;
  std::vector<double> height_;
  std::vector<double> waiting_;
};

CoalescentTree sample_coalescent_tree(Eigen::Index leaves, Rng& rng);

// Drops num_snps mutations on the tree, each on a branch chosen with
// probability proportional to its length; leaves under that branch carry
// allele 1. Returns leaves x num_snps.
AlleleMatrix overlay_mutations(const CoalescentTree& tree,
                               Eigen::Index num_snps, Rng& rng);

enum class MafScope {
  kEveryPopulation,  // minor-allele frequency checked within each population
  kPooled,           // checked once over the combined sample
};

struct StructuredSimConfig {
  std::vector<int> population_sizes{40, 40, 40};
  // Split time in coalescent units: lineages coalesce only within their own
  // population until tau, then in one ancestral pool.
  double tau = 0.5;
  int regions = 10;
  int snps_per_region = 50;
  double morgans_per_region = 1e-3;
  // Minimum minor-allele frequency; 0 disables the filter.
  double min_maf = 0.0;
  MafScope maf_scope = MafScope::kEveryPopulation;
  std::uint64_t seed = 1;
};

void validate_sim_config(const StructuredSimConfig& config);

// Genealogy of the structured split model for one region.
CoalescentTree sample_structured_tree(const std::vector<int>& population_sizes,
                                      double tau, Rng& rng);

struct SimPanel {
  HaplotypePanel panel;
  std::vector<int> truth;
  std::vector<std::string> population_names;
  RegionLayout layout;
  GeneticMap map;
  std::vector<std::string> locus_ids;
};

// One independent genealogy per region (seeded from config.seed and the
// region index); all SNPs of a region share that genealogy.
SimPanel simulate_structured_panel(const StructuredSimConfig& config);

// Generations until two lineages of a haploid Wright-Fisher population of
// size N find a common parent.
std::uint64_t wright_fisher_pair_coalescence(std::uint64_t population_size,
                                             Rng& rng);

}  // namespace lsstruct
