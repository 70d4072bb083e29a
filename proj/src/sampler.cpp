#include "lsstruct/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "lsstruct/errors.hpp"

namespace lsstruct {

void validate_config(const RunConfig& config) {
  if (config.clusters < 1) throw ParameterError("cluster count must be >= 1");
  if (config.burnin < 0) throw ParameterError("burn-in must be >= 0");
  if (config.kept < 1) throw ParameterError("kept iterations must be >= 1");
  if (config.threads < 1) throw ParameterError("threads must be >= 1");
  validate_params(config.model_params());
}

AssignmentModel::AssignmentModel(const HaplotypePanel& panel,
                                 const GeneticMap& map,
                                 const RegionLayout& layout,
                                 const RunConfig& config)
    : panel_(&panel), map_(&map), layout_(&layout), config_(config) {
  validate_config(config);
  if (panel.size() < 2) {
    throw ModelError("classification needs at least 2 haplotypes");
  }
  validate_map(map, layout);
  if (map.loci() != panel.loci()) {
    throw ShapeError("genetic map has " + std::to_string(map.loci()) +
                     " loci but the panel has " +
                     std::to_string(panel.loci()));
  }
  by_focal_size_.resize(static_cast<std::size_t>(panel.size()));
}

const AssignmentModel::SizeEntry& AssignmentModel::entry_for(Eigen::Index n1,
                                                             int cluster,
                                                             Eigen::Index i) {
  SizeEntry& entry = by_focal_size_[static_cast<std::size_t>(n1)];
  if (entry.ready) return entry;
  const Eigen::Index n2 = panel_->size() - 1 - n1;
  try {
    const double mass = copying_mass(n1, n2, config_.alpha);
    const double theta = resolve_theta(config_.model_params(), n1, n2);
    entry.emission = structured_emission_pair(n1, n2, config_.alpha, theta);
    entry.schedule = make_transition_schedule(
        *map_, *layout_, mass, config_.effective_population_size);
  } catch (const DegenerateModelError& e) {
    throw DegenerateModelError(
        "cluster " + std::to_string(cluster + 1) + " holds " +
        std::to_string(n1) + " haplotype(s) after removing haplotype '" +
        panel_->ids[static_cast<std::size_t>(i)] + "': " + e.what());
  }
  entry.ready = true;
  return entry;
}

Eigen::VectorXd AssignmentModel::log_scores(Eigen::Index i,
                                            const AssignmentState& state) {
  const Eigen::Index n = panel_->size();
  if (i < 0 || i >= n) throw ParameterError("haplotype index out of range");
  if (state.size() != n) {
    throw ShapeError("assignment has " + std::to_string(state.size()) +
                     " entries but the panel has " + std::to_string(n));
  }
  const int clusters = state.clusters;
  if (clusters == 1) return Eigen::VectorXd::Zero(1);

  std::vector<Eigen::Index> focal_size(static_cast<std::size_t>(clusters), 0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int z = state.z[static_cast<std::size_t>(j)];
    if (z < 0 || z >= clusters) {
      throw ParameterError("assignment label out of range at haplotype " +
                           std::to_string(j));
    }
    if (j != i) ++focal_size[static_cast<std::size_t>(z)];
  }
  std::vector<const SizeEntry*> entries;
  for (int k = 0; k < clusters; ++k)
    entries.push_back(&entry_for(focal_size[static_cast<std::size_t>(k)], k, i));

  const Eigen::ArrayXXd mismatch =
      mismatch_indicator<double>(panel_->alleles.row(i).transpose(),
                                 panel_->alleles);
  const double alpha = config_.alpha;
  Eigen::VectorXd scores(clusters);
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(clusters));

#pragma omp parallel for num_threads(config_.threads) if (config_.threads > 1) schedule(static)
  for (int k = 0; k < clusters; ++k) {
    try {
      const Eigen::Index n1 = focal_size[static_cast<std::size_t>(k)];
      const double mass = static_cast<double>(n1) +
                          alpha * static_cast<double>(n - 1 - n1);
      Eigen::ArrayXd weights(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        weights[j] = state.z[static_cast<std::size_t>(j)] == k
                         ? 1.0 / mass
                         : alpha / mass;
      }
      weights[i] = 0.0;
      const SizeEntry& entry = *entries[static_cast<std::size_t>(k)];
      scores[k] = copying_loglik(mismatch, weights, entry.emission,
                                 entry.schedule);
    } catch (...) {
      failures[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
  return scores;
}

Eigen::VectorXd AssignmentModel::conditional_probs(
    Eigen::Index i, const AssignmentState& state) {
  const Eigen::VectorXd scores = log_scores(i, state);
  const double top = scores.maxCoeff();
  Eigen::VectorXd probs = (scores.array() - top).exp().matrix();
  return probs / probs.sum();
}

Eigen::VectorXd conditional_assignment_probs(Eigen::Index i,
                                             const HaplotypePanel& panel,
                                             const AssignmentState& state,
                                             const RunConfig& config,
                                             const GeneticMap& map,
                                             const RegionLayout& layout) {
  RunConfig local = config;
  local.clusters = state.clusters;
  AssignmentModel model(panel, map, layout, local);
  return model.conditional_probs(i, state);
}

AssignmentState random_assignment(Eigen::Index haplotypes, int clusters,
                                  Rng& rng) {
  AssignmentState state;
  state.clusters = clusters;
  state.z.resize(static_cast<std::size_t>(haplotypes));
  for (auto& z : state.z)
    z = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(clusters)));
  return state;
}

namespace {

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    cumulative += probs[k];
    if (u < cumulative) return static_cast<int>(k);
  }
  // Rounding left u above the final cumulative sum.
  for (Eigen::Index k = probs.size() - 1; k >= 0; --k)
    if (probs[k] > 0.0) return static_cast<int>(k);
  return 0;
}

}  // namespace

AssignmentState gibbs_sweep(AssignmentState state, AssignmentModel& model,
                            Rng& rng) {
  if (state.clusters <= 1) return state;
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    const Eigen::VectorXd probs = model.conditional_probs(i, state);
    state.z[static_cast<std::size_t>(i)] = sample_categorical(probs, rng);
  }
  return state;
}

AssignmentState gibbs_sweep(AssignmentState state, const HaplotypePanel& panel,
                            const RunConfig& config, const GeneticMap& map,
                            const RegionLayout& layout, Rng& rng) {
  if (state.clusters <= 1) return state;
  RunConfig local = config;
  local.clusters = state.clusters;
  AssignmentModel model(panel, map, layout, local);
  return gibbs_sweep(std::move(state), model, rng);
}

GibbsTrace run_classifier(const HaplotypePanel& panel, const RunConfig& config,
                          const GeneticMap& map, const RegionLayout& layout) {
  AssignmentModel model(panel, map, layout, config);
  if (config.clusters < 2) throw ParameterError("classification needs K >= 2");
  Rng rng(config.seed);
  AssignmentState state = random_assignment(panel.size(), config.clusters, rng);
  for (int it = 0; it < config.burnin; ++it)
    state = gibbs_sweep(std::move(state), model, rng);

  GibbsTrace trace;
  trace.clusters = config.clusters;
  trace.burnin = config.burnin;
  trace.kept = config.kept;
  trace.seed = config.seed;
  const Eigen::Index n = panel.size();
  trace.coassign = Eigen::MatrixXi::Zero(n, n);
  trace.kept_assignments.reserve(static_cast<std::size_t>(config.kept));
  for (int it = 0; it < config.kept; ++it) {
    state = gibbs_sweep(std::move(state), model, rng);
    for (Eigen::Index a = 0; a < n; ++a) {
      const int za = state.z[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < n; ++b)
        trace.coassign(a, b) += za == state.z[static_cast<std::size_t>(b)];
    }
    trace.kept_assignments.push_back(state.z);
  }
  return trace;
}

Eigen::MatrixXd cluster_fractions(const GibbsTrace& trace) {
  if (trace.kept_assignments.empty()) {
    throw ParameterError("trace has no kept iterations");
  }
  const auto n =
      static_cast<Eigen::Index>(trace.kept_assignments.front().size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, trace.clusters);
  for (const auto& snapshot : trace.kept_assignments)
    for (Eigen::Index i = 0; i < n; ++i)
      counts(i, snapshot[static_cast<std::size_t>(i)]) += 1.0;
  return counts / static_cast<double>(trace.kept_assignments.size());
}

AssignmentState majority_assignment(const GibbsTrace& trace) {
  if (trace.kept_assignments.empty()) {
    throw ParameterError("trace has no kept iterations");
  }
  const auto n = trace.kept_assignments.front().size();
  std::vector<std::vector<int>> counts(
      n, std::vector<int>(static_cast<std::size_t>(trace.clusters), 0));
  for (const auto& snapshot : trace.kept_assignments)
    for (std::size_t i = 0; i < n; ++i)
      ++counts[i][static_cast<std::size_t>(snapshot[i])];
  AssignmentState out;
  out.clusters = trace.clusters;
  out.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // max_element returns the first maximum, i.e. the lowest label.
    out.z[i] = static_cast<int>(
        std::max_element(counts[i].begin(), counts[i].end()) -
        counts[i].begin());
  }
  return out;
}

AccuracyReport accuracy_report(const AssignmentState& assignment,
                               const std::vector<int>& truth,
                               int populations) {
  if (truth.size() != assignment.z.size()) {
    throw ShapeError("assignment has " + std::to_string(assignment.z.size()) +
                     " entries but truth has " + std::to_string(truth.size()));
  }
  if (populations < 1) throw ParameterError("need at least one population");
  const auto clusters = static_cast<std::size_t>(assignment.clusters);
  const auto pops = static_cast<std::size_t>(populations);
  std::vector<std::vector<Eigen::Index>> table(
      clusters, std::vector<Eigen::Index>(pops, 0));
  AccuracyReport report;
  report.population_size.assign(pops, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int z = assignment.z[i];
    if (t < 0 || t >= populations) {
      throw ParameterError("truth label out of range at haplotype " +
                           std::to_string(i));
    }
    if (z < 0 || z >= assignment.clusters) {
      throw ParameterError("cluster label out of range at haplotype " +
                           std::to_string(i));
    }
    ++table[static_cast<std::size_t>(z)][static_cast<std::size_t>(t)];
    ++report.population_size[static_cast<std::size_t>(t)];
  }
  report.cluster_label.assign(clusters, -1);
  for (std::size_t c = 0; c < clusters; ++c) {
    const auto top = std::max_element(table[c].begin(), table[c].end());
    if (*top > 0) report.cluster_label[c] = static_cast<int>(top - table[c].begin());
  }
  std::vector<Eigen::Index> correct(pops, 0);
  Eigen::Index total_correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (report.cluster_label[static_cast<std::size_t>(assignment.z[i])] ==
        truth[i]) {
      ++correct[static_cast<std::size_t>(truth[i])];
      ++total_correct;
    }
  }
  report.per_population.resize(pops);
  for (std::size_t p = 0; p < pops; ++p) {
    report.per_population[p] =
        report.population_size[p] > 0
            ? static_cast<double>(correct[p]) /
                  static_cast<double>(report.population_size[p])
            : 0.0;
  }
  report.total = truth.empty() ? 0.0
                               : static_cast<double>(total_correct) /
                                     static_cast<double>(truth.size());
  return report;
}

CoassignmentBlocks coassignment_blocks(const GibbsTrace& trace,
                                       const std::vector<int>& truth) {
  const auto n = static_cast<Eigen::Index>(truth.size());
  if (trace.coassign.rows() != n) {
    throw ShapeError("co-assignment matrix does not match truth length");
  }
  double within = 0.0;
  double between = 0.0;
  double within_pairs = 0.0;
  double between_pairs = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double rate = static_cast<double>(trace.coassign(a, b)) /
                          static_cast<double>(trace.kept);
      if (truth[static_cast<std::size_t>(a)] ==
          truth[static_cast<std::size_t>(b)]) {
        within += rate;
        within_pairs += 1.0;
      } else {
        between += rate;
        between_pairs += 1.0;
      }
    }
  }
  return {within_pairs > 0 ? within / within_pairs : 0.0,
          between_pairs > 0 ? between / between_pairs : 0.0};
}

double assignment_agreement(const AssignmentState& a,
                            const AssignmentState& b) {
  if (a.z.size() != b.z.size()) {
    throw ShapeError("assignments differ in length");
  }
  if (a.z.empty()) return 1.0;
  const int clusters = std::max(a.clusters, b.clusters);
  if (clusters > 8) {
    throw ParameterError("agreement search supports at most 8 clusters");
  }
  std::vector<int> relabel(static_cast<std::size_t>(clusters));
  std::iota(relabel.begin(), relabel.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < a.z.size(); ++i)
      hits += relabel[static_cast<std::size_t>(a.z[i])] == b.z[i];
    best = std::max(best, hits);
  } while (std::next_permutation(relabel.begin(), relabel.end()));
  return static_cast<double>(best) / static_cast<double>(a.z.size());
}

}  // namespace lsstruct
