#include "lsstruct/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "lsstruct/errors.hpp"

namespace lsstruct {

CoalescentTree::CoalescentTree(Eigen::Index leaves) : leaves_(leaves) {
  if (leaves < 1) throw ParameterError("a tree needs at least one leaf");
  parent_.assign(static_cast<std::size_t>(leaves), -1);
  height_.assign(static_cast<std::size_t>(leaves), 0.0);
}

double CoalescentTree::branch_length(Eigen::Index node) const {
  const Eigen::Index up = parent(node);
  return up < 0 ? 0.0 : height(up) - height(node);
}

double CoalescentTree::total_branch_length() const {
  double total = 0.0;
  for (Eigen::Index v = 0; v < nodes(); ++v) total += branch_length(v);
  return total;
}

double CoalescentTree::waiting_time(Eigen::Index k) const {
  if (k < 2 || k > leaves_) {
    throw ParameterError("waiting time index k must lie in [2, n]");
  }
  return waiting_.at(static_cast<std::size_t>(leaves_ - k));
}

Eigen::Index CoalescentTree::join(Eigen::Index a, Eigen::Index b,
                                  double at_height) {
  const Eigen::Index node = nodes();
  for (const Eigen::Index child : {a, b}) {
    if (child < 0 || child >= node || parent(child) >= 0 || a == b) {
      throw UsageError("join needs two distinct uncoalesced lineages");
    }
    if (height(child) > at_height) {
      throw UsageError("parent must not be younger than its children");
    }
  }
  parent_[static_cast<std::size_t>(a)] = node;
  parent_[static_cast<std::size_t>(b)] = node;
  parent_.push_back(-1);
  height_.push_back(at_height);
  return node;
}

void CoalescentTree::finish() {
  if (nodes() != 2 * leaves_ - 1) {
    throw UsageError("tree has " + std::to_string(nodes()) +
                     " nodes, expected " + std::to_string(2 * leaves_ - 1));
  }
  std::vector<double> events(height_.begin() + leaves_, height_.end());
  std::sort(events.begin(), events.end());
  waiting_.clear();
  double previous = 0.0;
  for (const double h : events) {
    waiting_.push_back(h - previous);
    previous = h;
  }
}

std::vector<std::vector<Eigen::Index>> CoalescentTree::descendant_leaves()
    const {
  std::vector<std::vector<Eigen::Index>> below(
      static_cast<std::size_t>(nodes()));
  for (Eigen::Index v = 0; v < leaves_; ++v)
    below[static_cast<std::size_t>(v)].push_back(v);
  for (Eigen::Index v = 0; v < nodes(); ++v) {
    const Eigen::Index up = parent(v);
    if (up < 0) continue;
    auto& target = below[static_cast<std::size_t>(up)];
    const auto& source = below[static_cast<std::size_t>(v)];
    target.insert(target.end(), source.begin(), source.end());
  }
  for (auto& leaves : below) std::sort(leaves.begin(), leaves.end());
  return below;
}

namespace {

// Kingman coalescence among `lineages` from time `start` until one lineage
// remains or the next event would pass `stop`. Returns the time reached.
double coalesce(CoalescentTree& tree, std::vector<Eigen::Index>& lineages,
                double start, double stop, Rng& rng) {
  double t = start;
  while (lineages.size() >= 2) {
    const auto k = static_cast<double>(lineages.size());
    const double wait = rng.exponential(k * (k - 1.0) / 2.0);
    if (t + wait > stop) return stop;
    t += wait;
    const auto first = rng.uniform_index(lineages.size());
    auto second = rng.uniform_index(lineages.size() - 1);
    if (second >= first) ++second;
    const Eigen::Index node =
        tree.join(lineages[first], lineages[second], t);
    const auto hi = std::max(first, second);
    const auto lo = std::min(first, second);
    lineages.erase(lineages.begin() + static_cast<std::ptrdiff_t>(hi));
    lineages[lo] = node;
  }
  return t;
}

}  // namespace

CoalescentTree sample_coalescent_tree(Eigen::Index leaves, Rng& rng) {
  if (leaves < 2) throw ParameterError("coalescent tree needs n >= 2");
  CoalescentTree tree(leaves);
  std::vector<Eigen::Index> lineages(static_cast<std::size_t>(leaves));
  for (Eigen::Index i = 0; i < leaves; ++i)
    lineages[static_cast<std::size_t>(i)] = i;
  coalesce(tree, lineages, 0.0, std::numeric_limits<double>::infinity(), rng);
  tree.finish();
  return tree;
}

CoalescentTree sample_structured_tree(const std::vector<int>& population_sizes,
                                      double tau, Rng& rng) {
  Eigen::Index total = 0;
  for (const int size : population_sizes) {
    if (size < 1) throw ParameterError("population sizes must be positive");
    total += size;
  }
  if (total < 2) throw ParameterError("structured tree needs n >= 2");
  if (!(tau >= 0.0)) throw ParameterError("split time must be >= 0");
  CoalescentTree tree(total);
  std::vector<Eigen::Index> ancestral;
  Eigen::Index next_leaf = 0;
  for (const int size : population_sizes) {
    std::vector<Eigen::Index> lineages;
    for (int i = 0; i < size; ++i) lineages.push_back(next_leaf++);
    coalesce(tree, lineages, 0.0, tau, rng);
    ancestral.insert(ancestral.end(), lineages.begin(), lineages.end());
  }
  coalesce(tree, ancestral, tau, std::numeric_limits<double>::infinity(), rng);
  tree.finish();
  return tree;
}

namespace {

class MutationDropper {
 public:
  // `eligible(leaves)` decides whether a branch may carry a SNP.
  template <typename Eligible>
  MutationDropper(const CoalescentTree& tree, Eligible&& eligible)
      : below_(tree.descendant_leaves()) {
    double total = 0.0;
    for (Eigen::Index v = 0; v < tree.nodes(); ++v) {
      const double length = tree.branch_length(v);
      if (length > 0.0 && eligible(below_[static_cast<std::size_t>(v)])) {
        total += length;
        cumulative_.push_back(total);
        branches_.push_back(static_cast<std::size_t>(v));
      }
    }
  }

  explicit MutationDropper(const CoalescentTree& tree)
      : MutationDropper(tree, [](const auto&) { return true; }) {}

  bool empty() const { return branches_.empty(); }

  // Writes the alleles of one fresh SNP into `column`.
  template <typename Column>
  void drop(Column&& column, Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto slot = static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
        cumulative_.begin());
    if (slot == cumulative_.size()) --slot;
    column.setZero();
    for (const Eigen::Index leaf : below_[branches_[slot]]) column[leaf] = 1;
  }

 private:
  std::vector<std::vector<Eigen::Index>> below_;
  std::vector<double> cumulative_;
  std::vector<std::size_t> branches_;
};

}  // namespace

AlleleMatrix overlay_mutations(const CoalescentTree& tree,
                               Eigen::Index num_snps, Rng& rng) {
  if (num_snps < 1) throw ParameterError("need at least one SNP");
  if (tree.leaves() < 2) throw ParameterError("tree needs n >= 2 leaves");
  const MutationDropper dropper(tree);
  AlleleMatrix out(tree.leaves(), num_snps);
  for (Eigen::Index s = 0; s < num_snps; ++s) dropper.drop(out.col(s), rng);
  return out;
}

void validate_sim_config(const StructuredSimConfig& config) {
  if (config.population_sizes.empty()) {
    throw ParameterError("at least one population is required");
  }
  for (const int size : config.population_sizes) {
    if (size < 2) throw ParameterError("every population needs >= 2 haplotypes");
  }
  if (!(config.tau >= 0.0) || !std::isfinite(config.tau)) {
    throw ParameterError("split time tau must be finite and >= 0");
  }
  if (config.regions < 1) throw ParameterError("regions must be >= 1");
  if (config.snps_per_region < 1) {
    throw ParameterError("SNPs per region must be >= 1");
  }
  if (!(config.morgans_per_region >= 0.0)) {
    throw ParameterError("region map length must be >= 0");
  }
  if (!(config.min_maf >= 0.0 && config.min_maf <= 0.5)) {
    throw ParameterError("minimum MAF must lie in [0, 0.5]");
  }
}

namespace {

// Minor-allele frequency of a SNP carried by `leaves` is at least min_maf in
// every population. Leaves are numbered population by population.
bool passes_maf(const std::vector<Eigen::Index>& leaves,
                const std::vector<int>& sizes, double min_maf) {
  Eigen::Index first = 0;
  std::size_t cursor = 0;
  for (const int size : sizes) {
    Eigen::Index derived = 0;
    while (cursor < leaves.size() && leaves[cursor] < first + size) {
      ++derived;
      ++cursor;
    }
    first += size;
    const double freq = static_cast<double>(derived) / size;
    if (std::min(freq, 1.0 - freq) < min_maf) return false;
  }
  return true;
}

std::string format_fraction(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

SimPanel simulate_structured_panel(const StructuredSimConfig& config) {
  validate_sim_config(config);
  SimPanel sim;
  Eigen::Index total = 0;
  for (std::size_t p = 0; p < config.population_sizes.size(); ++p) {
    sim.population_names.push_back("pop" + std::to_string(p + 1));
    for (int i = 0; i < config.population_sizes[p]; ++i) {
      sim.panel.ids.push_back("pop" + std::to_string(p + 1) + "_" +
                              std::to_string(i + 1));
      sim.truth.push_back(static_cast<int>(p));
    }
    total += config.population_sizes[p];
  }
  const Eigen::Index snps = config.snps_per_region;
  sim.panel.alleles.resize(total, config.regions * snps);
  constexpr int kMaxTreeDraws = 10000;

  for (int r = 0; r < config.regions; ++r) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    // Genealogies with no branch passing the MAF filter cannot host a SNP;
    // such regions are redrawn, which conditions on the region being usable.
    std::optional<MutationDropper> dropper;
    for (int draw = 0; draw < kMaxTreeDraws && (!dropper || dropper->empty());
         ++draw) {
      const CoalescentTree tree =
          sample_structured_tree(config.population_sizes, config.tau, rng);
      dropper.emplace(tree, [&](const std::vector<Eigen::Index>& leaves) {
        if (config.min_maf <= 0.0) return true;
        if (config.maf_scope == MafScope::kPooled) {
          return passes_maf(leaves, {static_cast<int>(total)}, config.min_maf);
        }
        return passes_maf(leaves, config.population_sizes, config.min_maf);
      });
    }
    if (dropper->empty()) {
      throw ParameterError("region " + std::to_string(r + 1) +
                           ": no genealogy with a SNP of minor allele "
                           "frequency >= " + format_fraction(config.min_maf) +
                           (config.maf_scope == MafScope::kPooled
                                ? " in the pooled sample"
                                : " in every population"));
    }
    for (Eigen::Index s = 0; s < snps; ++s) {
      dropper->drop(sim.panel.alleles.col(r * snps + s), rng);
      sim.locus_ids.push_back("r" + std::to_string(r + 1) + "_s" +
                              std::to_string(s + 1));
    }
  }
  sim.layout = RegionLayout::uniform(config.regions, config.snps_per_region);
  sim.map = GeneticMap::uniform(sim.layout, config.morgans_per_region);
  return sim;
}

std::uint64_t wright_fisher_pair_coalescence(std::uint64_t population_size,
                                             Rng& rng) {
  if (population_size < 1) {
    throw ParameterError("population size must be >= 1");
  }
  return rng.geometric(1.0 / static_cast<double>(population_size));
}

}  // namespace lsstruct
