#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lsstruct/errors.hpp"
#include "lsstruct/simulator.hpp"

using namespace lsstruct;

namespace {

double harmonic(int n) {
  double h = 0.0;
  for (int i = 1; i <= n; ++i) h += 1.0 / i;
  return h;
}

bool monophyletic(const CoalescentTree& tree, const std::vector<Eigen::Index>& group) {
  const auto below = tree.descendant_leaves();
  for (const auto& leaves : below)
    if (leaves.size() == group.size() &&
        std::equal(leaves.begin(), leaves.end(), group.begin()))
      return true;
  return false;
}

}  // namespace

TEST_CASE("coalescent waiting times and depth") {
  const int n = 10;
  const int trees = 100000;
  Rng rng(2024);
  std::vector<double> sum(n + 1, 0.0), sum_sq(n + 1, 0.0);
  double depth = 0.0, depth_sq = 0.0;
  for (int t = 0; t < trees; ++t) {
    const auto tree = sample_coalescent_tree(n, rng);
    for (int k = 2; k <= n; ++k) {
      const double w = tree.waiting_time(k);
      sum[k] += w;
      sum_sq[k] += w * w;
    }
    depth += tree.depth();
    depth_sq += tree.depth() * tree.depth();
  }
  for (int k = 2; k <= n; ++k) {
    const double expected = 2.0 / (k * (k - 1.0));
    const double mean = sum[k] / trees;
    const double se = std::sqrt((sum_sq[k] / trees - mean * mean) / trees);
    CHECK(std::fabs(mean - expected) < 4.0 * se);
  }
  const double mean = depth / trees;
  const double se = std::sqrt((depth_sq / trees - mean * mean) / trees);
  CHECK(std::fabs(mean - 2.0 * (1.0 - 1.0 / n)) < 4.0 * se);
}

TEST_CASE("site frequency spectrum falls off as 1/i") {
  const int n = 10;
  Rng rng(99);
  std::vector<double> counts(n, 0.0);
  double total = 0.0;
  // Mutations arrive at a constant rate along the genealogy.
  while (total < 300000) {
    const auto tree = sample_coalescent_tree(n, rng);
    const auto snps = static_cast<Eigen::Index>(rng.poisson(2.0 * tree.total_branch_length()));
    if (snps == 0) continue;
    const auto m = overlay_mutations(tree, snps, rng);
    for (Eigen::Index s = 0; s < snps; ++s) {
      counts[static_cast<std::size_t>(m.col(s).cast<int>().sum())] += 1.0;
      total += 1.0;
    }
  }
  CHECK(counts[0] == 0.0);
  for (int i = 1; i < n; ++i) {
    const double expected = (1.0 / i) / harmonic(n - 1);
    CHECK(std::fabs(counts[static_cast<std::size_t>(i)] / total - expected) <
          0.05 * expected);
  }
}

TEST_CASE("mutations on a leaf edge or root child") {
  CoalescentTree tree(3);
  const auto ab = tree.join(0, 1, 1.0);
  tree.join(ab, 2, 1.5);
  tree.finish();
  CHECK(tree.branch_length(0) == 1.0);
  CHECK(tree.branch_length(2) == 1.5);
  CHECK(tree.branch_length(ab) == 0.5);
  CHECK(tree.total_branch_length() == 4.0);
  CHECK(tree.waiting_time(3) == 1.0);
  CHECK(tree.waiting_time(2) == 0.5);

  Rng rng(1);
  const auto m = overlay_mutations(tree, 4000, rng);
  int leaf_only = 0, pair = 0;
  for (Eigen::Index s = 0; s < m.cols(); ++s) {
    const int carriers = m.col(s).cast<int>().sum();
    REQUIRE((carriers == 1 || carriers == 2));
    if (carriers == 1) ++leaf_only;
    if (carriers == 2) {
      CHECK(m(0, s) == 1);
      CHECK(m(1, s) == 1);
      ++pair;
    }
  }
  // The ab edge carries 0.5 of 4.0 units.
  CHECK(std::fabs(pair / 4000.0 - 0.125) < 4.0 * std::sqrt(0.125 * 0.875 / 4000));
  CHECK(leaf_only + pair == 4000);
}

TEST_CASE("tree construction errors") {
  CoalescentTree tree(2);
  CHECK_THROWS(tree.finish());
  tree.join(0, 1, 1.0);
  CHECK_THROWS(tree.join(0, 1, 2.0));
  CHECK_THROWS_AS(CoalescentTree(0), ParameterError);
  Rng rng(1);
  CHECK_THROWS_AS(sample_coalescent_tree(1, rng), ParameterError);
}

TEST_CASE("deep split makes each population monophyletic") {
  Rng rng(5);
  int ok = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const auto tree = sample_structured_tree({6, 6}, 20.0, rng);
    ok += monophyletic(tree, {0, 1, 2, 3, 4, 5}) &&
          monophyletic(tree, {6, 7, 8, 9, 10, 11});
  }
  CHECK(ok >= 0.99 * trials);
}

TEST_CASE("tau 0 is a single panmictic population") {
  Rng a(3), b(3);
  const int trials = 20000;
  double depth_split = 0.0, depth_single = 0.0;
  for (int t = 0; t < trials; ++t) {
    depth_split += sample_structured_tree({5, 5}, 0.0, a).depth();
    depth_single += sample_coalescent_tree(10, b).depth();
  }
  CHECK(depth_split / trials == doctest::Approx(depth_single / trials).epsilon(0.03));
}

TEST_CASE("simulated panel shape and labels") {
  StructuredSimConfig config;
  config.seed = 3;
  const auto sim = simulate_structured_panel(config);
  CHECK(sim.panel.size() == 120);
  CHECK(sim.panel.loci() == 500);
  CHECK(sim.layout.regions() == 10);
  CHECK(sim.map.positions.size() == 500);
  CHECK(sim.locus_ids.size() == 500);
  CHECK(sim.truth.size() == 120);
  CHECK(sim.population_names == std::vector<std::string>{"pop1", "pop2", "pop3"});
  CHECK(std::count(sim.truth.begin(), sim.truth.end(), 1) == 40);
  std::set<std::string> ids(sim.panel.ids.begin(), sim.panel.ids.end());
  CHECK(ids.size() == 120);
  CHECK(((sim.panel.alleles.array() == 0) || (sim.panel.alleles.array() == 1)).all());
  for (const auto start : sim.layout.region_starts())
    CHECK(sim.map.positions[start] == 0.0);
}

TEST_CASE("MAF filter holds in every population") {
  StructuredSimConfig config;
  config.min_maf = 0.05;
  config.seed = 8;
  const auto sim = simulate_structured_panel(config);
  for (Eigen::Index s = 0; s < sim.panel.loci(); ++s) {
    for (int p = 0; p < 3; ++p) {
      const double freq =
          sim.panel.alleles.col(s).segment(40 * p, 40).cast<double>().mean();
      CHECK(std::min(freq, 1.0 - freq) >= 0.05);
    }
  }
  config.maf_scope = MafScope::kPooled;
  const auto pooled = simulate_structured_panel(config);
  for (Eigen::Index s = 0; s < pooled.panel.loci(); ++s) {
    const double freq = pooled.panel.alleles.col(s).cast<double>().mean();
    CHECK(std::min(freq, 1.0 - freq) >= 0.05);
  }
}

TEST_CASE("regions are independent genealogies") {
  // Same-region SNPs share one tree, so their carrier sets are nested or
  // disjoint. Across regions that compatibility fails regularly.
  StructuredSimConfig config;
  config.population_sizes = {30};
  config.regions = 40;
  config.snps_per_region = 10;
  config.seed = 21;
  const auto sim = simulate_structured_panel(config);
  auto compatible = [&](Eigen::Index a, Eigen::Index b) {
    bool both = false, only_a = false, only_b = false;
    for (Eigen::Index i = 0; i < sim.panel.size(); ++i) {
      const bool x = sim.panel.alleles(i, a), y = sim.panel.alleles(i, b);
      both |= x && y;
      only_a |= x && !y;
      only_b |= !x && y;
    }
    return !(both && only_a && only_b);
  };
  int across_bad = 0;
  for (int r = 0; r < 40; ++r) {
    for (int i = 0; i < 10; ++i)
      for (int j = i + 1; j < 10; ++j) CHECK(compatible(r * 10 + i, r * 10 + j));
    if (r + 1 < 40) across_bad += !compatible(r * 10, (r + 1) * 10);
  }
  CHECK(across_bad > 0);
}

TEST_CASE("simulation is reproducible per seed") {
  StructuredSimConfig config;
  config.regions = 3;
  config.seed = 77;
  const auto a = simulate_structured_panel(config);
  const auto b = simulate_structured_panel(config);
  CHECK(a.panel.alleles == b.panel.alleles);
  config.seed = 78;
  CHECK_FALSE(simulate_structured_panel(config).panel.alleles == a.panel.alleles);
}

TEST_CASE("simulator configuration errors") {
  StructuredSimConfig config;
  config.population_sizes = {1};
  CHECK_THROWS_AS(validate_sim_config(config), ParameterError);
  config = {};
  config.tau = -1.0;
  CHECK_THROWS_AS(validate_sim_config(config), ParameterError);
  config = {};
  config.min_maf = 0.6;
  CHECK_THROWS_AS(validate_sim_config(config), ParameterError);
  config = {};
  config.regions = 0;
  CHECK_THROWS_AS(validate_sim_config(config), ParameterError);
}

TEST_CASE("Wright-Fisher pair coalescence") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) CHECK(wright_fisher_pair_coalescence(1, rng) == 1);

  const std::uint64_t N = 100;
  const int draws = 100000;
  std::vector<std::uint64_t> x(draws);
  double sum = 0.0, sum_sq = 0.0;
  for (auto& v : x) {
    v = wright_fisher_pair_coalescence(N, rng);
    sum += static_cast<double>(v);
    sum_sq += static_cast<double>(v) * static_cast<double>(v);
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  CHECK(std::fabs(mean - 100.0) < 4.0 * se);

  // Kolmogorov-Smirnov against Geometric(1/N), evaluated at the support.
  std::sort(x.begin(), x.end());
  const double q = 1.0 - 1.0 / static_cast<double>(N);
  double d = 0.0;
  std::size_t below = 0;
  for (std::uint64_t t = 1; t <= x.back(); ++t) {
    while (below < x.size() && x[below] <= t) ++below;
    const double cdf = 1.0 - std::pow(q, static_cast<double>(t));
    d = std::max(d, std::fabs(static_cast<double>(below) / draws - cdf));
  }
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(draws)));
  CHECK_THROWS_AS(wright_fisher_pair_coalescence(0, rng), ParameterError);
}
