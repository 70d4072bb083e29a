#include "lsstruct/core_model.hpp"

#include "lsstruct/structured_model.hpp"

namespace lsstruct {

double ls_forward_loglik(const Haplotype& h, const HaplotypePanel& panel,
                         const GeneticMap& map, const ModelParams& params) {
  if (panel.empty()) throw ModelError("reference panel is empty");
  ModelParams single = params;
  single.alpha = 0.0;
  if (!single.theta_override) single.theta_override = ls_theta(panel.size());
  return structured_loglik(h, SplitPanel::pooled(panel), map,
                           RegionLayout::single(panel.loci()), single);
}

Haplotype simulate_next_haplotype(const HaplotypePanel& panel,
                                  const GeneticMap& map,
                                  const ModelParams& params, Rng& rng,
                                  std::string id) {
  std::vector<Eigen::Index> sources;
  return simulate_next_haplotype(panel, map, params, rng, sources,
                                 std::move(id));
}

Haplotype simulate_next_haplotype(const HaplotypePanel& panel,
                                  const GeneticMap& map,
                                  const ModelParams& params, Rng& rng,
                                  std::vector<Eigen::Index>& sources,
                                  std::string id) {
  if (panel.empty()) throw ModelError("reference panel is empty");
  validate_params(params);
  const Eigen::Index n = panel.size();
  const Eigen::Index loci = panel.loci();
  if (map.loci() != loci) {
    throw ShapeError("genetic map has " + std::to_string(map.loci()) +
                     " loci but the panel has " + std::to_string(loci));
  }
  const double theta =
      params.theta_override ? *params.theta_override : ls_theta(n);
  const double miscopy = ls_emission_pair(n, theta).mismatch;
  const auto schedule = make_transition_schedule(
      map, RegionLayout::single(loci), static_cast<double>(n),
      params.effective_population_size);

  const auto n_u = static_cast<std::uint64_t>(n);
  Haplotype out{std::move(id), AlleleVector(loci)};
  sources.assign(static_cast<std::size_t>(loci), 0);
  auto source = static_cast<Eigen::Index>(rng.uniform_index(n_u));
  for (Eigen::Index s = 0; s < loci; ++s) {
    if (s > 0 && rng.uniform() < schedule.rho[s - 1]) {
      source = static_cast<Eigen::Index>(rng.uniform_index(n_u));
    }
    sources[static_cast<std::size_t>(s)] = source;
    const std::uint8_t copied = panel.alleles(source, s);
    out.alleles[s] = rng.uniform() < miscopy ? 1 - copied : copied;
  }
  return out;
}

}  // namespace lsstruct
