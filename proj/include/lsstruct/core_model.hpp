#pragma once

// Single-population haplotype copying model.

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "lsstruct/errors.hpp"
#include "lsstruct/random.hpp"
#include "lsstruct/types.hpp"

namespace lsstruct {

template <typename Scalar>
struct EmissionPair {
  Scalar match;
  Scalar mismatch;
};

// Probability of at least one switch across a map interval of delta_r
// Morgans: 1 - exp(-4 Ne delta_r / n_eff).
template <typename Scalar = double>
Scalar per_locus_rho(Scalar delta_r, Scalar n_eff, Scalar n_e) {
  if (!(delta_r >= Scalar(0))) {
    throw ParameterError("map interval must be non-negative");
  }
  if (!(n_eff > Scalar(0))) {
    throw ParameterError("effective copying sample size must be positive");
  }
  if (!(n_e > Scalar(0))) {
    throw ParameterError("effective population size must be positive");
  }
  return -std::expm1(-Scalar(4) * n_e * delta_r / n_eff);
}

// (sum_{z=1}^{n-1} 1/z)^-1
template <typename Scalar = double>
Scalar ls_theta(Eigen::Index n) {
  if (n < 2) {
    throw ParameterError("ls_theta needs n >= 2, got " + std::to_string(n));
  }
  Scalar sum(0);
  for (Eigen::Index z = 1; z <= n - 1; ++z) sum += Scalar(1) / Scalar(z);
  return Scalar(1) / sum;
}

// Indices are 0-based.
template <typename Scalar = double>
Scalar ls_transition(Eigen::Index j, Eigen::Index k, Scalar rho,
                     Eigen::Index n) {
  if (n < 1 || j < 0 || j >= n || k < 0 || k >= n) {
    throw ParameterError("transition state index out of range");
  }
  if (!(rho >= Scalar(0) && rho <= Scalar(1))) {
    throw ParameterError("rho must lie in [0, 1]");
  }
  const Scalar jump = rho / static_cast<Scalar>(n);
  return j == k ? Scalar(1) - rho + jump : jump;
}

template <typename Scalar = double>
EmissionPair<Scalar> ls_emission_pair(Eigen::Index n, Scalar theta) {
  if (n < 1) throw ParameterError("panel size must be positive");
  if (!(theta > Scalar(0))) throw ParameterError("theta must be positive");
  const auto size = static_cast<Scalar>(n);
  const Scalar miss = Scalar(0.5) * theta / (size + theta);
  return {size / (size + theta) + miss, miss};
}

template <typename Scalar = double>
Scalar ls_emission(std::uint8_t h_allele, std::uint8_t c_allele,
                   Eigen::Index n, Scalar theta) {
  if (h_allele > 1 || c_allele > 1) {
    throw ParameterError("alleles must be 0 or 1");
  }
  const auto e = ls_emission_pair(n, theta);
  return h_allele == c_allele ? e.match : e.mismatch;
}

// log P(h | panel) under the single-population model on one region.
// theta defaults to ls_theta(n); params.alpha is ignored.
double ls_forward_loglik(const Haplotype& h, const HaplotypePanel& panel,
                         const GeneticMap& map, const ModelParams& params);

// Draws one haplotype from the copying model: a uniform first source,
// switching with probability rho (to a uniform source, possibly the same)
// and miscopying with probability theta / (2 (n + theta)).
Haplotype simulate_next_haplotype(const HaplotypePanel& panel,
                                  const GeneticMap& map,
                                  const ModelParams& params, Rng& rng,
                                  std::string id = "sim");

// Same, also returning the copied source at every locus.
Haplotype simulate_next_haplotype(const HaplotypePanel& panel,
                                  const GeneticMap& map,
                                  const ModelParams& params, Rng& rng,
                                  std::vector<Eigen::Index>& sources,
                                  std::string id = "sim");

}  // namespace lsstruct
