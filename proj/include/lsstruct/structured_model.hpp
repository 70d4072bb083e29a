#pragma once

// Two-group copying model. A target haplotype is a mosaic of the reference
// haplotypes; switches into the focal group C1 carry weight 1 and switches
// into the other group C2 carry weight alpha, both normalised by
// n1 + alpha * n2. alpha = 0 isolates C1, alpha = 1 pools C1 and C2.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lsstruct/core_model.hpp"
#include "lsstruct/errors.hpp"
#include "lsstruct/types.hpp"

namespace lsstruct {

enum class Membership : std::uint8_t {
  kFocal,
  kOther,
  // Present in the panel but not copyable (the target itself during a
  // leave-one-out update). Carries zero weight everywhere.
  kExcluded,
};

// Non-owning view of a panel with a group label per haplotype.
class SplitPanel {
 public:
  SplitPanel(const HaplotypePanel& panel, std::vector<Membership> membership);

  // Every haplotype focal: the single-population model.
  static SplitPanel pooled(const HaplotypePanel& panel);

  const HaplotypePanel& panel() const { return *panel_; }
  const std::vector<Membership>& membership() const { return membership_; }
  Membership membership(Eigen::Index j) const {
    return membership_[static_cast<std::size_t>(j)];
  }
  Eigen::Index size() const { return panel_->size(); }
  Eigen::Index n1() const { return n1_; }
  Eigen::Index n2() const { return n2_; }

 private:
  const HaplotypePanel* panel_;
  std::vector<Membership> membership_;
  Eigen::Index n1_ = 0;
  Eigen::Index n2_ = 0;
};

template <typename Scalar>
Scalar copying_mass(Eigen::Index n1, Eigen::Index n2, Scalar alpha) {
  const Scalar mass =
      static_cast<Scalar>(n1) + alpha * static_cast<Scalar>(n2);
  if (!(mass > Scalar(0))) {
    throw DegenerateModelError(
        "copying model is degenerate: n1 + alpha * n2 = 0 (n1=" +
        std::to_string(n1) + ", n2=" + std::to_string(n2) + ")");
  }
  return mass;
}

// Harmonic-sum mutation rate for the effective sample size n1 + alpha * n2.
// With an empty focal group the alpha-weighted sum starts at z = 1.
template <typename Scalar>
Scalar structured_theta(Eigen::Index n1, Eigen::Index n2, Scalar alpha) {
  if (n1 < 0 || n2 < 0 || n1 + n2 < 2) {
    throw ParameterError("structured_theta needs n1 + n2 >= 2 (n1=" +
                         std::to_string(n1) + ", n2=" + std::to_string(n2) +
                         ")");
  }
  if (alpha < Scalar(0) || alpha > Scalar(1)) {
    throw ParameterError("alpha must lie in [0, 1]");
  }
  Scalar focal(0);
  for (Eigen::Index z = 1; z <= n1 - 1; ++z) focal += Scalar(1) / Scalar(z);
  Scalar other(0);
  const Eigen::Index first = n1 > 0 ? n1 : 1;
  for (Eigen::Index z = first; z <= n1 + n2 - 1; ++z)
    other += Scalar(1) / Scalar(z);
  const Scalar total = focal + alpha * other;
  if (!(total > Scalar(0))) {
    throw DegenerateModelError(
        "mutation rate undefined: empty harmonic sum for n1=" +
        std::to_string(n1) + ", n2=" + std::to_string(n2) +
        " with alpha=0");
  }
  return Scalar(1) / total;
}

// Switching weight into haplotype j, before multiplying by rho.
template <typename Scalar>
Scalar destination_weight(Membership m, Scalar alpha, Scalar mass) {
  switch (m) {
    case Membership::kFocal:
      return Scalar(1) / mass;
    case Membership::kOther:
      return alpha / mass;
    case Membership::kExcluded:
      break;
  }
  return Scalar(0);
}

// q(j -> k) between adjacent loci. Indices are 0-based.
template <typename Scalar>
Scalar structured_transition(Eigen::Index j, Eigen::Index k, Scalar rho,
                             const SplitPanel& split, Scalar alpha) {
  if (j < 0 || j >= split.size() || k < 0 || k >= split.size()) {
    throw ParameterError("transition state index out of range");
  }
  if (!(rho >= Scalar(0) && rho <= Scalar(1))) {
    throw ParameterError("rho must lie in [0, 1]");
  }
  const Scalar mass = copying_mass(split.n1(), split.n2(), alpha);
  const Scalar jump = rho * destination_weight(split.membership(k), alpha, mass);
  return j == k ? Scalar(1) - rho + jump : jump;
}

template <typename Scalar>
EmissionPair<Scalar> structured_emission_pair(Eigen::Index n1, Eigen::Index n2,
                                              Scalar alpha, Scalar theta) {
  if (!(theta > Scalar(0))) throw ParameterError("theta must be positive");
  const Scalar mass = copying_mass(n1, n2, alpha);
  const Scalar miss = Scalar(0.5) * theta / (mass + theta);
  return {mass / (mass + theta) + miss, miss};
}

template <typename Scalar>
Scalar structured_emission(std::uint8_t h_allele, std::uint8_t c_allele,
                           Eigen::Index n1, Eigen::Index n2, Scalar alpha,
                           Scalar theta) {
  if (h_allele > 1 || c_allele > 1) {
    throw ParameterError("alleles must be 0 or 1");
  }
  const auto e = structured_emission_pair(n1, n2, alpha, theta);
  return h_allele == c_allele ? e.match : e.mismatch;
}

// Initial-state distribution w: 1/(n1 + alpha n2) on C1, alpha/(...) on C2.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> copying_weights(
    const SplitPanel& split, Scalar alpha) {
  const Scalar mass = copying_mass(split.n1(), split.n2(), alpha);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> w(split.size());
  for (Eigen::Index j = 0; j < split.size(); ++j)
    w[j] = destination_weight(split.membership(j), alpha, mass);
  return w;
}

// rho between consecutive loci; exactly 1 where a new region starts.
template <typename Scalar = double>
TransitionSchedule<Scalar> make_transition_schedule(const GeneticMap& map,
                                                    const RegionLayout& layout,
                                                    Scalar n_eff,
                                                    Scalar n_e) {
  validate_map(map, layout);
  TransitionSchedule<Scalar> schedule;
  const Eigen::Index loci = map.loci();
  schedule.rho.resize(loci > 0 ? loci - 1 : 0);
  const auto& starts = layout.region_starts();
  std::size_t next_region = 1;
  for (Eigen::Index s = 0; s + 1 < loci; ++s) {
    if (next_region < starts.size() && starts[next_region] == s + 1) {
      schedule.rho[s] = Scalar(1);
      ++next_region;
    } else {
      schedule.rho[s] = per_locus_rho<Scalar>(
          static_cast<Scalar>(map.positions[s + 1] - map.positions[s]), n_eff,
          n_e);
    }
  }
  return schedule;
}

// Forward vector normalised to sum 1; log_scale accumulates the log of every
// normaliser, so log_scale is the log-likelihood of loci 0..locus.
template <typename Scalar = double>
struct ForwardState {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f;
  Scalar log_scale = Scalar(0);
  Eigen::Index locus = -1;
};

namespace detail {

inline void check_target(const Haplotype& h, const HaplotypePanel& panel) {
  if (panel.empty()) throw ModelError("reference panel is empty");
  if (h.size() != panel.loci()) {
    throw ShapeError("haplotype '" + h.id + "' has " +
                     std::to_string(h.size()) + " loci but the panel has " +
                     std::to_string(panel.loci()));
  }
}

template <typename Scalar>
void normalise(ForwardState<Scalar>& state) {
  const Scalar total = state.f.sum();
  state.f /= total;
  state.log_scale += std::log(total);
}

}  // namespace detail

template <typename Scalar = double>
ForwardState<Scalar> structured_forward_init(const Haplotype& h,
                                             const SplitPanel& split,
                                             Scalar alpha, Scalar theta) {
  detail::check_target(h, split.panel());
  const auto w = copying_weights(split, alpha);
  const auto e = structured_emission_pair(split.n1(), split.n2(), alpha, theta);
  ForwardState<Scalar> state;
  state.f.resize(split.size());
  for (Eigen::Index j = 0; j < split.size(); ++j) {
    const Scalar emit =
        h.alleles[0] == split.panel().alleles(j, 0) ? e.match : e.mismatch;
    state.f[j] = w[j] * emit;
  }
  state.locus = 0;
  detail::normalise(state);
  return state;
}

// Advances the state from locus - 1 to locus in O(n): every destination
// receives (1 - rho) of its own mass plus rho * w(j) of the total.
template <typename Scalar = double>
ForwardState<Scalar> structured_forward_step(
    ForwardState<Scalar> state, Eigen::Index locus, const Haplotype& h,
    const SplitPanel& split, const TransitionSchedule<Scalar>& schedule,
    Scalar alpha, Scalar theta) {
  if (state.locus != locus - 1 || locus < 1 || locus >= h.size()) {
    throw UsageError("forward step at locus " + std::to_string(locus) +
                     " but state is at locus " + std::to_string(state.locus));
  }
  if (schedule.rho.size() != h.size() - 1) {
    throw ShapeError("transition schedule length does not match loci");
  }
  const auto w = copying_weights(split, alpha);
  const auto e = structured_emission_pair(split.n1(), split.n2(), alpha, theta);
  const Scalar rho = schedule.rho[locus - 1];
  const Scalar total = state.f.sum();
  for (Eigen::Index j = 0; j < split.size(); ++j) {
    const Scalar emit = h.alleles[locus] == split.panel().alleles(j, locus)
                            ? e.match
                            : e.mismatch;
    state.f[j] =
        emit * ((Scalar(1) - rho) * state.f[j] + rho * w[j] * total);
  }
  state.locus = locus;
  detail::normalise(state);
  return state;
}

// Mutation rate used for a split: the override if present, else the
// harmonic-sum default.
template <typename Scalar = double>
Scalar resolve_theta(const ModelParams& params, Eigen::Index n1,
                     Eigen::Index n2) {
  if (params.theta_override) return static_cast<Scalar>(*params.theta_override);
  return structured_theta<Scalar>(n1, n2, static_cast<Scalar>(params.alpha));
}

// log pi(h | C1, C2): forward recursion over all loci with rho = 1 at region
// boundaries, which multiplies the per-region likelihoods.
template <typename Scalar = double>
Scalar structured_loglik(const Haplotype& h, const SplitPanel& split,
                         const GeneticMap& map, const RegionLayout& layout,
                         const ModelParams& params) {
  validate_params(params);
  detail::check_target(h, split.panel());
  if (map.loci() != h.size()) {
    throw ShapeError("genetic map has " + std::to_string(map.loci()) +
                     " loci but the haplotype has " +
                     std::to_string(h.size()));
  }
  const auto alpha = static_cast<Scalar>(params.alpha);
  const Scalar mass = copying_mass(split.n1(), split.n2(), alpha);
  const Scalar theta = resolve_theta<Scalar>(params, split.n1(), split.n2());
  const auto schedule = make_transition_schedule<Scalar>(
      map, layout, mass,
      static_cast<Scalar>(params.effective_population_size));
  auto state = structured_forward_init(h, split, alpha, theta);
  for (Eigen::Index s = 1; s < h.size(); ++s)
    state = structured_forward_step(std::move(state), s, h, split, schedule,
                                    alpha, theta);
  return state.log_scale;
}

// 1.0 where the target differs from panel haplotype j at locus s, else 0.0.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> mismatch_indicator(
    const Eigen::Ref<const AlleleVector>& target, const AlleleMatrix& panel) {
  if (target.size() != panel.cols()) {
    throw ShapeError("target length does not match panel loci");
  }
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(panel.rows(),
                                                           panel.cols());
  for (Eigen::Index s = 0; s < panel.cols(); ++s)
    out.col(s) = (panel.col(s).array() != target[s]).template cast<Scalar>();
  return out;
}

// Fused scaled forward pass used by the sampler. Equivalent to
// structured_loglik for the split encoded in `weights` (zero for excluded
// haplotypes), but works on a precomputed mismatch indicator so repeated
// evaluations against the same target share it.
template <typename MismatchDerived, typename WeightDerived>
typename MismatchDerived::Scalar copying_loglik(
    const Eigen::ArrayBase<MismatchDerived>& mismatch,
    const Eigen::ArrayBase<WeightDerived>& weights,
    const EmissionPair<typename MismatchDerived::Scalar>& emission,
    const TransitionSchedule<typename MismatchDerived::Scalar>& schedule) {
  using Scalar = typename MismatchDerived::Scalar;
  const Eigen::Index loci = mismatch.cols();
  if (loci == 0) return Scalar(0);
  const Scalar delta = emission.mismatch - emission.match;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> f =
      weights * (emission.match + delta * mismatch.col(0));
  Scalar total = f.sum();
  Scalar loglik = std::log(total);
  for (Eigen::Index s = 1; s < loci; ++s) {
    const Scalar rho = schedule.rho[s - 1];
    const Scalar stay = (Scalar(1) - rho) / total;
    f = (emission.match + delta * mismatch.col(s)) * (stay * f + rho * weights);
    total = f.sum();
    loglik += std::log(total);
  }
  return loglik;
}

}  // namespace lsstruct
