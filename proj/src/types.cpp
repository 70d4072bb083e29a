#include "lsstruct/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "lsstruct/errors.hpp"

namespace lsstruct {

HaplotypePanel HaplotypePanel::from_rows(const std::vector<Haplotype>& rows) {
  HaplotypePanel panel;
  if (rows.empty()) return panel;
  const Eigen::Index loci = rows.front().size();
  panel.alleles.resize(static_cast<Eigen::Index>(rows.size()), loci);
  panel.ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != loci) {
      throw ShapeError("haplotype '" + rows[i].id + "' has " +
                       std::to_string(rows[i].size()) + " loci, expected " +
                       std::to_string(loci));
    }
    panel.alleles.row(static_cast<Eigen::Index>(i)) =
        rows[i].alleles.transpose();
    panel.ids.push_back(rows[i].id);
  }
  return panel;
}

RegionLayout::RegionLayout(std::vector<int> region_of_locus)
    : region_of_locus_(std::move(region_of_locus)) {
  std::set<int> seen;
  for (std::size_t s = 0; s < region_of_locus_.size(); ++s) {
    const int r = region_of_locus_[s];
    if (s == 0 || r != region_of_locus_[s - 1]) {
      if (!seen.insert(r).second) {
        throw ParameterError("region " + std::to_string(r) +
                             " is not contiguous (resumes at locus " +
                             std::to_string(s) + ")");
      }
      starts_.push_back(static_cast<Eigen::Index>(s));
    }
  }
}

RegionLayout RegionLayout::single(Eigen::Index loci) {
  return RegionLayout(std::vector<int>(static_cast<std::size_t>(loci), 0));
}

RegionLayout RegionLayout::uniform(int regions, int loci_per_region) {
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(regions) * loci_per_region);
  for (int r = 0; r < regions; ++r) ids.insert(ids.end(), loci_per_region, r);
  return RegionLayout(std::move(ids));
}

bool RegionLayout::starts_region(Eigen::Index locus) const {
  return std::binary_search(starts_.begin(), starts_.end(), locus);
}

GeneticMap GeneticMap::uniform(const RegionLayout& layout,
                               double morgans_per_region) {
  GeneticMap map;
  map.positions.resize(layout.loci());
  const auto& starts = layout.region_starts();
  for (std::size_t r = 0; r < starts.size(); ++r) {
    const Eigen::Index begin = starts[r];
    const Eigen::Index end =
        r + 1 < starts.size() ? starts[r + 1] : layout.loci();
    const Eigen::Index count = end - begin;
    for (Eigen::Index s = begin; s < end; ++s) {
      map.positions[s] = count > 1 ? morgans_per_region *
                                         static_cast<double>(s - begin) /
                                         static_cast<double>(count - 1)
                                   : 0.0;
    }
  }
  return map;
}

void validate_map(const GeneticMap& map, const RegionLayout& layout) {
  if (map.loci() != layout.loci()) {
    throw ShapeError("genetic map has " + std::to_string(map.loci()) +
                     " loci but region layout has " +
                     std::to_string(layout.loci()));
  }
  for (Eigen::Index s = 0; s < map.loci(); ++s) {
    const double r = map.positions[s];
    if (!std::isfinite(r) || r < 0.0) {
      throw ParameterError("genetic position at locus " + std::to_string(s) +
                           " must be finite and non-negative");
    }
    if (layout.starts_region(s)) {
      if (r != 0.0) {
        throw ParameterError("first locus of a region (locus " +
                             std::to_string(s) + ") must have position 0");
      }
    } else if (r < map.positions[s - 1]) {
      throw ParameterError("genetic position decreases at locus " +
                           std::to_string(s));
    }
  }
}

void validate_params(const ModelParams& params) {
  if (!(params.effective_population_size > 0.0) ||
      !std::isfinite(params.effective_population_size)) {
    throw ParameterError("effective population size must be positive");
  }
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) {
    throw ParameterError("alpha must lie in [0, 1]");
  }
  if (params.theta_override &&
      !(*params.theta_override > 0.0 && std::isfinite(*params.theta_override))) {
    throw ParameterError("theta override must be positive and finite");
  }
}

}  // namespace lsstruct
