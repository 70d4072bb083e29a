#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lsstruct {

using AlleleVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;
// Haplotypes in rows, loci in columns. Column-major, so the alleles of all
// haplotypes at one locus are contiguous.
using AlleleMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct Haplotype {
  std::string id;
  AlleleVector alleles;

  Eigen::Index size() const { return alleles.size(); }
};

struct HaplotypePanel {
  std::vector<std::string> ids;
  AlleleMatrix alleles;

  Eigen::Index size() const { return alleles.rows(); }
  Eigen::Index loci() const { return alleles.cols(); }
  bool empty() const { return alleles.rows() == 0; }

  Haplotype haplotype(Eigen::Index i) const {
    return {ids.at(static_cast<std::size_t>(i)), alleles.row(i).transpose()};
  }

  static HaplotypePanel from_rows(const std::vector<Haplotype>& rows);
};

// Contiguous partition of loci into independent regions.
class RegionLayout {
 public:
  RegionLayout() = default;
  explicit RegionLayout(std::vector<int> region_of_locus);

  // Single region spanning all loci.
  static RegionLayout single(Eigen::Index loci);
  static RegionLayout uniform(int regions, int loci_per_region);

  Eigen::Index loci() const {
    return static_cast<Eigen::Index>(region_of_locus_.size());
  }
  int regions() const { return static_cast<int>(starts_.size()); }
  const std::vector<int>& region_of_locus() const { return region_of_locus_; }
  // First locus of each region, ascending.
  const std::vector<Eigen::Index>& region_starts() const { return starts_; }
  bool starts_region(Eigen::Index locus) const;

  bool operator==(const RegionLayout&) const = default;

 private:
  std::vector<int> region_of_locus_;
  std::vector<Eigen::Index> starts_;
};

// Cumulative genetic positions in Morgans, restarting at 0 in every region.
struct GeneticMap {
  Eigen::VectorXd positions;

  Eigen::Index loci() const { return positions.size(); }

  static GeneticMap uniform(const RegionLayout& layout,
                            double morgans_per_region);
};

// Throws ShapeError/ParameterError if the map does not fit the layout.
void validate_map(const GeneticMap& map, const RegionLayout& layout);

struct ModelParams {
  double effective_population_size = 15000.0;
  double alpha = 0.1;
  std::optional<double> theta_override;
};

void validate_params(const ModelParams& params);

// Per-interval switching probabilities; rho[s] governs the move from locus s
// to locus s + 1.
template <typename Scalar = double>
struct TransitionSchedule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rho;
};

}  // namespace lsstruct
