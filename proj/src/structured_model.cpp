#include "lsstruct/structured_model.hpp"

namespace lsstruct {

SplitPanel::SplitPanel(const HaplotypePanel& panel,
                       std::vector<Membership> membership)
    : panel_(&panel), membership_(std::move(membership)) {
  if (static_cast<Eigen::Index>(membership_.size()) != panel.size()) {
    throw ShapeError("membership has " + std::to_string(membership_.size()) +
                     " entries but the panel has " +
                     std::to_string(panel.size()) + " haplotypes");
  }
  for (const Membership m : membership_) {
    if (m == Membership::kFocal) ++n1_;
    if (m == Membership::kOther) ++n2_;
  }
}

SplitPanel SplitPanel::pooled(const HaplotypePanel& panel) {
  return SplitPanel(panel, std::vector<Membership>(
                               static_cast<std::size_t>(panel.size()),
                               Membership::kFocal));
}

}  // namespace lsstruct
