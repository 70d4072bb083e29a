#pragma once

// Tab-separated haplotype and genetic-map files.
//
// Haplotype file: header "id<TAB>label<TAB><locus ids...>", then one row per
// haplotype with its id, a truth label or "-", and one '0'/'1' column per
// locus.
//
// Map file: header "locus_id<TAB>region_id<TAB>position", then one row per
// locus in order. Regions are contiguous blocks; positions are cumulative
// Morgans restarting at 0.0 in each region.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsstruct/types.hpp"

namespace lsstruct {

struct TruthLabels {
  std::vector<int> index;          // per haplotype, into names
  std::vector<std::string> names;  // in order of first appearance

  int populations() const { return static_cast<int>(names.size()); }
  bool operator==(const TruthLabels&) const = default;
};

struct HaplotypeFile {
  HaplotypePanel panel;
  std::vector<std::string> locus_ids;
  // Present only when every row carries a label.
  std::optional<TruthLabels> truth;
};

struct MapFile {
  std::vector<std::string> locus_ids;
  std::vector<std::string> region_ids;  // per locus
  GeneticMap map;
  RegionLayout layout;
};

struct Inputs {
  HaplotypePanel panel;
  std::vector<std::string> locus_ids;
  std::optional<TruthLabels> truth;
  GeneticMap map;
  RegionLayout layout;
  std::vector<std::string> region_ids;
};

// `source` names the stream in error messages.
HaplotypeFile read_haplotype_file(std::istream& in, const std::string& source);
MapFile read_map_file(std::istream& in, const std::string& source);

HaplotypeFile read_haplotype_file(const std::string& path);
MapFile read_map_file(const std::string& path);

// Reads both files and checks that their loci line up.
Inputs parse_inputs(const std::string& haplotype_path,
                    const std::string& map_path);
Inputs combine_inputs(HaplotypeFile haps, MapFile map,
                      const std::string& haplotype_source,
                      const std::string& map_source);

void write_haplotype_file(std::ostream& out, const HaplotypePanel& panel,
                          const std::vector<std::string>& locus_ids,
                          const std::optional<TruthLabels>& truth);
void write_map_file(std::ostream& out, const std::vector<std::string>& locus_ids,
                    const std::vector<std::string>& region_ids,
                    const GeneticMap& map);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

// Splits on a single-character delimiter, keeping empty fields.
std::vector<std::string> split_fields(const std::string& line, char delimiter);

}  // namespace lsstruct
