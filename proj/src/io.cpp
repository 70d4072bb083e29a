#include "lsstruct/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "lsstruct/errors.hpp"

namespace lsstruct {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& message) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + message);
}

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       std::size_t column, const std::string& message) {
  throw ParseError(source + ":" + std::to_string(line) + ":" +
                   std::to_string(column) + ": " + message);
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return in;
}

}  // namespace

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(delimiter, start);
    fields.push_back(line.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return fields;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

HaplotypeFile read_haplotype_file(std::istream& in, const std::string& source) {
  std::string line;
  if (!next_line(in, line)) fail(source, 1, "missing header row");
  const auto header = split_fields(line, '\t');
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    fail(source, 1, "header must be 'id<TAB>label<TAB><locus ids...>'");
  }
  HaplotypeFile file;
  file.locus_ids.assign(header.begin() + 2, header.end());
  const auto loci = static_cast<Eigen::Index>(file.locus_ids.size());

  std::vector<Haplotype> rows;
  std::vector<std::string> labels;
  std::set<std::string> seen_ids;
  std::size_t labelled = 0;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    if (static_cast<Eigen::Index>(fields.size()) != loci + 2) {
      fail(source, line_no,
           "expected " + std::to_string(loci + 2) + " columns, found " +
               std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail(source, line_no, 1, "empty haplotype id");
    if (!seen_ids.insert(fields[0]).second) {
      fail(source, line_no, 1, "duplicate haplotype id '" + fields[0] + "'");
    }
    Haplotype h{fields[0], AlleleVector(loci)};
    for (Eigen::Index s = 0; s < loci; ++s) {
      const std::string& cell = fields[static_cast<std::size_t>(s) + 2];
      if (cell != "0" && cell != "1") {
        fail(source, line_no, static_cast<std::size_t>(s) + 3,
             "allele '" + cell + "' is not 0 or 1");
      }
      h.alleles[s] = cell == "1" ? 1 : 0;
    }
    if (fields[1].empty()) fail(source, line_no, 2, "empty label (use '-')");
    if (fields[1] != "-") ++labelled;
    labels.push_back(fields[1]);
    rows.push_back(std::move(h));
  }
  if (rows.empty()) fail(source, line_no, "no haplotype rows");
  if (labelled != 0 && labelled != rows.size()) {
    fail(source, line_no,
         "truth labels must be given for every haplotype or none (" +
             std::to_string(labelled) + " of " + std::to_string(rows.size()) +
             " labelled)");
  }
  file.panel = HaplotypePanel::from_rows(rows);
  if (labelled != 0) {
    TruthLabels truth;
    std::map<std::string, int> index_of;
    for (const auto& label : labels) {
      auto [it, inserted] =
          index_of.emplace(label, static_cast<int>(truth.names.size()));
      if (inserted) truth.names.push_back(label);
      truth.index.push_back(it->second);
    }
    file.truth = std::move(truth);
  }
  return file;
}

MapFile read_map_file(std::istream& in, const std::string& source) {
  std::string line;
  if (!next_line(in, line)) fail(source, 1, "missing header row");
  const auto header = split_fields(line, '\t');
  if (header.size() != 3 || header[0] != "locus_id" ||
      header[1] != "region_id" || header[2] != "position") {
    fail(source, 1, "header must be 'locus_id<TAB>region_id<TAB>position'");
  }
  MapFile file;
  std::vector<double> positions;
  std::vector<int> region_index;
  std::map<std::string, int> index_of;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() != 3) {
      fail(source, line_no,
           "expected 3 columns, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail(source, line_no, 1, "empty locus id");
    if (fields[1].empty()) fail(source, line_no, 2, "empty region id");
    double position = 0.0;
    const char* begin = fields[2].data();
    const char* end = begin + fields[2].size();
    const auto parsed = std::from_chars(begin, end, position);
    if (parsed.ec != std::errc() || parsed.ptr != end ||
        !std::isfinite(position) || position < 0.0) {
      fail(source, line_no, 3,
           "position '" + fields[2] + "' is not a non-negative number");
    }
    const bool new_block = file.region_ids.empty() ||
                           file.region_ids.back() != fields[1];
    if (new_block) {
      if (index_of.count(fields[1])) {
        fail(source, line_no, 2,
             "region '" + fields[1] + "' is not contiguous");
      }
      index_of.emplace(fields[1], static_cast<int>(index_of.size()));
      if (position != 0.0) {
        fail(source, line_no, 3,
             "first locus of region '" + fields[1] + "' must be at 0.0");
      }
    } else if (position < positions.back()) {
      fail(source, line_no, 3,
           "position decreases within region '" + fields[1] + "'");
    }
    file.locus_ids.push_back(fields[0]);
    file.region_ids.push_back(fields[1]);
    region_index.push_back(index_of.at(fields[1]));
    positions.push_back(position);
  }
  if (positions.empty()) fail(source, line_no, "no map rows");
  file.map.positions =
      Eigen::Map<const Eigen::VectorXd>(positions.data(),
                                        static_cast<Eigen::Index>(positions.size()));
  file.layout = RegionLayout(std::move(region_index));
  return file;
}

HaplotypeFile read_haplotype_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_haplotype_file(in, path);
}

MapFile read_map_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_map_file(in, path);
}

Inputs combine_inputs(HaplotypeFile haps, MapFile map,
                      const std::string& haplotype_source,
                      const std::string& map_source) {
  if (haps.locus_ids.size() != map.locus_ids.size()) {
    throw ParseError(haplotype_source + " has " +
                     std::to_string(haps.locus_ids.size()) + " loci but " +
                     map_source + " has " +
                     std::to_string(map.locus_ids.size()));
  }
  for (std::size_t s = 0; s < haps.locus_ids.size(); ++s) {
    if (haps.locus_ids[s] != map.locus_ids[s]) {
      throw ParseError(map_source + ":" + std::to_string(s + 2) +
                       ": locus '" + map.locus_ids[s] +
                       "' does not match column " + std::to_string(s + 3) +
                       " ('" + haps.locus_ids[s] + "') of " +
                       haplotype_source);
    }
  }
  Inputs inputs;
  inputs.panel = std::move(haps.panel);
  inputs.locus_ids = std::move(haps.locus_ids);
  inputs.truth = std::move(haps.truth);
  inputs.map = std::move(map.map);
  inputs.layout = std::move(map.layout);
  inputs.region_ids = std::move(map.region_ids);
  return inputs;
}

Inputs parse_inputs(const std::string& haplotype_path,
                    const std::string& map_path) {
  return combine_inputs(read_haplotype_file(haplotype_path),
                        read_map_file(map_path), haplotype_path, map_path);
}

void write_haplotype_file(std::ostream& out, const HaplotypePanel& panel,
                          const std::vector<std::string>& locus_ids,
                          const std::optional<TruthLabels>& truth) {
  if (static_cast<Eigen::Index>(locus_ids.size()) != panel.loci()) {
    throw ShapeError("locus id count does not match the panel");
  }
  out << "id\tlabel";
  for (const auto& id : locus_ids) out << '\t' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < panel.size(); ++i) {
    out << panel.ids[static_cast<std::size_t>(i)] << '\t';
    if (truth) {
      out << truth->names[static_cast<std::size_t>(
          truth->index[static_cast<std::size_t>(i)])];
    } else {
      out << '-';
    }
    for (Eigen::Index s = 0; s < panel.loci(); ++s)
      out << '\t' << (panel.alleles(i, s) ? '1' : '0');
    out << '\n';
  }
}

void write_map_file(std::ostream& out, const std::vector<std::string>& locus_ids,
                    const std::vector<std::string>& region_ids,
                    const GeneticMap& map) {
  if (static_cast<Eigen::Index>(locus_ids.size()) != map.loci() ||
      region_ids.size() != locus_ids.size()) {
    throw ShapeError("map columns differ in length");
  }
  out << "locus_id\tregion_id\tposition\n";
  for (std::size_t s = 0; s < locus_ids.size(); ++s) {
    out << locus_ids[s] << '\t' << region_ids[s] << '\t'
        << format_double(map.positions[static_cast<Eigen::Index>(s)]) << '\n';
  }
}

}  // namespace lsstruct
