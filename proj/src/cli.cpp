#include "lsstruct/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsstruct/errors.hpp"
#include "lsstruct/io.hpp"
#include "lsstruct/sampler.hpp"
#include "lsstruct/simulator.hpp"
#include "lsstruct/structured_model.hpp"

namespace lsstruct {

namespace {

constexpr Eigen::Index kLargePanelWarning = 10000;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write output file " + path);
  return out;
}

void warn_if_large(const Inputs& inputs, std::ostream& err) {
  if (inputs.panel.size() > kLargePanelWarning) {
    err << "warning: " << inputs.panel.size()
        << " haplotypes; text formats and O(N^2) co-assignment output may be "
           "slow\n";
  }
}

std::vector<int> parse_int_list(const std::string& text,
                                const std::string& flag) {
  std::vector<int> values;
  for (const auto& field : split_fields(text, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
      values.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + field + "' is not an integer");
    }
  }
  return values;
}

void write_accuracy(std::ostream& out, const AccuracyReport& report,
                    const TruthLabels& truth) {
  out << "population\thaplotypes\tproportion_correct\n";
  for (std::size_t p = 0; p < truth.names.size(); ++p) {
    out << truth.names[p] << '\t' << report.population_size[p] << '\t'
        << format_double(report.per_population[p]) << '\n';
  }
  out << "total\t" << truth.index.size() << '\t' << format_double(report.total)
      << '\n';
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string pops = "40,40,40";
  double tau = 0.5;
  int regions = 10;
  int snps = 50;
  double maf = 0.0;
  std::string maf_scope = "every";
  double morgans = 1e-3;
  std::uint64_t seed = 1;
  std::string out_prefix;
};

int simulate(const SimulateOptions& o, std::ostream& out) {
  StructuredSimConfig config;
  config.population_sizes = parse_int_list(o.pops, "--pops");
  config.tau = o.tau;
  config.regions = o.regions;
  config.snps_per_region = o.snps;
  config.min_maf = o.maf;
  config.maf_scope =
      o.maf_scope == "pooled" ? MafScope::kPooled : MafScope::kEveryPopulation;
  config.morgans_per_region = o.morgans;
  config.seed = o.seed;
  const SimPanel sim = simulate_structured_panel(config);

  TruthLabels truth{sim.truth, sim.population_names};
  std::vector<std::string> region_ids;
  for (const int r : sim.layout.region_of_locus())
    region_ids.push_back("r" + std::to_string(r + 1));

  const std::string haps_path = o.out_prefix + ".haps.tsv";
  const std::string map_path = o.out_prefix + ".map.tsv";
  auto haps = open_output(haps_path);
  write_haplotype_file(haps, sim.panel, sim.locus_ids, truth);
  auto map = open_output(map_path);
  write_map_file(map, sim.locus_ids, region_ids, sim.map);
  out << "wrote " << haps_path << " (" << sim.panel.size() << " haplotypes x "
      << sim.panel.loci() << " loci) and " << map_path << '\n';
  return kExitOk;
}

// --- classify --------------------------------------------------------------

struct ClassifyOptions {
  std::string haps;
  std::string map;
  int k = 3;
  double alpha = 0.1;
  double ne = 15000.0;
  int burnin = 200;
  int samples = 1000;
  std::uint64_t seed = 1;
  std::optional<double> theta;
  int threads = 1;
  std::string out_prefix;
};

int classify(const ClassifyOptions& o, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  const Inputs inputs = parse_inputs(o.haps, o.map);
  warn_if_large(inputs, err);

  RunConfig config;
  config.clusters = o.k;
  config.alpha = o.alpha;
  config.effective_population_size = o.ne;
  config.burnin = o.burnin;
  config.kept = o.samples;
  config.seed = o.seed;
  config.theta_override = o.theta;
  config.threads = o.threads;
  if (config.clusters < 2) throw UsageError("--k must be at least 2");
  const GibbsTrace trace =
      run_classifier(inputs.panel, config, inputs.map, inputs.layout);
  const AssignmentState majority = majority_assignment(trace);
  const Eigen::MatrixXd fractions = cluster_fractions(trace);

  {
    auto file = open_output(o.out_prefix + ".assignments.tsv");
    file << "id\tcluster";
    for (int k = 1; k <= config.clusters; ++k) file << "\tfraction_" << k;
    file << '\n';
    for (Eigen::Index i = 0; i < inputs.panel.size(); ++i) {
      file << inputs.panel.ids[static_cast<std::size_t>(i)] << '\t'
           << majority.z[static_cast<std::size_t>(i)] + 1;
      for (int k = 0; k < config.clusters; ++k)
        file << '\t' << format_double(fractions(i, k));
      file << '\n';
    }
  }
  {
    auto file = open_output(o.out_prefix + ".coassign.csv");
    for (Eigen::Index a = 0; a < trace.coassign.rows(); ++a) {
      for (Eigen::Index b = 0; b < trace.coassign.cols(); ++b)
        file << (b ? "," : "") << trace.coassign(a, b);
      file << '\n';
    }
  }
  {
    nlohmann::json meta;
    meta["seed"] = config.seed;
    meta["clusters"] = config.clusters;
    meta["alpha"] = config.alpha;
    meta["effective_population_size"] = config.effective_population_size;
    meta["burnin"] = config.burnin;
    meta["kept"] = config.kept;
    meta["theta_override"] =
        config.theta_override ? nlohmann::json(*config.theta_override)
                              : nlohmann::json(nullptr);
    meta["haplotypes"] = inputs.panel.size();
    meta["loci"] = inputs.panel.loci();
    meta["regions"] = inputs.layout.regions();
    meta["haplotype_file"] = o.haps;
    meta["map_file"] = o.map;
    auto file = open_output(o.out_prefix + ".run.json");
    file << meta.dump(2) << '\n';
  }
  if (inputs.truth) {
    const AccuracyReport report = accuracy_report(
        majority, inputs.truth->index, inputs.truth->populations());
    auto file = open_output(o.out_prefix + ".accuracy.tsv");
    write_accuracy(file, report, *inputs.truth);
    out << "accuracy (total): " << format_double(report.total) << '\n';
  }
  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - started;
  out << "wrote " << o.out_prefix << ".{assignments.tsv,coassign.csv,run.json"
      << (inputs.truth ? ",accuracy.tsv" : "") << "}\n";
  err << "wall time: " << wall.count() << " s\n";
  return kExitOk;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateOptions {
  std::string haps;
  std::string assignments;
  std::string out_path;
};

int evaluate(const EvaluateOptions& o, std::ostream& out) {
  const HaplotypeFile haps = read_haplotype_file(o.haps);
  if (!haps.truth) {
    throw UsageError(o.haps + ": evaluate needs truth labels on every row");
  }
  std::ifstream in(o.assignments);
  if (!in) throw ParseError(o.assignments + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(o.assignments + ":1: missing header row");
  }
  std::map<std::string, int> cluster_of;
  int clusters = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    int cluster = 0;
    try {
      std::size_t used = 0;
      cluster = fields.size() >= 2 ? std::stoi(fields[1], &used) : 0;
      if (fields.size() >= 2 && used != fields[1].size()) cluster = 0;
    } catch (const std::exception&) {
      cluster = 0;
    }
    if (cluster < 1) {
      throw ParseError(o.assignments + ":" + std::to_string(line_no) +
                       ":2: expected a positive cluster number");
    }
    cluster_of[fields[0]] = cluster - 1;
    clusters = std::max(clusters, cluster);
  }
  AssignmentState assignment;
  assignment.clusters = clusters;
  for (const auto& id : haps.panel.ids) {
    const auto it = cluster_of.find(id);
    if (it == cluster_of.end()) {
      throw ParseError(o.assignments + ": no assignment for haplotype '" + id +
                       "'");
    }
    assignment.z.push_back(it->second);
  }
  const AccuracyReport report = accuracy_report(
      assignment, haps.truth->index, haps.truth->populations());
  write_accuracy(out, report, *haps.truth);
  if (!o.out_path.empty()) {
    auto file = open_output(o.out_path);
    write_accuracy(file, report, *haps.truth);
  }
  return kExitOk;
}

// --- loglik ----------------------------------------------------------------

struct LoglikOptions {
  std::string haps;
  std::string map;
  std::string target;
  std::string focal;
  double alpha = 0.1;
  double ne = 15000.0;
  std::optional<double> theta;
};

int loglik(const LoglikOptions& o, std::ostream& out) {
  const Inputs inputs = parse_inputs(o.haps, o.map);
  std::map<std::string, Eigen::Index> index_of;
  for (std::size_t i = 0; i < inputs.panel.ids.size(); ++i)
    index_of[inputs.panel.ids[i]] = static_cast<Eigen::Index>(i);
  const auto lookup = [&](const std::string& id, const std::string& flag) {
    const auto it = index_of.find(id);
    if (it == index_of.end()) {
      throw UsageError(flag + ": unknown haplotype id '" + id + "'");
    }
    return it->second;
  };
  const Eigen::Index target = lookup(o.target, "--target-id");
  std::vector<Membership> membership(
      static_cast<std::size_t>(inputs.panel.size()), Membership::kOther);
  membership[static_cast<std::size_t>(target)] = Membership::kExcluded;
  if (!o.focal.empty()) {
    for (const auto& id : split_fields(o.focal, ',')) {
      const Eigen::Index j = lookup(id, "--focal-ids");
      if (j == target) {
        throw UsageError("--focal-ids: target '" + id +
                         "' cannot also be in the focal set");
      }
      membership[static_cast<std::size_t>(j)] = Membership::kFocal;
    }
  }
  const SplitPanel split(inputs.panel, std::move(membership));
  const ModelParams params{o.ne, o.alpha, o.theta};
  const double value = structured_loglik(inputs.panel.haplotype(target), split,
                                         inputs.map, inputs.layout, params);
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  out << buffer << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Haplotype copying models for population assignment"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "simulate a labelled structured panel");
  simulate_cmd->add_option("--pops", sim.pops,
                           "haplotypes per population, comma-separated")
      ->capture_default_str();
  simulate_cmd->add_option("--tau", sim.tau, "split time (coalescent units)")
      ->capture_default_str();
  simulate_cmd->add_option("--regions", sim.regions, "independent regions")
      ->capture_default_str();
  simulate_cmd->add_option("--snps", sim.snps, "SNPs per region")
      ->capture_default_str();
  simulate_cmd
      ->add_option("--maf", sim.maf,
                   "minimum minor-allele frequency in every population")
      ->capture_default_str();
  simulate_cmd
      ->add_option("--maf-scope", sim.maf_scope,
                   "apply --maf within every population or to the pooled "
                   "sample")
      ->check(CLI::IsMember({"every", "pooled"}))
      ->capture_default_str();
  simulate_cmd->add_option("--morgans", sim.morgans, "map length per region")
      ->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed)->capture_default_str();
  simulate_cmd->add_option("--out-prefix", sim.out_prefix)->required();

  ClassifyOptions cls;
  cls.threads =
      static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* classify_cmd =
      app.add_subcommand("classify", "assign haplotypes to K populations");
  classify_cmd->add_option("--haps", cls.haps)->required();
  classify_cmd->add_option("--map", cls.map)->required();
  classify_cmd->add_option("--k", cls.k, "number of clusters")
      ->capture_default_str();
  classify_cmd->add_option("--alpha", cls.alpha)->capture_default_str();
  classify_cmd->add_option("--ne", cls.ne, "effective population size")
      ->capture_default_str();
  classify_cmd->add_option("--burnin", cls.burnin)->capture_default_str();
  classify_cmd->add_option("--samples", cls.samples, "kept iterations")
      ->capture_default_str();
  classify_cmd->add_option("--seed", cls.seed)->capture_default_str();
  classify_cmd->add_option("--theta", cls.theta, "fixed mutation rate");
  classify_cmd->add_option("--threads", cls.threads)->capture_default_str();
  classify_cmd->add_option("--out-prefix", cls.out_prefix)->required();

  EvaluateOptions ev;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "score an assignments table against truth labels");
  evaluate_cmd->add_option("--haps", ev.haps)->required();
  evaluate_cmd->add_option("--assignments", ev.assignments)->required();
  evaluate_cmd->add_option("--out", ev.out_path, "also write the table here");

  LoglikOptions ll;
  auto* loglik_cmd = app.add_subcommand(
      "loglik", "log-likelihood of one haplotype given focal/other groups");
  loglik_cmd->add_option("--haps", ll.haps)->required();
  loglik_cmd->add_option("--map", ll.map)->required();
  loglik_cmd->add_option("--target-id", ll.target)->required();
  loglik_cmd->add_option("--focal-ids", ll.focal,
                         "comma-separated focal ids; all others form the "
                         "second group");
  loglik_cmd->add_option("--alpha", ll.alpha)->capture_default_str();
  loglik_cmd->add_option("--ne", ll.ne)->capture_default_str();
  loglik_cmd->add_option("--theta", ll.theta, "fixed mutation rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate_cmd) return simulate(sim, out);
    if (*classify_cmd) return classify(cls, out, err);
    if (*evaluate_cmd) return evaluate(ev, out);
    if (*loglik_cmd) return loglik(ll, out);
  } catch (const DegenerateModelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  std::vector<const char*> argv{"lsstruct"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lsstruct
