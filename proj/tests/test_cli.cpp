#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "lsstruct/cli.hpp"
#include "lsstruct/core_model.hpp"
#include "lsstruct/io.hpp"
#include "oracles.hpp"

using namespace lsstruct;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lsstruct_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string simulate_small(const fs::path& dir, const std::string& seed = "3") {
  const auto prefix = (dir / "sim").string();
  const auto r = cli({"simulate", "--pops", "6,6", "--tau", "3", "--regions", "3",
                      "--snps", "8", "--seed", seed, "--out-prefix", prefix});
  REQUIRE(r.code == 0);
  return prefix;
}

}  // namespace

TEST_CASE("simulate writes a panel of the requested shape") {
  const auto dir = scratch("simulate");
  const auto prefix = (dir / "sim").string();
  REQUIRE(cli({"simulate", "--seed", "5", "--out-prefix", prefix}).code == 0);
  const auto inputs = parse_inputs(prefix + ".haps.tsv", prefix + ".map.tsv");
  CHECK(inputs.panel.size() == 120);
  CHECK(inputs.panel.loci() == 500);
  CHECK(inputs.layout.regions() == 10);
  REQUIRE(inputs.truth.has_value());
  CHECK(inputs.truth->populations() == 3);

  const auto filtered = (dir / "maf").string();
  REQUIRE(cli({"simulate", "--maf", "0.1", "--regions", "2", "--out-prefix", filtered})
              .code == 0);
  const auto f = parse_inputs(filtered + ".haps.tsv", filtered + ".map.tsv");
  for (Eigen::Index s = 0; s < f.panel.loci(); ++s) {
    for (int p = 0; p < 3; ++p) {
      const double freq = f.panel.alleles.col(s).segment(40 * p, 40).cast<double>().mean();
      CHECK(std::min(freq, 1.0 - freq) >= 0.1);
    }
  }
  CHECK(cli({"simulate", "--maf", "0.7", "--out-prefix", filtered}).code == 1);
  CHECK(cli({"simulate", "--maf-scope", "sometimes", "--out-prefix", filtered}).code == 1);
}

TEST_CASE("classify writes its outputs") {
  const auto dir = scratch("classify");
  const auto sim = simulate_small(dir);
  const auto prefix = (dir / "run").string();
  const auto r = cli({"classify", "--haps", sim + ".haps.tsv", "--map", sim + ".map.tsv",
                      "--k", "2", "--burnin", "2", "--samples", "1", "--seed", "4",
                      "--threads", "2", "--out-prefix", prefix});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("wall time") != std::string::npos);

  std::istringstream table(slurp(prefix + ".assignments.tsv"));
  std::string line;
  std::getline(table, line);
  CHECK(line == "id\tcluster\tfraction_1\tfraction_2");
  int rows = 0;
  while (std::getline(table, line)) {
    const auto fields = split_fields(line, '\t');
    REQUIRE(fields.size() == 4);
    CHECK((fields[1] == "1" || fields[1] == "2"));
    CHECK(std::stod(fields[2]) + std::stod(fields[3]) == 1.0);
    ++rows;
  }
  CHECK(rows == 12);

  std::istringstream csv(slurp(prefix + ".coassign.csv"));
  int csv_rows = 0;
  while (std::getline(csv, line)) {
    CHECK(split_fields(line, ',').size() == 12);
    ++csv_rows;
  }
  CHECK(csv_rows == 12);

  const auto meta = nlohmann::json::parse(slurp(prefix + ".run.json"));
  CHECK(meta["seed"] == 4);
  CHECK(fs::exists(prefix + ".accuracy.tsv"));
  CHECK(slurp(prefix + ".accuracy.tsv").find("total\t12\t") != std::string::npos);
}

TEST_CASE("classify is byte-identical for a fixed seed") {
  const auto dir = scratch("determinism");
  const auto sim = simulate_small(dir);
  for (const char* name : {"a", "b"}) {
    const auto prefix = (dir / name).string();
    REQUIRE(cli({"classify", "--haps", sim + ".haps.tsv", "--map", sim + ".map.tsv",
                 "--k", "2", "--burnin", "3", "--samples", "4", "--seed", "9",
                 "--threads", name[0] == 'a' ? "1" : "3", "--out-prefix", prefix})
                .code == 0);
  }
  for (const char* ext : {".assignments.tsv", ".coassign.csv", ".accuracy.tsv"}) {
    CHECK(slurp((dir / "a").string() + ext) == slurp((dir / "b").string() + ext));
  }
  auto ja = nlohmann::json::parse(slurp((dir / "a").string() + ".run.json"));
  auto jb = nlohmann::json::parse(slurp((dir / "b").string() + ".run.json"));
  CHECK(ja["seed"] == jb["seed"]);
  CHECK(ja["config"]["burnin"] == jb["config"]["burnin"]);

  // The simulator is deterministic too.
  const auto again = (dir / "again").string();
  REQUIRE(cli({"simulate", "--pops", "6,6", "--tau", "3", "--regions", "3", "--snps",
               "8", "--seed", "3", "--out-prefix", again})
              .code == 0);
  CHECK(slurp(again + ".haps.tsv") == slurp(sim + ".haps.tsv"));
  CHECK(slurp(again + ".map.tsv") == slurp(sim + ".map.tsv"));
}

TEST_CASE("evaluate scores an assignments table") {
  const auto dir = scratch("evaluate");
  write_text(dir / "h.tsv", "id\tlabel\ts1\na\tP\t0\nb\tP\t0\nc\tQ\t1\nd\tQ\t1\n");
  write_text(dir / "a.tsv", "id\tcluster\na\t2\nb\t2\nc\t1\nd\t2\n");
  const auto r = cli({"evaluate", "--haps", (dir / "h.tsv").string(), "--assignments",
                      (dir / "a.tsv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("total\t4\t0.75") != std::string::npos);

  write_text(dir / "bad.tsv", "id\tcluster\na\tx\n");
  CHECK(cli({"evaluate", "--haps", (dir / "h.tsv").string(), "--assignments",
             (dir / "bad.tsv").string()})
            .code == 1);
}

TEST_CASE("loglik agrees with the library and path enumeration") {
  const auto dir = scratch("loglik");
  write_text(dir / "h.tsv",
             "id\tlabel\ts1\ts2\ts3\ts4\n"
             "t\t-\t0\t1\t1\t0\n"
             "a\t-\t0\t1\t0\t0\n"
             "b\t-\t1\t1\t1\t0\n"
             "c\t-\t0\t0\t1\t1\n"
             "d\t-\t1\t1\t1\t0\n");
  write_text(dir / "m.tsv",
             "locus_id\tregion_id\tposition\n"
             "s1\tr1\t0\ns2\tr1\t0.00002\ns3\tr2\t0\ns4\tr2\t0.00001\n");
  const auto h = (dir / "h.tsv").string();
  const auto m = (dir / "m.tsv").string();

  const auto split = cli({"loglik", "--haps", h, "--map", m, "--target-id", "t",
                          "--focal-ids", "a,b", "--alpha", "0.3"});
  REQUIRE(split.code == 0);
  const auto inputs = parse_inputs(h, m);
  oracle::Instance in;
  in.panel.alleles = inputs.panel.alleles.bottomRows(4);
  in.panel.ids = {"a", "b", "c", "d"};
  in.focal = {true, true, false, false};
  in.target = inputs.panel.haplotype(0);
  in.map = inputs.map;
  in.layout = inputs.layout;
  in.alpha = 0.3;
  const double expected = std::log(static_cast<double>(oracle::brute_force_likelihood(in)));
  CHECK(std::stod(split.out) == doctest::Approx(expected).epsilon(1e-10));

  // alpha = 1 pools every haplotype, matching the single-population model.
  const auto pooled = cli({"loglik", "--haps", h, "--map", m, "--target-id", "t",
                           "--focal-ids", "a", "--alpha", "1"});
  REQUIRE(pooled.code == 0);
  const double reference = [&] {
    // Region boundaries factorise the single-population likelihood.
    double sum = 0.0;
    for (int r = 0; r < 2; ++r) {
      HaplotypePanel part;
      part.ids = in.panel.ids;
      part.alleles = in.panel.alleles.middleCols(2 * r, 2);
      Haplotype target{"t", in.target.alleles.segment(2 * r, 2)};
      GeneticMap map{inputs.map.positions.segment(2 * r, 2)};
      sum += ls_forward_loglik(target, part, map, {});
    }
    return sum;
  }();
  CHECK(std::stod(pooled.out) == doctest::Approx(reference).epsilon(1e-11));

  CHECK(cli({"loglik", "--haps", h, "--map", m, "--target-id", "t", "--focal-ids",
             "a,t"})
            .code == 1);
  CHECK(cli({"loglik", "--haps", h, "--map", m, "--target-id", "zz"}).code == 1);
  const auto degenerate = cli({"loglik", "--haps", h, "--map", m, "--target-id", "t",
                               "--alpha", "0"});
  CHECK(degenerate.code == 2);
  CHECK(degenerate.err.find("error:") == 0);
}

TEST_CASE("usage and parse errors exit 1") {
  const auto dir = scratch("errors");
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"classify", "--haps", "x"}).code == 1);
  write_text(dir / "h.tsv", "id\tlabel\ts1\na\t-\tA\n");
  write_text(dir / "m.tsv", "locus_id\tregion_id\tposition\ns1\tr1\t0\n");
  const auto r = cli({"classify", "--haps", (dir / "h.tsv").string(), "--map",
                      (dir / "m.tsv").string(), "--out-prefix", (dir / "o").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("h.tsv:2:3") != std::string::npos);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("the installed binary reports exit codes") {
  const auto dir = scratch("binary");
  const std::string exe = LSSTRUCT_CLI_PATH;
  const auto prefix = (dir / "s").string();
  CHECK(std::system((exe + " simulate --regions 1 --snps 5 --out-prefix " + prefix +
                     " > /dev/null 2>&1")
                        .c_str()) == 0);
  CHECK(fs::exists(prefix + ".haps.tsv"));
  const int status = std::system((exe + " nonsense > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 1);
}
