#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "kma/errors.hpp"
#include "kma/fourier.hpp"

namespace fs = std::filesystem;
using namespace kma;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result kma_run(std::vector<std::string> args) {
  args.insert(args.begin(), "kma");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("kma_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

}  // namespace

TEST_CASE("solve command") {
  TempDir tmp;
  SUBCASE("CY single mode") {
    auto r = kma_run({"solve", "--family", "cy", "--f", "cos:1,0:0.1", "--n", "1", "--N", "64", "--out", tmp / "s"});
    CHECK(r.code == 0);
    auto j = load(tmp / "s/solve.json");
    CHECK(j["status"] == "converged");
    CHECK(j["residual_inf"].get<double>() < 1e-10);
    CHECK(fs::exists(tmp / "s/phi.kmaf"));
    CHECK(read_field(tmp / "s/phi.kmaf").grid().resolution() == 64);
  }
  SUBCASE("F omitted") {
    auto r = kma_run({"solve", "--out", tmp / "z"});
    CHECK(r.code == 0);
    CHECK(sup_abs(read_field(tmp / "z/phi.kmaf")) == 0.0);
  }
  SUBCASE("bad resolution") {
    auto r = kma_run({"solve", "--N", "7", "--out", tmp / "bad"});
    CHECK(r.code == 1);
    CHECK(r.err.find("resolution must be even, ≥ 8") != std::string::npos);
  }
  SUBCASE("solver failure keeps diagnostics") {
    auto r = kma_run({"solve", "--family", "cy", "--f", "cos:1,0:20", "--max-iters", "2", "--out", tmp / "f"});
    CHECK(r.code == 2);
    auto j = load(tmp / "f/solve.json");
    CHECK(j["status"] == "failed");
    CHECK(j["cause"] == "NoConvergence");
  }
  SUBCASE("usage errors") {
    CHECK(kma_run({}).code == 1);
    CHECK(kma_run({"solve", "--family", "kahler", "--out", tmp / "u"}).code == 1);
    CHECK(kma_run({"solve", "--f", "cos:1,0,0:0.1", "--out", tmp / "u"}).code == 1);
  }
}

TEST_CASE("config file and overrides") {
  TempDir tmp;
  {
    std::ofstream os(tmp / "cfg.json");
    os << R"({"n": 1, "N": 16, "family": "negc1", "f": ["cos:1,0:0.3"], "newton": {"tol": 1e-11}})";
  }
  auto r = kma_run({"solve", "--config", tmp / "cfg.json", "--N", "32", "--out", tmp / "o"});
  REQUIRE(r.code == 0);
  auto c = load(tmp / "o/config.json");
  CHECK(c["N"] == 32);
  CHECK(c["newton"]["tol"] == 1e-11);
  CHECK(c["f"][0] == "cos:1,0:0.3");
  auto rc = cli::RunConfig::from_json([&] { json j = c; j.erase("kind"); return j; }());
  CHECK(rc.to_json().dump() == [&] { json j = c; j.erase("kind"); return j; }().dump());

  {
    std::ofstream os(tmp / "typo.json");
    os << R"({"resolution": 16})";
  }
  CHECK(kma_run({"solve", "--config", tmp / "typo.json", "--out", tmp / "t"}).code == 1);
}

TEST_CASE("determinism") {
  TempDir tmp;
  for (const char* d : {"a", "b"})
    REQUIRE(kma_run({"path", "--family", "cy", "--f-random", "0.5", "--seed", "11", "--N", "16", "--points", "5",
                     "--out", tmp / d})
                .code == 0);
  CHECK(slurp(tmp / "a/path.csv") == slurp(tmp / "b/path.csv"));
  CHECK(slurp(tmp / "a/path.json") == slurp(tmp / "b/path.json"));
  CHECK(slurp(tmp / "a/phi_final.kmaf") == slurp(tmp / "b/phi_final.kmaf"));
  // A different seed changes the data.
  REQUIRE(kma_run({"path", "--family", "cy", "--f-random", "0.5", "--seed", "12", "--N", "16", "--points", "5",
                   "--out", tmp / "c"})
              .code == 0);
  CHECK(slurp(tmp / "a/path.csv") != slurp(tmp / "c/path.csv"));

  // 17 significant digits round-trip every CSV value.
  auto pj = load(tmp / "a/path.json");
  auto rows = csv_rows(tmp / "a/path.csv");
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][3]) == pj["records"][i - 1]["sup_phi"].get<double>());
    CHECK(std::stod(rows[i][2]) == pj["records"][i - 1]["residual_inf"].get<double>());
  }
}

TEST_CASE("path command") {
  TempDir tmp;
  SUBCASE("NegC1 default schedule") {
    auto r = kma_run({"path", "--family", "negc1", "--f", "cos:1,0:0.5", "--N", "16", "--out", tmp / "p"});
    CHECK(r.code == 0);
    auto rows = csv_rows(tmp / "p/path.csv");
    CHECK(rows.size() == 22);
    CHECK(rows[0].size() == 9);
    CHECK(fs::exists(tmp / "p/phi_final.kmaf"));
  }
  SUBCASE("zero data") {
    REQUIRE(kma_run({"path", "--N", "16", "--out", tmp / "z"}).code == 0);
    auto rows = csv_rows(tmp / "z/path.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][3]) == 0.0);
  }
  SUBCASE("Fano past the spectral gap") {
    auto r = kma_run({"path", "--family", "fano", "--f", "cos:1,0:0.02", "--N", "16", "--points", "13", "--t-max",
                      "12", "--out", tmp / "f"});
    CHECK(r.code == 3);
    auto j = load(tmp / "f/path.json");
    CHECK(j["complete"] == false);
    CHECK(j["failure"]["cause"] == "SpectrumHit");
    CHECK(csv_rows(tmp / "f/path.csv").size() == 11);  // header and t = 0..9
    CHECK_FALSE(j["gap_checks"].empty());
  }
  SUBCASE("adaptive stall") {
    auto r = kma_run({"path", "--family", "negc1", "--f", "cos:1,0:0.5", "--N", "16", "--schedule", "adaptive",
                      "--max-iters", "1", "--tol", "1e-12", "--out", tmp / "s"});
    CHECK(r.code == 3);
    CHECK(load(tmp / "s/path.json")["failure"]["cause"] == "PathStalled");
  }
}

TEST_CASE("verify command") {
  TempDir tmp;
  SUBCASE("zero path passes") {
    REQUIRE(kma_run({"path", "--N", "16", "--out", tmp / "z"}).code == 0);
    auto r = kma_run({"verify", "--in", tmp / "z"});
    CHECK(r.code == 0);
    auto rep = load(tmp / "z/report.json");
    CHECK(rep["all_pass"] == true);
    CHECK(fs::exists(tmp / "z/report.txt"));
  }
  SUBCASE("manufactured NegC1 solve") {
    const PeriodicGrid g(1, 32);
    const ScalarField star = sample_terms(g, {{true, {1, 0, 0, 0}, 0.05, 0.0}, {false, {0, 1, 0, 0}, 0.025, 0.0}});
    write_field(tmp / "F.kmaf", manufactured_data(star, Family::NegC1, 1.0));
    REQUIRE(kma_run({"solve", "--family", "negc1", "--f-file", tmp / "F.kmaf", "--N", "32", "--out", tmp / "m"}).code == 0);
    CHECK(sup_abs(read_field(tmp / "m/phi.kmaf") - star) < 1e-8);
    // The Ricci check runs at twice the resolution, where the interpolated non-band-limited F is
    // only accurate to discretization error; the gate is the named entries below.
    kma_run({"verify", "--in", tmp / "m"});
    auto rep = load(tmp / "m/report.json");
    for (const auto& e : rep["entries"]) {
      const std::string name = e["name"];
      if (name.rfind("c0", 0) == 0 || name.rfind("c2", 0) == 0 || name.rfind("energy", 0) == 0 || name == "uniqueness")
        CHECK(e["pass"] == true);
    }
  }
  SUBCASE("report-only") {
    // n = 1 CY paths carry the Moser convergence entry, which does not pass with q = 2.
    REQUIRE(kma_run({"path", "--family", "cy", "--f", "cos:1,0:0.3", "--N", "16", "--points", "3", "--out", tmp / "c"}).code == 0);
    CHECK(kma_run({"verify", "--in", tmp / "c", "--no-uniqueness"}).code == 2);
    auto r = kma_run({"verify", "--in", tmp / "c", "--no-uniqueness", "--report-only"});
    CHECK(r.code == 0);
    CHECK(r.out.find("moser_convergence") != std::string::npos);
  }
  SUBCASE("missing input") {
    CHECK(kma_run({"verify", "--in", tmp / "nothing"}).code == 1);
  }
}

TEST_CASE("sweep command") {
  TempDir tmp;
  auto r = kma_run({"sweep", "--family", "cy", "--f", "cos:1,0:1", "--N", "16", "--amplitudes", "0", "--out", tmp / "a"});
  CHECK(r.code == 0);
  auto rows = csv_rows(tmp / "a/sweep.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == "amplitude");
  CHECK(std::stod(rows[1][2]) == 0.0);

  CHECK(kma_run({"sweep", "--family", "cy", "--f", "cos:1,0:1", "--N", "16", "--amplitudes", "0.1,0.2,0.4", "--out",
                 tmp / "b"})
            .code == 0);

  auto fail = kma_run({"sweep", "--family", "cy", "--f", "cos:1,0:1", "--N", "16", "--amplitudes", "0.1,20", "--out", tmp / "c"});
  CHECK(fail.code == 2);
  auto frows = csv_rows(tmp / "c/sweep.csv");
  REQUIRE(frows.size() == 3);
  REQUIRE(frows[2].size() == 5);
  CHECK_FALSE(frows[2][4].empty());
  CHECK(kma_run({"sweep", "--family", "cy", "--f", "cos:1,0:1", "--N", "16", "--amplitudes", "0.1,20", "--allow-fail",
                 "--out", tmp / "d"})
            .code == 0);
}

TEST_CASE("oracle-check command") {
  TempDir tmp;
  auto r = kma_run({"oracle-check", "--case", "n1_two_mode", "--case", "zero_cy", "--out", tmp / "o"});
  CHECK(r.code == 0);
  auto rows = csv_rows(tmp / "o/oracle.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "n1_two_mode");
  CHECK(rows[1][8] == "1");
  CHECK(kma_run({"oracle-check", "--case", "nope", "--out", tmp / "x"}).code == 1);
}
