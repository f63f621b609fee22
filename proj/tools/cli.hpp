#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "kma/continuity.hpp"

namespace kma::cli {

/// Exit codes: 0 success, 1 usage or config error, 2 solver failure or failed gate, 3 path stall.
enum Exit : int { Ok = 0, Usage = 1, SolverFailure = 2, Stall = 3 };

struct RunConfig {
  int n_complex = 1;
  int resolution = 32;
  double period = 1.0;
  Family family = Family::NegC1;
  double t = 1.0;
  // Continuity schedule: "fixed" or "adaptive" over [0, t_max].
  std::string schedule = "fixed";
  int points = 21;
  double t_max = 1.0;
  double min_step = 1e-4;
  bool fano_guard = true;
  double gap_margin = 1e-3;
  // Data F: explicit terms ("cos:1,0:0.1"), an optional field file, and an optional seeded
  // random trigonometric polynomial of the given l1 amplitude.
  std::vector<std::string> f_terms;
  std::string f_file;
  double f_random = 0.0;
  int f_random_modes = 2;
  std::uint64_t seed = 1;
  NewtonConfig newton;
  std::string out = "kma_out";

  void validate() const;
  PeriodicGrid grid() const;
  ScalarField data() const;
  PathConfig path_config() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

/// Full command line (argv[0] included); all output goes to the given streams.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kma::cli
