#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "kma/errors.hpp"
#include "kma/estimates.hpp"
#include "kma/fourier.hpp"
#include "kma/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kma::cli {

// ------------------------------------------------------------------ RunConfig

void RunConfig::validate() const {
  if (n_complex != 1 && n_complex != 2) throw ConfigError("n must be 1 or 2");
  (void)grid();  // resolution checks
  if (!(t >= 0.0)) throw ConfigError("t must be non-negative");
  if (schedule != "fixed" && schedule != "adaptive") throw ConfigError("schedule must be fixed or adaptive");
  if (!(gap_margin >= 0.0)) throw ConfigError("gap margin must be non-negative");
  if (f_random_modes < 1) throw ConfigError("random F needs at least one mode");
  (void)path_config().schedule.grid_points();
  newton.validate();
}

PeriodicGrid RunConfig::grid() const { return PeriodicGrid(n_complex, resolution, period); }

ScalarField RunConfig::data() const {
  const PeriodicGrid g = grid();
  std::vector<FourierTerm> terms;
  for (const auto& s : f_terms) terms.push_back(parse_fourier_term(s, n_complex));
  if (f_random != 0.0) {
    const auto r = random_terms(n_complex, f_random_modes, f_random, seed);
    terms.insert(terms.end(), r.begin(), r.end());
  }
  ScalarField F = sample_terms(g, terms);
  if (!f_file.empty()) {
    const ScalarField file = read_field(f_file, period);
    if (file.grid().n_complex() != n_complex || file.grid().resolution() != resolution)
      throw ConfigError("field file " + f_file + " does not match the configured grid");
    F += file;
  }
  return F;
}

PathConfig RunConfig::path_config() const {
  PathConfig pc;
  pc.newton = newton;
  pc.schedule = schedule == "adaptive" ? Schedule::adaptive(points, t_max, min_step) : Schedule::fixed(points, t_max);
  pc.fano_guard = fano_guard;
  pc.gap_margin = gap_margin;
  return pc;
}

json RunConfig::to_json() const {
  json j;
  j["n"] = n_complex;
  j["N"] = resolution;
  j["period"] = period;
  j["family"] = kma::to_string(family);
  j["t"] = t;
  j["schedule"] = schedule;
  j["points"] = points;
  j["t_max"] = t_max;
  j["min_step"] = min_step;
  j["fano_guard"] = fano_guard;
  j["gap_margin"] = gap_margin;
  j["f"] = f_terms;
  j["f_file"] = f_file;
  j["f_random"] = f_random;
  j["f_random_modes"] = f_random_modes;
  j["seed"] = seed;
  j["newton"] = {{"tol", newton.tol_residual},         {"max_iters", newton.max_iters},
                 {"damping", newton.damping},           {"max_halvings", newton.max_halvings},
                 {"cone_margin", newton.cone_margin},   {"linear_tol", newton.linear_tol}};
  j["out"] = out;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "n") c.n_complex = v.get<int>();
      else if (k == "N") c.resolution = v.get<int>();
      else if (k == "period") c.period = v.get<double>();
      else if (k == "family") c.family = parse_family(v.get<std::string>());
      else if (k == "t") c.t = v.get<double>();
      else if (k == "schedule") c.schedule = v.get<std::string>();
      else if (k == "points") c.points = v.get<int>();
      else if (k == "t_max") c.t_max = v.get<double>();
      else if (k == "min_step") c.min_step = v.get<double>();
      else if (k == "fano_guard") c.fano_guard = v.get<bool>();
      else if (k == "gap_margin") c.gap_margin = v.get<double>();
      else if (k == "f") c.f_terms = v.get<std::vector<std::string>>();
      else if (k == "f_file") c.f_file = v.get<std::string>();
      else if (k == "f_random") c.f_random = v.get<double>();
      else if (k == "f_random_modes") c.f_random_modes = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "newton") {
        for (auto nt = v.begin(); nt != v.end(); ++nt) {
          const std::string& nk = nt.key();
          if (nk == "tol") c.newton.tol_residual = nt->get<double>();
          else if (nk == "max_iters") c.newton.max_iters = nt->get<int>();
          else if (nk == "damping") c.newton.damping = nt->get<double>();
          else if (nk == "max_halvings") c.newton.max_halvings = nt->get<int>();
          else if (nk == "cone_margin") c.newton.cone_margin = nt->get<double>();
          else if (nk == "linear_tol") c.newton.linear_tol = nt->get<double>();
          else throw ConfigError("unknown newton option '" + nk + "'");
        }
      } else {
        throw ConfigError("unknown config key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

namespace {

// ------------------------------------------------------------------ output helpers

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw FormatError("cannot write " + p.string());
  os << s;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw FormatError("missing input " + p.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError("cannot parse " + p.string() + ": " + e.what());
  }
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

json record_json(const PathRecord& r) {
  return {{"t", r.t},
          {"newton_iters", r.newton_iters},
          {"residual_inf", r.residual_inf},
          {"sup_phi", r.sup_phi},
          {"inf_phi", r.inf_phi},
          {"min_eig_gprime", r.min_eig_gprime},
          {"max_eig_gprime", r.max_eig_gprime},
          {"sup_S", r.sup_S},
          {"energy_identity_err", r.energy_identity_err}};
}

bool solver_error(const Error& e) {
  return dynamic_cast<const ConeExit*>(&e) || dynamic_cast<const NoConvergence*>(&e) ||
         dynamic_cast<const SpectrumHit*>(&e) || dynamic_cast<const PositivityViolation*>(&e) ||
         dynamic_cast<const SingularMatrix*>(&e) || dynamic_cast<const IncompatibleRHS*>(&e);
}

// ------------------------------------------------------------------ commands

int cmd_solve(const RunConfig& c, std::ostream& out) {
  c.validate();
  const MAProblem problem(c.data(), c.family, c.t);
  const fs::path dir = prepare_out(c);
  json cfg = c.to_json();
  cfg["kind"] = "solve";
  write_json(dir / "config.json", cfg);
  json j;
  j["family"] = kma::to_string(c.family);
  j["t"] = c.t;
  try {
    const NewtonResult r = newton_solve(problem, ScalarField(problem.grid()), c.newton);
    const PathRecord rec = make_record(problem, r.phi, r.iterations);
    write_field((dir / "phi.kmaf").string(), r.phi);
    j["status"] = "converged";
    j["iterations"] = r.iterations;
    j["linear_iterations"] = r.linear_iterations;
    j["residual_inf"] = r.residual;
    j["diagnostics"] = record_json(rec);
    write_json(dir / "solve.json", j);
    out << "converged in " << r.iterations << " iterations, residual " << num(r.residual) << "\n";
    return Ok;
  } catch (const Error& e) {
    if (!solver_error(e)) throw;
    j["status"] = "failed";
    j["cause"] = e.kind();
    j["message"] = e.what();
    write_json(dir / "solve.json", j);
    out << "solve failed: " << e.kind() << ": " << e.what() << "\n";
    return SolverFailure;
  }
}

int cmd_path(const RunConfig& c, std::ostream& out) {
  c.validate();
  const fs::path dir = prepare_out(c);
  json cfg = c.to_json();
  cfg["kind"] = "path";
  write_json(dir / "config.json", cfg);
  const ContinuityPath path = run_path(c.family, c.data(), c.path_config());
  path.write_csv((dir / "path.csv").string());
  fs::create_directories(dir / "records");
  json j;
  j["complete"] = path.complete();
  j["records"] = json::array();
  for (std::size_t i = 0; i < path.records.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "phi_%03zu.kmaf", i);
    write_field((dir / "records" / name).string(), path.records[i].phi);
    json r = record_json(path.records[i]);
    r["file"] = std::string("records/") + name;
    j["records"].push_back(r);
  }
  if (!path.records.empty()) write_field((dir / "phi_final.kmaf").string(), path.records.back().phi);
  j["gap_checks"] = json::array();
  for (const auto& [t, gap] : path.gap_checks) j["gap_checks"].push_back({{"t", t}, {"lambda1", gap}});
  if (path.failure) {
    j["failure"] = {{"t", path.failure->t}, {"cause", path.failure->cause}, {"message", path.failure->message}};
  }
  write_json(dir / "path.json", j);
  if (path.complete()) {
    out << "path complete: " << path.records.size() << " records\n";
    return Ok;
  }
  out << "path stopped at t = " << num(path.failure->t) << ": " << path.failure->cause << ": "
      << path.failure->message << "\n";
  return Stall;
}

struct VerifyArgs {
  std::string in;
  bool report_only = false;
  double q = -1.0;
  bool no_uniqueness = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const fs::path dir(a.in);
  const json cfgj = read_json(dir / "config.json");
  const std::string kind = cfgj.value("kind", "");
  json stripped = cfgj;
  stripped.erase("kind");
  const RunConfig c = RunConfig::from_json(stripped);
  c.validate();

  ContinuityPath path;
  path.family = c.family;
  path.data = c.data();
  auto load = [&](const fs::path& p, double t) {
    if (!fs::exists(p)) throw FormatError("missing input " + p.string());
    path.records.push_back(make_record(path.problem_at(t), read_field(p.string(), c.period), 0, false));
  };
  if (kind == "solve") {
    load(dir / "phi.kmaf", c.t);
  } else if (kind == "path") {
    const json pj = read_json(dir / "path.json");
    for (const auto& r : pj.at("records")) load(dir / r.at("file").get<std::string>(), r.at("t").get<double>());
  } else {
    throw FormatError("config.json in " + dir.string() + " has no solve or path kind");
  }
  if (path.records.empty()) throw FormatError("no converged fields in " + dir.string());

  VerifyOptions opts;
  opts.q = a.q;
  opts.uniqueness = !a.no_uniqueness;
  opts.newton = c.newton;
  const EstimateReport rep = verify_path(path, opts);
  write_json(dir / "report.json", rep.to_json());
  write_text(dir / "report.txt", rep.to_table());
  out << rep.to_table();
  out << (rep.all_pass() ? "all gated entries pass\n" : "some gated entries fail\n");
  if (a.report_only) return Ok;
  return rep.all_pass() ? Ok : SolverFailure;
}

struct SweepArgs {
  std::vector<double> amplitudes;
  double q = -1.0;
  bool allow_fail = false;
};

int cmd_sweep(const RunConfig& c, const SweepArgs& a, std::ostream& out) {
  c.validate();
  if (a.amplitudes.empty()) throw ConfigError("sweep needs at least one amplitude");
  const double q = a.q > 0.0 ? a.q : c.n_complex + 1.0;
  const fs::path dir = prepare_out(c);
  json cfg = c.to_json();
  cfg["kind"] = "sweep";
  write_json(dir / "config.json", cfg);
  const SweepResult s = lp_sweep(c.data(), a.amplitudes, q, c.newton);
  std::ostringstream csv;
  csv << "amplitude,lq_norm,sup_phi,ratio,error\n";
  bool ok = true;
  for (const auto& r : s.rows) {
    csv << num(r.amplitude) << ',' << num(r.lq_norm) << ',' << num(r.sup_phi) << ',' << num(r.ratio) << ','
        << r.error << '\n';
    ok = ok && r.error.empty();
  }
  write_text(dir / "sweep.csv", csv.str());
  write_json(dir / "sweep.json", s.report.to_json());
  out << csv.str();
  if (!ok && !a.allow_fail) return SolverFailure;
  return s.report.all_pass() || a.allow_fail ? Ok : SolverFailure;
}

struct OracleArgs {
  std::vector<std::string> cases;
  int N1 = 16;
  int N2 = 8;
  std::string out = "kma_out";
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const std::vector<std::string> names = a.cases.empty() ? registry_names() : a.cases;
  std::vector<ManufacturedCase> cases;
  for (const auto& n : names) cases.push_back(make_case(n, a.N1, a.N2));  // unknown names fail before solving
  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ostringstream csv;
  csv << "case,n,N,spectral_iters,dense_iters,spectral_error,dense_error,difference,pass,error\n";
  bool ok = true;
  for (const auto& c : cases) {
    const OracleComparison r = compare_with_oracle(c);
    const std::string line = c.name + ',' + std::to_string(c.n) + ',' + std::to_string(c.phi_star.grid().resolution()) +
                             ',' + std::to_string(r.spectral_iters) + ',' + std::to_string(r.dense_iters) + ',' +
                             num(r.spectral_error) + ',' + num(r.dense_error) + ',' + num(r.difference) + ',' +
                             (r.pass() ? "1" : "0") + ',' + r.error + '\n';
    csv << line;
    out << line;
    ok = ok && r.pass();
  }
  write_text(dir / "oracle.csv", csv.str());
  return ok ? Ok : SolverFailure;
}

// ------------------------------------------------------------------ option wiring

/// Flags shared by solve, path and sweep. Values given on the command line override the config file.
struct RunFlags {
  std::string config_file;
  RunConfig flags;
  std::string family;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
    auto add = [&](CLI::Option* o, std::function<void(RunConfig&)> f) { overrides.emplace_back(o, std::move(f)); };
    add(app->add_option("--n", flags.n_complex, "complex dimension (1 or 2)"), [this](RunConfig& c) { c.n_complex = flags.n_complex; });
    add(app->add_option("--N", flags.resolution, "points per axis"), [this](RunConfig& c) { c.resolution = flags.resolution; });
    add(app->add_option("--period", flags.period, "torus period"), [this](RunConfig& c) { c.period = flags.period; });
    add(app->add_option("--family", family, "negc1, cy or fano"), [this](RunConfig& c) { c.family = parse_family(family); });
    add(app->add_option("--t", flags.t, "continuity parameter for solve"), [this](RunConfig& c) { c.t = flags.t; });
    add(app->add_option("--f", flags.f_terms, "Fourier term kind:mode:amplitude[:phase], repeatable"),
        [this](RunConfig& c) { c.f_terms = flags.f_terms; });
    add(app->add_option("--f-file", flags.f_file, "field file added to F"), [this](RunConfig& c) { c.f_file = flags.f_file; });
    add(app->add_option("--f-random", flags.f_random, "l1 amplitude of a seeded random F"),
        [this](RunConfig& c) { c.f_random = flags.f_random; });
    add(app->add_option("--f-random-modes", flags.f_random_modes, "largest mode of the random F"),
        [this](RunConfig& c) { c.f_random_modes = flags.f_random_modes; });
    add(app->add_option("--seed", flags.seed, "random seed"), [this](RunConfig& c) { c.seed = flags.seed; });
    add(app->add_option("--schedule", flags.schedule, "fixed or adaptive"), [this](RunConfig& c) { c.schedule = flags.schedule; });
    add(app->add_option("--points", flags.points, "schedule points"), [this](RunConfig& c) { c.points = flags.points; });
    add(app->add_option("--t-max", flags.t_max, "end of the schedule"), [this](RunConfig& c) { c.t_max = flags.t_max; });
    add(app->add_option("--min-step", flags.min_step, "adaptive step floor"), [this](RunConfig& c) { c.min_step = flags.min_step; });
    add(app->add_flag("--no-fano-guard", "skip the spectral gap guard"), [](RunConfig& c) { c.fano_guard = false; });
    add(app->add_option("--gap-margin", flags.gap_margin, "Fano guard margin"), [this](RunConfig& c) { c.gap_margin = flags.gap_margin; });
    add(app->add_option("--tol", flags.newton.tol_residual, "Newton residual tolerance"),
        [this](RunConfig& c) { c.newton.tol_residual = flags.newton.tol_residual; });
    add(app->add_option("--max-iters", flags.newton.max_iters, "Newton iteration cap"),
        [this](RunConfig& c) { c.newton.max_iters = flags.newton.max_iters; });
    add(app->add_option("--out", flags.out, "output directory"), [this](RunConfig& c) { c.out = flags.out; });
  }

  RunConfig resolve() const {
    RunConfig c = config_file.empty() ? RunConfig{} : RunConfig::from_json(read_json(config_file));
    for (const auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(c);
    return c;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complex Monge-Ampere solver and estimate verification on flat tori"};
  app.require_subcommand(1);

  RunFlags solve_flags, path_flags, sweep_flags;
  auto* solve = app.add_subcommand("solve", "Newton solve at a single t");
  solve_flags.attach(solve);
  auto* path = app.add_subcommand("path", "continuity path from t = 0 to t_max");
  path_flags.attach(path);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "estimate suite on a solve or path output directory");
  verify->add_option("--in", va.in, "output directory of solve or path")->required();
  verify->add_flag("--report-only", va.report_only, "exit 0 regardless of failures");
  verify->add_option("--q", va.q, "Moser exponent (default n + 1)");
  verify->add_flag("--no-uniqueness", va.no_uniqueness, "skip the two-start uniqueness solve");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "CY amplitude sweep of sup|phi| against ||e^F||_q");
  sweep_flags.attach(sweep);
  sweep->add_option("--amplitudes", sa.amplitudes, "amplitude list")->delimiter(',')->required();
  sweep->add_option("--q", sa.q, "exponent q (default n + 1)");
  sweep->add_flag("--allow-fail", sa.allow_fail, "exit 0 even when rows fail");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle-check", "spectral Newton against the dense direct solver");
  oracle->add_option("--case", oa.cases, "registry case name, repeatable (default: all)");
  oracle->add_option("--N1", oa.N1, "resolution of n = 1 cases");
  oracle->add_option("--N2", oa.N2, "resolution of n = 2 cases");
  oracle->add_option("--out", oa.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return Ok;
    }
    err << e.what() << "\n";
    return Usage;
  }

  try {
    if (*solve) return cmd_solve(solve_flags.resolve(), out);
    if (*path) return cmd_path(path_flags.resolve(), out);
    if (*verify) return cmd_verify(va, out);
    if (*sweep) return cmd_sweep(sweep_flags.resolve(), sa, out);
    if (*oracle) return cmd_oracle(oa, out);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return Usage;
  } catch (const FormatError& e) {
    err << e.what() << "\n";
    return Usage;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return SolverFailure;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return Usage;
  }
  return Usage;
}

}  // namespace kma::cli
