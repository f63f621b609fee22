#include "kma/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kma/errors.hpp"
#include "kma/estimates.hpp"

namespace kma {

void NewtonConfig::validate() const {
  if (!(tol_residual > 0.0)) throw ConfigError("newton tol_residual must be positive");
  if (max_iters <= 0) throw ConfigError("newton max_iters must be positive");
  if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("newton damping must lie in (0, 1)");
  if (max_halvings < 0) throw ConfigError("newton max_halvings must be non-negative");
  if (!(cone_margin > 0.0)) throw ConfigError("newton cone_margin must be positive");
  if (!(linear_tol > 0.0)) throw ConfigError("newton linear_tol must be positive");
}

NewtonResult newton_solve(const MAProblem& problem, const ScalarField& phi_init, const NewtonConfig& cfg,
                          IterationLog* log) {
  cfg.validate();
  const bool gauge = problem.gauged();
  ScalarField phi = phi_init;
  if (gauge) phi -= mean(phi);

  HermitianField h = perturbed_hermitian(phi, problem);
  const EigenExtent ext0 = eigen_extent(h);
  if (ext0.min <= cfg.cone_margin) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "initial guess outside the cone (min eigenvalue %.3e)", ext0.min);
    throw ConeExit(buf);
  }
  MetricField gp(std::move(h));
  ScalarField R = residual(phi, gp, problem);
  double res = sup_abs(R);

  NewtonResult out;
  while (res > cfg.tol_residual) {
    if (out.iterations >= cfg.max_iters)
      throw NoConvergence("newton did not converge in " + std::to_string(out.iterations) + " iterations",
                          out.iterations, res);
    ++out.iterations;

    SolveOptions so;
    so.tol = std::clamp(res, cfg.linear_tol, 1e-3);
    so.project_rhs = true;
    const SolveResult step = solve(LinearOperatorSpec{gp, problem.c()}, -R, so);
    out.linear_iterations += step.iterations;
    if (log) log->append("newton_step", step.iterations, step.residual);

    double alpha = 1.0;
    bool accepted = false;
    bool cone_failure = false;
    for (int k = 0; k <= cfg.max_halvings; ++k, alpha *= cfg.damping) {
      ScalarField trial = phi + alpha * step.solution;
      if (gauge) trial -= mean(trial);
      HermitianField ht = perturbed_hermitian(trial, problem);
      if (eigen_extent(ht).min <= cfg.cone_margin) {
        cone_failure = true;
        continue;
      }
      cone_failure = false;
      MetricField gt(std::move(ht));
      ScalarField Rt = residual(trial, gt, problem);
      const double rt = sup_abs(Rt);
      if (rt < res || rt <= cfg.tol_residual) {
        phi = std::move(trial);
        gp = std::move(gt);
        R = std::move(Rt);
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (cone_failure) throw ConeExit("backtracking exhausted: every damped step leaves the Kahler cone");
      throw NoConvergence("backtracking exhausted without residual decrease", out.iterations, res);
    }
  }
  out.phi = std::move(phi);
  out.residual = res;
  return out;
}

Schedule Schedule::fixed(int points, double t_end) {
  Schedule s;
  s.points = points;
  s.t_end = t_end;
  return s;
}

Schedule Schedule::adaptive(int points, double t_end, double min_step) {
  Schedule s;
  s.kind = Kind::Adaptive;
  s.points = points;
  s.t_end = t_end;
  s.min_step = min_step;
  return s;
}

std::vector<double> Schedule::grid_points() const {
  if (points < 2) throw ConfigError("schedule needs at least 2 points");
  if (!(t_end > 0.0)) throw ConfigError("schedule end must be positive");
  std::vector<double> ts(points);
  for (int i = 0; i < points; ++i) ts[i] = t_end * i / (points - 1);
  ts.back() = t_end;
  return ts;
}

double flat_spectral_gap(const PeriodicGrid& grid, const Herm2& g) {
  const int n = grid.n_complex();
  const Herm2 gi = inverse(g, n);
  const auto& sym = hessian_symbol_table(grid);
  double best = INFINITY;
  for (std::size_t s = 1; s < sym.size(); ++s) {
    const double v = -trace_with(gi, sym[s], n);
    if (v > 0.0) best = std::min(best, v);
  }
  return best;
}

PathRecord make_record(const MAProblem& problem, ScalarField phi, int newton_iters, bool diagnostics) {
  PathRecord r;
  r.t = problem.t();
  r.newton_iters = newton_iters;
  const MetricField gp = perturbed_metric(phi, problem);
  r.residual_inf = sup_abs(residual(phi, gp, problem));
  r.min_eig_gprime = inf(gp.min_eigenvalues());
  r.max_eig_gprime = sup(gp.max_eigenvalues());
  r.sup_phi = sup(phi);
  r.inf_phi = inf(phi);
  if (diagnostics) {
    r.sup_S = sup_s_tensor(phi, problem);
    r.energy_identity_err = energy_terms(phi, problem.background()).error();
  }
  r.phi = std::move(phi);
  return r;
}

namespace {

/// Throws SpectrumHit when t is within `margin` of the gap of the metric at phi. The exact gap is
/// only computed when the cheap lower bound lambda1(g) Dmin / (Dmax lambda_max) does not clear t.
void fano_guard(ContinuityPath& path, const MAProblem& problem, const ScalarField& phi, double margin) {
  const double t = problem.t();
  if (t <= 0.0) return;
  const MetricField gp = perturbed_metric(phi, problem);
  const MetricField g = MetricField::constant(phi.grid(), problem.background());
  const ScalarField D = det_ratio(gp, g);
  double lmax = 0.0;
  const int n = problem.n();
  const Herm2 gi = inverse(problem.background(), n);
  for (std::size_t p = 0; p < gp.size(); ++p) {
    // Largest eigenvalue of g^-1 g' from its trace and determinant.
    const double tr = trace_with(gi, gp[p], n);
    const double dt = D[p];
    const double l = n == 1 ? tr : 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * dt)));
    lmax = std::max(lmax, l);
  }
  const double bound = flat_spectral_gap(phi.grid(), problem.background()) * inf(D) / (sup(D) * lmax);
  if (t < bound - margin) return;
  const double gap = spectral_gap(gp).value;
  path.gap_checks.emplace_back(t, gap);
  if (t >= gap - margin) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "t = %.6g is within %.3g of the spectral gap %.10g", t, margin, gap);
    throw SpectrumHit(buf);
  }
}

bool retryable(const Error& e) {
  return dynamic_cast<const ConeExit*>(&e) || dynamic_cast<const NoConvergence*>(&e) ||
         dynamic_cast<const PositivityViolation*>(&e);
}

}  // namespace

ContinuityPath run_path(Family family, const ScalarField& F, const PathConfig& cfg, const Herm2& background,
                        IterationLog* log) {
  cfg.newton.validate();
  ContinuityPath path;
  path.family = family;
  path.data = F;
  path.background = background;
  const Schedule& sch = cfg.schedule;
  const std::vector<double> fixed = sch.grid_points();

  ScalarField phi(F.grid());
  auto attempt = [&](double t) {
    const MAProblem problem = path.problem_at(t);
    if (family == Family::Fano && cfg.fano_guard) fano_guard(path, problem, phi, cfg.gap_margin);
    NewtonResult nr = newton_solve(problem, phi, cfg.newton, log);
    phi = nr.phi;
    path.records.push_back(make_record(problem, std::move(nr.phi), nr.iterations, cfg.diagnostics));
  };

  if (sch.kind == Schedule::Kind::Fixed) {
    for (double t : fixed) {
      try {
        attempt(t);
      } catch (const Error& e) {
        path.failure = PathFailure{t, e.kind(), e.what()};
        break;
      }
    }
    return path;
  }

  const double initial = fixed[1] - fixed[0];
  double step = initial;
  double t = 0.0;
  bool first = true;
  while (first || t < sch.t_end) {
    const double next = first ? 0.0 : std::min(t + step, sch.t_end);
    try {
      attempt(next);
      t = next;
      first = false;
      step = std::min(initial, 2.0 * step);
    } catch (const Error& e) {
      if (first || !retryable(e)) {
        path.failure = PathFailure{next, e.kind(), e.what()};
        break;
      }
      step *= 0.5;
      if (step < sch.min_step) {
        const PathStalled stall(next, e.kind());
        path.failure = PathFailure{next, stall.kind(), std::string(stall.what()) + ": " + e.what()};
        break;
      }
    }
  }
  return path;
}

void ContinuityPath::write_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << "t,newton_iters,residual_inf,sup_phi,inf_phi,min_eig_gprime,max_eig_gprime,sup_S,energy_identity_err\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.newton_iters,
                  r.residual_inf, r.sup_phi, r.inf_phi, r.min_eig_gprime, r.max_eig_gprime, r.sup_S,
                  r.energy_identity_err);
    os << buf;
  }
}

}  // namespace kma
