#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kma/elliptic.hpp"
#include "kma/ma_core.hpp"

namespace kma {

struct NewtonConfig {
  double tol_residual = 1e-10;  // sup norm of the log-form residual
  int max_iters = 50;
  double damping = 0.5;
  int max_halvings = 30;
  double cone_margin = 1e-8;  // smallest admissible eigenvalue of g'
  double linear_tol = 1e-10;  // floor of the inexact-Newton forcing term
  void validate() const;
};

struct NewtonResult {
  ScalarField phi;
  int iterations = 0;
  double residual = 0.0;
  int linear_iterations = 0;
};

/// Damped Newton on residual(phi) = 0 with steps from solve(g', c, -residual). Backtracks by
/// `damping` when a trial leaves the cone or fails to decrease the sup residual.
/// Gauged problems (c = 0) return mean-zero phi.
NewtonResult newton_solve(const MAProblem& problem, const ScalarField& phi_init, const NewtonConfig& cfg = {},
                          IterationLog* log = nullptr);

struct Schedule {
  enum class Kind { Fixed, Adaptive };
  Kind kind = Kind::Fixed;
  int points = 21;        // uniform points on [0, t_end]; the initial step for adaptive runs
  double t_end = 1.0;
  double min_step = 1e-4; // adaptive floor

  static Schedule fixed(int points = 21, double t_end = 1.0);
  static Schedule adaptive(int points = 21, double t_end = 1.0, double min_step = 1e-4);
  std::vector<double> grid_points() const;
};

struct PathConfig {
  NewtonConfig newton;
  Schedule schedule;
  bool fano_guard = true;
  double gap_margin = 1e-3;
  bool diagnostics = true;  // sup_S and energy identity columns
};

struct PathRecord {
  double t = 0.0;
  ScalarField phi;
  int newton_iters = 0;
  double residual_inf = 0.0;
  double min_eig_gprime = 1.0;
  double max_eig_gprime = 1.0;
  double sup_phi = 0.0;
  double inf_phi = 0.0;
  double sup_S = 0.0;
  double energy_identity_err = 0.0;
};

struct PathFailure {
  double t = 0.0;
  std::string cause;  // error kind, e.g. "ConeExit", "SpectrumHit", "PathStalled"
  std::string message;
};

struct ContinuityPath {
  Family family = Family::NegC1;
  ScalarField data;
  Herm2 background = Herm2::identity();
  std::vector<PathRecord> records;
  std::optional<PathFailure> failure;
  /// Gap estimates computed by the Fano guard, as (t, lambda1) pairs.
  std::vector<std::pair<double, double>> gap_checks;

  bool complete() const { return !failure.has_value(); }
  MAProblem problem_at(double t) const { return MAProblem(data, family, t, background); }
  void write_csv(const std::string& path) const;
};

/// Diagnostics of a converged phi at parameter t, filling every column except newton_iters.
PathRecord make_record(const MAProblem& problem, ScalarField phi, int newton_iters, bool diagnostics = true);

/// March t over the schedule with warm starts. Failures end the path and are recorded, not thrown.
ContinuityPath run_path(Family family, const ScalarField& F, const PathConfig& cfg = {},
                        const Herm2& background = Herm2::identity(), IterationLog* log = nullptr);

/// Lowest nonzero eigenvalue of -tr_g dd for the constant metric g.
double flat_spectral_gap(const PeriodicGrid& grid, const Herm2& g);

}  // namespace kma
