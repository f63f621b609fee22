#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kma/forms.hpp"
#include "kma/report.hpp"

namespace kma {

/// L = g'^{j kbar} d_j d_kbar + c, self-adjoint for the density det g' (up to discretization).
struct LinearOperatorSpec {
  MetricField metric;
  double c = 0.0;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iters = 600;
  int restart = 30;
  /// For c = 0: remove the constant incompatibility silently instead of raising IncompatibleRHS.
  bool project_rhs = false;
  /// c > 0 within this relative distance of the frozen-coefficient spectrum raises SpectrumHit.
  double gap_tol = 1e-8;
};

struct SolveResult {
  ScalarField solution;
  int iterations = 0;
  double residual = 0.0;     // sup |L psi - rhs'| / sup |rhs|, rhs' the projected right-hand side
  double projection = 0.0;   // constant removed from rhs (c = 0 only)
};

ScalarField apply(const LinearOperatorSpec& spec, const ScalarField& psi);

/// Right-preconditioned restarted GMRES on det(g') L psi = det(g') rhs; the preconditioner
/// inverts the constant-coefficient operator with grid-averaged cofactor coefficients.
/// For c = 0 the solution has mean zero.
SolveResult solve(const LinearOperatorSpec& spec, const ScalarField& rhs, const SolveOptions& opts = {});

/// Mean-zero u with tr_g dd u = h - mean(h) for the constant background g.
ScalarField green_apply(const ScalarField& h, const Herm2& background = Herm2::identity());

/// sup over grid points of |phi(p) - [mean(phi) - (G lap phi)(p)]|, with G the kernel
/// int G(x, p) f(x) dx = -green_apply(f)(p).
double green_representation_residual(const ScalarField& phi);

struct GapResult {
  double value = 0.0;
  int iterations = 0;
  ScalarField eigenvector;
};

/// Smallest nonzero eigenvalue of -L (c = 0) by inverse iteration with Rayleigh quotients in the
/// det(g')-weighted inner product; stops when successive quotients agree to `tol` relative.
GapResult spectral_gap(const MetricField& g_prime, double tol = 1e-10, std::uint64_t seed = 1, int max_iters = 300);

/// int (phi - mean phi)^2 dV' <= (1/lambda1) int |d phi|^2_g' dV' (1 + 1e-8), dV' = det g'.
EstimateEntry poincare_check(const ScalarField& phi, const MetricField& g_prime, double lambda1);

/// Rows (operation, iterations, final_residual) for run logs.
class IterationLog {
 public:
  struct Row {
    std::string operation;
    int iterations = 0;
    double residual = 0.0;
  };
  void append(std::string operation, int iterations, double residual);
  const std::vector<Row>& rows() const { return rows_; }
  void write_csv(const std::string& path) const;

 private:
  std::vector<Row> rows_;
};

}  // namespace kma
