#pragma once

#include <string>
#include <vector>

#include "kma/continuity.hpp"
#include "kma/fourier.hpp"

namespace kma {

// ------------------------------------------------------------------ dense direct solver

struct DenseOptions {
  double tol = 1e-10;               // sup norm of the residual
  int max_iters = 50;
  int max_halvings = 30;
  double cone_margin = 1e-8;
  std::size_t max_unknowns = 4096;  // 4096^2 doubles is 134 MB; 16^4 would need 34 GB
};

/// Row-major P x P matrix of g'^{j kbar} d_j d_kbar + c, built from explicit 1-D DFT
/// differentiation matrices (no FFT). Same Nyquist convention as the spectral operators.
std::vector<double> dense_operator(const MetricField& g_prime, double c);

/// Solves (L + c) x = rhs by LU. For c = 0 the system is bordered: the mean of x is pinned to zero
/// and a constant multiplier absorbs the incompatible part of rhs (returned in `projection`).
struct DenseSolve {
  ScalarField solution;
  double projection = 0.0;
};
DenseSolve dense_solve(const MetricField& g_prime, double c, const ScalarField& rhs,
                       const DenseOptions& opts = {});

struct DenseResult {
  ScalarField phi;
  int iterations = 0;
  double residual = 0.0;
};
/// Damped Newton with every linear step solved by dense_solve.
DenseResult dense_newton(const MAProblem& problem, const ScalarField& phi_init, const DenseOptions& opts = {});

// ------------------------------------------------------------------ manufactured registry

struct ManufacturedCase {
  std::string name;
  int n = 1;
  Family family = Family::NegC1;
  double t = 1.0;
  std::vector<FourierTerm> terms;  // phi* as a trigonometric polynomial
  ScalarField phi_star;
  ScalarField F_derived;           // forward map of phi*, before renormalization
  ScalarField expected;            // the solution of problem(): phi* up to the gauge or c_0 / t shift

  MAProblem problem() const { return MAProblem(F_derived, family, t); }
};

std::vector<std::string> registry_names();
/// Case sampled on the N1 grid (n = 1) or the N2 grid (n = 2).
ManufacturedCase make_case(const std::string& name, int N1 = 16, int N2 = 16);
std::vector<ManufacturedCase> registry(int N1 = 16, int N2 = 16);

struct OracleComparison {
  std::string name;
  int spectral_iters = 0;
  int dense_iters = 0;
  double spectral_error = 0.0;  // sup |phi - expected|
  double dense_error = 0.0;
  double difference = 0.0;      // sup |phi_spectral - phi_dense|
  std::string error;            // non-empty when a solve failed
  bool pass(double tol = 1e-8) const {
    return error.empty() && difference < tol && spectral_error < tol && dense_error < tol;
  }
};
OracleComparison compare_with_oracle(const ManufacturedCase& c, const NewtonConfig& cfg = {},
                                     const DenseOptions& opts = {});

}  // namespace kma
