#include "kma/oracle.hpp"

#include <lapacke.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "kma/errors.hpp"

namespace kma {

namespace {

// Periodic differentiation matrices on N points: first derivative with the Nyquist mode dropped,
// second derivative keeping it. Summed from the DFT definition.
struct Diff1D {
  int N = 0;
  std::vector<double> d1, d2;
};

Diff1D diff_matrices(const PeriodicGrid& g) {
  Diff1D m;
  const int N = m.N = g.resolution();
  const double L = g.period();
  m.d1.assign(std::size_t(N) * N, 0.0);
  m.d2.assign(std::size_t(N) * N, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double d = (i - j) * L / N;
      double s1 = 0.0, s2 = 0.0;
      for (int k = -N / 2; k < N / 2; ++k) {
        const double w = 2.0 * std::numbers::pi * k / L;
        s2 -= w * w * std::cos(w * d);
        if (k != -N / 2) s1 -= w * std::sin(w * d);
      }
      m.d1[i * N + j] = s1 / N;
      m.d2[i * N + j] = s2 / N;
    }
  return m;
}

void check_size(const PeriodicGrid& g, const DenseOptions& opts) {
  const std::size_t P = g.point_count();
  if (P > opts.max_unknowns) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "dense system of %zu unknowns exceeds the limit %zu (matrix would need %.1f GB)",
                  P, opts.max_unknowns, double(P) * double(P) * 8.0 / 1e9);
    throw ConfigError(buf);
  }
}

}  // namespace

std::vector<double> dense_operator(const MetricField& gp, double c) {
  const PeriodicGrid& g = gp.grid();
  const int n = g.n_complex();
  const int N = g.resolution();
  const std::size_t P = g.point_count();
  const Diff1D D = diff_matrices(g);
  std::vector<double> A(P * P, 0.0);

  for (std::size_t p = 0; p < P; ++p) {
    const std::array<int, 4> idx = g.unravel(p);
    double* row = &A[p * P];
    row[p] += c;
    auto second = [&](int a, double coef) {
      std::array<int, 4> j = idx;
      for (int m = 0; m < N; ++m) {
        j[a] = m;
        row[g.ravel(j)] += coef * D.d2[idx[a] * N + m];
      }
    };
    auto mixed = [&](int a, int b, double coef) {
      if (coef == 0.0) return;
      std::array<int, 4> j = idx;
      for (int m1 = 0; m1 < N; ++m1) {
        const double w1 = coef * D.d1[idx[a] * N + m1];
        if (w1 == 0.0) continue;
        j[a] = m1;
        for (int m2 = 0; m2 < N; ++m2) {
          j[b] = m2;
          row[g.ravel(j)] += w1 * D.d1[idx[b] * N + m2];
        }
      }
    };
    // d_j d_kbar = (X_j X_k + Y_j Y_k + i (X_j Y_k - Y_j X_k)) / 4 with axes (x1, y1, x2, y2).
    const Herm2& gi = gp.inverse(p);
    second(0, 0.25 * gi.a00);
    second(1, 0.25 * gi.a00);
    if (n == 2) {
      second(2, 0.25 * gi.a11);
      second(3, 0.25 * gi.a11);
      // g^{0 1bar} = (G^-1)_{10}; its pair with g^{1 0bar} gives (Re S - Im T) / 2.
      const cplx g01 = gi.entry(1, 0);
      mixed(0, 2, 0.5 * g01.real());
      mixed(1, 3, 0.5 * g01.real());
      mixed(0, 3, -0.5 * g01.imag());
      mixed(1, 2, 0.5 * g01.imag());
    }
  }
  return A;
}

DenseSolve dense_solve(const MetricField& gp, double c, const ScalarField& rhs, const DenseOptions& opts) {
  const PeriodicGrid& g = gp.grid();
  check_size(g, opts);
  const std::size_t P = g.point_count();
  std::vector<double> A = dense_operator(gp, c);
  const bool border = c == 0.0;
  const std::size_t M = border ? P + 1 : P;
  if (border) {
    std::vector<double> B(M * M, 0.0);
    for (std::size_t i = 0; i < P; ++i) {
      std::copy(&A[i * P], &A[i * P] + P, &B[i * M]);
      B[i * M + P] = 1.0;
      B[P * M + i] = 1.0;
    }
    A.swap(B);
  }
  std::vector<double> b(M, 0.0);
  std::copy(rhs.values().begin(), rhs.values().end(), b.begin());
  std::vector<lapack_int> piv(M);
  const lapack_int m = static_cast<lapack_int>(M);
  lapack_int info = LAPACKE_dgetrf(LAPACK_ROW_MAJOR, m, m, A.data(), m, piv.data());
  if (info > 0) throw SingularMatrix("dense operator is singular (zero pivot " + std::to_string(info) + ")");
  if (info < 0) throw Error("dgetrf: invalid argument " + std::to_string(-info));
  info = LAPACKE_dgetrs(LAPACK_ROW_MAJOR, 'N', m, 1, A.data(), m, piv.data(), b.data(), 1);
  if (info != 0) throw Error("dgetrs: invalid argument " + std::to_string(-info));

  DenseSolve out;
  out.solution = ScalarField(g, std::vector<double>(b.begin(), b.begin() + P));
  if (border) out.projection = b[P];
  return out;
}

DenseResult dense_newton(const MAProblem& problem, const ScalarField& phi_init, const DenseOptions& opts) {
  check_size(problem.grid(), opts);
  const bool gauge = problem.gauged();
  ScalarField phi = phi_init;
  if (gauge) phi -= mean(phi);

  HermitianField h = perturbed_hermitian(phi, problem);
  if (eigen_extent(h).min <= opts.cone_margin) throw ConeExit("initial guess outside the cone");
  MetricField gp(std::move(h));
  ScalarField R = residual(phi, gp, problem);
  double res = sup_abs(R);

  DenseResult out;
  while (res > opts.tol) {
    if (out.iterations >= opts.max_iters)
      throw NoConvergence("dense newton did not converge", out.iterations, res);
    ++out.iterations;
    const ScalarField step = dense_solve(gp, problem.c(), -R, opts).solution;

    double alpha = 1.0;
    bool accepted = false, cone_failure = false;
    for (int k = 0; k <= opts.max_halvings; ++k, alpha *= 0.5) {
      ScalarField trial = phi + alpha * step;
      if (gauge) trial -= mean(trial);
      HermitianField ht = perturbed_hermitian(trial, problem);
      cone_failure = eigen_extent(ht).min <= opts.cone_margin;
      if (cone_failure) continue;
      MetricField gt(std::move(ht));
      ScalarField Rt = residual(trial, gt, problem);
      const double rt = sup_abs(Rt);
      if (rt < res || rt <= opts.tol) {
        phi = std::move(trial);
        gp = std::move(gt);
        R = std::move(Rt);
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (cone_failure) throw ConeExit("dense newton: every damped step leaves the cone");
      throw NoConvergence("dense newton: backtracking exhausted", out.iterations, res);
    }
  }
  out.phi = std::move(phi);
  out.residual = res;
  return out;
}

// ------------------------------------------------------------------ registry

namespace {

struct CaseSpec {
  const char* name;
  int n;
  Family family;
  double t;
  std::vector<FourierTerm> (*terms)();
};

std::vector<FourierTerm> none() { return {}; }
std::vector<FourierTerm> n1_single() { return {{true, {1, 0, 0, 0}, 0.1, 0.0}}; }
// 1 - 0.05 pi^2 - 0.025 pi^2 = 0.26 keeps the metric positive.
std::vector<FourierTerm> n1_two_mode() { return {{true, {1, 0, 0, 0}, 0.05, 0.0}, {false, {0, 1, 0, 0}, 0.025, 0.0}}; }
std::vector<FourierTerm> n1_fano() { return {{true, {1, 1, 0, 0}, 0.03, 0.0}, {false, {0, 1, 0, 0}, 0.02, 0.0}}; }
std::vector<FourierTerm> n2_single() { return {{true, {1, 0, 0, 0}, 0.05, 0.0}, {true, {0, 0, 0, 1}, 0.05, 0.0}}; }
std::vector<FourierTerm> n2_generic() { return random_terms(2, 2, 0.01, 2024); }

const std::vector<CaseSpec>& specs() {
  static const std::vector<CaseSpec> s = {
      {"zero_negc1", 1, Family::NegC1, 1.0, none},
      {"zero_cy", 1, Family::CalabiYau, 1.0, none},
      {"zero_fano", 1, Family::Fano, 1.0, none},
      {"zero_negc1_n2", 2, Family::NegC1, 1.0, none},
      {"zero_cy_n2", 2, Family::CalabiYau, 1.0, none},
      {"zero_fano_n2", 2, Family::Fano, 1.0, none},
      {"n1_single", 1, Family::CalabiYau, 1.0, n1_single},
      {"n1_two_mode", 1, Family::NegC1, 1.0, n1_two_mode},
      {"n1_fano", 1, Family::Fano, 1.0, n1_fano},
      {"n2_single", 2, Family::CalabiYau, 1.0, n2_single},
      {"n2_generic", 2, Family::NegC1, 0.5, n2_generic},
  };
  return s;
}

}  // namespace

std::vector<std::string> registry_names() {
  std::vector<std::string> out;
  for (const auto& s : specs()) out.emplace_back(s.name);
  return out;
}

ManufacturedCase make_case(const std::string& name, int N1, int N2) {
  for (const auto& s : specs()) {
    if (name != s.name) continue;
    ManufacturedCase c;
    c.name = s.name;
    c.n = s.n;
    c.family = s.family;
    c.t = s.t;
    c.terms = s.terms();
    const PeriodicGrid grid(s.n, s.n == 1 ? N1 : N2);
    c.phi_star = sample_terms(grid, c.terms);
    c.F_derived = manufactured_data(c.phi_star, c.family, c.t);
    const MAProblem p = c.problem();
    switch (c.family) {
      case Family::NegC1: c.expected = c.phi_star; break;
      case Family::CalabiYau: c.expected = c.phi_star - mean(c.phi_star); break;
      case Family::Fano: c.expected = c.phi_star + p.renormalization() / c.t; break;
    }
    return c;
  }
  throw ConfigError("unknown registry case '" + name + "'");
}

std::vector<ManufacturedCase> registry(int N1, int N2) {
  std::vector<ManufacturedCase> out;
  for (const auto& s : specs()) out.push_back(make_case(s.name, N1, N2));
  return out;
}

OracleComparison compare_with_oracle(const ManufacturedCase& c, const NewtonConfig& cfg, const DenseOptions& opts) {
  OracleComparison r;
  r.name = c.name;
  const MAProblem p = c.problem();
  const ScalarField zero(p.grid());
  try {
    const NewtonResult s = newton_solve(p, zero, cfg);
    const DenseResult d = dense_newton(p, zero, opts);
    r.spectral_iters = s.iterations;
    r.dense_iters = d.iterations;
    r.spectral_error = sup_abs(s.phi - c.expected);
    r.dense_error = sup_abs(d.phi - c.expected);
    r.difference = sup_abs(s.phi - d.phi);
  } catch (const Error& e) {
    r.error = std::string(e.kind()) + ": " + e.what();
    r.spectral_error = r.dense_error = r.difference = NAN;
  }
  return r;
}

}  // namespace kma
