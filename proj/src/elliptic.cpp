#include "kma/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "kma/errors.hpp"
#include "kma/fourier.hpp"

namespace kma {

ScalarField apply(const LinearOperatorSpec& spec, const ScalarField& psi) {
  const HermitianField h = complex_hessian(psi);
  const int n = spec.metric.n();
  ScalarField out(psi.grid());
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = trace_with(spec.metric.inverse(p), h[p], n) + spec.c * psi[p];
  return out;
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// det(g') L in weighted form, with the frozen-coefficient spectral inverse.
class WeightedOperator {
 public:
  WeightedOperator(const LinearOperatorSpec& spec, double gap_tol) : spec_(spec), grid_(spec.metric.grid()) {
    const std::size_t P = grid_.point_count();
    const int n = grid_.n_complex();
    D_.resize(P);
    Herm2 cof_mean{};
    double dsum = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      D_[p] = spec.metric.det(p);
      dsum += D_[p];
      cof_mean += D_[p] * spec.metric.inverse(p);
    }
    Dbar_ = dsum / static_cast<double>(P);
    cof_mean *= 1.0 / static_cast<double>(P);
    Dmin_ = *std::min_element(D_.begin(), D_.end());

    const auto& sym = hessian_symbol_table(grid_);
    inv_mu_.resize(sym.size());
    const double cD = spec.c * Dbar_;
    for (std::size_t s = 0; s < sym.size(); ++s) {
      const double mu = trace_with(cof_mean, sym[s], n) + cD;
      if (spec.c > 0.0 && std::abs(mu) <= gap_tol * cD) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "c = %.6g lies on the frozen-coefficient spectrum (mode %zu)", spec.c, s);
        throw SpectrumHit(buf);
      }
      inv_mu_[s] = mu == 0.0 ? 0.0 : 1.0 / mu;
    }
  }

  const Vec& density() const { return D_; }
  double mean_density() const { return Dbar_; }
  double min_density() const { return Dmin_; }

  /// For c = 0 the unknown carries one extra entry, a constant lambda absorbing the part of the
  /// rhs outside the discrete range: D (L v + lambda).
  bool bordered() const { return spec_.c == 0.0; }

  Vec apply(const Vec& x) const {
    const std::size_t P = D_.size();
    ScalarField f(grid_, Vec(x.begin(), x.begin() + P));
    const HermitianField h = complex_hessian(f);
    const int n = grid_.n_complex();
    const double lam = bordered() ? x[P] : 0.0;
    Vec out(P);
    for (std::size_t p = 0; p < P; ++p)
      out[p] = D_[p] * (trace_with(spec_.metric.inverse(p), h[p], n) + spec_.c * x[p] + lam);
    return out;
  }

  Vec precondition(const Vec& r) const {
    const std::size_t P = D_.size();
    std::vector<cplx> s(grid_.spectral_count());
    grid_.forward(r.data(), s.data());
    const double rbar = s[0].real() / static_cast<double>(P) / Dbar_;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= inv_mu_[i];
    Vec out(P + (bordered() ? 1 : 0));
    grid_.inverse(s.data(), out.data());
    if (bordered()) out[P] = rbar;
    return out;
  }

 private:
  const LinearOperatorSpec& spec_;
  PeriodicGrid grid_;
  Vec D_;
  double Dbar_ = 1.0;
  double Dmin_ = 1.0;
  std::vector<double> inv_mu_;
};

}  // namespace

SolveResult solve(const LinearOperatorSpec& spec, const ScalarField& rhs, const SolveOptions& opts) {
  const PeriodicGrid& grid = rhs.grid();
  if (grid != spec.metric.grid()) throw std::invalid_argument("rhs and metric live on different grids");
  const std::size_t P = grid.point_count();
  SolveResult result{ScalarField(grid), 0, 0.0, 0.0};
  const double rhs_inf = sup_abs(rhs);
  if (rhs_inf == 0.0) return result;

  WeightedOperator op(spec, opts.gap_tol);
  const Vec& D = op.density();

  Vec b(P);
  for (std::size_t p = 0; p < P; ++p) b[p] = D[p] * rhs[p];

  auto true_residual = [&](const Vec& r) {
    double m = 0.0;
    for (std::size_t p = 0; p < P; ++p) m = std::max(m, std::abs(r[p] / D[p]));
    return m / rhs_inf;
  };

  const int m = std::max(1, opts.restart);
  Vec x(P + (op.bordered() ? 1 : 0), 0.0);
  Vec r = b;
  double res = true_residual(r);
  double prev_cycle_res = INFINITY;
  int stagnant = 0;
  int its = 0;
  const double inner_target = 0.1 * opts.tol * rhs_inf * op.min_density() * std::sqrt(static_cast<double>(P));

  while (res > opts.tol) {
    if (its >= opts.max_iters)
      throw NoConvergence("linear solve did not converge in " + std::to_string(its) + " iterations", its, res);
    if (res > 0.9 * prev_cycle_res) {
      if (++stagnant >= 3) throw NoConvergence("linear solve stagnated", its, res);
    } else {
      stagnant = 0;
    }
    prev_cycle_res = res;

    const double beta = norm2(r);
    std::vector<Vec> V;
    V.reserve(m + 1);
    V.push_back(r);
    for (double& v : V[0]) v /= beta;
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), gvec(m + 1, 0.0);
    gvec[0] = beta;
    int k = 0;
    for (; k < m && its < opts.max_iters; ++k) {
      Vec w = op.apply(op.precondition(V[k]));
      ++its;
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= k; ++i) {
          const double h = dot(w, V[i]);
          H[i][k] += h;
          axpy(-h, V[i], w);
        }
      const double hn = norm2(w);
      H[k + 1][k] = hn;
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
        H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
        H[i][k] = t;
      }
      const double den = std::hypot(H[k][k], H[k + 1][k]);
      cs[k] = den == 0.0 ? 1.0 : H[k][k] / den;
      sn[k] = den == 0.0 ? 0.0 : H[k + 1][k] / den;
      H[k][k] = den;
      H[k + 1][k] = 0.0;
      gvec[k + 1] = -sn[k] * gvec[k];
      gvec[k] = cs[k] * gvec[k];
      const bool breakdown = hn <= 1e-300;
      if (!breakdown) {
        V.push_back(std::move(w));
        for (double& v : V.back()) v /= hn;
      }
      if (breakdown || std::abs(gvec[k + 1]) <= inner_target) {
        ++k;
        break;
      }
    }
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = gvec[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
      y[i] = H[i][i] == 0.0 ? 0.0 : s / H[i][i];
    }
    Vec u(P, 0.0);
    for (int i = 0; i < k; ++i) axpy(y[i], V[i], u);
    const Vec dx = op.precondition(u);
    axpy(1.0, dx, x);
    const Vec ax = op.apply(x);
    for (std::size_t p = 0; p < P; ++p) r[p] = b[p] - ax[p];
    res = true_residual(r);
  }

  if (op.bordered()) {
    // Constants span the kernel of the adjoint; lambda is the constant removed from rhs.
    const double lambda = x[P];
    if (!opts.project_rhs && std::abs(lambda) > opts.tol * rhs_inf) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "rhs violates compatibility: projection %.3e exceeds %.3e", lambda,
                    opts.tol * rhs_inf);
      throw IncompatibleRHS(buf);
    }
    result.projection = lambda;
    x.pop_back();
  }
  ScalarField psi(grid, std::move(x));
  if (spec.c == 0.0) psi -= mean(psi);
  result.solution = std::move(psi);
  result.iterations = its;
  result.residual = res;
  return result;
}

ScalarField green_apply(const ScalarField& h, const Herm2& background) {
  const PeriodicGrid& grid = h.grid();
  const int n = grid.n_complex();
  const Herm2 gi = inverse(background, n);
  const auto& sym = hessian_symbol_table(grid);
  SpectralField s(h);
  auto& c = s.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double mu = trace_with(gi, sym[i], n);
    c[i] = mu == 0.0 ? cplx(0.0) : c[i] / mu;
  }
  ScalarField u = s.inverse();
  u -= mean(u);
  return u;
}

double green_representation_residual(const ScalarField& phi) {
  const ScalarField lap = laplacian(phi);
  const ScalarField u = green_apply(lap);  // G lap phi = -u pointwise
  const double m = mean(phi);
  double worst = 0.0;
  for (std::size_t p = 0; p < phi.size(); ++p) worst = std::max(worst, std::abs(phi[p] - (m + u[p])));
  return worst;
}

GapResult spectral_gap(const MetricField& g_prime, double tol, std::uint64_t seed, int max_iters) {
  const PeriodicGrid& grid = g_prime.grid();
  const std::size_t P = grid.point_count();
  const ScalarField D = g_prime.det_field();
  const double Dbar = mean(D);
  LinearOperatorSpec spec{g_prime, 0.0};
  // The lowest level of the flat torus has multiplicity 4n, so iterate a block and extract
  // the smallest Ritz value rather than relying on a single vector.
  const int block = static_cast<int>(std::min<std::size_t>(4 * grid.n_complex() + 4, P - 1));

  std::mt19937_64 rng(seed);
  std::vector<ScalarField> V;
  for (int i = 0; i < block; ++i) {
    ScalarField v(grid);
    for (std::size_t p = 0; p < P; ++p) v[p] = unit_double(rng()) - 0.5;
    V.push_back(std::move(v));
  }

  SolveOptions opts;
  opts.tol = 1e-12;
  opts.project_rhs = true;
  double lambda_prev = INFINITY;
  for (int it = 1; it <= max_iters; ++it) {
    std::vector<ScalarField> W, LW;
    for (const auto& v : V) {
      ScalarField w = solve(spec, v - mean(D * v) / Dbar, opts).solution;
      w -= mean(D * w) / Dbar;
      LW.push_back(apply(spec, w));
      W.push_back(std::move(w));
    }
    Eigen::MatrixXd A(block, block), B(block, block);
    for (int i = 0; i < block; ++i)
      for (int j = 0; j <= i; ++j) {
        const double aij = -0.5 * (mean(D * W[i] * LW[j]) + mean(D * W[j] * LW[i]));
        const double bij = mean(D * W[i] * W[j]);
        A(i, j) = A(j, i) = aij;
        B(i, j) = B(j, i) = bij;
      }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    if (es.info() != Eigen::Success) throw NoConvergence("Rayleigh-Ritz step failed", it, lambda_prev);
    const Eigen::MatrixXd Y = es.eigenvectors();
    const double lambda = es.eigenvalues()(0);
    for (int j = 0; j < block; ++j) {
      ScalarField v(grid);
      for (int i = 0; i < block; ++i) v += Y(i, j) * W[i];
      V[j] = std::move(v);
    }
    if (std::abs(lambda - lambda_prev) <= tol * std::abs(lambda)) return {lambda, it, V[0]};
    lambda_prev = lambda;
  }
  throw NoConvergence("spectral gap iteration did not converge", max_iters, lambda_prev);
}

EstimateEntry poincare_check(const ScalarField& phi, const MetricField& g_prime, double lambda1) {
  const ScalarField D = g_prime.det_field();
  const double wm = mean(D * phi) / mean(D);
  const ScalarField dev = phi + (-wm);
  const double lhs = integrate(dev * dev, D);
  const double grad = integrate(gradient_norm_squared(phi, g_prime), D);
  const double rhs = grad / lambda1 * (1.0 + 1e-8);
  char ctx[96];
  std::snprintf(ctx, sizeof ctx, "lambda1 = %.10g", lambda1);
  return inequality_entry("poincare", lhs, rhs, 0.0, ctx);
}

void IterationLog::append(std::string operation, int iterations, double residual) {
  rows_.push_back({std::move(operation), iterations, residual});
}

void IterationLog::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << "operation,iterations,final_residual\n";
  char buf[64];
  for (const auto& r : rows_) {
    std::snprintf(buf, sizeof buf, "%.17g", r.residual);
    os << r.operation << ',' << r.iterations << ',' << buf << '\n';
  }
}

}  // namespace kma
