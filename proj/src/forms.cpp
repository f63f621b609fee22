#include "kma/forms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "kma/errors.hpp"

namespace kma {

MetricField::MetricField(HermitianField g) : g_(std::move(g)) {
  const int n = g_.n();
  inv_.resize(g_.size());
  det_.resize(g_.size());
  for (std::size_t p = 0; p < g_.size(); ++p) {
    const double lam = min_eigenvalue(g_[p], n);
    if (!(lam > 0.0)) throw PositivityViolation(p, lam);
    det_[p] = kma::det(g_[p], n);
    inv_[p] = kma::inverse(g_[p], n);
  }
}

MetricField MetricField::constant(const PeriodicGrid& grid, const Herm2& value) {
  return MetricField(HermitianField(grid, value));
}

ScalarField MetricField::det_field() const { return ScalarField(grid(), det_); }

ScalarField MetricField::log_det() const {
  ScalarField f(grid());
  for (std::size_t p = 0; p < size(); ++p) f[p] = std::log(det_[p]);
  return f;
}

ScalarField MetricField::min_eigenvalues() const {
  ScalarField f(grid());
  for (std::size_t p = 0; p < size(); ++p) f[p] = min_eigenvalue(g_[p], n());
  return f;
}

ScalarField MetricField::max_eigenvalues() const {
  ScalarField f(grid());
  for (std::size_t p = 0; p < size(); ++p) f[p] = max_eigenvalue(g_[p], n());
  return f;
}

EigenExtent eigen_extent(const HermitianField& h) {
  EigenExtent e{INFINITY, -INFINITY, 0};
  for (std::size_t p = 0; p < h.size(); ++p) {
    const double lo = min_eigenvalue(h[p], h.n());
    if (lo < e.min) {
      e.min = lo;
      e.argmin = p;
    }
    e.max = std::max(e.max, max_eigenvalue(h[p], h.n()));
  }
  return e;
}

namespace {

void require_same(const PeriodicGrid& a, const PeriodicGrid& b) {
  if (a != b) throw std::invalid_argument("fields live on different grids");
}

}  // namespace

ScalarField trace_wrt(const HermitianField& alpha, const MetricField& g) {
  require_same(alpha.grid(), g.grid());
  ScalarField out(g.grid());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = trace_with(g.inverse(p), alpha[p], g.n());
  return out;
}

ScalarField hermitian_inner(const HermitianField& alpha, const HermitianField& beta, const MetricField& g) {
  require_same(alpha.grid(), g.grid());
  require_same(beta.grid(), g.grid());
  ScalarField out(g.grid());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = inner_with(g.inverse(p), alpha[p], beta[p], g.n());
  return out;
}

ScalarField det_ratio(const MetricField& g_prime, const MetricField& g) {
  require_same(g_prime.grid(), g.grid());
  ScalarField out(g.grid());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = g_prime.det(p) / g.det(p);
  return out;
}

namespace {

// Coefficient of st in det(sA + tB) for 2x2 matrices.
double mixed_discriminant(const Herm2& a, const Herm2& b) {
  return a.a00 * b.a11 + b.a00 * a.a11 - 2.0 * (a.a01 * std::conj(b.a01)).real();
}

}  // namespace

EstimateEntry mixed_top_identity_check(const HermitianField& alpha, const HermitianField& beta, const MetricField& g) {
  require_same(alpha.grid(), g.grid());
  require_same(beta.grid(), g.grid());
  const int n = g.n();
  double worst = 0.0;
  double scale = 1.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Herm2& gi = g.inverse(p);
    const double dg = g.det(p);
    const double tra = trace_with(gi, alpha[p], n);
    const double trb = trace_with(gi, beta[p], n);
    // First identity: n a^w^{n-1}/w^n = tr a.
    const double lhs1 = n == 1 ? alpha[p].a00 / dg : mixed_discriminant(alpha[p], g[p]) / dg;
    worst = std::max(worst, std::abs(lhs1 - tra));
    scale = std::max(scale, std::abs(tra));
    if (n == 2) {
      const double lhs2 = mixed_discriminant(alpha[p], beta[p]) / dg;
      const double rhs2 = tra * trb - inner_with(gi, alpha[p], beta[p], n);
      worst = std::max(worst, std::abs(lhs2 - rhs2));
      scale = std::max(scale, std::abs(rhs2));
    }
  }
  char ctx[96];
  std::snprintf(ctx, sizeof ctx, "n=%d, max pointwise residual, scale %.3g", n, scale);
  return identity_entry("mixed_top_identity", worst, 0.0, 1e-10 * scale, ctx);
}

HermitianField ricci_form(const MetricField& g_prime) {
  HermitianField r = complex_hessian(g_prime.log_det());
  r *= -1.0;
  return r;
}

EstimateEntry schwarz_trace_check(const MetricField& g_prime, const MetricField& g) {
  require_same(g_prime.grid(), g.grid());
  const int n = g.n();
  double lo = INFINITY;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double prod = trace_with(g.inverse(p), g_prime[p], n) * trace_with(g_prime.inverse(p), g[p], n);
    lo = std::min(lo, prod);
  }
  return inequality_entry("schwarz_trace", static_cast<double>(n * n), lo, 1e-12,
                          "n^2 <= min over grid of (tr_g g')(tr_g' g)");
}

CurvatureTensor curvature_tensor(const MetricField& g) {
  const int n = g.n();
  const PeriodicGrid& grid = g.grid();
  const std::size_t P = g.size();
  const std::size_t n4 = static_cast<std::size_t>(n * n * n * n);
  CurvatureTensor R{grid, n, std::vector<cplx>(P * n4)};

  // dg[i][j][k] = d_k g_{i jbar}, dgb[i][j][l] = d_lbar g_{i jbar}, ddg[i][j][k][l] = d_k d_lbar g_{i jbar}.
  auto cd = [&](const ComplexField& f, ComplexPartial op) {
    ComplexField a = complex_derivative(SpectralField(f.real()), {op});
    ComplexField b = complex_derivative(SpectralField(f.imag()), {op});
    ComplexField out(grid);
    for (std::size_t p = 0; p < P; ++p) out[p] = a[p] + cplx(0.0, 1.0) * b[p];
    return out;
  };
  std::vector<ComplexField> dg(n * n * n), dgb(n * n * n), ddg(n4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const ComplexField gij = g.metric().component(i, j);
      for (int k = 0; k < n; ++k) {
        dg[(i * n + j) * n + k] = cd(gij, {k, false});
        dgb[(i * n + j) * n + k] = cd(gij, {k, true});
      }
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) ddg[((i * n + j) * n + k) * n + l] = cd(dg[(i * n + j) * n + k], {l, true});
    }

  for (std::size_t p = 0; p < P; ++p) {
    const Herm2& gi = g.inverse(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            cplx v = -ddg[((i * n + j) * n + k) * n + l][p];
            for (int pp = 0; pp < n; ++pp)
              for (int q = 0; q < n; ++q)
                v += gi.entry(q, pp) * dg[(i * n + q) * n + k][p] * dgb[(pp * n + j) * n + l][p];
            R.values[p * n4 + ((i * n + j) * n + k) * n + l] = v;
          }
  }
  return R;
}

}  // namespace kma

namespace kma {

HermitianField gradient_outer(const ScalarField& phi) {
  const int n = phi.grid().n_complex();
  SpectralField s(phi);
  std::vector<ComplexField> d;
  for (int j = 0; j < n; ++j) d.push_back(complex_derivative(s, {{j, false}}));
  HermitianField b(phi.grid());
  for (std::size_t p = 0; p < b.size(); ++p) {
    b[p].a00 = std::norm(d[0][p]);
    if (n == 2) {
      b[p].a11 = std::norm(d[1][p]);
      b[p].a01 = d[0][p] * std::conj(d[1][p]);
    }
  }
  return b;
}

ScalarField gradient_norm_squared(const ScalarField& phi, const MetricField& g) {
  return trace_wrt(gradient_outer(phi), g);
}

}  // namespace kma
