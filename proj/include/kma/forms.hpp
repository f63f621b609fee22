#pragma once

#include <vector>

#include "kma/hermitian.hpp"
#include "kma/report.hpp"

namespace kma {

/// Positive definite Hermitian field with cached inverse and determinant.
class MetricField {
 public:
  MetricField() = default;
  /// Throws PositivityViolation at the first point whose smallest eigenvalue is <= 0.
  explicit MetricField(HermitianField g);
  static MetricField constant(const PeriodicGrid& grid, const Herm2& value);

  const PeriodicGrid& grid() const { return g_.grid(); }
  int n() const { return g_.n(); }
  std::size_t size() const { return g_.size(); }
  const HermitianField& metric() const { return g_; }
  const Herm2& operator[](std::size_t p) const { return g_[p]; }
  const Herm2& inverse(std::size_t p) const { return inv_[p]; }
  double det(std::size_t p) const { return det_[p]; }
  ScalarField det_field() const;
  ScalarField log_det() const;
  ScalarField min_eigenvalues() const;
  ScalarField max_eigenvalues() const;

 private:
  HermitianField g_;
  std::vector<Herm2> inv_;
  std::vector<double> det_;
};

/// Smallest eigenvalue over the grid and its location, without requiring positivity.
struct EigenExtent {
  double min = 0.0;
  double max = 0.0;
  std::size_t argmin = 0;
};
EigenExtent eigen_extent(const HermitianField& h);

/// tr_g alpha = g^{j kbar} alpha_{j kbar}, with g^{j kbar} the (k, j) entry of the inverse matrix.
ScalarField trace_wrt(const HermitianField& alpha, const MetricField& g);
/// <alpha, beta>_g = g^{j kbar} g^{p qbar} alpha_{j qbar} beta_{p kbar}.
ScalarField hermitian_inner(const HermitianField& alpha, const HermitianField& beta, const MetricField& g);
ScalarField det_ratio(const MetricField& g_prime, const MetricField& g);

/// n(n-1) a^b^w^{n-2}/w^n via the mixed discriminant of det(sA + tB), against (tr a)(tr b) - <a,b>;
/// also n a^w^{n-1}/w^n against tr a.
EstimateEntry mixed_top_identity_check(const HermitianField& alpha, const HermitianField& beta, const MetricField& g);

/// Ric = -d dbar log det g'.
HermitianField ricci_form(const MetricField& g_prime);

/// min over the grid of (tr_g g')(tr_g' g) - n^2, gated at -1e-12.
EstimateEntry schwarz_trace_check(const MetricField& g_prime, const MetricField& g);

/// R_{i jbar k lbar} = -d_k d_lbar g_{i jbar} + g^{p qbar} d_k g_{i qbar} d_lbar g_{p jbar}.
/// Components stored per point at index ((i*n + j)*n + k)*n + l.
struct CurvatureTensor {
  PeriodicGrid grid;
  int n = 1;
  std::vector<cplx> values;

  cplx at(std::size_t p, int i, int j, int k, int l) const {
    return values[p * n * n * n * n + ((i * n + j) * n + k) * n + l];
  }
};
CurvatureTensor curvature_tensor(const MetricField& g);

}  // namespace kma

namespace kma {

/// beta_{j kbar} = d_j phi * conj(d_k phi).
HermitianField gradient_outer(const ScalarField& phi);
/// |d phi|^2_g = g^{j kbar} d_j phi d_kbar phi.
ScalarField gradient_norm_squared(const ScalarField& phi, const MetricField& g);

}  // namespace kma
