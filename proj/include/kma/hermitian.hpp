#pragma once

#include <vector>

#include "kma/grid.hpp"

namespace kma {

/// Hermitian matrix of size n <= 2: [[a00, a01], [conj(a01), a11]].
/// For n = 1 only a00 is meaningful.
struct Herm2 {
  double a00 = 0.0;
  double a11 = 0.0;
  cplx a01{};

  static Herm2 identity() { return {1.0, 1.0, {}}; }
  static Herm2 diag(double d0, double d1) { return {d0, d1, {}}; }

  cplx entry(int j, int k) const;
  Herm2& operator+=(const Herm2& o);
  Herm2& operator-=(const Herm2& o);
  Herm2& operator*=(double c);
};

Herm2 operator+(Herm2 a, const Herm2& b);
Herm2 operator-(Herm2 a, const Herm2& b);
Herm2 operator*(double c, Herm2 a);

double det(const Herm2& a, int n);
Herm2 inverse(const Herm2& a, int n);
double min_eigenvalue(const Herm2& a, int n);
double max_eigenvalue(const Herm2& a, int n);
/// tr(Gi A) with Gi the inverse metric matrix.
double trace_with(const Herm2& ginv, const Herm2& a, int n);
/// tr(Gi A Gi B).
double inner_with(const Herm2& ginv, const Herm2& a, const Herm2& b, int n);

class HermitianField {
 public:
  HermitianField() = default;
  explicit HermitianField(PeriodicGrid grid, const Herm2& value = {});

  const PeriodicGrid& grid() const { return grid_; }
  int n() const { return grid_.n_complex(); }
  std::size_t size() const { return entries_.size(); }
  const Herm2& operator[](std::size_t i) const { return entries_[i]; }
  Herm2& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<Herm2>& entries() const { return entries_; }

  /// Entry (j, kbar) as a complex field.
  ComplexField component(int j, int k) const;

  HermitianField& operator+=(const HermitianField& o);
  HermitianField& operator-=(const HermitianField& o);
  HermitianField& operator*=(double c);

 private:
  PeriodicGrid grid_;
  std::vector<Herm2> entries_;
};

HermitianField operator+(HermitianField a, const HermitianField& b);
HermitianField operator-(HermitianField a, const HermitianField& b);

/// d_j d_kbar phi; Hermitian by construction.
HermitianField complex_hessian(const ScalarField& phi);
HermitianField complex_hessian(const SpectralField& phi);

}  // namespace kma

namespace kma {

/// Fourier symbols of d_j d_kbar for every stored coefficient, same Nyquist rules as complex_hessian.
std::vector<Herm2> hessian_symbols(const PeriodicGrid& grid);
/// The same table, computed once per grid and shared by equal grids.
const std::vector<Herm2>& hessian_symbol_table(const PeriodicGrid& grid);

}  // namespace kma
