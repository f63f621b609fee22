#include "kma/hermitian.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace kma {

cplx Herm2::entry(int j, int k) const {
  if (j == k) return j == 0 ? a00 : a11;
  return j == 0 ? a01 : std::conj(a01);
}

Herm2& Herm2::operator+=(const Herm2& o) {
  a00 += o.a00;
  a11 += o.a11;
  a01 += o.a01;
  return *this;
}

Herm2& Herm2::operator-=(const Herm2& o) {
  a00 -= o.a00;
  a11 -= o.a11;
  a01 -= o.a01;
  return *this;
}

Herm2& Herm2::operator*=(double c) {
  a00 *= c;
  a11 *= c;
  a01 *= c;
  return *this;
}

Herm2 operator+(Herm2 a, const Herm2& b) { return a += b; }
Herm2 operator-(Herm2 a, const Herm2& b) { return a -= b; }
Herm2 operator*(double c, Herm2 a) { return a *= c; }

double det(const Herm2& a, int n) { return n == 1 ? a.a00 : a.a00 * a.a11 - std::norm(a.a01); }

Herm2 inverse(const Herm2& a, int n) {
  if (n == 1) return {1.0 / a.a00, 0.0, {}};
  const double d = det(a, 2);
  return {a.a11 / d, a.a00 / d, -a.a01 / d};
}

double min_eigenvalue(const Herm2& a, int n) {
  if (n == 1) return a.a00;
  const double m = 0.5 * (a.a00 + a.a11);
  return m - std::hypot(0.5 * (a.a00 - a.a11), std::abs(a.a01));
}

double max_eigenvalue(const Herm2& a, int n) {
  if (n == 1) return a.a00;
  const double m = 0.5 * (a.a00 + a.a11);
  return m + std::hypot(0.5 * (a.a00 - a.a11), std::abs(a.a01));
}

double trace_with(const Herm2& gi, const Herm2& a, int n) {
  if (n == 1) return gi.a00 * a.a00;
  return gi.a00 * a.a00 + gi.a11 * a.a11 + 2.0 * (gi.a01 * std::conj(a.a01)).real();
}

namespace {

using M2 = std::array<cplx, 4>;

M2 full(const Herm2& a) { return {a.a00, a.a01, std::conj(a.a01), a.a11}; }

M2 mul(const M2& x, const M2& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
          x[2] * y[1] + x[3] * y[3]};
}

}  // namespace

double inner_with(const Herm2& gi, const Herm2& a, const Herm2& b, int n) {
  if (n == 1) return gi.a00 * a.a00 * gi.a00 * b.a00;
  const M2 ga = mul(full(gi), full(a));
  const M2 gb = mul(full(gi), full(b));
  const M2 p = mul(ga, gb);
  return (p[0] + p[3]).real();
}

HermitianField::HermitianField(PeriodicGrid grid, const Herm2& value)
    : grid_(std::move(grid)), entries_(grid_.point_count(), value) {}

ComplexField HermitianField::component(int j, int k) const {
  ComplexField f(grid_);
  for (std::size_t p = 0; p < entries_.size(); ++p) f[p] = entries_[p].entry(j, k);
  return f;
}

HermitianField& HermitianField::operator+=(const HermitianField& o) {
  if (grid_ != o.grid_) throw std::invalid_argument("fields live on different grids");
  for (std::size_t p = 0; p < entries_.size(); ++p) entries_[p] += o.entries_[p];
  return *this;
}

HermitianField& HermitianField::operator-=(const HermitianField& o) {
  if (grid_ != o.grid_) throw std::invalid_argument("fields live on different grids");
  for (std::size_t p = 0; p < entries_.size(); ++p) entries_[p] -= o.entries_[p];
  return *this;
}

HermitianField& HermitianField::operator*=(double c) {
  for (auto& e : entries_) e *= c;
  return *this;
}

HermitianField operator+(HermitianField a, const HermitianField& b) { return a += b; }
HermitianField operator-(HermitianField a, const HermitianField& b) { return a -= b; }

}  // namespace kma
