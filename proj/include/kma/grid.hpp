#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace kma {

using cplx = std::complex<double>;
struct Herm2;

/// Uniform periodic lattice on C^n/(L Z^n + i L Z^n), n in {1, 2}.
/// Real axes are ordered x1, y1, x2, y2; storage is row-major (last axis fastest).
class PeriodicGrid {
 public:
  PeriodicGrid() = default;
  PeriodicGrid(int n_complex, int resolution, double period = 1.0);

  int n_complex() const;
  int dim() const { return 2 * n_complex(); }
  int resolution() const;
  double period() const;
  std::size_t point_count() const;
  /// Number of r2c coefficients: N^(d-1) * (N/2 + 1).
  std::size_t spectral_count() const;
  double volume() const;
  double spacing() const { return period() / resolution(); }

  std::array<int, 4> unravel(std::size_t point) const;
  std::size_t ravel(const std::array<int, 4>& idx) const;  // indices wrap periodically
  double coordinate(std::size_t point, int axis) const;

  /// Signed integer frequency of a stored coefficient along an axis.
  std::array<int, 4> wavenumbers(std::size_t mode) const;
  /// Angular frequency 2*pi*k/L.
  double angular(int k) const;

  void forward(const double* in, cplx* out) const;
  /// Normalized inverse; `in` is left untouched.
  void inverse(const cplx* in, double* out) const;

  bool valid() const { return impl_ != nullptr; }
  bool operator==(const PeriodicGrid& o) const;
  bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

 private:
  friend const std::vector<Herm2>& hessian_symbol_table(const PeriodicGrid& grid);
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Visit every stored r2c coefficient with its signed wavenumber vector.
template <class Fn>
void for_each_mode(const PeriodicGrid& g, Fn&& fn) {
  const int d = g.dim();
  const int N = g.resolution();
  const int H = N / 2 + 1;
  std::array<int, 4> idx{};
  std::array<int, 4> k{};
  const std::size_t S = g.spectral_count();
  for (std::size_t s = 0; s < S; ++s) {
    for (int a = 0; a < d - 1; ++a) k[a] = idx[a] <= N / 2 ? idx[a] : idx[a] - N;
    k[d - 1] = idx[d - 1];
    fn(s, k);
    for (int a = d - 1; a >= 0; --a) {
      const int lim = (a == d - 1) ? H : N;
      if (++idx[a] < lim) break;
      idx[a] = 0;
    }
  }
}

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(PeriodicGrid grid, double value = 0.0);
  ScalarField(PeriodicGrid grid, std::vector<double> values);

  template <class Fn>
  static ScalarField sample(const PeriodicGrid& grid, Fn&& fn) {
    ScalarField f(grid);
    std::array<double, 4> x{};
    for (std::size_t p = 0; p < grid.point_count(); ++p) {
      for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(p, a);
      f.values_[p] = fn(x);
    }
    return f;
  }

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  bool finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(const ScalarField& o);
  ScalarField& operator+=(double c);
  ScalarField& operator-=(double c) { return *this += -c; }
  ScalarField& operator*=(double c);

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double c, ScalarField a);
inline ScalarField operator*(ScalarField a, double c) { return c * std::move(a); }
ScalarField operator+(ScalarField a, double c);
inline ScalarField operator-(ScalarField a, double c) { return std::move(a) + (-c); }
ScalarField operator-(ScalarField a);

template <class Fn>
ScalarField map(const ScalarField& f, Fn&& fn) {
  ScalarField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = fn(f[i]);
  return out;
}

class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(PeriodicGrid grid);
  ComplexField(const ScalarField& re, const ScalarField& im);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const std::vector<cplx>& values() const { return values_; }
  ScalarField real() const;
  ScalarField imag() const;

 private:
  PeriodicGrid grid_;
  std::vector<cplx> values_;
};

/// Half-spectrum (r2c layout) of a real field, unnormalized.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const ScalarField& f);

  const PeriodicGrid& grid() const { return grid_; }
  const std::vector<cplx>& coefficients() const { return coeffs_; }
  std::vector<cplx>& coefficients() { return coeffs_; }
  ScalarField inverse() const;

 private:
  PeriodicGrid grid_;
  std::vector<cplx> coeffs_;
};

/// A single complex first-order operator: d/dz_j (bar=false) or d/dzbar_j (bar=true).
struct ComplexPartial {
  int index = 0;
  bool bar = false;
};

/// Derivative counts per real axis.
using Monomial = std::array<int, 4>;

/// Expansion of a product of complex partials into real derivative monomials,
/// d_j = (d_x - i d_y)/2, d_jbar = (d_x + i d_y)/2. Zero coefficients are dropped.
std::vector<std::pair<Monomial, cplx>> expand_partials(const std::vector<ComplexPartial>& ops);

/// Spectral multiplier of a real monomial; odd powers vanish at Nyquist.
cplx monomial_multiplier(const PeriodicGrid& grid, const Monomial& m, const std::array<int, 4>& k);

ScalarField real_derivative(const SpectralField& s, const Monomial& m);
ComplexField complex_derivative(const SpectralField& s, const std::vector<ComplexPartial>& ops);

ComplexField partial_z(const ScalarField& f, int j);
ComplexField partial_zbar(const ScalarField& f, int j);
ComplexField partial_z(const ComplexField& f, int j);
ComplexField partial_zbar(const ComplexField& f, int j);

/// Flat Laplacian sum_j d_j d_jbar = (1/4) sum of second real derivatives.
ScalarField laplacian(const ScalarField& f);

double integrate(const ScalarField& f);
double integrate(const ScalarField& f, const ScalarField& vol);
double mean(const ScalarField& f);
double sup(const ScalarField& f);
double inf(const ScalarField& f);
double sup_abs(const ScalarField& f);
/// (int |f|^p dV)^(1/p); p = infinity gives sup|f|.
double lp_norm(const ScalarField& f, double p);
/// Same, with the measure rescaled to unit total volume.
double lp_norm_normalized(const ScalarField& f, double p);
double stddev(const ScalarField& f);

/// Trigonometric interpolation onto a grid `factor` times finer; Nyquist content is dropped.
ScalarField upsample(const ScalarField& f, int factor);

struct InterpolantMax {
  double value = 0.0;
  std::array<double, 4> location{};
};

/// Maximum of the trigonometric interpolant: grid argmax refined by Newton ascent.
InterpolantMax spectral_max(const ScalarField& f);

/// Binary layout: "KMAF", u16 version, u16 n, u32 N, u32 reserved, then float64 LE row-major.
void write_field(const std::string& path, const ScalarField& f);
ScalarField read_field(const std::string& path, double period = 1.0);
void write_field_csv(const std::string& path, const ScalarField& f);

}  // namespace kma
