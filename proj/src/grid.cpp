#include "kma/grid.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "kma/errors.hpp"
#include "kma/hermitian.hpp"

namespace kma {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct PeriodicGrid::Impl {
  int n = 0;
  int N = 0;
  double L = 1.0;
  int d = 0;
  std::size_t P = 0;
  std::size_t S = 0;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  mutable std::once_flag hessian_once;
  mutable std::vector<Herm2> hessian;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

PeriodicGrid::PeriodicGrid(int n_complex, int resolution, double period) {
  if (n_complex != 1 && n_complex != 2) throw ConfigError("n_complex must be 1 or 2");
  if (resolution < 8 || resolution % 2 != 0) throw ConfigError("resolution must be even, ≥ 8");
  if (!std::has_single_bit(static_cast<unsigned>(resolution)))
    throw ConfigError("resolution must be a power of two");
  if (!(period > 0.0) || !std::isfinite(period)) throw ConfigError("period must be positive");

  // Plans are shared between equal grids.
  static std::map<std::tuple<int, int, double>, std::weak_ptr<const Impl>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto key = std::make_tuple(n_complex, resolution, period);
  if (auto it = cache.find(key); it != cache.end()) {
    if (auto sp = it->second.lock()) {
      impl_ = sp;
      return;
    }
  }

  auto impl = std::make_shared<Impl>();
  impl->n = n_complex;
  impl->N = resolution;
  impl->L = period;
  impl->d = 2 * n_complex;
  impl->P = 1;
  for (int a = 0; a < impl->d; ++a) impl->P *= static_cast<std::size_t>(resolution);
  impl->S = impl->P / resolution * (resolution / 2 + 1);

  std::vector<int> dims(impl->d, resolution);
  double* rbuf = fftw_alloc_real(impl->P);
  fftw_complex* cbuf = fftw_alloc_complex(impl->S);
  impl->r2c = fftw_plan_dft_r2c(impl->d, dims.data(), rbuf, cbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  impl->c2r = fftw_plan_dft_c2r(impl->d, dims.data(), cbuf, rbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(rbuf);
  fftw_free(cbuf);
  if (!impl->r2c || !impl->c2r) throw std::runtime_error("FFTW planning failed");

  cache[key] = impl;
  impl_ = impl;
}

int PeriodicGrid::n_complex() const { return impl_->n; }
int PeriodicGrid::resolution() const { return impl_->N; }
double PeriodicGrid::period() const { return impl_->L; }
std::size_t PeriodicGrid::point_count() const { return impl_->P; }
std::size_t PeriodicGrid::spectral_count() const { return impl_->S; }

double PeriodicGrid::volume() const { return std::pow(impl_->L, impl_->d); }

std::array<int, 4> PeriodicGrid::unravel(std::size_t point) const {
  std::array<int, 4> idx{};
  for (int a = impl_->d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(point % impl_->N);
    point /= impl_->N;
  }
  return idx;
}

std::size_t PeriodicGrid::ravel(const std::array<int, 4>& idx) const {
  const int N = impl_->N;
  std::size_t p = 0;
  for (int a = 0; a < impl_->d; ++a) p = p * N + static_cast<std::size_t>(((idx[a] % N) + N) % N);
  return p;
}

double PeriodicGrid::coordinate(std::size_t point, int axis) const {
  std::size_t stride = 1;
  for (int a = impl_->d - 1; a > axis; --a) stride *= impl_->N;
  return static_cast<double>((point / stride) % impl_->N) * spacing();
}

std::array<int, 4> PeriodicGrid::wavenumbers(std::size_t mode) const {
  const int N = impl_->N;
  const int H = N / 2 + 1;
  std::array<int, 4> k{};
  k[impl_->d - 1] = static_cast<int>(mode % H);
  mode /= H;
  for (int a = impl_->d - 2; a >= 0; --a) {
    int i = static_cast<int>(mode % N);
    mode /= N;
    k[a] = i <= N / 2 ? i : i - N;
  }
  return k;
}

double PeriodicGrid::angular(int k) const { return 2.0 * std::numbers::pi * k / impl_->L; }

void PeriodicGrid::forward(const double* in, cplx* out) const {
  fftw_execute_dft_r2c(impl_->r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void PeriodicGrid::inverse(const cplx* in, double* out) const {
  std::vector<cplx> scratch(in, in + impl_->S);
  fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out);
  const double s = 1.0 / static_cast<double>(impl_->P);
  for (std::size_t i = 0; i < impl_->P; ++i) out[i] *= s;
}

bool PeriodicGrid::operator==(const PeriodicGrid& o) const {
  if (impl_ == o.impl_) return true;
  if (!impl_ || !o.impl_) return false;
  return impl_->n == o.impl_->n && impl_->N == o.impl_->N && impl_->L == o.impl_->L;
}

// ---------------------------------------------------------------- fields

namespace {

void require_same(const PeriodicGrid& a, const PeriodicGrid& b) {
  if (a != b) throw std::invalid_argument("fields live on different grids");
}

template <class Mult>
ScalarField synthesize(const SpectralField& s, Mult&& mult) {
  const PeriodicGrid& g = s.grid();
  std::vector<cplx> buf(g.spectral_count());
  const auto& c = s.coefficients();
  for_each_mode(g, [&](std::size_t m, const std::array<int, 4>& k) { buf[m] = c[m] * mult(k); });
  ScalarField out(g);
  g.inverse(buf.data(), out.values().data());
  return out;
}

cplx ipow(int c) {
  switch (c & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

ScalarField::ScalarField(PeriodicGrid grid, double value)
    : grid_(std::move(grid)), values_(grid_.point_count(), value) {}

ScalarField::ScalarField(PeriodicGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.point_count()) throw std::invalid_argument("field size mismatch");
}

bool ScalarField::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& o) {
  require_same(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }
ScalarField operator+(ScalarField a, double c) { return a += c; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

ComplexField::ComplexField(PeriodicGrid grid) : grid_(std::move(grid)), values_(grid_.point_count()) {}

ComplexField::ComplexField(const ScalarField& re, const ScalarField& im)
    : grid_(re.grid()), values_(re.size()) {
  require_same(re.grid(), im.grid());
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = {re[i], im[i]};
}

ScalarField ComplexField::real() const {
  ScalarField f(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) f[i] = values_[i].real();
  return f;
}

ScalarField ComplexField::imag() const {
  ScalarField f(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) f[i] = values_[i].imag();
  return f;
}

SpectralField::SpectralField(const ScalarField& f) : grid_(f.grid()), coeffs_(grid_.spectral_count()) {
  grid_.forward(f.values().data(), coeffs_.data());
}

ScalarField SpectralField::inverse() const {
  ScalarField out(grid_);
  grid_.inverse(coeffs_.data(), out.values().data());
  return out;
}

// ---------------------------------------------------------- derivatives

std::vector<std::pair<Monomial, cplx>> expand_partials(const std::vector<ComplexPartial>& ops) {
  std::map<Monomial, cplx> poly{{Monomial{}, cplx(1.0)}};
  for (const auto& op : ops) {
    std::map<Monomial, cplx> next;
    const int ax = 2 * op.index;
    const int ay = ax + 1;
    const cplx cy = op.bar ? cplx(0.0, 0.5) : cplx(0.0, -0.5);
    for (const auto& [m, c] : poly) {
      Monomial mx = m;
      ++mx[ax];
      next[mx] += 0.5 * c;
      Monomial my = m;
      ++my[ay];
      next[my] += cy * c;
    }
    poly = std::move(next);
  }
  std::vector<std::pair<Monomial, cplx>> out;
  for (const auto& [m, c] : poly)
    if (c != cplx(0.0)) out.emplace_back(m, c);
  return out;
}

cplx monomial_multiplier(const PeriodicGrid& grid, const Monomial& m, const std::array<int, 4>& k) {
  const int half = grid.resolution() / 2;
  cplx mult(1.0);
  int total = 0;
  for (int a = 0; a < grid.dim(); ++a) {
    if (m[a] == 0) continue;
    if ((m[a] & 1) && std::abs(k[a]) == half) return 0.0;
    const double w = grid.angular(k[a]);
    for (int e = 0; e < m[a]; ++e) mult *= w;
    total += m[a];
  }
  return mult * ipow(total);
}

ScalarField real_derivative(const SpectralField& s, const Monomial& m) {
  return synthesize(s, [&](const std::array<int, 4>& k) { return monomial_multiplier(s.grid(), m, k); });
}

ComplexField complex_derivative(const SpectralField& s, const std::vector<ComplexPartial>& ops) {
  const auto terms = expand_partials(ops);
  bool has_re = false;
  bool has_im = false;
  for (const auto& [m, c] : terms) {
    has_re |= c.real() != 0.0;
    has_im |= c.imag() != 0.0;
  }
  auto part = [&](bool imag_part) {
    if (!(imag_part ? has_im : has_re)) return ScalarField(s.grid());
    return synthesize(s, [&](const std::array<int, 4>& k) {
      cplx mult(0.0);
      for (const auto& [m, c] : terms) {
        const double w = imag_part ? c.imag() : c.real();
        if (w != 0.0) mult += w * monomial_multiplier(s.grid(), m, k);
      }
      return mult;
    });
  };
  return ComplexField(part(false), part(true));
}

namespace {

ComplexField apply_to_complex(const ComplexField& f, const ComplexPartial& op) {
  ComplexField du = complex_derivative(SpectralField(f.real()), {op});
  ComplexField dv = complex_derivative(SpectralField(f.imag()), {op});
  ComplexField out(f.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = du[i] + cplx(0.0, 1.0) * dv[i];
  return out;
}

}  // namespace

ComplexField partial_z(const ScalarField& f, int j) { return complex_derivative(SpectralField(f), {{j, false}}); }
ComplexField partial_zbar(const ScalarField& f, int j) { return complex_derivative(SpectralField(f), {{j, true}}); }
ComplexField partial_z(const ComplexField& f, int j) { return apply_to_complex(f, {j, false}); }
ComplexField partial_zbar(const ComplexField& f, int j) { return apply_to_complex(f, {j, true}); }

ScalarField laplacian(const ScalarField& f) {
  SpectralField s(f);
  const PeriodicGrid& g = f.grid();
  return synthesize(s, [&](const std::array<int, 4>& k) {
    double m = 0.0;
    for (int a = 0; a < g.dim(); ++a) m -= g.angular(k[a]) * g.angular(k[a]);
    return cplx(0.25 * m);
  });
}

HermitianField complex_hessian(const SpectralField& s) {
  const PeriodicGrid& g = s.grid();
  const int n = g.n_complex();
  const std::vector<Herm2>& sym = hessian_symbol_table(g);
  const auto& c = s.coefficients();
  std::vector<cplx> buf(c.size());
  ScalarField part(g);
  HermitianField h(g);
  auto pass = [&](auto&& mult, auto&& store) {
    for (std::size_t m = 0; m < c.size(); ++m) buf[m] = c[m] * mult(sym[m]);
    g.inverse(buf.data(), part.values().data());
    for (std::size_t p = 0; p < h.size(); ++p) store(h[p], part[p]);
  };
  pass([](const Herm2& a) { return a.a00; }, [](Herm2& e, double v) { e.a00 = v; });
  if (n == 2) {
    pass([](const Herm2& a) { return a.a11; }, [](Herm2& e, double v) { e.a11 = v; });
    pass([](const Herm2& a) { return a.a01.real(); }, [](Herm2& e, double v) { e.a01.real(v); });
    pass([](const Herm2& a) { return a.a01.imag(); }, [](Herm2& e, double v) { e.a01.imag(v); });
  }
  return h;
}

HermitianField complex_hessian(const ScalarField& phi) { return complex_hessian(SpectralField(phi)); }

// ----------------------------------------------------------- quadrature

double integrate(const ScalarField& f) { return mean(f) * f.grid().volume(); }

double integrate(const ScalarField& f, const ScalarField& vol) {
  require_same(f.grid(), vol.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * vol[i];
  return s / static_cast<double>(f.size()) * f.grid().volume();
}

double mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

double sup(const ScalarField& f) { return *std::max_element(f.values().begin(), f.values().end()); }
double inf(const ScalarField& f) { return *std::min_element(f.values().begin(), f.values().end()); }

double sup_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

namespace {

double scaled_power_mean(const ScalarField& f, double p, double& scale) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
  scale = sup_abs(f);
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v) / scale, p);
  return s / static_cast<double>(f.size());
}

}  // namespace

double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p) && p > 0) return sup_abs(f);
  double scale = 0.0;
  const double m = scaled_power_mean(f, p, scale);
  if (scale == 0.0) return 0.0;
  return scale * std::pow(m * f.grid().volume(), 1.0 / p);
}

double lp_norm_normalized(const ScalarField& f, double p) {
  if (std::isinf(p) && p > 0) return sup_abs(f);
  double scale = 0.0;
  const double m = scaled_power_mean(f, p, scale);
  if (scale == 0.0) return 0.0;
  return scale * std::pow(m, 1.0 / p);
}

double stddev(const ScalarField& f) {
  const double mu = mean(f);
  double s = 0.0;
  for (double v : f.values()) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(f.size()));
}

// --------------------------------------------------------- interpolation

ScalarField upsample(const ScalarField& f, int factor) {
  if (factor == 1) return f;
  if (factor < 1) throw std::invalid_argument("upsample factor must be >= 1");
  const PeriodicGrid& g = f.grid();
  PeriodicGrid fine(g.n_complex(), g.resolution() * factor, g.period());
  SpectralField s(f);
  std::vector<cplx> buf(fine.spectral_count());
  const int d = g.dim();
  const int half = g.resolution() / 2;
  const int Nf = fine.resolution();
  const int Hf = Nf / 2 + 1;
  const double scale = static_cast<double>(fine.point_count()) / static_cast<double>(g.point_count());
  for_each_mode(g, [&](std::size_t m, const std::array<int, 4>& k) {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) {
      if (std::abs(k[a]) == half) return;
      const int lim = (a == d - 1) ? Hf : Nf;
      idx = idx * lim + static_cast<std::size_t>(k[a] < 0 ? k[a] + Nf : k[a]);
    }
    buf[idx] = s.coefficients()[m] * scale;
  });
  ScalarField out(fine);
  fine.inverse(buf.data(), out.values().data());
  return out;
}

namespace {

struct Interpolant {
  struct Mode {
    std::array<int, 4> k;
    cplx c;  // weight and normalization folded in
  };
  PeriodicGrid grid;
  std::vector<Mode> modes;

  explicit Interpolant(const ScalarField& f) : grid(f.grid()) {
    SpectralField s(f);
    const int d = grid.dim();
    const int half = grid.resolution() / 2;
    const double norm = 1.0 / static_cast<double>(grid.point_count());
    for_each_mode(grid, [&](std::size_t m, const std::array<int, 4>& k) {
      for (int a = 0; a < d; ++a)
        if (std::abs(k[a]) == half) return;
      const cplx c = s.coefficients()[m];
      if (c == cplx(0.0)) return;
      const double w = k[d - 1] == 0 ? 1.0 : 2.0;
      modes.push_back({k, c * (w * norm)});
    });
  }

  // Value, gradient and Hessian at x.
  double eval(const std::array<double, 4>& x, Eigen::Vector4d* grad, Eigen::Matrix4d* hess) const {
    const int d = grid.dim();
    const int half = grid.resolution() / 2;
    std::array<std::vector<cplx>, 4> phase;
    for (int a = 0; a < d; ++a) {
      phase[a].resize(2 * half + 1);
      for (int k = -half; k <= half; ++k) phase[a][k + half] = std::polar(1.0, grid.angular(k) * x[a]);
    }
    double val = 0.0;
    if (grad) grad->setZero();
    if (hess) hess->setZero();
    for (const auto& mode : modes) {
      cplx e = mode.c;
      for (int a = 0; a < d; ++a) e *= phase[a][mode.k[a] + half];
      val += e.real();
      if (grad || hess) {
        std::array<double, 4> kap{};
        for (int a = 0; a < d; ++a) kap[a] = grid.angular(mode.k[a]);
        if (grad)
          for (int a = 0; a < d; ++a) (*grad)[a] -= kap[a] * e.imag();
        if (hess)
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) (*hess)(a, b) -= kap[a] * kap[b] * e.real();
      }
    }
    return val;
  }
};

}  // namespace

InterpolantMax spectral_max(const ScalarField& f) {
  const PeriodicGrid& g = f.grid();
  const int d = g.dim();
  const auto it = std::max_element(f.values().begin(), f.values().end());
  const std::size_t p = static_cast<std::size_t>(it - f.values().begin());
  InterpolantMax best;
  best.value = *it;
  for (int a = 0; a < d; ++a) best.location[a] = g.coordinate(p, a);

  Interpolant interp(f);
  std::array<double, 4> x = best.location;
  Eigen::Vector4d grad;
  Eigen::Matrix4d hess;
  double val = interp.eval(x, &grad, &hess);
  const double h = g.spacing();
  for (int iter = 0; iter < 40; ++iter) {
    Eigen::MatrixXd H = hess.topLeftCorner(d, d);
    Eigen::VectorXd gr = grad.head(d);
    // Newton along directions of negative curvature, gradient ascent along the rest (flat
    // directions are common: fields constant along an axis).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd step = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXd v = es.eigenvectors().col(i);
      const double lam = es.eigenvalues()[i];
      const double gv = v.dot(gr);
      step += (lam < -1e-12 * scale ? -gv / lam : gv * h * h) * v;
    }
    if (step.norm() > h) step *= h / step.norm();
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      std::array<double, 4> xt = x;
      for (int a = 0; a < d; ++a) xt[a] += step[a];
      Eigen::Vector4d gt;
      Eigen::Matrix4d ht;
      const double vt = interp.eval(xt, &gt, &ht);
      if (vt >= val) {
        x = xt;
        val = vt;
        grad = gt;
        hess = ht;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || step.norm() < 1e-14 * g.period()) break;
  }
  if (val > best.value) {
    best.value = val;
    best.location = x;
  }
  return best;
}

// -------------------------------------------------------------------- IO

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw FormatError("truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os.write("KMAF", 4);
  put_le<std::uint16_t>(os, 1);
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(f.grid().n_complex()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().resolution()));
  put_le<std::uint32_t>(os, 0);
  for (double v : f.values()) put_le<double>(os, v);
  if (!os) throw FormatError("write failed: " + path);
}

ScalarField read_field(const std::string& path, double period) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "KMAF", 4) != 0) throw FormatError("bad magic in " + path);
  const auto version = get_le<std::uint16_t>(is);
  if (version != 1) throw FormatError("unsupported field version " + std::to_string(version));
  const int n = get_le<std::uint16_t>(is);
  const int N = static_cast<int>(get_le<std::uint32_t>(is));
  get_le<std::uint32_t>(is);
  PeriodicGrid g(n, N, period);
  ScalarField f(g);
  for (double& v : f.values()) v = get_le<double>(is);
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in " + path);
  return f;
}

void write_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  const int d = f.grid().dim();
  for (int a = 0; a < d; ++a) os << 'i' << a << ',';
  os << "value\n";
  char buf[64];
  for (std::size_t p = 0; p < f.size(); ++p) {
    const auto idx = f.grid().unravel(p);
    for (int a = 0; a < d; ++a) os << idx[a] << ',';
    std::snprintf(buf, sizeof buf, "%.17g", f[p]);
    os << buf << '\n';
  }
}

}  // namespace kma

namespace kma {

namespace {

std::vector<Herm2> compute_hessian_symbols(const PeriodicGrid& grid) {
  const int n = grid.n_complex();
  const auto t00 = expand_partials({{0, false}, {0, true}});
  const auto t11 = expand_partials({{1, false}, {1, true}});
  const auto t01 = expand_partials({{0, false}, {1, true}});
  auto eval = [&](const std::vector<std::pair<Monomial, cplx>>& terms, const std::array<int, 4>& k) {
    cplx v(0.0);
    for (const auto& [m, c] : terms) v += c * monomial_multiplier(grid, m, k);
    return v;
  };
  std::vector<Herm2> out(grid.spectral_count());
  for_each_mode(grid, [&](std::size_t s, const std::array<int, 4>& k) {
    out[s].a00 = eval(t00, k).real();
    if (n == 2) {
      out[s].a11 = eval(t11, k).real();
      out[s].a01 = eval(t01, k);
    }
  });
  return out;
}

}  // namespace

const std::vector<Herm2>& hessian_symbol_table(const PeriodicGrid& grid) {
  const auto& impl = *grid.impl_;
  std::call_once(impl.hessian_once, [&] { impl.hessian = compute_hessian_symbols(grid); });
  return impl.hessian;
}

std::vector<Herm2> hessian_symbols(const PeriodicGrid& grid) { return hessian_symbol_table(grid); }

}  // namespace kma
