#include "kma/ma_core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "kma/errors.hpp"

namespace kma {

const char* to_string(Family f) {
  switch (f) {
    case Family::NegC1: return "negc1";
    case Family::CalabiYau: return "cy";
    default: return "fano";
  }
}

Family parse_family(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "negc1") return Family::NegC1;
  if (l == "cy" || l == "calabiyau" || l == "calabi-yau") return Family::CalabiYau;
  if (l == "fano") return Family::Fano;
  throw ConfigError("unknown family '" + s + "' (expected negc1, cy or fano)");
}

double zeroth_order_coefficient(Family f, double t) {
  switch (f) {
    case Family::NegC1: return -1.0;
    case Family::CalabiYau: return 0.0;
    default: return t;
  }
}

namespace {

double log_mean_exp(const ScalarField& f, double s) {
  double m = -INFINITY;
  for (double v : f.values()) m = std::max(m, s * v);
  double acc = 0.0;
  for (double v : f.values()) acc += std::exp(s * v - m);
  return m + std::log(acc / static_cast<double>(f.size()));
}

}  // namespace

MAProblem::MAProblem(ScalarField F, Family family, double t, Herm2 background)
    : F_(std::move(F)), family_(family), t_(t), background_(background) {
  if (!F_.finite()) throw ConfigError("data F is not finite");
  if (!std::isfinite(t_)) throw ConfigError("t must be finite");
  const int n = F_.grid().n_complex();
  if (!(min_eigenvalue(background_, n) > 0.0)) throw ConfigError("background metric must be positive definite");
  log_det_g_ = std::log(det(background_, n));
  switch (family_) {
    case Family::NegC1:
      shift_ = 0.0;
      source_ = t_ * F_;
      break;
    case Family::CalabiYau:
      shift_ = -log_mean_exp(F_, t_);
      source_ = t_ * F_ + shift_;
      break;
    case Family::Fano:
      shift_ = -log_mean_exp(F_, 1.0);
      source_ = F_ + shift_;
      break;
  }
}

HermitianField perturbed_hermitian(const ScalarField& phi, const MAProblem& problem) {
  if (phi.grid() != problem.grid()) throw std::invalid_argument("phi and problem live on different grids");
  HermitianField h = complex_hessian(phi);
  const Herm2& g = problem.background();
  for (std::size_t p = 0; p < h.size(); ++p) h[p] += g;
  return h;
}

MetricField perturbed_metric(const ScalarField& phi, const MAProblem& problem) {
  return MetricField(perturbed_hermitian(phi, problem));
}

ScalarField forward_density(const MetricField& g_prime, const MAProblem& problem) {
  ScalarField f = g_prime.log_det();
  f -= problem.log_det_background();
  return f;
}

ScalarField forward_density(const ScalarField& phi, const MAProblem& problem) {
  return forward_density(perturbed_metric(phi, problem), problem);
}

ScalarField residual(const ScalarField& phi, const MetricField& g_prime, const MAProblem& problem) {
  ScalarField r = forward_density(g_prime, problem);
  r -= problem.source();
  switch (problem.family()) {
    case Family::NegC1: r -= phi; break;
    case Family::CalabiYau: break;
    case Family::Fano: r += problem.t() * phi; break;
  }
  return r;
}

ScalarField residual(const ScalarField& phi, const MAProblem& problem) {
  return residual(phi, perturbed_metric(phi, problem), problem);
}

ScalarField linearized_apply(const ScalarField& psi, const MetricField& g_prime, double c) {
  if (psi.grid() != g_prime.grid()) throw std::invalid_argument("psi and metric live on different grids");
  const HermitianField h = complex_hessian(psi);
  const int n = g_prime.n();
  ScalarField out(psi.grid());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = trace_with(g_prime.inverse(p), h[p], n) + c * psi[p];
  return out;
}

ScalarField linearized_apply(const ScalarField& psi, const ScalarField& phi, const MAProblem& problem) {
  return linearized_apply(psi, perturbed_metric(phi, problem), problem.c());
}

ScalarField manufactured_data(const ScalarField& phi_star, Family family, double t, const Herm2& background) {
  MAProblem probe(ScalarField(phi_star.grid()), family, t, background);
  ScalarField fd = forward_density(phi_star, probe);
  switch (family) {
    case Family::NegC1:
      if (t == 0.0) throw ConfigError("NegC1 data cannot be manufactured at t = 0");
      return (1.0 / t) * (fd - phi_star);
    case Family::CalabiYau:
      if (t == 0.0) throw ConfigError("Calabi-Yau data cannot be manufactured at t = 0");
      return (1.0 / t) * fd;
    default:
      return fd + t * phi_star;
  }
}

DirectionalCheck directional_derivative_check(const ScalarField& phi, const ScalarField& psi,
                                              const MAProblem& problem, double h) {
  ScalarField plus = phi + h * psi;
  ScalarField minus = phi - h * psi;
  ScalarField fd = residual(plus, problem) - residual(minus, problem);
  fd *= 1.0 / (2.0 * h);
  ScalarField lin = linearized_apply(psi, phi, problem);
  return {sup_abs(fd - lin), h};
}

}  // namespace kma
