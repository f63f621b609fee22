#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kma/errors.hpp"
#include "kma/fourier.hpp"
#include "kma/ma_core.hpp"

using namespace kma;
using std::numbers::pi;

namespace {

ScalarField cosx(const PeriodicGrid& g, double a) { return sample_terms(g, {{true, {1, 0, 0, 0}, a, 0.0}}); }

ScalarField shift_axis(const ScalarField& f, int axis) {
  ScalarField out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) {
    auto idx = f.grid().unravel(p);
    idx[axis] += 1;
    out[f.grid().ravel(idx)] = f[p];
  }
  return out;
}

// Scales terms so that sum |a| pi^2 |k|^2, a bound on the Hessian eigenvalues, stays below 0.6.
std::vector<FourierTerm> cone_safe(std::vector<FourierTerm> terms) {
  double bound = 0.0;
  for (const auto& t : terms) {
    double k2 = 0.0;
    for (int a = 0; a < 4; ++a) k2 += t.mode[a] * t.mode[a];
    bound += std::abs(t.amplitude) * pi * pi * k2;
  }
  if (bound > 0.6)
    for (auto& t : terms) t.amplitude *= 0.6 / bound;
  return terms;
}

}  // namespace

TEST_CASE("family coefficients") {
  CHECK(zeroth_order_coefficient(Family::NegC1, 0.3) == -1.0);
  CHECK(zeroth_order_coefficient(Family::CalabiYau, 0.3) == 0.0);
  CHECK(zeroth_order_coefficient(Family::Fano, 0.3) == 0.3);
  CHECK(parse_family("CY") == Family::CalabiYau);
  CHECK(parse_family("negc1") == Family::NegC1);
  CHECK_THROWS_AS(parse_family("kahler"), ConfigError);
}

TEST_CASE("forward density") {
  PeriodicGrid g(1, 32);
  MAProblem prob(ScalarField(g), Family::CalabiYau, 1.0);
  CHECK(sup_abs(forward_density(ScalarField(g), prob)) == 0.0);

  auto fd = forward_density(cosx(g, 0.05), prob);
  auto expect = ScalarField::sample(g, [](auto x) { return std::log(1 - 0.05 * pi * pi * std::cos(2 * pi * x[0])); });
  CHECK(sup_abs(fd - expect) < 1e-13);

  CHECK_THROWS_AS(forward_density(cosx(g, 0.2), prob), PositivityViolation);
  try {
    forward_density(cosx(g, 0.2), prob);
  } catch (const PositivityViolation& e) {
    CHECK(e.min_eigenvalue() == doctest::Approx(1 - 0.2 * pi * pi).epsilon(1e-12));
    CHECK(g.coordinate(e.point(), 0) == 0.0);
  }

  PeriodicGrid g2(2, 8);
  MAProblem p2(ScalarField(g2), Family::NegC1, 1.0);
  auto phi = sample_terms(g2, random_terms(2, 2, 0.03, 6));
  // Hessian kills constants; only the rounding of phi + c itself remains.
  CHECK(sup_abs(forward_density(phi + 3.25, p2) - forward_density(phi, p2)) < 1e-12);
}

TEST_CASE("residuals vanish on manufactured solutions") {
  PeriodicGrid g(1, 64);
  MAProblem zero(ScalarField(g), Family::NegC1, 0.4);
  CHECK(sup_abs(residual(ScalarField(g), zero)) == 0.0);

  auto star = sample_terms(g, {{true, {1, 0}, 0.05, 0.0}, {false, {0, 1}, 0.025, 0.0}});
  MAProblem neg(manufactured_data(star, Family::NegC1, 1.0), Family::NegC1, 1.0);
  CHECK(sup_abs(residual(star, neg)) < 1e-13);

  auto star0 = star - ScalarField(g, mean(star));
  MAProblem cy(manufactured_data(star0, Family::CalabiYau, 1.0), Family::CalabiYau, 1.0);
  CHECK(std::abs(cy.renormalization()) < 1e-14);
  CHECK(sup_abs(residual(star0, cy)) < 1e-13);

  PeriodicGrid g2(2, 8);
  auto s2 = sample_terms(g2, {{true, {1, 0, 0, 0}, 0.05, 0.0}, {true, {0, 0, 0, 1}, 0.05, 0.0}});
  MAProblem cy2(manufactured_data(s2, Family::CalabiYau, 1.0), Family::CalabiYau, 1.0);
  CHECK(sup_abs(residual(s2, cy2)) < 1e-13);
}

TEST_CASE("linearization") {
  PeriodicGrid g(1, 16);
  ScalarField zero(g);
  MAProblem neg(zero, Family::NegC1, 1.0);
  CHECK(sup_abs(linearized_apply(ScalarField(g, 2.5), zero, neg) + 2.5) < 1e-14);

  MAProblem cy(zero, Family::CalabiYau, 1.0);
  auto c = cosx(g, 1.0);
  CHECK(sup_abs(linearized_apply(c, zero, cy) + pi * pi * c) < 1e-12);
  CHECK(sup_abs(linearized_apply(c, zero, neg) + (pi * pi + 1) * c) < 1e-12);

  MAProblem fano(zero, Family::Fano, 0.5);
  CHECK(sup_abs(linearized_apply(c, zero, fano) + (pi * pi - 0.5) * c) < 1e-12);
}

TEST_CASE("directional derivative check") {
  PeriodicGrid g(2, 8);
  MAProblem prob(sample_terms(g, random_terms(2, 1, 0.2, 2)), Family::NegC1, 0.7);
  auto phi = sample_terms(g, random_terms(2, 2, 0.02, 3));
  CHECK(directional_derivative_check(phi, ScalarField(g), prob, 1e-4).discrepancy == 0.0);
  CHECK(directional_derivative_check(ScalarField(g), phi, prob, 1e-4).discrepancy < 1e-7);

  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    auto ph = sample_terms(g, cone_safe(random_sparse_terms(2, 3, 2, 0.02, 100 + trial)));
    auto ps = sample_terms(g, cone_safe(random_sparse_terms(2, 3, 2, 0.02, 200 + trial)));
    const double d1 = directional_derivative_check(ph, ps, prob, 1e-4).discrepancy;
    const double d2 = directional_derivative_check(ph, ps, prob, 2e-4).discrepancy;
    const double ratio = d2 / d1;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("residual is translation equivariant") {
  PeriodicGrid g(2, 8);
  auto F = sample_terms(g, random_terms(2, 2, 0.3, 31));
  auto phi = sample_terms(g, random_terms(2, 2, 0.03, 32));
  for (Family fam : {Family::NegC1, Family::CalabiYau, Family::Fano}) {
    MAProblem a(F, fam, 0.6);
    for (int axis = 0; axis < 4; ++axis) {
      MAProblem b(shift_axis(F, axis), fam, 0.6);
      auto lhs = residual(shift_axis(phi, axis), b);
      auto rhs = shift_axis(residual(phi, a), axis);
      CHECK(sup_abs(lhs - rhs) < 1e-13);
    }
  }
}

TEST_CASE("total volume is conserved") {
  for (int n : {1, 2}) {
    PeriodicGrid g(n, n == 1 ? 64 : 16);
    MAProblem prob(ScalarField(g), Family::CalabiYau, 1.0);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto phi = sample_terms(g, random_terms(n, 3, 0.015, seed));
      auto gp = perturbed_metric(phi, prob);
      auto ratio = det_ratio(gp, MetricField::constant(g, prob.background()));
      CHECK(std::abs(integrate(ratio) - g.volume()) / g.volume() < 1e-10);
    }
  }
}

TEST_CASE("renormalization restores compatibility") {
  PeriodicGrid g(1, 32);
  auto F = cosx(g, 0.8);
  for (double t : {0.0, 0.3, 1.0}) {
    MAProblem cy(F, Family::CalabiYau, t);
    auto e = map(cy.source(), [](double v) { return std::exp(v); });
    CHECK(mean(e) == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Fano data is shifted once, independent of t.
  MAProblem f1(F, Family::Fano, 0.2);
  MAProblem f2(F, Family::Fano, 0.9);
  CHECK(f1.renormalization() == f2.renormalization());
  CHECK(f1.renormalization() == doctest::Approx(-std::log(std::cyl_bessel_i(0.0, 0.8))).epsilon(1e-12));
}
