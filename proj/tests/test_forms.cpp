#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kma/errors.hpp"
#include "kma/forms.hpp"
#include "kma/fourier.hpp"

using namespace kma;
using std::numbers::pi;

namespace {

// Coefficient of dz1^dzb1^dz2^dzb2 in a^b, with (1,1)-forms i A_{jk} dz^j ^ dzb^k expanded
// as genuine alternating 2-forms. Independent of the determinant route used by the library.
cplx wedge_coefficient(const Herm2& a, const Herm2& b) {
  auto two_form = [](const Herm2& h) {
    std::array<std::array<cplx, 4>, 4> m{};
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        m[2 * j][2 * k + 1] += cplx(0, 1) * h.entry(j, k);
        m[2 * k + 1][2 * j] -= cplx(0, 1) * h.entry(j, k);
      }
    return m;
  };
  const auto m = two_form(a);
  const auto nn = two_form(b);
  std::array<int, 4> perm{0, 1, 2, 3};
  cplx total = 0.0;
  do {
    int inversions = 0;
    for (int x = 0; x < 4; ++x)
      for (int y = x + 1; y < 4; ++y) inversions += perm[x] > perm[y];
    const double sign = (inversions % 2) ? -1.0 : 1.0;
    total += sign * m[perm[0]][perm[1]] * nn[perm[2]][perm[3]];
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 0.25 * total;
}

Herm2 random_positive(std::mt19937_64& rng) {
  auto u = [&] { return unit_double(rng()) * 2.0 - 1.0; };
  Herm2 h{1.5 + u(), 1.5 + u(), cplx(0.3 * u(), 0.3 * u())};
  return h;
}

HermitianField const_field(const PeriodicGrid& g, const Herm2& h) { return HermitianField(g, h); }

}  // namespace

TEST_CASE("traces") {
  PeriodicGrid g(2, 8);
  auto I = MetricField::constant(g, Herm2::identity());
  CHECK(sup_abs(trace_wrt(I.metric(), I) + (-2.0)) < 1e-15);
  CHECK(trace_wrt(const_field(g, Herm2::diag(2, 3)), I)[5] == 5.0);
  auto G = MetricField::constant(g, Herm2::diag(2, 1));
  CHECK(trace_wrt(const_field(g, Herm2::diag(2, 3)), G)[0] == doctest::Approx(4.0));

  std::mt19937_64 rng(3);
  const Herm2 m = random_positive(rng);
  auto M = MetricField::constant(g, m);
  CHECK(trace_wrt(M.metric(), M)[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(hermitian_inner(M.metric(), M.metric(), M)[0] == doctest::Approx(2.0).epsilon(1e-14));

  PeriodicGrid g1(1, 8);
  auto M1 = MetricField::constant(g1, Herm2{2.5, 0, {}});
  CHECK(trace_wrt(M1.metric(), M1)[3] == doctest::Approx(1.0));
}

TEST_CASE("inner products") {
  PeriodicGrid g(2, 8);
  auto I = MetricField::constant(g, Herm2::identity());
  CHECK(hermitian_inner(const_field(g, Herm2::diag(2, 3)), const_field(g, Herm2::diag(5, 7)), I)[0] == 31.0);
  CHECK(hermitian_inner(const_field(g, {}), const_field(g, Herm2::diag(5, 7)), I)[0] == 0.0);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto u = [&] { return unit_double(rng()) * 2.0 - 1.0; };
    const Herm2 gm = random_positive(rng);
    const Herm2 a{u(), u(), {u(), u()}};
    const Herm2 b{u(), u(), {u(), u()}};
    const Herm2 gi = inverse(gm, 2);
    CHECK(inner_with(gi, a, b, 2) == doctest::Approx(inner_with(gi, b, a, 2)).epsilon(1e-13));
    CHECK(inner_with(gi, a, a, 2) > 0.0);
    // bilinearity
    CHECK(inner_with(gi, a + 2.0 * b, b, 2) ==
          doctest::Approx(inner_with(gi, a, b, 2) + 2.0 * inner_with(gi, b, b, 2)).epsilon(1e-12));
    CHECK(trace_with(gi, a + 3.0 * b, 2) == doctest::Approx(trace_with(gi, a, 2) + 3.0 * trace_with(gi, b, 2)).epsilon(1e-12));
  }
}

TEST_CASE("determinant ratios") {
  PeriodicGrid g(2, 8);
  auto I = MetricField::constant(g, Herm2::identity());
  auto D = MetricField::constant(g, Herm2::diag(2, 3));
  CHECK(det_ratio(D, I)[0] == 6.0);
  CHECK(sup_abs(det_ratio(I, I) + (-1.0)) == 0.0);

  PeriodicGrid g1(1, 16);
  auto h = sample_terms(g1, {{true, {1, 0}, 0.3, 0.0}});
  HermitianField gp(g1);
  for (std::size_t p = 0; p < h.size(); ++p) gp[p].a00 = 1.0 + h[p];
  auto GP = MetricField(gp);
  auto I1 = MetricField::constant(g1, Herm2{1.0, 0, {}});
  CHECK(sup_abs(det_ratio(GP, I1) - (h + 1.0)) < 1e-15);

  auto phi = sample_terms(g, random_terms(2, 2, 0.02, 8));
  auto G2 = MetricField(complex_hessian(phi) + I.metric());
  auto prod = det_ratio(G2, D) * det_ratio(D, G2);
  CHECK(sup_abs(prod + (-1.0)) < 1e-12);
}

TEST_CASE("positivity is enforced with a point index") {
  PeriodicGrid g(1, 16);
  HermitianField h(g, Herm2{1.0, 0, {}});
  h[7].a00 = -0.25;
  try {
    MetricField m(h);
    FAIL("expected PositivityViolation");
  } catch (const PositivityViolation& e) {
    CHECK(e.point() == 7);
    CHECK(e.min_eigenvalue() == -0.25);
  }
}

TEST_CASE("closed-form eigenvalues") {
  const Herm2 h{2.0, 1.0, cplx(0.3, -0.4)};
  const double disc = std::sqrt(0.25 + 0.25);
  CHECK(min_eigenvalue(h, 2) == doctest::Approx(1.5 - disc));
  CHECK(max_eigenvalue(h, 2) == doctest::Approx(1.5 + disc));
  const Herm2 hi = inverse(h, 2);
  CHECK(trace_with(hi, h, 2) == doctest::Approx(2.0));
}

TEST_CASE("wedge identities against alternating-form expansion") {
  PeriodicGrid g(2, 8);
  auto I = MetricField::constant(g, Herm2::identity());
  const Herm2 a = Herm2::diag(2, 3);
  const Herm2 b = Herm2::diag(5, 7);
  const cplx ww = wedge_coefficient(Herm2::identity(), Herm2::identity());
  CHECK((2.0 * wedge_coefficient(a, b) / ww).real() == doctest::Approx(29.0));
  auto e = mixed_top_identity_check(const_field(g, a), const_field(g, b), I);
  CHECK(e.pass);
  CHECK(e.lhs < 1e-13);

  // alpha = beta = g
  auto same = mixed_top_identity_check(I.metric(), I.metric(), I);
  CHECK(same.pass);

  // Random positive samples: the oracle value, the library's determinant route and the trace
  // formula all agree.
  std::mt19937_64 rng(17);
  PeriodicGrid gs(2, 8);
  HermitianField A(gs), B(gs), G(gs);
  for (std::size_t p = 0; p < 50; ++p) {
    G[p] = random_positive(rng);
    A[p] = random_positive(rng);
    B[p] = random_positive(rng);
  }
  for (std::size_t p = 50; p < gs.point_count(); ++p) G[p] = A[p] = B[p] = Herm2::identity();
  MetricField GM(G);
  for (std::size_t p = 0; p < 50; ++p) {
    const cplx w = wedge_coefficient(G[p], G[p]);
    const double lhs = (2.0 * wedge_coefficient(A[p], B[p]) / w).real();
    const Herm2 gi = inverse(G[p], 2);
    const double rhs = trace_with(gi, A[p], 2) * trace_with(gi, B[p], 2) - inner_with(gi, A[p], B[p], 2);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
    const double first = (2.0 * wedge_coefficient(A[p], G[p]) / w).real();
    CHECK(std::abs(first - trace_with(gi, A[p], 2)) < 1e-12);
  }
  auto entry = mixed_top_identity_check(A, B, GM);
  CHECK(entry.pass);
  CHECK(entry.lhs < 1e-12);

  PeriodicGrid g1(1, 8);
  auto one = mixed_top_identity_check(const_field(g1, Herm2{0.7, 0, {}}), const_field(g1, Herm2{2.0, 0, {}}),
                                      MetricField::constant(g1, Herm2{1.3, 0, {}}));
  CHECK(one.pass);
}

TEST_CASE("Ricci forms") {
  PeriodicGrid g(2, 8);
  auto flat = ricci_form(MetricField::constant(g, Herm2::identity()));
  auto scaled = ricci_form(MetricField::constant(g, 3.0 * Herm2::identity()));
  for (std::size_t p = 0; p < flat.size(); ++p) {
    CHECK(std::abs(flat[p].a00) + std::abs(flat[p].a11) + std::abs(flat[p].a01) < 1e-12);
    CHECK(std::abs(scaled[p].a00) + std::abs(scaled[p].a11) + std::abs(scaled[p].a01) < 1e-12);
  }

  PeriodicGrid g1(1, 32);
  HermitianField conf(g1);
  for (std::size_t p = 0; p < conf.size(); ++p) conf[p].a00 = std::exp(0.1 * std::cos(2 * pi * g1.coordinate(p, 0)));
  auto ric = ricci_form(MetricField(conf));
  // -d dbar u with u = 0.1 cos(2 pi x); centered differences of u at h = 1/1024 as a second route.
  const double h = 1.0 / 1024;
  for (std::size_t p = 0; p < ric.size(); ++p) {
    const double x = g1.coordinate(p, 0);
    CHECK(ric[p].a00 == doctest::Approx(0.1 * pi * pi * std::cos(2 * pi * x)).epsilon(1e-10));
    auto u = [](double s) { return 0.1 * std::cos(2 * pi * s); };
    const double fd = -0.25 * (u(x + h) - 2 * u(x) + u(x - h)) / (h * h);
    CHECK(std::abs(ric[p].a00 - fd) < 1e-5);
  }
}

TEST_CASE("Schwarz trace inequality") {
  PeriodicGrid g(2, 8);
  auto I = MetricField::constant(g, Herm2::identity());
  auto e = schwarz_trace_check(MetricField::constant(g, Herm2::diag(2, 3)), I);
  CHECK(e.pass);
  CHECK(e.rhs == doctest::Approx(25.0 / 6.0));
  auto eq = schwarz_trace_check(I, I);
  CHECK(eq.rhs == 4.0);
  CHECK(eq.pass);
  std::mt19937_64 rng(1);
  const Herm2 m = random_positive(rng);
  auto sc = schwarz_trace_check(MetricField::constant(g, 2.7 * m), MetricField::constant(g, m));
  CHECK(sc.rhs == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(sc.pass);
}

TEST_CASE("curvature of conformal and potential metrics") {
  PeriodicGrid g1(1, 32);
  HermitianField conf(g1);
  ScalarField u = sample_terms(g1, {{true, {1, 0}, 0.1, 0.0}, {false, {0, 2}, 0.05, 0.0}});
  for (std::size_t p = 0; p < conf.size(); ++p) conf[p].a00 = std::exp(u[p]);
  auto R = curvature_tensor(MetricField(conf));
  auto ddu = complex_hessian(u);
  for (std::size_t p = 0; p < conf.size(); ++p) {
    // R = -e^u d dbar u for g = e^u.
    CHECK(std::abs(R.at(p, 0, 0, 0, 0) + std::exp(u[p]) * ddu[p].a00) < 1e-10);
    CHECK(std::abs(R.at(p, 0, 0, 0, 0).imag()) < 1e-12);
  }

  PeriodicGrid g2(2, 8);
  auto phi = sample_terms(g2, random_terms(2, 1, 0.03, 5));
  auto gm = MetricField(complex_hessian(phi) + HermitianField(g2, Herm2::identity()));
  auto R2 = curvature_tensor(gm);
  double err = 0.0;
  for (std::size_t p = 0; p < g2.point_count(); ++p)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) {
            err = std::max(err, std::abs(R2.at(p, i, j, k, l) - R2.at(p, k, j, i, l)));
            err = std::max(err, std::abs(R2.at(p, i, j, k, l) - R2.at(p, i, l, k, j)));
            err = std::max(err, std::abs(R2.at(p, i, j, k, l) - std::conj(R2.at(p, j, i, l, k))));
          }
  CHECK(err < 1e-12);
}
