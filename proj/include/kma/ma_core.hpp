#pragma once

#include <string>

#include "kma/forms.hpp"

namespace kma {

enum class Family { NegC1, CalabiYau, Fano };

const char* to_string(Family f);
/// Accepts "negc1", "cy", "fano" (case-insensitive) and the enumerator names.
Family parse_family(const std::string& s);
/// Zeroth-order coefficient of the linearization: -1, 0, +t.
double zeroth_order_coefficient(Family f, double t);

/// One member of a Monge-Ampere family on a flat torus with constant background metric.
///   NegC1:     log det(g + dd phi)/det g = tF + phi
///   CalabiYau: log det(g + dd phi)/det g = tF + c_t,   c_t = -log mean(e^{tF})
///   Fano:      log det(g + dd phi)/det g = F + c_0 - t phi,   c_0 = -log mean(e^F)
class MAProblem {
 public:
  MAProblem() = default;
  MAProblem(ScalarField F, Family family, double t, Herm2 background = Herm2::identity());

  const PeriodicGrid& grid() const { return F_.grid(); }
  int n() const { return grid().n_complex(); }
  const ScalarField& data() const { return F_; }
  Family family() const { return family_; }
  double t() const { return t_; }
  const Herm2& background() const { return background_; }
  double log_det_background() const { return log_det_g_; }
  double c() const { return zeroth_order_coefficient(family_, t_); }
  /// Constant added to the data to restore compatibility (0 for NegC1).
  double renormalization() const { return shift_; }
  /// Right-hand side of the equation without the phi term.
  const ScalarField& source() const { return source_; }
  /// Constant kernel present: solutions are fixed by the mean-zero gauge.
  bool gauged() const { return c() == 0.0; }

  MAProblem at(double t) const { return MAProblem(F_, family_, t, background_); }

 private:
  ScalarField F_;
  Family family_ = Family::NegC1;
  double t_ = 1.0;
  Herm2 background_ = Herm2::identity();
  double log_det_g_ = 0.0;
  double shift_ = 0.0;
  ScalarField source_;
};

/// g + complex_hessian(phi); throws PositivityViolation outside the Kahler cone.
MetricField perturbed_metric(const ScalarField& phi, const MAProblem& problem);
/// Same, without the positivity check.
HermitianField perturbed_hermitian(const ScalarField& phi, const MAProblem& problem);

/// log det(g + dd phi) - log det g.
ScalarField forward_density(const ScalarField& phi, const MAProblem& problem);
ScalarField forward_density(const MetricField& g_prime, const MAProblem& problem);

ScalarField residual(const ScalarField& phi, const MAProblem& problem);
ScalarField residual(const ScalarField& phi, const MetricField& g_prime, const MAProblem& problem);

/// g'^{j kbar} d_j d_kbar psi + c psi.
ScalarField linearized_apply(const ScalarField& psi, const ScalarField& phi, const MAProblem& problem);
ScalarField linearized_apply(const ScalarField& psi, const MetricField& g_prime, double c);

/// Data F for which phi_star solves the family at parameter t (before renormalization).
ScalarField manufactured_data(const ScalarField& phi_star, Family family, double t,
                              const Herm2& background = Herm2::identity());

struct DirectionalCheck {
  double discrepancy = 0.0;  // sup |central difference - linearized_apply|
  double h = 0.0;
};

DirectionalCheck directional_derivative_check(const ScalarField& phi, const ScalarField& psi,
                                              const MAProblem& problem, double h);

}  // namespace kma
