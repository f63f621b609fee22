#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kma/continuity.hpp"
#include "kma/report.hpp"

namespace kma {

// ------------------------------------------------------------------ third derivatives

/// |S|^2 with S^i_{jk} = g'^{i lbar} d_j d_k d_lbar phi (flat background, so no Christoffel term),
/// |S|^2 = g'^{j kbar} g'^{a bbar} g'_{p qbar} S^p_{ja} conj(S^q_{kb}).
ScalarField s_tensor_norm_squared(const ScalarField& phi, const MetricField& g_prime);
/// sup |S| refined on the trigonometric interpolant of |S|^2.
double sup_s_tensor(const ScalarField& phi, const MAProblem& problem);

struct C3Result {
  double sup_S = 0.0;
  double sup_S_refined = 0.0;  // phi upsampled by 2
  EstimateReport report;
};
/// Resolution stability |sup_S(N) - sup_S(2N)| < 1e-4 (1 + sup_S), plus the report-only
/// differential inequality Delta'|S|^2 >= -C |S|^2 - C with the smallest pointwise C.
/// Without `refine` the stability entry is emitted as report-only with sup_S_refined = NaN.
C3Result c3_tensor(const ScalarField& phi, const MAProblem& problem, bool refine = true);

// ------------------------------------------------------------------ energy identity

struct EnergyTerms {
  double lhs = 0.0;    // -int phi (w_phi^n - w^n), w_phi = w + i dd phi
  double rhs = 0.0;    // sum_k int i dphi ^ dbar phi ^ w_phi^k ^ w^{n-1-k}
  double lower = 0.0;  // (1/n) int |dphi|^2 w^n
  double scale = 0.0;  // int |phi (w_phi^n - w^n)| + rhs
  double error() const { return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0; }
};
EnergyTerms energy_terms(const ScalarField& phi, const Herm2& background = Herm2::identity());
/// Entries energy_identity (|lhs - rhs| <= 1e-9 scale) and energy_lower_bound (rhs >= lower - 1e-10).
EstimateReport energy_identity(const ScalarField& phi, const Herm2& background = Herm2::identity());

// ------------------------------------------------------------------ C0 and C2

/// sup|phi_t| <= t sup|F| + 1e-8 for each record of a NegC1 path.
EstimateReport c0_max_principle(const ContinuityPath& path);
/// sup|phi*| <= sup|forward_density(phi*) - phi*|, no solve involved.
EstimateEntry c0_manufactured_check(const ScalarField& phi_star, const Herm2& background = Herm2::identity());

struct EllipticityConstants {
  double lambda = 1.0;     // max(lambda_max(g' g^-1), lambda_max(g g'^-1))
  double condition = 1.0;  // max lambda_max(g' g^-1) / min lambda_min(g' g^-1)
};
EllipticityConstants ellipticity(const MetricField& g_prime, const Herm2& background);

/// Entry Lambda < ceiling over all records, with Lambda, the condition number and the constant
/// chain C1 = e^{2 sup|F|}, A = B + C + 1 (B = 0, C = (n - inf Delta F)/n^2), C2 = (A n)^{n-1} C1.
EstimateReport c2_bounds(const ContinuityPath& path, double ceiling = 1e6);

// ------------------------------------------------------------------ log-trace inequality

struct Lemma36Result {
  double min_margin = 0.0;  // min over grid of LHS - RHS
  std::size_t argmin = 0;
  EstimateEntry entry;
};
/// Delta' log tr_g g' >= -B tr_g' g - g^{j kbar} R'_{j kbar} / tr_g g' on the grid.
/// Passes iff min margin >= -tol.
Lemma36Result lemma36_inequality(const ScalarField& phi, const MAProblem& problem,
                                 std::optional<double> B_override = std::nullopt, double tol = 1e-6);

// ------------------------------------------------------------------ Moser ladder

struct MoserResult {
  double alpha = 0.0, beta = 0.0, delta = 0.0;
  std::vector<double> exponents;  // p_k = 2 beta delta^k
  std::vector<double> norms;      // ||phi~||_{L^{p_k}}, volume normalized to 1
  double sup = 0.0;               // ||phi~||_inf on the grid
  double c_star = 0.0;
  EstimateReport report;
};
/// phi~ = 1 - (phi - sup phi) after the mean-zero gauge. Requires q > n.
MoserResult moser_ladder(const ScalarField& phi, double q, int K = 12);

// ------------------------------------------------------------------ sweeps and solves

struct SweepRow {
  double amplitude = 0.0;
  double lq_norm = 0.0;  // ||e^F||_{L^q}, volume normalized
  double sup_phi = 0.0;
  double ratio = 0.0;    // sup|phi| / ||e^F||_{L^q}
  std::string error;     // empty on success
};
struct SweepResult {
  std::vector<SweepRow> rows;
  EstimateReport report;
};
/// CY solves of a F_base for each amplitude a; each ratio must stay below 10x the ratio of the
/// smallest successful nonzero amplitude.
SweepResult lp_sweep(const ScalarField& F_base, const std::vector<double>& amplitudes, double q,
                     const NewtonConfig& cfg = {});

/// Two solves from phi = 0 and from a seeded random cone-interior field; stddev of the
/// difference (gauged) or its sup (NegC1, Fano) below 1e-8.
EstimateEntry uniqueness_check(const MAProblem& problem, const NewtonConfig& cfg = {}, std::uint64_t seed = 7);

/// Largest entry of Ric(g') + dd(source - c phi), which vanishes on exact solutions of every
/// family, evaluated on phi upsampled by `upsample_factor` (1 = on the grid).
double prescribed_ricci_residual(const ScalarField& phi, const MAProblem& problem, int upsample_factor = 2);
EstimateEntry prescribed_ricci_check(const ScalarField& phi, const MAProblem& problem, double tol = 1e-7,
                                     int upsample_factor = 2);

/// |int det(g')/det(g) - vol| / vol <= 1e-10.
EstimateEntry volume_conservation_check(const ScalarField& phi, const Herm2& background, const std::string& name);

// ------------------------------------------------------------------ aggregate

struct VerifyOptions {
  double q = -1.0;  // Moser exponent; <= 0 selects n + 1
  double lambda_ceiling = 1e6;
  bool uniqueness = true;
  NewtonConfig newton;
};
/// Every verifier applicable to the family of the path, evaluated on its records; sorted by name.
EstimateReport verify_path(const ContinuityPath& path, const VerifyOptions& opts = {});

}  // namespace kma
