#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emspec/special_functions.hpp"
#include "emspec/spectral.hpp"

namespace emspec {

// ---------------------------------------------------------------------------
// Marchenko-Pastur law
// ---------------------------------------------------------------------------

struct SupportEdges {
  double lower = 0.0;
  double upper = 0.0;
};

/// variance * (kappa^{-1/2} -+ 1)^2.
SupportEdges mp_edges(double kappa, double variance = 1.0);

/// Continuous part of the limiting density of C = A A^t / T. Integrates to
/// min(kappa, 1); the remaining mass sits at zero (see mp_zero_mass).
double mp_density(double lambda, double kappa, double variance = 1.0);

/// max(1 - kappa, 0).
double mp_zero_mass(double kappa);

// ---------------------------------------------------------------------------
// Correlated Wishart resolvent
// ---------------------------------------------------------------------------

/// Evaluation point z + i*epsilon of the averaged resolvent
/// G(z) = < 1 / (z - (variance/kappa) (kappa - 1 + z G) xi) >,
/// the average running over xi_spectrum. The spectrum is viewed, not copied.
struct ResolventQuery {
  std::complex<double> z;
  double epsilon = 0.0;
  std::span<const double> xi_spectrum;
  double kappa = 1.0;
  double variance = 1.0;
};

struct ResolventResult {
  std::complex<double> value;
  int iterations = 0;
  double residual = 0.0;
  bool newton = false;  // true if the damped iteration alone did not settle
};

/// Solves the self-consistency for G on the Herglotz branch
/// (Im G < 0 when Im z > 0).
///
/// A damped fixed-point iteration G <- G/2 + F(G)/2 runs first, starting at
/// `start` or 1/z. Near the origin for kappa < 1 the physical root repels that
/// iteration, so if it fails to settle on the Herglotz branch Newton's method
/// is run from a list of seeds. Throws SolverError if no seed converges.
ResolventResult cwoe_resolvent(const ResolventQuery& q,
                               std::optional<std::complex<double>> start = std::nullopt);

/// Resolvent along real points lambda_i + i*epsilon, warm-starting each point
/// from its neighbour.
std::vector<ResolventResult> cwoe_resolvent_sweep(std::span<const double> lambdas,
                                                  const ResolventQuery& tmpl);

/// -Im G(lambda + i eps) / pi. With exclude_zero_mass the pole (1-kappa)/z of
/// the zero eigenvalues is removed first, leaving the density of the nonzero
/// spectrum. tmpl.z is ignored.
double cwoe_density(double lambda, const ResolventQuery& tmpl, bool exclude_zero_mass = false);
std::vector<double> cwoe_density_grid(std::span<const double> lambdas, const ResolventQuery& tmpl,
                                      bool exclude_zero_mass = false);

/// 1e-4 * variance * max(xi) * (kappa^{-1/2} + 1)^2.
double default_broadening(std::span<const double> xi_spectrum, double kappa, double variance = 1.0);

// ---------------------------------------------------------------------------
// Linear response of the power map, uncorrelated ensemble
// ---------------------------------------------------------------------------

/// E[(C_jk)^order] for C = A A^t / T with N(0, variance) entries.
/// Off-diagonal odd moments vanish. Throws std::invalid_argument for order < 1.
double element_moment(int horizon, double variance, int order, bool diagonal);

/// alpha [ln(2/T) + psi(1 + T/2)].
double delta_m1_exact(int horizon, double alpha);

/// Second correction moment, exact to order alpha^2.
double delta_m2_exact(int horizon, int n_series, double alpha);

/// (alpha / T, (alpha^2 / 4 kappa) ([ln T + c1]^2 + c2)).
MomentPair delta_m_asymptotic(int horizon, double kappa, double alpha);

/// Scale s and shift r of the rescaled Marchenko-Pastur ansatz for the
/// density of the nonzero-eigenvalue corrections.
struct AnsatzParams {
  double s = 0.0;
  double r = 0.0;
};

/// kappa sqrt((b - x)(x - a)) / (2 pi (x - r) s) on the support with edges
/// s (kappa^{-1/2} -+ 1)^2 + r, ordered by value; zero outside.
/// Throws std::domain_error at the pole x = r inside the support, or s = 0.
double ansatz_density(double x, const AnsatzParams& p, double kappa);

/// Support of ansatz_density, ordered by value.
SupportEdges ansatz_support(const AnsatzParams& p, double kappa);

/// Forward map (s, r) -> first two moments of the ansatz density. For
/// kappa >= 1 these are the total moments, for kappa < 1 the bulk moments.
MomentPair ansatz_moments(const AnsatzParams& p, double kappa);

/// Inverse of ansatz_moments. `moments` are the total moments for kappa >= 1
/// and the bulk moments for kappa < 1; both branches agree at kappa = 1.
/// Throws std::domain_error if the radicand is negative, which signals that
/// the linear-response description has broken down.
AnsatzParams ansatz_invert(const MomentPair& moments, double kappa);

/// Large-T (s, r) from delta_m_asymptotic; independent of N.
AnsatzParams ansatz_asymptotic(int horizon, double alpha);

/// Bulk moments for kappa <= 1 from the total moments and the scale s.
MomentPair bulk_moment_extrapolation(double dm1, double dm2, double s, double kappa);

/// Emerging-spectrum moments for kappa <= 1: (-s(1-kappa), s^2(1-kappa)).
MomentPair emerging_moments(double s, double kappa);

/// Warnings when the linear-response formulas are outside their useful
/// range: alpha (ln T)^2 > 0.1 or kappa < 0.1. Empty when none apply.
std::vector<std::string> linear_response_warnings(int horizon, double kappa, double alpha);

// ---------------------------------------------------------------------------
// One-block correlated ensemble, xi_jk = delta_jk + (1 - delta_jk) c
// ---------------------------------------------------------------------------

struct OneBlockDensity {
  double bulk = 0.0;
  std::optional<double> separated_position;  // present iff c >= 1 / (N sqrt(kappa))
};

OneBlockDensity oneblock_density(double lambda, int n_series, double kappa, double c);

/// Position (Nc+1-c)(Nc kappa+1-c)/(Nc kappa) of the separated eigenvalue.
double oneblock_separated_position(int n_series, double kappa, double c);

/// Large-T total correction moments.
MomentPair oneblock_delta_moments(int horizon, double kappa, double c, double alpha);

struct OneBlockAnsatz {
  AnsatzParams params;
  MomentPair bulk;  // extrapolated nonzero-eigenvalue correction moments
};

/// (s, r) from the total correction moments, then the bulk moments
/// extrapolated to kappa <= 1 (equal to the totals for kappa >= 1).
/// Throws std::domain_error on a negative radicand.
OneBlockAnsatz oneblock_ansatz(double dm1, double dm2, double c, double kappa);

/// Forward map of the one-block ansatz with bulk moments m1 = 1-c and
/// m2 = (1-c)^2 (1 + 1/kappa).
MomentPair oneblock_ansatz_moments(const AnsatzParams& p, double c, double kappa);

/// alpha * lambda * ln(lambda^2) / 2 for the mean largest eigenvalue lambda.
double largest_correction_estimate(double lambda_max_mean, double alpha);

}  // namespace emspec
