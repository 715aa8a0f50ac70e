#include "emspec/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "emspec/error.hpp"

namespace emspec {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = std::numbers::pi;
constexpr double kDamping = 0.5;
constexpr int kFixedPointCap = 10000;
constexpr int kNewtonCap = 200;
constexpr double kResidualTol = 1e-10;

void require_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be positive");
}

void require_coeff(double c) {
  if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("correlation coefficient must lie in [0, 1)");
}

// Self-consistency map F(G) and its derivative.
struct ResolventMap {
  cplx z;
  std::span<const double> xi;
  double kappa;
  double variance;

  cplx a(cplx g) const { return (variance / kappa) * (kappa - 1.0 + z * g); }

  cplx operator()(cplx g) const {
    const cplx scale = a(g);
    cplx sum = 0.0;
    for (double x : xi) sum += 1.0 / (z - scale * x);
    return sum / static_cast<double>(xi.size());
  }

  cplx derivative(cplx g) const {
    const cplx scale = a(g);
    const cplx da = variance * z / kappa;
    cplx sum = 0.0;
    for (double x : xi) {
      const cplx d = z - scale * x;
      sum += x * da / (d * d);
    }
    return sum / static_cast<double>(xi.size());
  }
};

double relative_residual(cplx g, cplx fg) { return std::abs(fg - g) / std::max(std::abs(g), 1e-300); }

bool herglotz(cplx g) { return g.imag() < 0.0 && std::isfinite(g.real()) && std::isfinite(g.imag()); }

ResolventResult damped_iteration(const ResolventMap& f, cplx g) {
  ResolventResult out;
  for (int it = 1; it <= kFixedPointCap; ++it) {
    const cplx fg = f(g);
    out.residual = relative_residual(g, fg);
    out.iterations = it;
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= kResidualTol) {
      out.value = fg;
      return out;
    }
    g = (1.0 - kDamping) * g + kDamping * fg;
  }
  out.value = g;
  return out;
}

ResolventResult newton(const ResolventMap& f, cplx g) {
  ResolventResult out;
  out.newton = true;
  for (int it = 1; it <= kNewtonCap; ++it) {
    const cplx h = g - f(g);
    out.iterations = it;
    out.residual = std::abs(h) / std::max(std::abs(g), 1e-300);
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= kResidualTol) {
      out.value = f(g);
      return out;
    }
    const cplx dh = 1.0 - f.derivative(g);
    cplx step = h / dh;
    // Backtrack until |h| decreases.
    const double h0 = std::abs(h);
    for (int k = 0; k < 30; ++k) {
      const cplx trial = g - step;
      if (std::abs(trial - f(trial)) < h0) break;
      step *= 0.5;
    }
    g -= step;
  }
  out.value = g;
  return out;
}

}  // namespace

SupportEdges mp_edges(double kappa, double variance) {
  require_kappa(kappa);
  const double r = 1.0 / std::sqrt(kappa);
  return {variance * (r - 1.0) * (r - 1.0), variance * (r + 1.0) * (r + 1.0)};
}

double mp_density(double lambda, double kappa, double variance) {
  const auto [lo, hi] = mp_edges(kappa, variance);
  if (!(lambda > lo && lambda < hi) || lambda <= 0.0) return 0.0;
  return kappa * std::sqrt((hi - lambda) * (lambda - lo)) / (2.0 * kPi * variance * lambda);
}

double mp_zero_mass(double kappa) { return std::max(1.0 - kappa, 0.0); }

ResolventResult cwoe_resolvent(const ResolventQuery& q, std::optional<cplx> start) {
  require_kappa(q.kappa);
  if (q.xi_spectrum.empty()) throw std::invalid_argument("resolvent needs a non-empty xi spectrum");
  if (!(q.epsilon >= 0.0)) throw std::invalid_argument("broadening epsilon must be nonnegative");
  for (double x : q.xi_spectrum) {
    if (!(x > 0.0)) throw std::invalid_argument("xi spectrum must be positive");
  }
  cplx w = q.z + cplx(0.0, q.epsilon);
  if (w.imag() == 0.0) throw std::invalid_argument("resolvent evaluation point must be off the real axis");
  const bool lower = w.imag() < 0.0;
  if (lower) {
    w = std::conj(w);
    if (start) start = std::conj(*start);
  }
  const ResolventMap f{w, q.xi_spectrum, q.kappa, q.variance};
  auto finish = [lower](ResolventResult r) {
    if (lower) r.value = std::conj(r.value);
    return r;
  };

  const cplx cold = 1.0 / w;
  ResolventResult fixed = damped_iteration(f, start.value_or(cold));
  if (fixed.residual <= kResidualTol && herglotz(fixed.value)) return finish(fixed);

  std::vector<cplx> seeds;
  if (std::isfinite(std::abs(fixed.value))) seeds.push_back(fixed.value);
  if (start) seeds.push_back(*start);
  seeds.push_back(cold);
  if (q.kappa < 1.0) seeds.push_back((1.0 - q.kappa) / w);
  seeds.push_back(cold - cplx(0.0, 1.0 / std::abs(w)));
  seeds.push_back(cplx(0.0, -1.0 / std::abs(w)));

  ResolventResult last = fixed;
  int total = fixed.iterations;
  for (const cplx& s : seeds) {
    ResolventResult r = newton(f, s);
    total += r.iterations;
    last = r;
    if (r.residual <= kResidualTol && herglotz(r.value)) {
      r.iterations = total;
      return finish(r);
    }
  }
  std::ostringstream msg;
  msg << "resolvent did not converge on the Herglotz branch at z = " << w << " (residual "
      << last.residual << " after " << total << " iterations)";
  throw SolverError(msg.str(), total, last.residual);
}

std::vector<ResolventResult> cwoe_resolvent_sweep(std::span<const double> lambdas,
                                                  const ResolventQuery& tmpl) {
  std::vector<ResolventResult> out;
  out.reserve(lambdas.size());
  std::optional<cplx> warm;
  for (double lambda : lambdas) {
    ResolventQuery q = tmpl;
    q.z = lambda;
    out.push_back(cwoe_resolvent(q, warm));
    warm = out.back().value;
  }
  return out;
}

double cwoe_density(double lambda, const ResolventQuery& tmpl, bool exclude_zero_mass) {
  if (!(tmpl.epsilon > 0.0)) throw std::invalid_argument("density needs a positive broadening");
  ResolventQuery q = tmpl;
  q.z = lambda;
  cplx g = cwoe_resolvent(q).value;
  if (exclude_zero_mass && tmpl.kappa < 1.0) g -= (1.0 - tmpl.kappa) / cplx(lambda, tmpl.epsilon);
  return -g.imag() / kPi;
}

std::vector<double> cwoe_density_grid(std::span<const double> lambdas, const ResolventQuery& tmpl,
                                      bool exclude_zero_mass) {
  if (!(tmpl.epsilon > 0.0)) throw std::invalid_argument("density needs a positive broadening");
  const auto results = cwoe_resolvent_sweep(lambdas, tmpl);
  std::vector<double> out(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    cplx g = results[i].value;
    if (exclude_zero_mass && tmpl.kappa < 1.0) {
      g -= (1.0 - tmpl.kappa) / cplx(lambdas[i], tmpl.epsilon);
    }
    out[i] = -g.imag() / kPi;
  }
  return out;
}

double default_broadening(std::span<const double> xi_spectrum, double kappa, double variance) {
  const double top = *std::max_element(xi_spectrum.begin(), xi_spectrum.end());
  return 1e-4 * mp_edges(kappa, variance * top).upper;
}

double element_moment(int horizon, double variance, int order, bool diagonal) {
  if (order < 1) throw std::invalid_argument("moment order must be at least 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const double half_t = 0.5 * horizon;
  if (diagonal) {
    const double log_m = order * std::log(2.0 * variance / horizon) + std::lgamma(order + half_t) -
                         std::lgamma(half_t);
    return std::exp(log_m);
  }
  if (order % 2 == 1) return 0.0;
  const int n = order / 2;
  const double log_m = order * std::log(variance / horizon) + std::lgamma(2.0 * n + 1.0) -
                       std::lgamma(n + 1.0) + std::lgamma(half_t + n) - std::lgamma(half_t);
  return std::exp(log_m);
}

double delta_m1_exact(int horizon, double alpha) {
  return alpha * (std::log(2.0 / horizon) + digamma(1.0 + 0.5 * horizon));
}

double delta_m2_exact(int horizon, int n_series, double alpha) {
  const double t = horizon;
  const double kappa = t / n_series;
  const double g = TheoryConstants::gamma_euler;
  const double a2 = alpha * alpha;
  const double diag_log = std::log(2.0 / t) + digamma(2.0 + 0.5 * t);
  const double diag = a2 * (1.0 + 2.0 / t) * (diag_log * diag_log + trigamma(2.0 + 0.5 * t));
  const double off_log = -std::log(t) + 1.0 - 0.5 * g + 0.5 * digamma(1.0 + 0.5 * t);
  const double off = (a2 / kappa) * (1.0 - 1.0 / n_series) *
                     (off_log * off_log + 0.25 * trigamma(1.0 + 0.5 * t) - 1.0 + kPi * kPi / 8.0);
  return diag + off;
}

MomentPair delta_m_asymptotic(int horizon, double kappa, double alpha) {
  const double l = std::log(static_cast<double>(horizon)) + TheoryConstants::c1;
  return {alpha / horizon, alpha * alpha / (4.0 * kappa) * (l * l + TheoryConstants::c2)};
}

SupportEdges ansatz_support(const AnsatzParams& p, double kappa) {
  require_kappa(kappa);
  const double root = 1.0 / std::sqrt(kappa);
  const double a = p.s * (root - 1.0) * (root - 1.0) + p.r;
  const double b = p.s * (root + 1.0) * (root + 1.0) + p.r;
  return {std::min(a, b), std::max(a, b)};
}

double ansatz_density(double x, const AnsatzParams& p, double kappa) {
  if (p.s == 0.0) throw std::domain_error("ansatz density needs a nonzero scale s");
  const auto [lo, hi] = ansatz_support(p, kappa);
  if (x < lo || x > hi) return 0.0;
  if (x == p.r) throw std::domain_error("ansatz density evaluated at its pole x = r");
  return kappa * std::sqrt((hi - x) * (x - lo)) / (2.0 * kPi * (x - p.r) * p.s);
}

MomentPair ansatz_moments(const AnsatzParams& p, double kappa) {
  require_kappa(kappa);
  const double s2 = (1.0 + 1.0 / kappa) * p.s * p.s;
  if (kappa >= 1.0) {
    const double m1 = p.s + p.r;
    return {m1, s2 - p.r * p.r + 2.0 * p.r * m1};
  }
  const double m1 = p.s + kappa * p.r;
  return {m1, s2 - kappa * p.r * p.r + 2.0 * p.r * m1};
}

AnsatzParams ansatz_invert(const MomentPair& m, double kappa) {
  require_kappa(kappa);
  const double radicand = kappa >= 1.0 ? kappa * (m.second - m.first * m.first)
                                       : m.second - m.first * m.first / kappa;
  if (radicand < 0.0) {
    std::ostringstream msg;
    msg << "negative radicand " << radicand << " in ansatz inversion (linear response breakdown)";
    throw std::domain_error(msg.str());
  }
  AnsatzParams p;
  p.s = -std::sqrt(radicand);
  p.r = kappa >= 1.0 ? m.first - p.s : (m.first - p.s) / kappa;
  return p;
}

AnsatzParams ansatz_asymptotic(int horizon, double alpha) {
  const double l = std::log(static_cast<double>(horizon)) + TheoryConstants::c1;
  const double root = std::sqrt(l * l + TheoryConstants::c2);
  return {-0.5 * alpha * root, alpha * (1.0 / horizon + 0.5 * root)};
}

MomentPair bulk_moment_extrapolation(double dm1, double dm2, double s, double kappa) {
  require_kappa(kappa);
  const double first = kappa * dm1 + s * (1.0 - kappa);
  return {first, kappa * dm2 - kappa * dm1 * dm1 + first * first / kappa};
}

MomentPair emerging_moments(double s, double kappa) {
  return {-s * (1.0 - kappa), s * s * (1.0 - kappa)};
}

std::vector<std::string> linear_response_warnings(int horizon, double kappa, double alpha) {
  std::vector<std::string> out;
  const double l = std::log(static_cast<double>(std::max(horizon, 1)));
  if (std::abs(alpha) * l * l > 0.1) {
    std::ostringstream msg;
    msg << "linear response unreliable: alpha*(ln T)^2 = " << std::abs(alpha) * l * l << " > 0.1";
    out.push_back(msg.str());
  }
  if (kappa < 0.1) out.push_back("linear response unreliable at small kappa (kappa < 0.1)");
  return out;
}

double oneblock_separated_position(int n_series, double kappa, double c) {
  const double nc = n_series * c;
  return (nc + 1.0 - c) * (nc * kappa + 1.0 - c) / (nc * kappa);
}

OneBlockDensity oneblock_density(double lambda, int n_series, double kappa, double c) {
  require_coeff(c);
  OneBlockDensity out;
  out.bulk = mp_density(lambda, kappa, 1.0 - c);
  if (c > 0.0 && c >= 1.0 / (n_series * std::sqrt(kappa))) {
    out.separated_position = oneblock_separated_position(n_series, kappa, c);
  }
  return out;
}

MomentPair oneblock_delta_moments(int horizon, double kappa, double c, double alpha) {
  require_coeff(c);
  const double w = 1.0 - c;
  const double first = alpha * w * std::log(w);
  const double l = std::log(static_cast<double>(horizon)) + TheoryConstants::c1 - 2.0 * std::log(w);
  return {first, first * first + alpha * alpha * w * w / (4.0 * kappa) * (l * l + TheoryConstants::c2)};
}

OneBlockAnsatz oneblock_ansatz(double dm1, double dm2, double c, double kappa) {
  require_coeff(c);
  require_kappa(kappa);
  const double w = 1.0 - c;
  const double radicand = kappa * (dm2 - dm1 * dm1) / (w * w);
  if (radicand < 0.0) {
    std::ostringstream msg;
    msg << "negative radicand " << radicand << " in one-block ansatz (linear response breakdown)";
    throw std::domain_error(msg.str());
  }
  OneBlockAnsatz out;
  out.params.s = -std::sqrt(radicand);
  out.params.r = dm1 - out.params.s * w;
  if (kappa >= 1.0) {
    out.bulk = {dm1, dm2};
  } else {
    const double first = kappa * dm1 + w * out.params.s * (1.0 - kappa);
    out.bulk = {first, kappa * dm2 - kappa * dm1 * dm1 + first * first / kappa};
  }
  return out;
}

MomentPair oneblock_ansatz_moments(const AnsatzParams& p, double c, double kappa) {
  require_coeff(c);
  require_kappa(kappa);
  const double m1 = 1.0 - c;
  const double m2 = m1 * m1 * (1.0 + 1.0 / kappa);
  const double k = kappa >= 1.0 ? 1.0 : kappa;
  return {p.s * m1 + k * p.r, m2 * p.s * p.s + k * p.r * p.r + 2.0 * p.s * p.r * m1};
}

double largest_correction_estimate(double lambda_max_mean, double alpha) {
  if (!(lambda_max_mean > 0.0)) throw std::invalid_argument("mean largest eigenvalue must be positive");
  return alpha * lambda_max_mean * std::log(lambda_max_mean * lambda_max_mean) / 2.0;
}

}  // namespace emspec
