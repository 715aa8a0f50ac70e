#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <doctest.h>

#include "emspec/ensembles.hpp"
#include "emspec/error.hpp"
#include "emspec/theory.hpp"

using namespace emspec;

namespace {

constexpr double kPi = std::numbers::pi;

double integrate(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b, 1e-12);
}

// E|X|^p = exp(g(p)); returns (f, f', f'') at p.
struct LogMoment {
  double f, d1, d2;
};

LogMoment diagonal_log_moment(double p, int t) {
  using boost::math::digamma, boost::math::trigamma;
  const double h = 0.5 * t;
  const double g = p * std::log(2.0 / t) + std::lgamma(p + h) - std::lgamma(h);
  const double g1 = std::log(2.0 / t) + digamma(p + h);
  const double g2 = trigamma(p + h);
  const double f = std::exp(g);
  return {f, f * g1, f * (g2 + g1 * g1)};
}

// Off-diagonal entry is |a| z / T with |a|^2 ~ chi2_T, z ~ N(0, 1).
LogMoment offdiagonal_log_moment(double p, int t) {
  using boost::math::digamma, boost::math::trigamma;
  const double h = 0.5 * t;
  const double g = -p * std::log(double(t)) + p * std::log(2.0) + std::lgamma(0.5 * (t + p)) - std::lgamma(h) +
                   std::lgamma(0.5 * (p + 1)) - 0.5 * std::log(kPi);
  const double g1 = -std::log(double(t)) + std::log(2.0) + 0.5 * digamma(0.5 * (t + p)) + 0.5 * digamma(0.5 * (p + 1));
  const double g2 = 0.25 * trigamma(0.5 * (t + p)) + 0.25 * trigamma(0.5 * (p + 1));
  const double f = std::exp(g);
  return {f, f * g1, f * (g2 + g1 * g1)};
}

// (1/N) E Tr(dC^2) for the first-order perturbation dC_jk = alpha C_jk ln|C_jk|.
double delta_m2_oracle(int t, int n, double alpha) {
  return alpha * alpha * (diagonal_log_moment(2.0, t).d2 + (n - 1) * offdiagonal_log_moment(2.0, t).d2);
}

// Closed-form Stieltjes transform of the Marchenko-Pastur law, Herglotz root.
std::complex<double> mp_resolvent(std::complex<double> z, double kappa) {
  const std::complex<double> b = kappa * z - kappa + 1.0;
  const std::complex<double> root = std::sqrt(b * b - 4.0 * kappa * z);
  const std::complex<double> g1 = (b + root) / (2.0 * z);
  const std::complex<double> g2 = (b - root) / (2.0 * z);
  return g1.imag() < 0.0 ? g1 : g2;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("marchenko-pastur edges and mass") {
  const auto e = mp_edges(0.5, 2.0);
  CHECK(e.lower == doctest::Approx(2.0 * std::pow(std::sqrt(2.0) - 1.0, 2)));
  CHECK(e.upper == doctest::Approx(2.0 * std::pow(std::sqrt(2.0) + 1.0, 2)));
  CHECK(mp_zero_mass(0.25) == 0.75);
  CHECK(mp_zero_mass(3.0) == 0.0);
  CHECK(mp_density(e.lower - 1e-9, 0.5, 2.0) == 0.0);
  CHECK(mp_density(e.upper + 1e-9, 0.5, 2.0) == 0.0);
  for (double kappa : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (double var : {1.0, 0.5}) {
      CAPTURE(kappa);
      const auto [a, b] = mp_edges(kappa, var);
      const auto rho = [&](double x) { return mp_density(x, kappa, var); };
      CHECK(integrate(rho, a, b) == doctest::Approx(std::min(kappa, 1.0)).epsilon(1e-9));
      CHECK(integrate([&](double x) { return x * rho(x); }, a, b) == doctest::Approx(var).epsilon(1e-9));
      CHECK(integrate([&](double x) { return x * x * rho(x); }, a, b) ==
            doctest::Approx(var * var * (1.0 + 1.0 / kappa)).epsilon(1e-9));
    }
  }
}

TEST_CASE("element moments") {
  CHECK(element_moment(10, 1.0, 1, true) == doctest::Approx(1.0));
  CHECK(element_moment(10, 1.0, 2, true) == doctest::Approx(1.0 + 2.0 / 10.0));
  CHECK(element_moment(10, 1.0, 1, false) == 0.0);
  CHECK(element_moment(10, 1.0, 2, false) == doctest::Approx(1.0 / 10.0));
  CHECK(element_moment(10, 2.0, 2, false) == doctest::Approx(4.0 / 10.0));
  CHECK(element_moment(8, 1.0, 4, false) == doctest::Approx(offdiagonal_log_moment(4.0, 8).f));
  CHECK(element_moment(7, 1.0, 3, true) == doctest::Approx(diagonal_log_moment(3.0, 7).f));
  CHECK_THROWS_AS(element_moment(10, 1.0, 0, true), std::invalid_argument);
}

TEST_CASE("first moment of the corrections") {
  for (int t : {2, 5, 10, 64, 512, 4096}) {
    CAPTURE(t);
    CHECK(delta_m1_exact(t, 1e-3) == doctest::Approx(1e-3 * diagonal_log_moment(1.0, t).d1).epsilon(1e-12));
  }
  CHECK(delta_m1_exact(2, 1e-3) == doctest::Approx(4.2278433509846715e-4).epsilon(1e-12));
  CHECK(delta_m1_exact(128, 1e-3) == doctest::Approx(7.7921554445643091e-6).epsilon(1e-12));
  CHECK(delta_m1_exact(512, 1e-3) == doctest::Approx(1.951853436185033e-6).epsilon(1e-12));
}

TEST_CASE("second moment of the corrections") {
  struct Frozen {
    int t, n;
    double value;
  };
  for (const auto& f : {Frozen{2, 4, 3.164430926291856e-6}, Frozen{10, 20, 1.8328349483864306e-6},
                        Frozen{128, 256, 8.9212520109824006e-6}, Frozen{512, 1024, 1.5620086869089798e-5},
                        Frozen{100, 50, 1.9681051861624017e-6}}) {
    CAPTURE(f.t);
    CHECK(delta_m2_exact(f.t, f.n, 1e-3) == doctest::Approx(f.value).epsilon(1e-12));
    CHECK(delta_m2_oracle(f.t, f.n, 1e-3) == doctest::Approx(f.value).epsilon(1e-10));
  }
}

TEST_CASE("asymptotic moments approach the exact ones") {
  const int n = 1 << 16;
  for (int t : {1024, 4096, 16384}) {
    const double kappa = double(t) / n;
    const auto a = delta_m_asymptotic(t, kappa, 1e-3);
    CHECK(a.first == doctest::Approx(delta_m1_exact(t, 1e-3)).epsilon(2.0 / t));
    CHECK(a.second == doctest::Approx(delta_m2_exact(t, n, 1e-3)).epsilon(0.01));
  }
}

TEST_CASE("ansatz round trip") {
  for (double kappa : {0.2, 0.5, 1.0, 1.7, 4.0}) {
    for (const AnsatzParams p : {AnsatzParams{-1e-3, 2e-3}, AnsatzParams{-2.5e-4, -1e-4}, AnsatzParams{3e-3, 1e-3}}) {
      CAPTURE(kappa);
      const auto m = ansatz_moments(p, kappa);
      const auto back = ansatz_invert(m, kappa);
      const double sign = p.s < 0 ? 1.0 : -1.0;
      if (sign > 0) {
        CHECK(std::abs(back.s - p.s) <= 1e-12 * std::abs(p.s));
        CHECK(std::abs(back.r - p.r) <= 1e-12 * std::max(std::abs(p.r), std::abs(p.s)));
      }
      CHECK(std::abs(ansatz_moments(back, kappa).first - m.first) <= 1e-12 * std::abs(m.first) + 1e-18);
    }
  }
  CHECK_THROWS_AS(ansatz_invert({1.0, 0.5}, 2.0), std::domain_error);
  CHECK_THROWS_AS(ansatz_invert({1.0, 0.5}, 0.5), std::domain_error);
}

TEST_CASE("ansatz branches agree at kappa = 1") {
  const MomentPair m{1e-4, 4e-6};
  const auto a = ansatz_invert(m, 1.0);
  const auto b = ansatz_invert(m, std::nextafter(1.0, 0.0));
  CHECK(a.s == doctest::Approx(b.s).epsilon(1e-12));
  CHECK(a.r == doctest::Approx(b.r).epsilon(1e-12));
}

TEST_CASE("ansatz density integrates to its moments") {
  for (double kappa : {0.5, 1.0, 2.0}) {
    for (const AnsatzParams p : {AnsatzParams{-1e-3, 2e-3}, AnsatzParams{2e-3, 5e-4}}) {
      CAPTURE(kappa);
      const auto [a, b] = ansatz_support(p, kappa);
      CHECK(a < b);
      const auto rho = [&](double x) { return ansatz_density(x, p, kappa); };
      const auto m = ansatz_moments(p, kappa);
      const double scale = std::abs(p.s) + std::abs(p.r);
      CHECK(integrate(rho, a, b) == doctest::Approx(std::min(kappa, 1.0)).epsilon(1e-8));
      CHECK(integrate([&](double x) { return x * rho(x); }, a, b) / scale ==
            doctest::Approx(m.first / scale).epsilon(1e-8));
      CHECK(integrate([&](double x) { return x * x * rho(x); }, a, b) / (scale * scale) ==
            doctest::Approx(m.second / (scale * scale)).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(ansatz_density(0.0, {0.0, 0.0}, 1.0), std::domain_error);
}

TEST_CASE("ansatz asymptotic parameters reproduce the asymptotic moments") {
  for (int t : {64, 256, 1024}) {
    const auto p = ansatz_asymptotic(t, 1e-3);
    CHECK(p.s < 0.0);
    // the direct inversion keeps the (alpha/T)^2 term that the asymptotic form drops
    const auto direct = ansatz_invert(delta_m_asymptotic(t, 1.0, 1e-3), 1.0);
    CHECK(std::abs(p.s - direct.s) <= 1e-3 * 1e-3 / (double(t) * t) / std::abs(p.s));
    CHECK(std::abs(p.r - direct.r) <= 1e-3 * 1e-3 / (double(t) * t) / std::abs(p.s));
  }
}

TEST_CASE("bulk extrapolation continues the full-rank ansatz") {
  for (double kappa : {0.2, 0.5, 0.9}) {
    const auto p = ansatz_asymptotic(256, 1e-3);
    // full-rank ansatz moments evaluated at kappa < 1
    const double dm1 = p.s + p.r;
    const double dm2 = (1.0 + 1.0 / kappa) * p.s * p.s - p.r * p.r + 2.0 * p.r * dm1;
    const auto bulk = bulk_moment_extrapolation(dm1, dm2, p.s, kappa);
    const auto fwd = ansatz_moments(p, kappa);
    CHECK(bulk.first == doctest::Approx(fwd.first).epsilon(1e-12));
    CHECK(bulk.second == doctest::Approx(fwd.second).epsilon(1e-12));
    const auto back = ansatz_invert(bulk, kappa);
    CHECK(back.s == doctest::Approx(p.s).epsilon(1e-10));
    CHECK(back.r == doctest::Approx(p.r).epsilon(1e-10));
    const auto em = emerging_moments(p.s, kappa);
    CHECK(em.first == doctest::Approx(-p.s * (1.0 - kappa)));
    CHECK(em.second == doctest::Approx(p.s * p.s * (1.0 - kappa)));
  }
}

TEST_CASE("linear response warnings") {
  CHECK(linear_response_warnings(256, 0.5, 1e-3).empty());
  const auto w = linear_response_warnings(256, 0.05, 1e-3);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("small kappa") != std::string::npos);
  CHECK(linear_response_warnings(1000, 1.0, 0.5).size() == 1);
}

TEST_CASE("one-block population") {
  CHECK(oneblock_separated_position(1024, 0.5, 0.5) == doctest::Approx(513.50097656250).epsilon(1e-14));
  const auto d = oneblock_density(1.0, 1024, 0.5, 0.5);
  CHECK(d.separated_position);
  CHECK(d.bulk == doctest::Approx(mp_density(1.0, 0.5, 0.5)));
  CHECK_FALSE(oneblock_density(1.0, 100, 1.0, 0.001).separated_position);
  CHECK(oneblock_density(1.0, 100, 1.0, 0.01).separated_position);

  const auto m = oneblock_delta_moments(512, 0.5, 0.3, 1e-3);
  CHECK(m.first == doctest::Approx(1e-3 * 0.7 * std::log(0.7)));
  const auto a = oneblock_ansatz(m.first, m.second, 0.3, 2.0);
  const auto f = oneblock_ansatz_moments(a.params, 0.3, 2.0);
  CHECK(f.first == doctest::Approx(m.first).epsilon(1e-12));
  CHECK(f.second == doctest::Approx(m.second).epsilon(1e-12));
  CHECK(a.bulk.first == m.first);

  const auto b = oneblock_ansatz(m.first, m.second, 0.3, 0.5);
  const auto fb = oneblock_ansatz_moments(b.params, 0.3, 0.5);
  CHECK(fb.first == doctest::Approx(b.bulk.first).epsilon(1e-12));
  CHECK(fb.second == doctest::Approx(b.bulk.second).epsilon(1e-12));

  CHECK(largest_correction_estimate(500.0, 1e-3) == doctest::Approx(0.5e-3 * 500.0 * std::log(250000.0)));
}

TEST_CASE("resolvent reduces to marchenko-pastur for xi = I") {
  const std::vector<double> ones(64, 1.0);
  for (double kappa : {0.5, 2.0}) {
    ResolventQuery q;
    q.xi_spectrum = ones;
    q.kappa = kappa;
    q.epsilon = 1e-6;
    const auto [a, b] = mp_edges(kappa);
    for (int i = 0; i <= 40; ++i) {
      const double x = 1.2 * b * i / 40.0 + 1e-3;
      CAPTURE(kappa);
      CAPTURE(x);
      q.z = x;
      const auto g = cwoe_resolvent(q).value;
      CHECK(std::abs(g - mp_resolvent({x, q.epsilon}, kappa)) <= 1e-8 * std::abs(g));
      const double pole = mp_zero_mass(kappa) * q.epsilon / (kPi * (x * x + q.epsilon * q.epsilon));
      const double smoothed = -mp_resolvent({x, q.epsilon}, kappa).imag() / kPi - pole;
      CHECK(std::abs(cwoe_density(x, q, true) - smoothed) <= 3.0 * q.epsilon / kPi);
    }
    // away from the edges the broadening error is O(eps)
    for (int i = 2; i < 19; ++i) {
      const double x = a + (b - a) * i / 20.0;
      CAPTURE(x);
      CHECK(std::abs(cwoe_density(x, q, true) - mp_density(x, kappa)) <= 20.0 * q.epsilon);
    }
  }
}

TEST_CASE("resolvent stays on the herglotz branch") {
  const auto xi = build_banded(128, 0.5);
  const std::vector<double> spec(xi.spectrum.data(), xi.spectrum.data() + xi.spectrum.size());
  ResolventQuery q;
  q.xi_spectrum = spec;
  q.kappa = 0.5;
  q.epsilon = default_broadening(spec, 0.5);
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(1e-3 + 20.0 * i / 200.0);
  const auto sweep = cwoe_resolvent_sweep(grid, q);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CAPTURE(grid[i]);
    CHECK(sweep[i].value.imag() < 0.0);
    q.z = grid[i];
    const auto cold = cwoe_resolvent(q);
    CHECK(std::abs(cold.value - sweep[i].value) <= 1e-7 * std::abs(cold.value));
  }
  // total mass of the nonzero spectrum
  const auto rho = [&](double x) { return cwoe_density(x, q, true); };
  double mass = 0.0;
  const int m = 4000;
  const double hi = 25.0;
  for (int i = 0; i < m; ++i) mass += rho((i + 0.5) * hi / m) * hi / m;
  CHECK(mass == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("resolvent input checks") {
  const std::vector<double> ones(4, 1.0);
  ResolventQuery q;
  q.xi_spectrum = ones;
  q.kappa = -1.0;
  q.z = 1.0;
  q.epsilon = 1e-3;
  CHECK_THROWS_AS(cwoe_resolvent(q), std::invalid_argument);
  q.kappa = 1.0;
  q.xi_spectrum = {};
  CHECK_THROWS_AS(cwoe_resolvent(q), std::invalid_argument);
}

}
