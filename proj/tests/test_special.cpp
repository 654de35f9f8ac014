#include <doctest.h>

#include <cmath>
#include <random>

#include "copreg/special.hpp"

using namespace copreg;

TEST_CASE("normal cdf and quantile") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(norm_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-10));
  CHECK(norm_cdf(-1.0) + norm_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double p : {1e-10, 1e-4, 0.1, 0.5, 0.77, 0.9999, 1.0 - 1e-10}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
}

TEST_CASE("student t cdfs") {
  CHECK(t3_cdf(0.0) == doctest::Approx(0.5));
  CHECK(t4_cdf(0.0) == doctest::Approx(0.5));
  // standard 95% quantiles for 3 and 4 degrees of freedom
  CHECK(t3_cdf(2.353363435) == doctest::Approx(0.95).epsilon(1e-8));
  CHECK(t4_cdf(2.131846786) == doctest::Approx(0.95).epsilon(1e-8));
  CHECK(t3_cdf(-5.0) + t3_cdf(5.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double p : {0.001, 0.2, 0.5, 0.84, 0.999}) {
    CHECK(t3_cdf(t3_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  // numeric derivative of the cdf matches the t3 density
  double x = 0.7, h = 1e-5;
  double dens = (t3_cdf(x + h) - t3_cdf(x - h)) / (2 * h);
  double ref = std::tgamma(2.0) / (std::sqrt(3.0 * M_PI) * std::tgamma(1.5)) *
               std::pow(1.0 + x * x / 3.0, -2.0);
  CHECK(dens == doctest::Approx(ref).epsilon(1e-6));
}

static double bvn_oracle(double h, double k, double rho) {
  // conditioning route: int phi(x) Phi((k - rho x)/s) dx over (-inf, h]
  double s = std::sqrt(1.0 - rho * rho);
  auto f = [&](double x) {
    double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return phi * norm_cdf((k - rho * x) / s);
  };
  return gl_integrate(f, -9.0, h, 200);
}

TEST_CASE("bivariate normal cdf") {
  CHECK(bvn_cdf(0.0, 0.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(bvn_cdf(0.3, -0.7, 0.0) ==
        doctest::Approx(norm_cdf(0.3) * norm_cdf(-0.7)).epsilon(1e-10));
  CHECK(bvn_cdf(1.0, 2.0, 0.999999999) ==
        doctest::Approx(norm_cdf(1.0)).epsilon(1e-6));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> r(-0.999, 0.999);
  for (int i = 0; i < 200; ++i) {
    double h = u(rng), k = u(rng), rho = r(rng);
    CHECK(std::abs(bvn_cdf(h, k, rho) - bvn_oracle(h, k, rho)) < 1e-7);
    CHECK(bvn_cdf(h, k, rho) == doctest::Approx(bvn_cdf(k, h, rho)).epsilon(1e-12));
  }
}

static double bvt3_oracle(double h, double k, double rho) {
  // chi-square(3) scale mixture of the bivariate normal
  auto f = [&](double s) {
    double dens = std::sqrt(s) * std::exp(-0.5 * s) /
                  (std::sqrt(2.0 * M_PI));  // chi2_3 density
    double c = std::sqrt(s / 3.0);
    return dens * bvn_cdf(h * c, k * c, rho);
  };
  return gl_integrate(f, 1e-10, 60.0, 400);
}

TEST_CASE("bivariate t3 cdf") {
  // rho = 0 is not independence for the t (shared mixing variable), so
  // compare against the mixture oracle rather than a product
  CHECK(std::abs(bvt3_cdf(0.4, -1.2, 0.0) - bvt3_oracle(0.4, -1.2, 0.0)) <
        1e-6);
  CHECK(bvt3_cdf(60.0, 60.0, 0.3) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(bvt3_cdf(-60.0, 0.0, 0.3) == doctest::Approx(0.0).epsilon(1e-5));
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> r(-0.99, 0.99);
  for (int i = 0; i < 60; ++i) {
    double h = u(rng), k = u(rng), rho = r(rng);
    double ref = bvt3_oracle(h, k, rho);
    CHECK(std::abs(bvt3_cdf(h, k, rho) - ref) < 1e-6);
  }
}

TEST_CASE("debye function") {
  // series limit near zero and a standard reference value
  CHECK(debye1(1e-8) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(debye1(1.0) == doctest::Approx(0.7775046341122482).epsilon(1e-10));
  // (pi^2/6 - tail)/10 with tail = sum_k (10k+1) exp(-10k)/k^2
  CHECK(debye1(10.0) == doctest::Approx(0.1644434657).epsilon(1e-6));
}

TEST_CASE("incomplete gamma and chi-square survival") {
  for (double x : {0.1, 1.0, 3.0, 8.0}) {
    CHECK(chi2_sf(x, 2.0) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-10));
  }
  CHECK(chi2_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("kolmogorov-smirnov p-value") {
  std::size_t n = 10000;
  double p = ks_pvalue(1.358 / std::sqrt(double(n)), n);
  CHECK(p == doctest::Approx(0.05).epsilon(0.02));
  CHECK(ks_pvalue(0.5, 100) < 1e-10);
  CHECK(ks_pvalue(0.001, 100) > 0.999);
}

TEST_CASE("empirical kendall tau") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y{1, 2, 3, 4, 5};
  CHECK(kendall_tau(x, y) == doctest::Approx(1.0));
  std::vector<double> yr{5, 4, 3, 2, 1};
  CHECK(kendall_tau(x, yr) == doctest::Approx(-1.0));
  // hand-computed tau-b with ties
  std::vector<double> a{1, 1, 2, 3};
  std::vector<double> b{1, 2, 2, 3};
  // concordant: (1,1)-(2,2)? pairs: (a1,a2) tied in x; (a1,a3) c; (a1,a4) c;
  // (a2,a3) tied y; (a2,a4) c; (a3,a4) c  -> P=4, Q=0, Tx=1, Ty=1
  double expect = 4.0 / std::sqrt((6.0 - 1.0) * (6.0 - 1.0));
  CHECK(kendall_tau(a, b) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("gauss-legendre rules") {
  for (int n : {4, 16, 48, 96}) {
    const GaussLegendre& rule = gl_rule(n);
    double wsum = 0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));
  }
  // degree-7 polynomial is exact with 4 nodes
  auto poly = [](double x) { return 5 * std::pow(x, 7) - x * x * x + 2 * x * x + 1; };
  CHECK(gl_integrate(poly, -1.0, 1.0, 4) ==
        doctest::Approx(2.0 * (2.0 / 3.0 + 1.0)).epsilon(1e-13));
  CHECK(gl_integrate([](double x) { return std::exp(x); }, 0.0, 2.0, 24) ==
        doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-13));
}

TEST_CASE("kahan accumulator") {
  KahanSum s;
  for (int i = 0; i < 10000000; ++i) s.add(0.1);
  CHECK(s.value() == doctest::Approx(1e6).epsilon(1e-12));
}
