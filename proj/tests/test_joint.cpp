#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "copreg/model.hpp"
#include "copreg/poisson.hpp"
#include "copreg/special.hpp"

using namespace copreg;

namespace {

// independent route: difference the copula at the four Poisson cdf corners
double pmf_by_differencing(const CopulaSpec& spec, double theta, double l1,
                           double l2, int y1, int y2) {
  double a1 = poisson_cdf(l1, y1), a0 = poisson_cdf(l1, y1 - 1);
  double b1 = poisson_cdf(l2, y2), b0 = poisson_cdf(l2, y2 - 1);
  return copula_cdf(spec, theta, a1, b1) - copula_cdf(spec, theta, a0, b1) -
         copula_cdf(spec, theta, a1, b0) + copula_cdf(spec, theta, a0, b0);
}

FitProblem small_problem(Family family, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::poisson_distribution<int> pois(2.0);
  FitProblem prob;
  prob.copula = CopulaSpec{family};
  prob.X1.resize(n, 2);
  prob.X2.resize(n, 2);
  prob.y1.resize(n);
  prob.y2.resize(n);
  for (int i = 0; i < n; ++i) {
    prob.X1(i, 0) = 1.0;
    prob.X1(i, 1) = unif(rng);
    prob.X2(i, 0) = 1.0;
    prob.X2(i, 1) = unif(rng);
    prob.y1(i) = pois(rng);
    prob.y2(i) = pois(rng);
  }
  prob.names1 = {"(Intercept)", "x1"};
  prob.names2 = {"(Intercept)", "x2"};
  return prob;
}

}  // namespace

TEST_CASE("joint pmf sums to one on the grid") {
  for (Family f : all_families()) {
    CopulaSpec spec{f};
    double theta = 0.0;
    if (spec.has_theta()) {
      Interval r = spec.tau_range();
      double tau = (r.lo < -0.1) ? -0.3 : 0.3;
      tau = std::clamp(tau, r.lo + 0.05, r.hi - 0.05);
      theta = theta_from_tau(spec, tau);
    }
    KahanSum total;
    for (int y1 = 0; y1 <= 60; ++y1) {
      for (int y2 = 0; y2 <= 60; ++y2) {
        total.add(joint_pmf(spec, theta, 1.5, 3.0, y1, y2));
      }
    }
    CHECK(total.value() > 1.0 - 1e-8);
    CHECK(total.value() < 1.0 + 1e-10);
  }
}

TEST_CASE("independence copula factorizes") {
  CopulaSpec indep{Family::Indep};
  for (int y1 : {0, 1, 4}) {
    for (int y2 : {0, 2, 7}) {
      CHECK(joint_pmf(indep, 0.0, 1.2, 2.5, y1, y2) ==
            doctest::Approx(poisson_pmf(1.2, y1) * poisson_pmf(2.5, y2))
                .epsilon(1e-13));
    }
  }
}

TEST_CASE("joint pmf matches corner differencing") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> lam(0.5, 4.0);
  for (Family f : {Family::N, Family::T, Family::F, Family::C0, Family::C90,
                   Family::G180, Family::J270, Family::FGM, Family::AMH,
                   Family::PL}) {
    CopulaSpec spec{f};
    Interval r = spec.tau_range();
    double tau = (r.lo < -0.1) ? -0.25 : 0.25;
    tau = std::clamp(tau, r.lo + 0.05, r.hi - 0.05);
    double theta = theta_from_tau(spec, tau);
    for (int rep = 0; rep < 10; ++rep) {
      double l1 = lam(rng), l2 = lam(rng);
      for (int y1 = 1; y1 <= 4; ++y1) {
        for (int y2 = 1; y2 <= 4; ++y2) {
          double direct = pmf_by_differencing(spec, theta, l1, l2, y1, y2);
          CHECK(std::abs(joint_pmf(spec, theta, l1, l2, y1, y2) - direct) <
                1e-12);
        }
      }
    }
  }
}

TEST_CASE("negative counts are rejected") {
  CHECK_THROWS_AS(joint_pmf(CopulaSpec{Family::N}, 0.3, 1.0, 1.0, -1, 0),
                  std::domain_error);
  CHECK_THROWS_AS(joint_pmf(CopulaSpec{Family::Indep}, 0.0, 1.0, 1.0, 0, -2),
                  std::domain_error);
}

TEST_CASE("penalty matrix structure") {
  int p = 2, q = p + 1;
  PenaltyConfig cfg;
  cfg.xi = 10.0;
  cfg.weights = Eigen::VectorXd::Zero(q);
  cfg.weights << 1.0, 0.5, 2.0;
  Eigen::MatrixXd S = build_penalty(p, cfg);
  int k = 2 * q + 1;
  REQUIRE(S.rows() == k);
  REQUIRE(S.cols() == k);
  CHECK((S - S.transpose()).norm() == doctest::Approx(0.0));
  // the dependence-parameter slot is unpenalized
  CHECK(S.row(k - 1).norm() == doctest::Approx(0.0));
  CHECK(S.col(k - 1).norm() == doctest::Approx(0.0));
  // quadratic form equals the weighted squared coefficient differences
  std::mt19937 rng(5);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd b(k);
    for (int j = 0; j < k; ++j) b(j) = norm(rng);
    double expect = 0.0;
    for (int j = 0; j < q; ++j) {
      double d = b(j) - b(q + j);
      expect += cfg.xi * cfg.weights(j) * d * d;
    }
    CHECK(0.5 * b.dot(S * b) == doctest::Approx(0.5 * expect).epsilon(1e-12));
  }
  // tiny weights are floored rather than dropped
  PenaltyConfig floored;
  floored.xi = 4.0;
  floored.weights = Eigen::VectorXd::Zero(1);
  floored.weight_floor = 1e-8;
  Eigen::MatrixXd Sf = build_penalty(0, floored);
  CHECK(Sf(0, 0) == doctest::Approx(4e-8).epsilon(1e-12));
  PenaltyConfig bad;
  bad.weights = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(build_penalty(2, bad), std::invalid_argument);
}

TEST_CASE("coefficient packing round trip") {
  CoefBlock b;
  b.beta1 = Eigen::Vector2d(0.3, -1.2);
  b.beta2 = Eigen::Vector3d(0.1, 0.0, 2.0);
  b.eta_theta = 0.7;
  Eigen::VectorXd v = b.pack();
  REQUIRE(v.size() == 6);
  CoefBlock back = CoefBlock::unpack(v, 2, 3);
  CHECK((back.beta1 - b.beta1).norm() == doctest::Approx(0.0));
  CHECK((back.beta2 - b.beta2).norm() == doctest::Approx(0.0));
  CHECK(back.eta_theta == doctest::Approx(0.7));
  CHECK_THROWS_AS(CoefBlock::unpack(v, 3, 3), std::invalid_argument);
}

TEST_CASE("gradient matches finite differences of the objective") {
  for (Family f : {Family::Indep, Family::F, Family::C0, Family::N}) {
    FitProblem prob = small_problem(f, 40, 900 + int(f));
    PenaltyConfig cfg;
    cfg.xi = 3.0;
    cfg.weights = Eigen::VectorXd::Ones(2);
    Eigen::MatrixXd S = build_penalty(1, cfg);

    CoefBlock beta;
    beta.beta1 = Eigen::Vector2d(0.4, 0.2);
    beta.beta2 = Eigen::Vector2d(0.3, -0.1);
    beta.eta_theta = prob.copula.has_theta() ? 0.4 : 0.0;
    if (f == Family::C0) beta.eta_theta = -0.5;

    Derivatives d = gradient_and_hessian(prob, beta, S);
    int k = prob.k();
    double h = 1e-5;
    Eigen::VectorXd packed = beta.pack();
    for (int j = 0; j < k; ++j) {
      if (j == k - 1 && !prob.copula.has_theta()) continue;
      Eigen::VectorXd vp = packed, vm = packed;
      vp(j) += h;
      vm(j) -= h;
      double fp = penalized_objective(
          prob, CoefBlock::unpack(vp, prob.q1(), prob.q2()), S);
      double fm = penalized_objective(
          prob, CoefBlock::unpack(vm, prob.q1(), prob.q2()), S);
      double fd = (fp - fm) / (2.0 * h);
      CHECK(std::abs(d.gradient(j) - fd) <
            1e-3 * (1.0 + std::abs(fd)));
    }
    CHECK((d.hessian - d.hessian.transpose()).norm() <
          1e-10 * (1.0 + d.hessian.norm()));
  }
}
