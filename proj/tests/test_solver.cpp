#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "copreg/simlab.hpp"
#include "copreg/solver.hpp"

using namespace copreg;

namespace {

FitProblem study_data(Family family, double tau, int n, unsigned long long s) {
  Eigen::VectorXd b1(4), b2(4);
  b1 << 0.5, 0.2, -0.2, 0.0;
  b2 << 0.2, -0.3, 0.1, 0.5;
  std::mt19937_64 rng(s);
  return make_study_problem(family, tau, n, b1, b2, rng);
}

}  // namespace

TEST_CASE("trust region solves a quadratic quickly") {
  // f(x) = -(x - c)' A (x - c), maximum at c, Newton step is exact
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.3, 0.3, 1.0;
  Eigen::Vector2d c(1.5, -0.7);
  TrustFunctions fn;
  fn.value = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd d = x - c;
    return -d.dot(A * d);
  };
  fn.derivs = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g,
                  Eigen::MatrixXd& H) {
    g = -2.0 * A * (x - c);
    H = -2.0 * A;
  };
  SolverOptions opts;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -50.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 50.0);
  TrustReport rep =
      trust_region_maximize(fn, Eigen::VectorXd::Zero(2), opts, lo, hi);
  CHECK(rep.converged);
  CHECK(rep.accepted_steps <= 3);
  CHECK((rep.x - c).norm() < 1e-8);
  CHECK(rep.grad_norm <= opts.gradient_tol);
}

TEST_CASE("warm restart from the optimum stops immediately") {
  FitProblem prob = study_data(Family::F, 0.3, 150, 71);
  SolverOptions opts;
  FitResult first = fit(prob, opts);
  REQUIRE(first.converged);

  // restart the generic maximizer at the solution
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(prob.k(), prob.k());
  TrustFunctions fn;
  fn.value = [&](const Eigen::VectorXd& v) {
    return penalized_objective(prob, CoefBlock::unpack(v, prob.q1(), prob.q2()),
                               S);
  };
  fn.derivs = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g,
                  Eigen::MatrixXd& H) {
    Derivatives d = gradient_and_hessian(
        prob, CoefBlock::unpack(v, prob.q1(), prob.q2()), S);
    g = d.gradient;
    H = d.hessian;
  };
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(prob.k(), -1e6);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(prob.k(), 1e6);
  Interval eb = prob.copula.eta_bounds();
  lo(prob.k() - 1) = eb.lo;
  hi(prob.k() - 1) = eb.hi;
  TrustReport rep =
      trust_region_maximize(fn, first.beta_hat.pack(), opts, lo, hi);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 2);
}

TEST_CASE("independence fit matches two poisson regressions") {
  FitProblem prob = study_data(Family::Indep, 0.0, 250, 42);
  SolverOptions opts;
  FitResult res = fit(prob, opts);
  REQUIRE(res.converged);
  Eigen::VectorXd g1 = poisson_glm(prob.X1, prob.y1);
  Eigen::VectorXd g2 = poisson_glm(prob.X2, prob.y2);
  CHECK((res.beta_hat.beta1 - g1).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK((res.beta_hat.beta2 - g2).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK(res.n_params == 8);
  CHECK(res.aic ==
        doctest::Approx(-2.0 * res.loglik + 2.0 * res.n_params).epsilon(1e-12));
}

TEST_CASE("zero penalty strength reduces to the plain fit") {
  FitProblem prob = study_data(Family::G0, 0.4, 120, 17);
  SolverOptions opts;
  FitResult plain = fit(prob, opts);
  SolverOptions popts = opts;
  popts.xi = 0.0;
  FitResult pen = fit_penalized(prob, popts);
  CHECK((plain.beta_hat.pack() - pen.beta_hat.pack()).norm() < 1e-10);
  CHECK(plain.loglik == doctest::Approx(pen.loglik).epsilon(1e-12));
  CHECK_FALSE(pen.penalized);
}

TEST_CASE("strong penalty drives paired coefficients together") {
  // shared true coefficients across margins
  Eigen::VectorXd b(4);
  b << 0.25, 0.2, -0.35, 0.0;
  std::mt19937_64 rng(99);
  FitProblem prob = make_study_problem(Family::F, 0.25, 250, b, b, rng);
  SolverOptions opts;
  opts.xi = 1e9;
  FitResult res = fit_penalized(prob, opts);
  CHECK(res.converged);
  CHECK(res.penalized);
  CHECK((res.beta_hat.beta1 - res.beta_hat.beta2).lpNorm<Eigen::Infinity>() <
        1e-4);
}

TEST_CASE("observation order does not change the fit") {
  FitProblem prob = study_data(Family::C0, 0.35, 100, 53);
  SolverOptions opts;
  FitResult base = fit(prob, opts);

  FitProblem shuffled = prob;
  std::vector<int> idx(prob.n());
  for (int i = 0; i < prob.n(); ++i) idx[i] = i;
  std::mt19937 rng(3);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int i = 0; i < prob.n(); ++i) {
    shuffled.X1.row(i) = prob.X1.row(idx[i]);
    shuffled.X2.row(i) = prob.X2.row(idx[i]);
    shuffled.y1(i) = prob.y1(idx[i]);
    shuffled.y2(i) = prob.y2(idx[i]);
  }
  FitResult perm = fit(shuffled, opts);
  CHECK((base.beta_hat.pack() - perm.beta_hat.pack()).lpNorm<Eigen::Infinity>() <
        1e-8);
  CHECK(base.theta_hat == doctest::Approx(perm.theta_hat).epsilon(1e-8));
}

TEST_CASE("swapping margins mirrors the fit for exchangeable families") {
  FitProblem prob = study_data(Family::N, 0.3, 120, 64);
  SolverOptions opts;
  FitResult base = fit(prob, opts);

  FitProblem swapped = prob;
  std::swap(swapped.X1, swapped.X2);
  std::swap(swapped.y1, swapped.y2);
  std::swap(swapped.names1, swapped.names2);
  FitResult mir = fit(swapped, opts);
  CHECK((base.beta_hat.beta1 - mir.beta_hat.beta2).lpNorm<Eigen::Infinity>() <
        1e-6);
  CHECK((base.beta_hat.beta2 - mir.beta_hat.beta1).lpNorm<Eigen::Infinity>() <
        1e-6);
  CHECK(base.theta_hat == doctest::Approx(mir.theta_hat).epsilon(1e-5));
}

TEST_CASE("rank deficient design is rejected with column names") {
  FitProblem prob = study_data(Family::Indep, 0.0, 60, 8);
  // duplicate a covariate column
  FitProblem bad = prob;
  bad.X1.conservativeResize(Eigen::NoChange, 5);
  bad.X1.col(4) = bad.X1.col(1);
  bad.names1.push_back("x1_copy");
  try {
    fit(bad, SolverOptions{});
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("x1_copy") != std::string::npos);
  }
}

TEST_CASE("penalized fit requires matching coefficient counts") {
  FitProblem prob = study_data(Family::F, 0.3, 60, 5);
  FitProblem uneven = prob;
  uneven.X2.conservativeResize(Eigen::NoChange, 3);
  uneven.names2 = {"(Intercept)", "x4", "x5"};
  SolverOptions opts;
  opts.xi = 100.0;
  CHECK_THROWS_AS(fit_penalized(uneven, opts), std::invalid_argument);
}
