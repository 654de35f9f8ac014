#pragma once

#include <Eigen/Dense>
#include <functional>

#include "copreg/model.hpp"

// Trust-region Newton maximization of the (penalized) log-likelihood,
// with the outer reweighting loop for the adaptive difference penalty.

namespace copreg {

struct SolverOptions {
  double initial_radius = 1.0;
  double max_radius = 100.0;
  double accept_ratio = 0.1;
  double shrink = 0.25;
  double grow = 2.5;
  double gradient_tol = 1e-7;
  int max_inner_iter = 200;
  int max_outer_iter = 25;
  double xi = 0.0;
  double weight_tol = 1e-8;
  double weight_floor = 1e-8;
};

struct FitResult {
  CoefBlock beta_hat;
  double loglik = 0.0;
  double penalized_obj = 0.0;
  double aic = 0.0;
  double theta_hat = 0.0;
  double tau_hat = 0.0;
  bool converged = false;
  bool at_independence = false;
  int inner_iters = 0;
  int outer_iters = 0;
  double grad_norm = 0.0;
  int n_params = 0;
  Family family = Family::Indep;
  bool penalized = false;
};

// Generic bounded trust-region maximizer (dogleg on the ridge-shifted
// Hessian). Exposed for testing on analytic objectives.
struct TrustFunctions {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                     Eigen::MatrixXd&)>
      derivs;
};
struct TrustReport {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int accepted_steps = 0;
  double grad_norm = 0.0;
};
TrustReport trust_region_maximize(const TrustFunctions& fn,
                                  const Eigen::VectorXd& x0,
                                  const SolverOptions& opts,
                                  const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& upper);

// Univariate Poisson log-link regression by IRLS (initialization and the
// independence-fit oracle on the CLI side).
Eigen::VectorXd poisson_glm(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                            int max_iter = 50, double tol = 1e-10);

// Maximum-likelihood fit (unpenalized path).
FitResult fit(const FitProblem& prob, const SolverOptions& opts);

// Adaptive difference-penalty fit: outer reweighting around the inner
// trust-region solve; with opts.xi == 0 this is identical to fit().
FitResult fit_penalized(const FitProblem& prob, const SolverOptions& opts);

}  // namespace copreg
