#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "copreg/copula.hpp"

// The bivariate model core: coefficient layout, design matrices, joint pmf
// on the integer grid, (penalized) log-likelihood, and derivatives.

namespace copreg {

// Coefficient block beta = (beta1, beta2, eta_theta). eta_theta is the
// unconstrained copula-intercept predictor; theta = link_theta(eta_theta).
struct CoefBlock {
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta2;
  double eta_theta = 0.0;

  Eigen::VectorXd pack() const;
  static CoefBlock unpack(const Eigen::VectorXd& v, int q1, int q2);
};

struct PenaltyConfig {
  double xi = 0.0;
  Eigen::VectorXd weights;  // length p+1, one per paired coefficient
  double weight_floor = 1e-8;
};

// Assembled regression problem: design matrices include the intercept
// column; covariate ordering is identical across margins.
struct FitProblem {
  Eigen::MatrixXd X1;
  Eigen::MatrixXd X2;
  Eigen::VectorXi y1;
  Eigen::VectorXi y2;
  CopulaSpec copula;
  std::vector<std::string> names1;
  std::vector<std::string> names2;

  int n() const { return static_cast<int>(y1.size()); }
  int q1() const { return static_cast<int>(X1.cols()); }
  int q2() const { return static_cast<int>(X2.cols()); }
  // packed parameter length (the eta_theta slot is always present)
  int k() const { return q1() + q2() + 1; }
  // free parameters; the independence copula has no dependence parameter
  int n_params() const { return q1() + q2() + (copula.has_theta() ? 1 : 0); }
};

// Joint pmf of (y1, y2) via the four-corner rectangle rule with the
// F(y-1) = F(y) - f(y) substitution.
double joint_pmf(const CopulaSpec& spec, double theta, double lambda1,
                 double lambda2, int y1, int y2);

// Per-observation log joint pmf as a function of the three predictors.
double obs_log_pmf(const CopulaSpec& spec, int y1, int y2, double eta1,
                   double eta2, double eta_theta);

double log_likelihood(const FitProblem& prob, const CoefBlock& beta);

// Penalty matrix S of dimension k x k; 0.5 * b' S b penalizes weighted
// squared differences of paired margin coefficients. The eta_theta
// row/column is zero.
Eigen::MatrixXd build_penalty(int p, const PenaltyConfig& config);

double penalized_objective(const FitProblem& prob, const CoefBlock& beta,
                           const Eigen::MatrixXd& S);

// Gradient and Hessian of the penalized objective with respect to the
// packed parameter vector.
struct Derivatives {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};
Derivatives gradient_and_hessian(const FitProblem& prob, const CoefBlock& beta,
                                 const Eigen::MatrixXd& S);

}  // namespace copreg
