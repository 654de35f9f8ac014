#pragma once

#include <Eigen/Dense>

// Poisson margin: log-space mass/cdf arithmetic and the log-link from
// linear predictors to rates.

namespace copreg {

double poisson_log_pmf(double lambda, int y);
double poisson_pmf(double lambda, int y);

// F(lambda, y) = sum_{m<=y} pmf; defined to be exactly 0 at y = -1.
double poisson_cdf(double lambda, int y);

// pmf and cdf at y in one pass; cdf_prev is F(y-1) = F(y) - f(y).
struct PoissonPoint {
  double pmf;
  double cdf;
  double cdf_prev;
};
PoissonPoint poisson_point(double lambda, int y);

// Smallest y with cdf(lambda, y) >= u.
int poisson_quantile(double lambda, double u);

// lambda = exp(x' beta)
double rate_from_predictor(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& beta);

}  // namespace copreg
