#include "copreg/poisson.hpp"

#include <cmath>
#include <stdexcept>

#include "copreg/special.hpp"

namespace copreg {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0)) {
    throw std::domain_error("poisson: lambda must be positive");
  }
}

}  // namespace

double poisson_log_pmf(double lambda, int y) {
  check_lambda(lambda);
  if (y < 0) throw std::domain_error("poisson: y must be nonnegative");
  return y * std::log(lambda) - lambda - std::lgamma(y + 1.0);
}

double poisson_pmf(double lambda, int y) {
  return std::exp(poisson_log_pmf(lambda, y));
}

PoissonPoint poisson_point(double lambda, int y) {
  check_lambda(lambda);
  if (y == -1) return {0.0, 0.0, 0.0};
  if (y < -1) throw std::domain_error("poisson_point: y must be >= -1");
  if (lambda < 700.0) {
    // term recurrence keeps cdf(y) = cdf(y-1) + pmf(y) exact by construction
    double term = std::exp(-lambda);
    KahanSum cdf;
    cdf.add(term);
    for (int m = 1; m <= y; ++m) {
      term *= lambda / m;
      cdf.add(term);
    }
    double c = std::min(cdf.value(), 1.0);
    return {term, c, std::max(c - term, 0.0)};
  }
  // extreme-rate fallback: per-term log-space evaluation
  KahanSum cdf;
  double term = 0.0;
  for (int m = 0; m <= y; ++m) {
    term = std::exp(poisson_log_pmf(lambda, m));
    cdf.add(term);
  }
  double c = std::min(cdf.value(), 1.0);
  return {term, c, std::max(c - term, 0.0)};
}

double poisson_cdf(double lambda, int y) {
  check_lambda(lambda);
  if (y <= -1) return 0.0;
  return poisson_point(lambda, y).cdf;
}

int poisson_quantile(double lambda, double u) {
  check_lambda(lambda);
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("poisson_quantile: u must lie in (0, 1)");
  }
  const int cap =
      static_cast<int>(lambda + 15.0 * std::sqrt(lambda) + 300.0);
  double term = std::exp(-lambda);
  KahanSum cdf;
  cdf.add(term);
  int y = 0;
  while (cdf.value() < u && y < cap) {
    ++y;
    term *= lambda / y;
    cdf.add(term);
  }
  return y;
}

double rate_from_predictor(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& beta) {
  if (x.size() != beta.size()) {
    throw std::invalid_argument(
        "rate_from_predictor: covariate/coefficient dimension mismatch");
  }
  return std::exp(x.dot(beta));
}

}  // namespace copreg
