#pragma once

#include <cstddef>
#include <vector>

// Scalar special functions and quadrature rules used by the copula and
// margin code. Everything here is deterministic and thread-safe.

namespace copreg {

// Standard normal cdf / quantile.
double norm_cdf(double x);
double norm_quantile(double p);

// Student-t cdfs with 3 and 4 degrees of freedom (closed forms) and the
// t(3) quantile.
double t3_cdf(double x);
double t4_cdf(double x);
double t3_quantile(double p);

// Bivariate standard-normal cdf P(X<=h, Y<=k) with correlation rho.
// Absolute error below 1e-7 over rho in (-1, 1).
double bvn_cdf(double h, double k, double rho);

// Bivariate Student-t cdf with 3 degrees of freedom and correlation rho.
// Absolute error below 1e-6.
double bvt3_cdf(double h, double k, double rho);

// First Debye function D1(x) = (1/x) * int_0^x t/(e^t - 1) dt, x > 0.
double debye1(double x);

// Regularized upper incomplete gamma Q(a, x); chi-square survival helper.
double gamma_q(double a, double x);
double chi2_sf(double x, double dof);

// Two-sided Kolmogorov-Smirnov p-value for statistic d at sample size n.
double ks_pvalue(double d, std::size_t n);

// Empirical Kendall tau-b (tie-corrected), O(n^2).
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

// Gauss-Legendre rule on [-1, 1]; nodes/weights are cached per order.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gl_rule(int n);

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
template <class F>
double gl_integrate(F&& f, double a, double b, int n) {
  const GaussLegendre& rule = gl_rule(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return acc * half;
}

// Compensated (Kahan) accumulator; keeps sums reproducible and accurate.
class KahanSum {
 public:
  void add(double x) {
    double y = x - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace copreg
