#include "copreg/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace copreg {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt3 = 1.73205080756887729353;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie in (0, 1)");
  }
  // Acklam's rational approximation, then one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = norm_cdf(x) - p;
  double u = e * std::sqrt(kTwoPi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double t3_cdf(double x) {
  // F(x) = 1/2 + (atan(x/sqrt(3)) + sqrt(3) x / (x^2 + 3)) / pi
  return 0.5 + (std::atan(x / kSqrt3) + kSqrt3 * x / (x * x + 3.0)) / kPi;
}

double t4_cdf(double x) {
  double w = x / std::sqrt(4.0 + x * x);
  return 0.5 + 0.25 * w * (3.0 - w * w);
}

double t3_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("t3_quantile: p must lie in (0, 1)");
  }
  // Solve psi + sin(psi)cos(psi) = pi (p - 1/2) with x = sqrt(3) tan(psi);
  // the left-hand side is monotone with derivative 2 cos^2(psi).
  const double target = kPi * (p - 0.5);
  double lo = -0.5 * kPi, hi = 0.5 * kPi;
  double psi = std::asin(std::clamp(2.0 * p - 1.0, -1.0, 1.0)) * 0.5;
  for (int it = 0; it < 60; ++it) {
    double f = psi + std::sin(psi) * std::cos(psi) - target;
    if (f > 0.0) {
      hi = psi;
    } else {
      lo = psi;
    }
    double deriv = 2.0 * std::cos(psi) * std::cos(psi);
    double next = (deriv > 1e-14) ? psi - f / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - psi) < 1e-16 * std::max(1.0, std::abs(psi))) {
      psi = next;
      break;
    }
    psi = next;
  }
  return kSqrt3 * std::tan(psi);
}

namespace {

int bvn_order(double arho) {
  if (arho <= 0.9) return 24;
  if (arho <= 0.99) return 48;
  return 96;
}

}  // namespace

double bvn_cdf(double h, double k, double rho) {
  if (std::isnan(h) || std::isnan(k) || std::isnan(rho)) {
    throw std::domain_error("bvn_cdf: NaN input");
  }
  rho = std::clamp(rho, -1.0 + 1e-15, 1.0 - 1e-15);
  // Plackett's identity: Phi2(h,k;rho) = Phi(h)Phi(k)
  //   + (1/2pi) int_0^{asin rho} exp(-(h^2+k^2-2hk sin t)/(2 cos^2 t)) dt.
  const double upper = std::asin(rho);
  const double hk = h * k;
  const double hh = h * h + k * k;
  auto f = [&](double t) {
    double st = std::sin(t);
    double ct2 = std::cos(t) * std::cos(t);
    return std::exp(-(hh - 2.0 * hk * st) / (2.0 * ct2));
  };
  double integral = gl_integrate(f, 0.0, upper, bvn_order(std::abs(rho)));
  double val = norm_cdf(h) * norm_cdf(k) + integral / kTwoPi;
  return std::clamp(val, 0.0, 1.0);
}

namespace {

// Conditional cdf of the second coordinate of a bivariate t(3) given the
// first equals x: a t(4) after location/scale shift.
double bvt3_conditional(double x, double k, double rho, double ors) {
  double arg = (k - rho * x) * 2.0 / std::sqrt((3.0 + x * x) * ors);
  return t4_cdf(arg);
}

double bvt3_piece(double psi_a, double psi_b, double k, double rho, double ors,
                  int n) {
  auto f = [&](double psi) {
    double x = kSqrt3 * std::tan(psi);
    double c = std::cos(psi);
    return (2.0 / kPi) * c * c * bvt3_conditional(x, k, rho, ors);
  };
  return gl_integrate(f, psi_a, psi_b, n);
}

}  // namespace

double bvt3_cdf(double h, double k, double rho) {
  if (std::isnan(h) || std::isnan(k) || std::isnan(rho)) {
    throw std::domain_error("bvt3_cdf: NaN input");
  }
  rho = std::clamp(rho, -1.0 + 1e-12, 1.0 - 1e-12);
  const double ors = 1.0 - rho * rho;
  const double psi_h = std::atan(h / kSqrt3);
  // far-tail conditioning arguments sharpen the boundary layer at the
  // split point, so spend more nodes there
  const int n =
      (std::abs(rho) > 0.9 || std::abs(h) > 15.0 || std::abs(k) > 15.0) ? 192
                                                                        : 48;
  // Split at the sign change of the conditional argument (x = k / rho);
  // the integrand has a boundary layer there when |rho| is close to 1.
  double split = std::numeric_limits<double>::quiet_NaN();
  if (std::abs(rho) > 1e-12) {
    double xs = k / rho;
    double psi_s = std::atan(xs / kSqrt3);
    if (psi_s > -0.5 * kPi && psi_s < psi_h) split = psi_s;
  }
  double val;
  if (std::isnan(split)) {
    val = bvt3_piece(-0.5 * kPi, psi_h, k, rho, ors, n);
  } else {
    val = bvt3_piece(-0.5 * kPi, split, k, rho, ors, n) +
          bvt3_piece(split, psi_h, k, rho, ors, n);
  }
  return std::clamp(val, 0.0, 1.0);
}

double debye1(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("debye1: x must be positive");
  }
  auto f = [](double t) { return t <= 1e-12 ? 1.0 : t / std::expm1(t); };
  return gl_integrate(f, 0.0, x, 64) / x;
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double hval = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    hval *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * hval;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw std::domain_error("gamma_q: requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi2_sf(double x, double dof) { return gamma_q(0.5 * dof, 0.5 * x); }

double ks_pvalue(double d, std::size_t n) {
  double sn = std::sqrt(static_cast<double>(n));
  double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("kendall_tau: need two equal-length samples");
  }
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = x[i] - x[j];
      double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) {
        ++ties_x;
        ++ties_y;
      } else if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if (dx * dy > 0.0) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  double n0 = 0.5 * n * (n - 1.0);
  double denom = std::sqrt((n0 - ties_x) * (n0 - ties_y));
  if (denom == 0.0) return 0.0;
  return (concordant - discordant) / denom;
}

const GaussLegendre& gl_rule(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton on P_n with the Chebyshev-like initial guess.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  auto [pos, inserted] = cache.emplace(n, std::move(rule));
  return pos->second;
}

}  // namespace copreg
