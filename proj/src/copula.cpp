#include "copreg/copula.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "copreg/special.hpp"

namespace copreg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUClamp = 1e-12;
constexpr double kFrankCap = 35.0;

enum class Base { Indep, Gauss, T3, Clayton, Gumbel, Joe, Frank, FGM, AMH, PL };

struct FamilyTraits {
  Base base;
  int rotation;  // 0, 90, 180, 270
};

FamilyTraits traits(Family f) {
  switch (f) {
    case Family::Indep: return {Base::Indep, 0};
    case Family::N: return {Base::Gauss, 0};
    case Family::T: return {Base::T3, 0};
    case Family::C0: return {Base::Clayton, 0};
    case Family::C90: return {Base::Clayton, 90};
    case Family::C180: return {Base::Clayton, 180};
    case Family::C270: return {Base::Clayton, 270};
    case Family::G0: return {Base::Gumbel, 0};
    case Family::G90: return {Base::Gumbel, 90};
    case Family::G180: return {Base::Gumbel, 180};
    case Family::G270: return {Base::Gumbel, 270};
    case Family::J0: return {Base::Joe, 0};
    case Family::J90: return {Base::Joe, 90};
    case Family::J180: return {Base::Joe, 180};
    case Family::J270: return {Base::Joe, 270};
    case Family::F: return {Base::Frank, 0};
    case Family::FGM: return {Base::FGM, 0};
    case Family::AMH: return {Base::AMH, 0};
    case Family::PL: return {Base::PL, 0};
  }
  throw std::logic_error("traits: unknown family");
}

double frank_capped(double theta) {
  if (std::abs(theta) > kFrankCap) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "warning: Frank theta capped at +/-" << kFrankCap << "\n";
      warned = true;
    }
    return std::copysign(kFrankCap, theta);
  }
  return theta;
}

// --- base copula cdfs; theta in the base (positive-dependence) domain ---

double clayton_cdf(double u, double v, double theta) {
  double la = -theta * std::log(u);
  double lb = -theta * std::log(v);
  double m = std::max(la, lb);
  if (m > 30.0) {
    // u^-theta or v^-theta is huge; the "-1" is negligible.
    double lsum = m + std::log(std::exp(la - m) + std::exp(lb - m));
    return std::exp(-lsum / theta);
  }
  double s = std::expm1(la) + std::expm1(lb);
  return std::exp(-std::log1p(s) / theta);
}

double gumbel_cdf(double u, double v, double theta) {
  double a = std::log(-std::log(u));
  double b = std::log(-std::log(v));
  double m = std::max(a, b);
  double lsum = theta * m + std::log1p(std::exp(theta * (std::min(a, b) - m)));
  return std::exp(-std::exp(lsum / theta));
}

double joe_cdf(double u, double v, double theta) {
  double x = std::pow(1.0 - u, theta);
  double y = std::pow(1.0 - v, theta);
  double s = x + y - x * y;
  return 1.0 - std::pow(s, 1.0 / theta);
}

double frank_cdf(double u, double v, double theta) {
  theta = frank_capped(theta);
  double num = std::expm1(-theta * u) * std::expm1(-theta * v);
  return -std::log1p(num / std::expm1(-theta)) / theta;
}

double fgm_cdf(double u, double v, double theta) {
  return u * v * (1.0 + theta * (1.0 - u) * (1.0 - v));
}

double amh_cdf(double u, double v, double theta) {
  return u * v / (1.0 - theta * (1.0 - u) * (1.0 - v));
}

double plackett_cdf(double u, double v, double theta) {
  double s = 1.0 + (theta - 1.0) * (u + v);
  double d = s * s - 4.0 * theta * (theta - 1.0) * u * v;
  return 2.0 * theta * u * v / (s + std::sqrt(std::max(d, 0.0)));
}

double base_cdf(Base base, double u, double v, double theta) {
  switch (base) {
    case Base::Indep: return u * v;
    case Base::Gauss:
      return bvn_cdf(norm_quantile(u), norm_quantile(v), theta);
    case Base::T3:
      return bvt3_cdf(t3_quantile(u), t3_quantile(v), theta);
    case Base::Clayton: return clayton_cdf(u, v, theta);
    case Base::Gumbel: return gumbel_cdf(u, v, theta);
    case Base::Joe: return joe_cdf(u, v, theta);
    case Base::Frank: return frank_cdf(u, v, theta);
    case Base::FGM: return fgm_cdf(u, v, theta);
    case Base::AMH: return amh_cdf(u, v, theta);
    case Base::PL: return plackett_cdf(u, v, theta);
  }
  throw std::logic_error("base_cdf: unknown base");
}

// --- base Kendall tau ---

double joe_tau(double theta) {
  KahanSum sum;
  for (long k = 1; k <= 1000000; ++k) {
    double term =
        1.0 / (k * (theta * k + 2.0) * (theta * (k - 1.0) + 2.0));
    sum.add(term);
    if (term < 1e-12) break;
  }
  return 1.0 - 4.0 * sum.value();
}

double frank_tau(double theta) {
  theta = frank_capped(theta);
  double a = std::abs(theta);
  if (a < 1e-10) return theta / 9.0;  // small-theta expansion
  double tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
  return std::copysign(tau, theta);
}

double amh_tau(double theta) {
  if (std::abs(theta) < 1e-4) {
    return 2.0 * theta / 9.0 + theta * theta / 18.0;
  }
  double omt = 1.0 - theta;
  return 1.0 - 2.0 * (theta + omt * omt * std::log1p(-theta)) /
                   (3.0 * theta * theta);
}

double plackett_tau(double theta) {
  // tau = 1 - 4 int int dC/du * dC/dv du dv, partials by central differences.
  const int n = 48;
  const double h = 1e-6;
  const GaussLegendre& rule = gl_rule(n);
  KahanSum acc;
  for (int i = 0; i < n; ++i) {
    double u = 0.5 + 0.5 * rule.nodes[i];
    for (int j = 0; j < n; ++j) {
      double v = 0.5 + 0.5 * rule.nodes[j];
      double cu = (plackett_cdf(std::min(u + h, 1.0), v, theta) -
                   plackett_cdf(std::max(u - h, 0.0), v, theta)) /
                  (2.0 * h);
      double cv = (plackett_cdf(u, std::min(v + h, 1.0), theta) -
                   plackett_cdf(u, std::max(v - h, 0.0), theta)) /
                  (2.0 * h);
      acc.add(rule.weights[i] * rule.weights[j] * cu * cv);
    }
  }
  return 1.0 - 4.0 * 0.25 * acc.value();
}

double base_tau(Base base, double theta) {
  switch (base) {
    case Base::Indep: return 0.0;
    case Base::Gauss:
    case Base::T3: return 2.0 / kPi * std::asin(theta);
    case Base::Clayton: return theta / (theta + 2.0);
    case Base::Gumbel: return 1.0 - 1.0 / theta;
    case Base::Joe: return joe_tau(theta);
    case Base::Frank: return frank_tau(theta);
    case Base::FGM: return 2.0 * theta / 9.0;
    case Base::AMH: return amh_tau(theta);
    case Base::PL: return plackett_tau(theta);
  }
  throw std::logic_error("base_tau: unknown base");
}

// Monotone scalar solve of base_tau(theta) == tau on [lo, hi].
double tau_invert(Base base, double tau, double lo, double hi) {
  double flo = base_tau(base, lo) - tau;
  double fhi = base_tau(base, hi) - tau;
  if (flo > 0.0 || fhi < 0.0) {
    throw std::runtime_error("theta_from_tau: bracket failure");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = base_tau(base, mid) - tau;
    if (fm >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo < 1e-13 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

void check_theta(const CopulaSpec& spec, double theta) {
  if (std::isnan(theta)) {
    throw std::domain_error("copula: theta is NaN for family " +
                            family_code(spec.family));
  }
  if (spec.family == Family::Indep) return;
  Interval dom = spec.theta_domain();
  const double slack = 1e-9;
  bool ok = theta >= dom.lo - slack && theta <= dom.hi + slack;
  if (spec.family == Family::F && theta == 0.0) ok = false;
  if (!ok) {
    std::ostringstream oss;
    oss << "copula: theta=" << theta << " outside domain (" << dom.lo << ", "
        << dom.hi << ") of family " << family_code(spec.family);
    throw std::domain_error(oss.str());
  }
}

const std::map<std::string, Family>& code_map() {
  static const std::map<std::string, Family> m = {
      {"indep", Family::Indep}, {"N", Family::N},       {"T", Family::T},
      {"C0", Family::C0},       {"C90", Family::C90},   {"C180", Family::C180},
      {"C270", Family::C270},   {"G0", Family::G0},     {"G90", Family::G90},
      {"G180", Family::G180},   {"G270", Family::G270}, {"J0", Family::J0},
      {"J90", Family::J90},     {"J180", Family::J180}, {"J270", Family::J270},
      {"F", Family::F},         {"FGM", Family::FGM},   {"AMH", Family::AMH},
      {"PL", Family::PL}};
  return m;
}

}  // namespace

Family family_from_code(std::string_view code) {
  auto it = code_map().find(std::string(code));
  if (it == code_map().end()) {
    std::ostringstream oss;
    oss << "unknown copula family '" << code << "'; valid codes:";
    for (const auto& [k, v] : code_map()) oss << " " << k;
    throw std::invalid_argument(oss.str());
  }
  return it->second;
}

const std::string& family_code(Family f) {
  static const std::map<Family, std::string> rev = [] {
    std::map<Family, std::string> m;
    for (const auto& [k, v] : code_map()) m[v] = k;
    return m;
  }();
  return rev.at(f);
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> fams = [] {
    std::vector<Family> v;
    for (const auto& [k, f] : code_map()) v.push_back(f);
    return v;
  }();
  return fams;
}

Interval CopulaSpec::theta_domain() const {
  switch (family) {
    case Family::Indep: return {0.0, 0.0};
    case Family::N:
    case Family::T: return {-1.0, 1.0};
    case Family::C0:
    case Family::C180:
    case Family::PL: return {0.0, kInf};
    case Family::C90:
    case Family::C270: return {-kInf, 0.0};
    case Family::G0:
    case Family::G180:
    case Family::J0:
    case Family::J180: return {1.0, kInf};
    case Family::G90:
    case Family::G270:
    case Family::J90:
    case Family::J270: return {-kInf, -1.0};
    case Family::F: return {-kFrankCap, kFrankCap};
    case Family::FGM:
    case Family::AMH: return {-1.0, 1.0};
  }
  throw std::logic_error("theta_domain: unknown family");
}

Interval CopulaSpec::tau_range() const {
  switch (family) {
    case Family::Indep: return {0.0, 0.0};
    case Family::N:
    case Family::T:
    case Family::PL: return {-1.0, 1.0};
    case Family::C0:
    case Family::C180:
    case Family::G0:
    case Family::G180:
    case Family::J0:
    case Family::J180: return {0.0, 1.0};
    case Family::C90:
    case Family::C270:
    case Family::G90:
    case Family::G270:
    case Family::J90:
    case Family::J270: return {-1.0, 0.0};
    case Family::F: {
      static const double cap = frank_tau(kFrankCap);
      return {-cap, cap};
    }
    case Family::FGM: return {-2.0 / 9.0, 2.0 / 9.0};
    case Family::AMH: {
      static const double lo = amh_tau(-1.0);
      return {lo, 1.0 / 3.0};
    }
  }
  throw std::logic_error("tau_range: unknown family");
}

Interval CopulaSpec::eta_bounds() const {
  switch (family) {
    case Family::Indep: return {0.0, 0.0};
    case Family::N:
    case Family::T: return {-3.8, 3.8};  // keeps |rho| <= 0.9993
    case Family::FGM:
    case Family::AMH: return {-6.0, 6.0};
    case Family::F: return {-kFrankCap, kFrankCap};
    case Family::PL: return {-14.0, 14.0};
    default: return {-20.0, 4.5};  // exp-type links
  }
}

double copula_cdf(const CopulaSpec& spec, double theta, double u, double v) {
  if (std::isnan(u) || std::isnan(v)) {
    throw std::invalid_argument("copula_cdf: NaN argument");
  }
  check_theta(spec, theta);
  u = std::clamp(u, kUClamp, 1.0 - kUClamp);
  v = std::clamp(v, kUClamp, 1.0 - kUClamp);
  FamilyTraits t = traits(spec.family);
  switch (t.rotation) {
    case 0: return base_cdf(t.base, u, v, theta);
    case 90: return v - base_cdf(t.base, 1.0 - u, v, -theta);
    case 180: return u + v - 1.0 + base_cdf(t.base, 1.0 - u, 1.0 - v, theta);
    case 270: return u - base_cdf(t.base, u, 1.0 - v, -theta);
  }
  throw std::logic_error("copula_cdf: bad rotation");
}

namespace {

// expm1(-th) + expm1(-th*u)*expm1(-th*v) without cancellation; both terms
// share a sign for either sign of th.
double frank_corner(double u, double v, double th) {
  return std::exp(-th * u) * std::expm1(-th * (1.0 - u)) +
         std::exp(-th * v) * std::expm1(-th * u);
}

// Rectangle mass of the Frank copula in closed form: the corner products
// collapse to a single log1p, so no differencing of near-equal cdfs.
double frank_rectangle(double u0, double u1, double v0, double v1,
                       double th) {
  th = frank_capped(th);
  double du = std::exp(-th * u0) * std::expm1(-th * (u1 - u0));
  double dv = std::exp(-th * v0) * std::expm1(-th * (v1 - v0));
  double denom = frank_corner(u0, v1, th) * frank_corner(u1, v0, th);
  double a1 = std::expm1(-th);
  return -std::log1p(a1 * du * dv / denom) / th;
}

double base_rectangle(Base base, double u0, double u1, double v0, double v1,
                      double theta) {
  if (base == Base::Frank) return frank_rectangle(u0, u1, v0, v1, theta);
  return base_cdf(base, u1, v1, theta) - base_cdf(base, u0, v1, theta) -
         base_cdf(base, u1, v0, theta) + base_cdf(base, u0, v0, theta);
}

}  // namespace

double copula_rectangle(const CopulaSpec& spec, double theta, double u0,
                        double u1, double v0, double v1) {
  if (std::isnan(u0) || std::isnan(u1) || std::isnan(v0) || std::isnan(v1)) {
    throw std::invalid_argument("copula_rectangle: NaN argument");
  }
  check_theta(spec, theta);
  u0 = std::clamp(u0, kUClamp, 1.0 - kUClamp);
  u1 = std::clamp(u1, kUClamp, 1.0 - kUClamp);
  v0 = std::clamp(v0, kUClamp, 1.0 - kUClamp);
  v1 = std::clamp(v1, kUClamp, 1.0 - kUClamp);
  FamilyTraits t = traits(spec.family);
  // a rotation's rectangle is the base rectangle over the reflected box
  switch (t.rotation) {
    case 0: return base_rectangle(t.base, u0, u1, v0, v1, theta);
    case 90:
      return base_rectangle(t.base, 1.0 - u1, 1.0 - u0, v0, v1, -theta);
    case 180:
      return base_rectangle(t.base, 1.0 - u1, 1.0 - u0, 1.0 - v1, 1.0 - v0,
                            theta);
    case 270:
      return base_rectangle(t.base, u0, u1, 1.0 - v1, 1.0 - v0, -theta);
  }
  throw std::logic_error("copula_rectangle: bad rotation");
}

double tau_from_theta(const CopulaSpec& spec, double theta) {
  check_theta(spec, theta);
  FamilyTraits t = traits(spec.family);
  switch (t.rotation) {
    case 0: return base_tau(t.base, theta);
    case 180: return base_tau(t.base, theta);
    default: return -base_tau(t.base, -theta);  // 90 / 270
  }
}

double theta_from_tau(const CopulaSpec& spec, double tau) {
  Interval range = spec.tau_range();
  if (std::isnan(tau) || tau < range.lo - 1e-12 || tau > range.hi + 1e-12) {
    std::ostringstream oss;
    oss << "theta_from_tau: tau=" << tau << " outside achievable range ["
        << range.lo << ", " << range.hi << "] of family "
        << family_code(spec.family);
    throw std::domain_error(oss.str());
  }
  FamilyTraits t = traits(spec.family);
  bool mirrored = (t.rotation == 90 || t.rotation == 270);
  double tb = mirrored ? -tau : tau;  // tau on the base-family scale
  double theta_base;
  switch (t.base) {
    case Base::Indep: return 0.0;
    case Base::Gauss:
    case Base::T3: theta_base = std::sin(0.5 * kPi * tb); break;
    case Base::Clayton: theta_base = 2.0 * tb / (1.0 - tb); break;
    case Base::Gumbel: theta_base = 1.0 / (1.0 - tb); break;
    case Base::FGM: theta_base = 4.5 * tb; break;
    case Base::Joe: theta_base = tau_invert(t.base, tb, 1.0 + 1e-10, 1e8); break;
    case Base::Frank:
      if (std::abs(tb) < 1e-12) {
        theta_base = 1e-10;
      } else {
        theta_base = std::copysign(
            tau_invert(t.base, std::abs(tb), 1e-10, kFrankCap), tb);
      }
      break;
    case Base::AMH:
      theta_base = tau_invert(t.base, tb, -1.0 + 1e-12, 1.0 - 1e-9);
      break;
    case Base::PL: {
      // solve in log(theta); tau is increasing in theta
      auto f = [&](double lt) { return plackett_tau(std::exp(lt)); };
      double lo = std::log(1e-8), hi = std::log(1e8);
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) >= tb) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      theta_base = std::exp(0.5 * (lo + hi));
      break;
    }
    default: throw std::logic_error("theta_from_tau: unknown base");
  }
  return mirrored ? -theta_base : theta_base;
}

double link_theta(const CopulaSpec& spec, double eta) {
  if (std::isnan(eta)) throw std::domain_error("link_theta: eta is NaN");
  switch (spec.family) {
    case Family::Indep: return 0.0;
    case Family::N:
    case Family::T:
    case Family::FGM:
    case Family::AMH: return std::tanh(eta);
    case Family::F: {
      // identity with a small exclusion zone around theta = 0
      if (std::abs(eta) < 1e-3) return eta >= 0.0 ? 1e-3 : -1e-3;
      return std::clamp(eta, -kFrankCap, kFrankCap);
    }
    case Family::C0:
    case Family::C180:
    case Family::PL: return std::exp(eta);
    case Family::C90:
    case Family::C270: return -std::exp(eta);
    case Family::G0:
    case Family::G180:
    case Family::J0:
    case Family::J180: return 1.0 + std::exp(eta);
    case Family::G90:
    case Family::G270:
    case Family::J90:
    case Family::J270: return -1.0 - std::exp(eta);
  }
  throw std::logic_error("link_theta: unknown family");
}

double unlink_theta(const CopulaSpec& spec, double theta) {
  check_theta(spec, theta);
  Interval dom = spec.theta_domain();
  auto boundary_error = [&]() {
    throw std::domain_error("unlink_theta: theta on the domain boundary of " +
                            family_code(spec.family));
  };
  switch (spec.family) {
    case Family::Indep: return 0.0;
    case Family::N:
    case Family::T:
    case Family::FGM:
    case Family::AMH:
      if (std::abs(theta) >= 1.0) boundary_error();
      return std::atanh(theta);
    case Family::F:
      if (theta == 0.0) boundary_error();
      return theta;
    case Family::C0:
    case Family::C180:
    case Family::PL:
      if (theta <= dom.lo) boundary_error();
      return std::log(theta);
    case Family::C90:
    case Family::C270:
      if (theta >= dom.hi) boundary_error();
      return std::log(-theta);
    case Family::G0:
    case Family::G180:
    case Family::J0:
    case Family::J180:
      if (theta <= 1.0) boundary_error();
      return std::log(theta - 1.0);
    case Family::G90:
    case Family::G270:
    case Family::J90:
    case Family::J270:
      if (theta >= -1.0) boundary_error();
      return std::log(-theta - 1.0);
  }
  throw std::logic_error("unlink_theta: unknown family");
}

}  // namespace copreg
