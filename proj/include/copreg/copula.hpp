#pragma once

#include <string>
#include <string_view>
#include <vector>

// Single-parameter bivariate copulae with rotations, Kendall-tau
// calibration, and the unconstrained-predictor links for the dependence
// parameter. All functions are pure.

namespace copreg {

enum class Family {
  Indep,
  N,
  T,  // Student-t, 3 degrees of freedom
  C0,
  C90,
  C180,
  C270,
  G0,
  G90,
  G180,
  G270,
  J0,
  J90,
  J180,
  J270,
  F,
  FGM,
  AMH,
  PL,
};

struct Interval {
  double lo;
  double hi;
};

// Family string codes as used in config files and on the CLI:
// "indep", "N", "T", "C0", ..., "J270", "F", "FGM", "AMH", "PL".
Family family_from_code(std::string_view code);
const std::string& family_code(Family f);
const std::vector<Family>& all_families();

struct CopulaSpec {
  Family family = Family::Indep;

  bool has_theta() const { return family != Family::Indep; }
  Interval theta_domain() const;
  Interval tau_range() const;
  // Bounds on the unconstrained predictor eta_theta used by the solver.
  Interval eta_bounds() const;
};

// C_theta(u, v). Arguments are clamped into [1e-12, 1 - 1e-12] before
// evaluation; theta outside the family domain raises std::domain_error.
double copula_cdf(const CopulaSpec& spec, double theta, double u, double v);

// Rectangle mass C(u1,v1) - C(u0,v1) - C(u1,v0) + C(u0,v0). Equal to
// four-corner differencing but evaluated in a cancellation-free form
// where the family admits one (Frank), which matters for derivative
// accuracy at strong dependence.
double copula_rectangle(const CopulaSpec& spec, double theta, double u0,
                        double u1, double v0, double v1);

// Kendall's tau as a function of theta (and its inverse).
double tau_from_theta(const CopulaSpec& spec, double theta);
double theta_from_tau(const CopulaSpec& spec, double tau);

// Smooth bijection from the unconstrained predictor onto the interior of
// the theta domain, and its inverse.
double link_theta(const CopulaSpec& spec, double eta);
double unlink_theta(const CopulaSpec& spec, double theta);

}  // namespace copreg
