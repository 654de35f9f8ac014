#include "copreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "copreg/special.hpp"

namespace copreg {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Zero out gradient components that push an active bound further out, so
// boundary solutions (one-sided copulae on wrong-sign data) can converge.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi) {
  Eigen::VectorXd pg = g;
  for (int i = 0; i < g.size(); ++i) {
    if ((x(i) <= lo(i) + 1e-12 && g(i) < 0.0) ||
        (x(i) >= hi(i) - 1e-12 && g(i) > 0.0)) {
      pg(i) = 0.0;
    }
  }
  return pg;
}

// Positive-definite factorization of B, adding the smallest escalating
// ridge that makes the Cholesky succeed.
Eigen::LLT<Eigen::MatrixXd> ridge_llt(Eigen::MatrixXd B) {
  double scale = std::max(1.0, B.diagonal().cwiseAbs().maxCoeff());
  double mu = 0.0;
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(B + mu * Eigen::MatrixXd::Identity(
                                            B.rows(), B.cols()));
    if (llt.info() == Eigen::Success) return llt;
    mu = (mu == 0.0) ? 1e-10 * scale : mu * 10.0;
  }
  throw std::runtime_error("trust_region: Hessian ridge escalation failed");
}

Eigen::VectorXd dogleg(const Eigen::VectorXd& g,
                       const Eigen::LLT<Eigen::MatrixXd>& lltB,
                       const Eigen::MatrixXd& B, double radius) {
  Eigen::VectorXd newton = lltB.solve(g);
  if (newton.norm() <= radius) return newton;
  double gBg = g.dot(B * g);
  Eigen::VectorXd cauchy = (g.squaredNorm() / std::max(gBg, 1e-300)) * g;
  double cn = cauchy.norm();
  if (cn >= radius) return (radius / g.norm()) * g;
  // walk from the Cauchy point toward the Newton point to the boundary
  Eigen::VectorXd d = newton - cauchy;
  double a = d.squaredNorm();
  double b = 2.0 * cauchy.dot(d);
  double c = cauchy.squaredNorm() - radius * radius;
  double t = (-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a);
  return cauchy + std::clamp(t, 0.0, 1.0) * d;
}

}  // namespace

TrustReport trust_region_maximize(const TrustFunctions& fn,
                                  const Eigen::VectorXd& x0,
                                  const SolverOptions& opts,
                                  const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& upper) {
  Eigen::VectorXd x = project(x0, lower, upper);
  double fx = fn.value(x);
  double radius = opts.initial_radius;
  TrustReport report;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  for (int iter = 0; iter < opts.max_inner_iter; ++iter) {
    fn.derivs(x, g, H);
    Eigen::VectorXd pg = projected_gradient(g, x, lower, upper);
    report.grad_norm = pg.lpNorm<Eigen::Infinity>();
    report.iterations = iter;
    if (report.grad_norm <= opts.gradient_tol) {
      report.converged = true;
      break;
    }
    Eigen::MatrixXd B = -H;
    auto lltB = ridge_llt(B);
    Eigen::VectorXd step = dogleg(pg, lltB, B, radius);
    Eigen::VectorXd trial = project(x + step, lower, upper);
    Eigen::VectorXd actual_step = trial - x;
    double predicted =
        pg.dot(actual_step) - 0.5 * actual_step.dot(B * actual_step);
    double ftrial = fn.value(trial);
    double actual = ftrial - fx;
    double ratio = (predicted > 0.0) ? actual / predicted : -1.0;
    if (actual_step.norm() < 1e-14 * std::max(1.0, x.norm())) {
      report.converged = report.grad_norm <= 10.0 * opts.gradient_tol;
      break;
    }
    // near the optimum the value difference falls below evaluation noise
    // while the gradient is still informative; trust the model step then
    const double fnoise = 1e-11 * (1.0 + std::abs(fx));
    bool noise_regime =
        std::abs(actual) < fnoise && std::abs(predicted) < fnoise;
    if (ratio >= opts.accept_ratio && actual > 0.0) {
      x = trial;
      fx = ftrial;
      ++report.accepted_steps;
      if (ratio > 0.75 && actual_step.norm() >= 0.99 * radius) {
        radius = std::min(opts.grow * radius, opts.max_radius);
      }
    } else if (noise_regime) {
      x = trial;
      fx = ftrial;
      ++report.accepted_steps;
    } else {
      radius = opts.shrink * std::min(radius, actual_step.norm());
      if (radius < 1e-14) break;
    }
  }
  report.x = x;
  report.value = fx;
  return report;
}

Eigen::VectorXd poisson_glm(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                            int max_iter, double tol) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  Eigen::VectorXd yd = y.cast<double>();
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd lambda = eta.array().min(30.0).exp();
    Eigen::VectorXd z = eta + (yd - lambda).cwiseQuotient(lambda);
    Eigen::MatrixXd Xw = lambda.asDiagonal() * X;
    Eigen::VectorXd next =
        (X.transpose() * Xw).ldlt().solve(X.transpose() * (lambda.asDiagonal() * z));
    double change = (next - beta).lpNorm<Eigen::Infinity>();
    beta = next;
    if (change < tol) break;
  }
  return beta;
}

namespace {

void check_design_rank(const Eigen::MatrixXd& X,
                       const std::vector<std::string>& names,
                       const char* which) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    std::ostringstream oss;
    oss << "rank-deficient design for margin " << which
        << "; dependent columns:";
    auto perm = qr.colsPermutation().indices();
    for (int j = qr.rank(); j < X.cols(); ++j) {
      int col = perm(j);
      oss << " "
          << (col < static_cast<int>(names.size()) ? names[col]
                                                   : std::to_string(col));
    }
    throw std::invalid_argument(oss.str());
  }
}

double initial_eta_theta(const FitProblem& prob) {
  if (!prob.copula.has_theta()) return 0.0;
  try {
    std::vector<double> a(prob.n()), b(prob.n());
    for (int i = 0; i < prob.n(); ++i) {
      a[i] = prob.y1(i);
      b[i] = prob.y2(i);
    }
    double tau = kendall_tau(a, b);
    Interval range = prob.copula.tau_range();
    double width = range.hi - range.lo;
    double margin = 0.02 * width;
    tau = std::clamp(tau, range.lo + margin, range.hi - margin);
    double theta = theta_from_tau(prob.copula, tau);
    double eta = unlink_theta(prob.copula, theta);
    Interval eb = prob.copula.eta_bounds();
    return std::clamp(eta, eb.lo, eb.hi);
  } catch (const std::exception&) {
    return 0.0;
  }
}

struct InnerFit {
  TrustReport report;
  CoefBlock beta;
};

InnerFit run_inner(const FitProblem& prob, const Eigen::MatrixXd& S,
                   const SolverOptions& opts, const CoefBlock& start) {
  const int q1 = prob.q1();
  const int q2 = prob.q2();
  const int k = prob.k();
  TrustFunctions fn;
  fn.value = [&](const Eigen::VectorXd& v) {
    return penalized_objective(prob, CoefBlock::unpack(v, q1, q2), S);
  };
  fn.derivs = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g,
                  Eigen::MatrixXd& H) {
    Derivatives d = gradient_and_hessian(prob, CoefBlock::unpack(v, q1, q2), S);
    g = d.gradient;
    H = d.hessian;
  };
  const double big = 1e6;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(k, -big);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(k, big);
  Interval eb = prob.copula.eta_bounds();
  lo(k - 1) = eb.lo;
  hi(k - 1) = eb.hi;
  TrustReport report =
      trust_region_maximize(fn, start.pack(), opts, lo, hi);
  return {report, CoefBlock::unpack(report.x, q1, q2)};
}

FitResult make_result(const FitProblem& prob, const InnerFit& inner,
                      const SolverOptions& opts, const Eigen::MatrixXd& S,
                      int outer_iters, bool penalized) {
  (void)opts;
  FitResult r;
  r.beta_hat = inner.beta;
  r.loglik = log_likelihood(prob, inner.beta);
  r.penalized_obj = penalized_objective(prob, inner.beta, S);
  r.n_params = prob.n_params();
  r.aic = -2.0 * r.loglik + 2.0 * r.n_params;
  r.family = prob.copula.family;
  if (prob.copula.has_theta()) {
    r.theta_hat = link_theta(prob.copula, inner.beta.eta_theta);
    r.tau_hat = tau_from_theta(prob.copula, r.theta_hat);
  }
  r.at_independence = prob.copula.has_theta() && std::abs(r.tau_hat) < 1e-4;
  r.converged = inner.report.converged;
  r.inner_iters = inner.report.iterations;
  r.outer_iters = outer_iters;
  r.grad_norm = inner.report.grad_norm;
  r.penalized = penalized;
  return r;
}

CoefBlock initial_coefficients(const FitProblem& prob) {
  CoefBlock start;
  start.beta1 = poisson_glm(prob.X1, prob.y1);
  start.beta2 = poisson_glm(prob.X2, prob.y2);
  start.eta_theta = initial_eta_theta(prob);
  return start;
}

}  // namespace

FitResult fit(const FitProblem& prob, const SolverOptions& opts) {
  if (prob.n() < prob.n_params()) {
    throw std::invalid_argument("fit: fewer observations than parameters");
  }
  check_design_rank(prob.X1, prob.names1, "1");
  check_design_rank(prob.X2, prob.names2, "2");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(prob.k(), prob.k());
  InnerFit inner = run_inner(prob, S, opts, initial_coefficients(prob));
  return make_result(prob, inner, opts, S, 0, false);
}

FitResult fit_penalized(const FitProblem& prob, const SolverOptions& opts) {
  if (opts.xi == 0.0) return fit(prob, opts);
  if (prob.q1() != prob.q2()) {
    throw std::invalid_argument(
        "fit_penalized: margins must have positionally paired covariates");
  }
  check_design_rank(prob.X1, prob.names1, "1");
  check_design_rank(prob.X2, prob.names2, "2");
  const int p = prob.q1() - 1;

  FitResult base = fit(prob, opts);
  auto gap = [](const CoefBlock& b) {
    return (b.beta1 - b.beta2).cwiseAbs().maxCoeff();
  };
  auto weights_of = [&](const CoefBlock& b) {
    return (b.beta1 - b.beta2).cwiseAbs().eval();
  };

  CoefBlock current = base.beta_hat;
  Eigen::VectorXd w = weights_of(current);
  double prev_gap = gap(current);
  InnerFit best_inner{{}, current};
  Eigen::MatrixXd best_S = Eigen::MatrixXd::Zero(prob.k(), prob.k());
  int outer = 0;
  for (; outer < opts.max_outer_iter; ++outer) {
    PenaltyConfig cfg{opts.xi, w, opts.weight_floor};
    Eigen::MatrixXd S = build_penalty(p, cfg);
    InnerFit inner = run_inner(prob, S, opts, current);
    double new_gap = gap(inner.beta);
    if (outer > 0 && new_gap > prev_gap) {
      // the adaptive reweighting has started to reopen the paired
      // differences; keep the previous (tighter) iterate
      ++outer;
      break;
    }
    current = inner.beta;
    best_inner = inner;
    best_S = S;
    Eigen::VectorXd w_next = weights_of(current);
    double dw = (w_next - w).lpNorm<Eigen::Infinity>();
    w = w_next;
    prev_gap = new_gap;
    if (dw <= opts.weight_tol) {
      ++outer;
      break;
    }
  }
  FitResult r = make_result(prob, best_inner, opts, best_S, outer, true);
  return r;
}

}  // namespace copreg
