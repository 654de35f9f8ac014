#include "copreg/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "copreg/poisson.hpp"
#include "copreg/special.hpp"

namespace copreg {

namespace {

constexpr double kLogFloor = 1e-300;
constexpr double kNegTol = 1e-12;
constexpr double kEtaClamp = 30.0;

double rectangle_pmf(const CopulaSpec& spec, double theta,
                     const PoissonPoint& m1, const PoissonPoint& m2) {
  double c =
      copula_rectangle(spec, theta, m1.cdf_prev, m1.cdf, m2.cdf_prev, m2.cdf);
  // the bivariate t cdf is quadrature based, so its rectangle round-off can
  // exceed the closed-form families' tolerance
  double tol = spec.family == Family::T ? 1e-9 : kNegTol;
  if (c < -tol) {
    std::ostringstream oss;
    oss << "joint_pmf: negative mass " << c << " (family "
        << family_code(spec.family) << ", theta " << theta << ")";
    throw std::runtime_error(oss.str());
  }
  return std::max(c, 0.0);
}

}  // namespace

double joint_pmf(const CopulaSpec& spec, double theta, double lambda1,
                 double lambda2, int y1, int y2) {
  if (y1 < 0 || y2 < 0) {
    throw std::domain_error("joint_pmf: counts must be nonnegative");
  }
  PoissonPoint m1 = poisson_point(lambda1, y1);
  PoissonPoint m2 = poisson_point(lambda2, y2);
  if (!spec.has_theta()) return m1.pmf * m2.pmf;
  return rectangle_pmf(spec, theta, m1, m2);
}

double obs_log_pmf(const CopulaSpec& spec, int y1, int y2, double eta1,
                   double eta2, double eta_theta) {
  double l1 = std::exp(std::clamp(eta1, -kEtaClamp, kEtaClamp));
  double l2 = std::exp(std::clamp(eta2, -kEtaClamp, kEtaClamp));
  if (!spec.has_theta()) {
    return poisson_log_pmf(l1, y1) + poisson_log_pmf(l2, y2);
  }
  double theta = link_theta(spec, eta_theta);
  double c = joint_pmf(spec, theta, l1, l2, y1, y2);
  return std::log(std::max(c, kLogFloor));
}

Eigen::VectorXd CoefBlock::pack() const {
  Eigen::VectorXd v(beta1.size() + beta2.size() + 1);
  v << beta1, beta2, eta_theta;
  return v;
}

CoefBlock CoefBlock::unpack(const Eigen::VectorXd& v, int q1, int q2) {
  if (v.size() != q1 + q2 + 1) {
    throw std::invalid_argument("CoefBlock::unpack: length mismatch");
  }
  CoefBlock b;
  b.beta1 = v.segment(0, q1);
  b.beta2 = v.segment(q1, q2);
  b.eta_theta = v(q1 + q2);
  return b;
}

double log_likelihood(const FitProblem& prob, const CoefBlock& beta) {
  if (prob.n() == 0) {
    throw std::invalid_argument("log_likelihood: empty dataset");
  }
  KahanSum acc;
  for (int i = 0; i < prob.n(); ++i) {
    double eta1 = prob.X1.row(i).dot(beta.beta1);
    double eta2 = prob.X2.row(i).dot(beta.beta2);
    double term = obs_log_pmf(prob.copula, prob.y1(i), prob.y2(i), eta1, eta2,
                              beta.eta_theta);
    if (!std::isfinite(term)) {
      std::ostringstream oss;
      oss << "log_likelihood: non-finite contribution at observation " << i;
      throw std::runtime_error(oss.str());
    }
    acc.add(term);
  }
  return acc.value();
}

Eigen::MatrixXd build_penalty(int p, const PenaltyConfig& config) {
  int q = p + 1;
  if (config.weights.size() != q) {
    throw std::invalid_argument("build_penalty: weights must have length p+1");
  }
  int k = 2 * q + 1;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
  for (int j = 0; j < q; ++j) {
    double w = config.xi * std::max(config.weights(j), config.weight_floor);
    S(j, j) = w;
    S(q + j, q + j) = w;
    S(j, q + j) = -w;
    S(q + j, j) = -w;
  }
  return S;
}

double penalized_objective(const FitProblem& prob, const CoefBlock& beta,
                           const Eigen::MatrixXd& S) {
  double ll = log_likelihood(prob, beta);
  Eigen::VectorXd b = beta.pack();
  return ll - 0.5 * b.dot(S * b);
}

Derivatives gradient_and_hessian(const FitProblem& prob, const CoefBlock& beta,
                                 const Eigen::MatrixXd& S) {
  const int q1 = prob.q1();
  const int q2 = prob.q2();
  const int k = prob.k();
  const bool dep = prob.copula.has_theta();
  const int m = dep ? 3 : 2;  // active predictor dimensions per observation
  const double h = 2e-4;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k, k);

  Eigen::Vector3d g3;
  Eigen::Matrix3d h3;
  for (int i = 0; i < prob.n(); ++i) {
    Eigen::Vector3d eta;
    eta << prob.X1.row(i).dot(beta.beta1), prob.X2.row(i).dot(beta.beta2),
        beta.eta_theta;
    auto f = [&](const Eigen::Vector3d& e) {
      return obs_log_pmf(prob.copula, prob.y1(i), prob.y2(i), e(0), e(1),
                         e(2));
    };
    // Central differences in the (eta1, eta2, eta_theta) space; the chain
    // rule then spreads each 3x3 contribution over the coefficient blocks.
    double f0 = f(eta);
    g3.setZero();
    h3.setZero();
    double fp[3], fm[3];
    for (int a = 0; a < m; ++a) {
      Eigen::Vector3d e = eta;
      e(a) = eta(a) + h;
      fp[a] = f(e);
      e(a) = eta(a) - h;
      fm[a] = f(e);
      g3(a) = (fp[a] - fm[a]) / (2.0 * h);
      h3(a, a) = (fp[a] - 2.0 * f0 + fm[a]) / (h * h);
    }
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) {
        Eigen::Vector3d e = eta;
        e(a) += h;
        e(b) += h;
        double fpp = f(e);
        e(b) = eta(b) - h;
        double fpm = f(e);
        e(a) = eta(a) - h;
        double fmm = f(e);
        e(b) = eta(b) + h;
        double fmp = f(e);
        double val = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        h3(a, b) = val;
        h3(b, a) = val;
      }
    }
    if (!g3.allFinite() || !h3.allFinite()) {
      std::ostringstream oss;
      oss << "gradient_and_hessian: non-finite derivative at observation "
          << i;
      throw std::runtime_error(oss.str());
    }

    Eigen::VectorXd x1 = prob.X1.row(i).transpose();
    Eigen::VectorXd x2 = prob.X2.row(i).transpose();
    grad.segment(0, q1) += g3(0) * x1;
    grad.segment(q1, q2) += g3(1) * x2;
    hess.block(0, 0, q1, q1) += h3(0, 0) * (x1 * x1.transpose());
    hess.block(q1, q1, q2, q2) += h3(1, 1) * (x2 * x2.transpose());
    hess.block(0, q1, q1, q2) += h3(0, 1) * (x1 * x2.transpose());
    if (dep) {
      grad(k - 1) += g3(2);
      hess(k - 1, k - 1) += h3(2, 2);
      hess.block(0, k - 1, q1, 1) += h3(0, 2) * x1;
      hess.block(q1, k - 1, q2, 1) += h3(1, 2) * x2;
    }
  }
  hess.block(q1, 0, q2, q1) = hess.block(0, q1, q1, q2).transpose();
  hess.block(k - 1, 0, 1, k - 1) =
      hess.block(0, k - 1, k - 1, 1).transpose();

  Eigen::VectorXd b = CoefBlock{beta.beta1, beta.beta2, beta.eta_theta}.pack();
  grad -= S * b;
  hess -= S;
  return {grad, hess};
}

}  // namespace copreg
