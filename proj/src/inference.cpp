#include "copreg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "copreg/poisson.hpp"
#include "copreg/special.hpp"

namespace copreg {

Outcome outcome_from_scores(int y1, int y2) {
  if (y1 > y2) return Outcome::Win;
  if (y1 == y2) return Outcome::Draw;
  return Outcome::Loss;
}

ScoreGrid score_grid(const CopulaSpec& spec, double theta, double lambda1,
                     double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw std::invalid_argument("score_grid: rates must be positive");
  }
  const int m = kGridMax + 1;
  ScoreGrid grid;
  grid.probs.setZero(m, m);
  grid.lambda1 = lambda1;
  grid.lambda2 = lambda2;
  grid.theta = theta;

  if (!spec.has_theta()) {
    Eigen::VectorXd f1(m), f2(m);
    for (int y = 0; y < m; ++y) {
      f1(y) = poisson_pmf(lambda1, y);
      f2(y) = poisson_pmf(lambda2, y);
    }
    grid.probs = f1 * f2.transpose();
  } else {
    // cdf levels at y = -1..kGridMax, then a four-corner difference
    Eigen::VectorXd F1(m + 1), F2(m + 1);
    F1(0) = 0.0;
    F2(0) = 0.0;
    for (int y = 0; y < m; ++y) {
      F1(y + 1) = poisson_cdf(lambda1, y);
      F2(y + 1) = poisson_cdf(lambda2, y);
    }
    Eigen::MatrixXd C(m + 1, m + 1);
    for (int a = 0; a <= m; ++a) {
      for (int b = 0; b <= m; ++b) {
        if (F1(a) <= 0.0 || F2(b) <= 0.0) {
          C(a, b) = 0.0;
        } else {
          C(a, b) = copula_cdf(spec, theta, F1(a), F2(b));
        }
      }
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double mass =
            C(i + 1, j + 1) - C(i, j + 1) - C(i + 1, j) + C(i, j);
        grid.probs(i, j) = std::max(0.0, mass);
      }
    }
  }
  KahanSum total;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) total.add(grid.probs(i, j));
  }
  grid.total_mass = total.value();
  return grid;
}

ScoreGrid score_grid(const FitResult& fit, const Eigen::VectorXd& x1,
                     const Eigen::VectorXd& x2) {
  if (x1.size() != fit.beta_hat.beta1.size() ||
      x2.size() != fit.beta_hat.beta2.size()) {
    throw std::invalid_argument(
        "score_grid: covariate row length does not match the fit");
  }
  double l1 = rate_from_predictor(x1, fit.beta_hat.beta1);
  double l2 = rate_from_predictor(x2, fit.beta_hat.beta2);
  return score_grid(CopulaSpec{fit.family}, fit.theta_hat, l1, l2);
}

ThreeWay three_way(const ScoreGrid& grid) {
  KahanSum win, draw, loss;
  const int m = kGridMax + 1;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double p = grid.probs(i, j);
      if (i > j) {
        win.add(p);
      } else if (i == j) {
        draw.add(p);
      } else {
        loss.add(p);
      }
    }
  }
  return {win.value(), draw.value(), loss.value()};
}

ThreeWay skellam_three_way(double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw std::invalid_argument("skellam_three_way: rates must be positive");
  }
  // P(Y1 - Y2 = d) = exp(-l1-l2) (l1/l2)^{d/2} I_|d|(2 sqrt(l1 l2))
  const double z = 2.0 * std::sqrt(lambda1 * lambda2);
  const double base = -lambda1 - lambda2;
  const double lr = 0.5 * std::log(lambda1 / lambda2);
  auto pdiff = [&](int d) {
    double logI = std::log(std::cyl_bessel_i(std::abs(d), z));
    return std::exp(base + d * lr + logI);
  };
  ThreeWay out;
  out.pi_draw = pdiff(0);
  KahanSum win, loss;
  for (int d = 1; d < 500; ++d) {
    double pw = pdiff(d);
    double pl = pdiff(-d);
    win.add(pw);
    loss.add(pl);
    if (pw < 1e-16 && pl < 1e-16) break;
  }
  out.pi_win = win.value();
  out.pi_loss = loss.value();
  return out;
}

MatchScore match_metrics(const ThreeWay& pred, Outcome outcome) {
  double s = pred.pi_win + pred.pi_draw + pred.pi_loss;
  if (!(s > 0.0)) {
    throw std::invalid_argument("match_metrics: forecast has no mass");
  }
  double p[3] = {pred.pi_win / s, pred.pi_draw / s, pred.pi_loss / s};
  const int truth = static_cast<int>(outcome);
  double d[3] = {0.0, 0.0, 0.0};
  d[truth] = 1.0;
  MatchScore out;
  double cp = 0.0, cd = 0.0;
  for (int r = 0; r < 2; ++r) {
    cp += p[r];
    cd += d[r];
    out.rps += (cp - cd) * (cp - cd);
  }
  out.rps *= 0.5;
  out.llh = p[truth];
  double pmax = std::max({p[0], p[1], p[2]});
  out.cr = (p[truth] >= pmax - 1e-12) ? 1.0 : 0.0;
  return out;
}

double goals_distance(const std::vector<std::array<double, 2>>& predictions,
                      const std::vector<std::array<int, 2>>& observations) {
  if (predictions.size() != observations.size() || predictions.empty()) {
    throw std::invalid_argument(
        "goals_distance: prediction/observation lengths differ or are empty");
  }
  KahanSum acc;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double d1 = observations[i][0] - predictions[i][0];
    double d2 = observations[i][1] - predictions[i][1];
    acc.add(std::sqrt(d1 * d1 + d2 * d2));
  }
  return acc.value() / static_cast<double>(predictions.size());
}

std::vector<int> aic_rank(const std::vector<FitResult>& fits) {
  std::vector<int> order(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (fits[a].aic != fits[b].aic) return fits[a].aic < fits[b].aic;
    return family_code(fits[a].family) < family_code(fits[b].family);
  });
  return order;
}

ResidualPair quantile_residuals(const FitResult& fit, const FitProblem& prob,
                                unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ResidualPair out;
  const int n = prob.n();
  out.r1.resize(n);
  out.r2.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int which = 0; which < 2; ++which) {
      const Eigen::VectorXd& beta =
          which == 0 ? fit.beta_hat.beta1 : fit.beta_hat.beta2;
      const Eigen::MatrixXd& X = which == 0 ? prob.X1 : prob.X2;
      int y = which == 0 ? prob.y1(i) : prob.y2(i);
      double lambda = rate_from_predictor(X.row(i).transpose(), beta);
      PoissonPoint pt = poisson_point(lambda, y);
      double t = unif(rng);
      double u = pt.cdf_prev + t * (pt.cdf - pt.cdf_prev);
      u = std::min(std::max(u, 1e-15), 1.0 - 1e-15);
      (which == 0 ? out.r1 : out.r2)[i] = norm_quantile(u);
    }
  }
  return out;
}

CvReport cross_validate(const Dataset& data, const std::string& fold_column,
                        const ModelSpec& spec, const SolverOptions& opts) {
  std::vector<std::string> labels = data.fold_labels(fold_column);
  std::map<std::string, std::vector<int>> folds;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    folds[labels[i]].push_back(static_cast<int>(i));
  }
  if (folds.size() < 2) {
    throw std::invalid_argument("cross_validate: need at least 2 folds in '" +
                                fold_column + "'");
  }
  CvReport rep;
  rep.n_folds = static_cast<int>(folds.size());
  rep.metrics.family = family_code(spec.family);
  rep.metrics.penalized = spec.linear_equal && spec.xi > 0.0;

  KahanSum rps, llh, cr, aic;
  std::vector<std::array<double, 2>> pred_rates;
  std::vector<std::array<int, 2>> obs_scores;
  int n_fits = 0;

  for (const auto& [label, test_rows] : folds) {
    std::vector<int> train_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != label) train_rows.push_back(static_cast<int>(i));
    }
    Dataset train = data.subset(train_rows);
    Dataset test = data.subset(test_rows);
    FitResult fit_res;
    try {
      FitProblem train_prob = build_problem(train, spec);
      SolverOptions local = opts;
      local.xi = rep.metrics.penalized ? spec.xi : 0.0;
      fit_res = rep.metrics.penalized ? fit_penalized(train_prob, local)
                                      : fit(train_prob, local);
    } catch (const std::exception& e) {
      rep.failed_folds.push_back(label + ": " + e.what());
      continue;
    }
    aic.add(fit_res.aic);
    ++n_fits;

    FitProblem test_prob = build_problem(test, spec);
    for (int i = 0; i < test_prob.n(); ++i) {
      ScoreGrid grid = score_grid(fit_res, test_prob.X1.row(i).transpose(),
                                  test_prob.X2.row(i).transpose());
      ThreeWay pred = three_way(grid);
      Outcome truth = outcome_from_scores(test_prob.y1(i), test_prob.y2(i));
      MatchScore ms = match_metrics(pred, truth);
      rps.add(ms.rps);
      llh.add(ms.llh);
      cr.add(ms.cr);
      pred_rates.push_back({grid.lambda1, grid.lambda2});
      obs_scores.push_back({test_prob.y1(i), test_prob.y2(i)});
      rep.predictions.push_back(pred);
      rep.outcomes.push_back(truth);
      rep.row_ids.push_back(test_rows[i]);

      if (data.has_odds) {
        double odds[3] = {data.odds(test_rows[i], 0), data.odds(test_rows[i], 1),
                          data.odds(test_rows[i], 2)};
        double s = pred.pi_win + pred.pi_draw + pred.pi_loss;
        double pi[3] = {pred.pi_win / s, pred.pi_draw / s, pred.pi_loss / s};
        int pick = 0;
        double best = pi[0] * odds[0] - 1.0;
        for (int l = 1; l < 3; ++l) {
          double er = pi[l] * odds[l] - 1.0;
          if (er > best) {
            best = er;
            pick = l;
          }
        }
        if (best > 0.0) {
          rep.has_betting = true;
          rep.bet_invested += 1.0;
          if (pick == static_cast<int>(truth)) rep.bet_returned += odds[pick];
        }
      }
    }
  }
  const int n = static_cast<int>(pred_rates.size());
  rep.metrics.n_matches = n;
  if (n > 0) {
    rep.metrics.rps = rps.value() / n;
    rep.metrics.llh = llh.value() / n;
    rep.metrics.cr = cr.value() / n;
    rep.metrics.mse_goals = goals_distance(pred_rates, obs_scores);
  }
  if (n_fits > 0) rep.metrics.aic = aic.value() / n_fits;
  return rep;
}

}  // namespace copreg
