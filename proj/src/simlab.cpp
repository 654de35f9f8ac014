#include "copreg/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "copreg/inference.hpp"
#include "copreg/poisson.hpp"
#include "copreg/special.hpp"

namespace copreg {

StudyConfig basic_study_config() {
  StudyConfig cfg;
  cfg.families = {Family::C0, Family::C90, Family::F,    Family::G0,
                  Family::Indep, Family::J0,  Family::N};
  cfg.tau_grid = {-0.8, -0.6, -0.4, -0.2, 0.1, 0.3, 0.5, 0.7, 0.9};
  cfg.beta_true_1 = (Eigen::VectorXd(4) << 0.5, 0.2, -0.2, 0.0).finished();
  cfg.beta_true_2 = (Eigen::VectorXd(4) << 0.2, -0.3, 0.1, 0.5).finished();
  cfg.equal_coefficients = false;
  return cfg;
}

StudyConfig penalty_study_config() {
  StudyConfig cfg;
  cfg.families = {Family::N, Family::F,  Family::G0,
                  Family::C0,    Family::J0, Family::C90};
  cfg.tau_grid = {-0.25, 0.25};
  cfg.beta_true_1 = (Eigen::VectorXd(4) << 0.25, 0.2, -0.35, 0.0).finished();
  cfg.beta_true_2 = cfg.beta_true_1;
  cfg.equal_coefficients = true;
  cfg.xi = 1e9;
  return cfg;
}

Eigen::MatrixXd gen_design(int n, int d, unsigned long long seed) {
  if (n <= 0 || d <= 0) {
    throw std::invalid_argument("gen_design: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = unif(rng);
  }
  return X;
}

namespace {

Eigen::MatrixXd design_from_rng(int n, int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = unif(rng);
  }
  return X;
}

// joint pmf on [0,Y1] x [0,Y2] by differencing the copula cdf matrix
Eigen::MatrixXd truncated_joint(const CopulaSpec& spec, double theta,
                                double lambda1, double lambda2, int Y1,
                                int Y2) {
  Eigen::MatrixXd probs(Y1 + 1, Y2 + 1);
  if (!spec.has_theta()) {
    for (int i = 0; i <= Y1; ++i) {
      double f1 = poisson_pmf(lambda1, i);
      for (int j = 0; j <= Y2; ++j) {
        probs(i, j) = f1 * poisson_pmf(lambda2, j);
      }
    }
    return probs;
  }
  Eigen::VectorXd F1(Y1 + 2), F2(Y2 + 2);
  F1(0) = 0.0;
  F2(0) = 0.0;
  for (int y = 0; y <= Y1; ++y) F1(y + 1) = poisson_cdf(lambda1, y);
  for (int y = 0; y <= Y2; ++y) F2(y + 1) = poisson_cdf(lambda2, y);
  Eigen::MatrixXd C(Y1 + 2, Y2 + 2);
  for (int a = 0; a <= Y1 + 1; ++a) {
    for (int b = 0; b <= Y2 + 1; ++b) {
      if (F1(a) <= 0.0 || F2(b) <= 0.0) {
        C(a, b) = 0.0;
      } else {
        C(a, b) = copula_cdf(spec, theta, F1(a), F2(b));
      }
    }
  }
  for (int i = 0; i <= Y1; ++i) {
    for (int j = 0; j <= Y2; ++j) {
      probs(i, j) =
          std::max(0.0, C(i + 1, j + 1) - C(i, j + 1) - C(i + 1, j) + C(i, j));
    }
  }
  return probs;
}

}  // namespace

std::pair<int, int> sample_pair(const CopulaSpec& spec, double theta,
                                double lambda1, double lambda2,
                                std::mt19937_64& rng) {
  const double tail = 5e-11;
  int Y1 = poisson_quantile(lambda1, 1.0 - tail);
  int Y2 = poisson_quantile(lambda2, 1.0 - tail);
  if (Y1 > 200 || Y2 > 200) {
    throw std::runtime_error(
        "sample_pair: truncation bound exceeds y=200; rates too large");
  }
  Eigen::MatrixXd probs = truncated_joint(spec, theta, lambda1, lambda2, Y1, Y2);
  KahanSum total;
  for (int i = 0; i <= Y1; ++i) {
    for (int j = 0; j <= Y2; ++j) total.add(probs(i, j));
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng) * total.value();
  double acc = 0.0;
  for (int i = 0; i <= Y1; ++i) {
    for (int j = 0; j <= Y2; ++j) {
      acc += probs(i, j);
      if (u <= acc) return {i, j};
    }
  }
  return {Y1, Y2};
}

double coef_mse(const CoefBlock& beta_hat, const Eigen::VectorXd& beta_true_1,
                const Eigen::VectorXd& beta_true_2) {
  if (beta_hat.beta1.size() != beta_true_1.size() ||
      beta_hat.beta2.size() != beta_true_2.size()) {
    throw std::invalid_argument("coef_mse: coefficient length mismatch");
  }
  double acc = (beta_hat.beta1 - beta_true_1).squaredNorm() +
               (beta_hat.beta2 - beta_true_2).squaredNorm();
  return acc / (beta_true_1.size() + beta_true_2.size());
}

FitProblem make_study_problem(Family family, double tau, int n,
                              const Eigen::VectorXd& beta1,
                              const Eigen::VectorXd& beta2,
                              std::mt19937_64& rng) {
  CopulaSpec spec{family};
  double theta = spec.has_theta() ? theta_from_tau(spec, tau) : 0.0;
  Eigen::MatrixXd X = design_from_rng(n, 6, rng);
  FitProblem prob;
  prob.copula = spec;
  prob.X1.resize(n, 4);
  prob.X2.resize(n, 4);
  prob.X1.col(0).setOnes();
  prob.X2.col(0).setOnes();
  prob.X1.rightCols(3) = X.leftCols(3);
  prob.X2.rightCols(3) = X.rightCols(3);
  prob.names1 = {"(Intercept)", "x1", "x2", "x3"};
  prob.names2 = {"(Intercept)", "x4", "x5", "x6"};
  prob.y1.resize(n);
  prob.y2.resize(n);
  for (int i = 0; i < n; ++i) {
    double l1 = rate_from_predictor(prob.X1.row(i).transpose(), beta1);
    double l2 = rate_from_predictor(prob.X2.row(i).transpose(), beta2);
    auto [a, b] = sample_pair(spec, theta, l1, l2, rng);
    prob.y1(i) = a;
    prob.y2(i) = b;
  }
  return prob;
}

namespace {

bool tau_in_range(const CopulaSpec& spec, double tau) {
  if (!spec.has_theta()) return false;
  Interval r = spec.tau_range();
  return tau >= r.lo && tau <= r.hi && tau != 0.0;
}

std::vector<Family> candidate_set(double tau) {
  if (tau < 0.0) {
    return {Family::Indep, Family::N, Family::F, Family::C90};
  }
  return {Family::Indep, Family::N, Family::F,  Family::G0,
          Family::J0,    Family::C0,    Family::C90};
}

}  // namespace

std::vector<StudyRow> run_study(const StudyConfig& config) {
  std::vector<StudyRow> rows;
  for (std::size_t fi = 0; fi < config.families.size(); ++fi) {
    Family truef = config.families[fi];
    CopulaSpec true_spec{truef};
    for (std::size_t ti = 0; ti < config.tau_grid.size(); ++ti) {
      double tau = config.tau_grid[ti];
      if (truef == Family::Indep) {
        if (ti != 0) continue;  // independence has no tau axis
        tau = 0.0;
      } else if (!tau_in_range(true_spec, tau)) {
        continue;
      }
      for (int rep = 0; rep < config.replicates; ++rep) {
        std::seed_seq seq{static_cast<unsigned>(config.seed & 0xffffffffu),
                          static_cast<unsigned>(config.seed >> 32),
                          static_cast<unsigned>(fi),
                          static_cast<unsigned>(ti),
                          static_cast<unsigned>(rep)};
        std::mt19937_64 rng(seq);
        FitProblem base;
        try {
          base = make_study_problem(truef, tau, config.n, config.beta_true_1,
                                    config.beta_true_2, rng);
        } catch (const std::exception& e) {
          StudyRow row;
          row.true_family = family_code(truef);
          row.tau = tau;
          row.replicate = rep;
          row.error = std::string("generation: ") + e.what();
          rows.push_back(row);
          continue;
        }

        auto fit_one = [&](Family fam, bool penalized) {
          StudyRow row;
          row.true_family = family_code(truef);
          row.fitted_family = family_code(fam);
          row.tau = tau;
          row.replicate = rep;
          row.penalized = penalized;
          FitProblem prob = base;
          prob.copula = CopulaSpec{fam};
          SolverOptions opts = config.solver;
          opts.xi = penalized ? config.xi : 0.0;
          try {
            FitResult res =
                penalized ? fit_penalized(prob, opts) : fit(prob, opts);
            row.mse = coef_mse(res.beta_hat, config.beta_true_1,
                               config.beta_true_2);
            row.aic = res.aic;
            row.theta_hat = res.theta_hat;
            row.converged = res.converged;
            row.at_independence = res.at_independence;
          } catch (const std::exception& e) {
            row.error = e.what();
          }
          rows.push_back(row);
        };

        if (config.equal_coefficients) {
          fit_one(truef, false);
          fit_one(truef, true);
        } else {
          for (Family fam : candidate_set(tau)) fit_one(fam, false);
        }
      }
    }
  }
  return rows;
}

void write_study_csv(const std::vector<StudyRow>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "true_family,fitted_family,tau,replicate,mse,aic,theta_hat,"
         "penalized,converged,error\n";
  for (const auto& r : rows) {
    out << r.true_family << "," << r.fitted_family << ","
        << format_double(r.tau) << "," << r.replicate << ","
        << format_double(r.mse) << "," << format_double(r.aic) << ","
        << format_double(r.theta_hat) << "," << (r.penalized ? 1 : 0) << ","
        << (r.converged ? 1 : 0) << "," << r.error << "\n";
  }
}

std::map<std::string, std::map<std::string, int>> aic_confusion(
    const std::vector<StudyRow>& rows) {
  // one vote per (true family, tau, replicate) cell
  std::map<std::string, const StudyRow*> best;
  for (const auto& r : rows) {
    if (!r.error.empty() || r.fitted_family.empty()) continue;
    std::ostringstream key;
    key << r.true_family << "|" << r.tau << "|" << r.replicate;
    auto [it, inserted] = best.emplace(key.str(), &r);
    if (!inserted) {
      const StudyRow* cur = it->second;
      if (r.aic < cur->aic ||
          (r.aic == cur->aic && r.fitted_family < cur->fitted_family)) {
        it->second = &r;
      }
    }
  }
  std::map<std::string, std::map<std::string, int>> confusion;
  for (const auto& [key, row] : best) {
    ++confusion[row->true_family][row->fitted_family];
  }
  return confusion;
}

Dataset make_example_dataset(int n_tournaments, int matches_per_tournament,
                             unsigned long long seed) {
  static const char* kTeams[] = {
      "Albatross", "Bison",    "Caracal",  "Dingo",   "Egret",   "Falcon",
      "Gazelle",   "Heron",    "Ibex",     "Jackal",  "Kestrel", "Lynx",
      "Marmot",    "Narwhal",  "Ocelot",   "Pangolin"};
  const int n_teams = 16;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> team_pick(0, n_teams - 1);
  std::uniform_int_distribution<int> rank_pick(1, 80);

  // shared coefficients across margins: intercept, age effect, rank effect
  const double b0 = 1.5, b_age = -0.03, b_rank = -0.008;
  CopulaSpec spec{Family::F};
  const double theta = theta_from_tau(spec, 0.25);

  std::ostringstream csv;
  csv << "y1,y2,Team1,Team2,WorldCup,Age1,Age2,Rank1,Rank2,"
         "odds_win,odds_draw,odds_loss\n";
  for (int t = 0; t < n_tournaments; ++t) {
    std::string cup = "WC" + std::to_string(2002 + 4 * t);
    for (int m = 0; m < matches_per_tournament; ++m) {
      int t1 = team_pick(rng);
      int t2 = team_pick(rng);
      while (t2 == t1) t2 = team_pick(rng);
      double age1 = std::round((24.0 + 8.0 * unif(rng)) * 10.0) / 10.0;
      double age2 = std::round((24.0 + 8.0 * unif(rng)) * 10.0) / 10.0;
      int rank1 = rank_pick(rng);
      int rank2 = rank_pick(rng);
      double l1 = std::exp(b0 + b_age * age1 + b_rank * rank1);
      double l2 = std::exp(b0 + b_age * age2 + b_rank * rank2);
      auto [y1, y2] = sample_pair(spec, theta, l1, l2, rng);
      ThreeWay tw = three_way(score_grid(spec, theta, l1, l2));
      double s = tw.pi_win + tw.pi_draw + tw.pi_loss;
      double pi[3] = {tw.pi_win / s, tw.pi_draw / s, tw.pi_loss / s};
      double odds[3];
      for (int l = 0; l < 3; ++l) {
        // bookmaker margin plus mild noise on the implied probability
        double noisy = pi[l] * std::exp(0.05 * (unif(rng) - 0.5));
        odds[l] = std::max(1.01, 1.0 / (1.06 * noisy));
        odds[l] = std::round(odds[l] * 100.0) / 100.0;
      }
      csv << y1 << "," << y2 << "," << kTeams[t1] << "," << kTeams[t2] << ","
          << cup << "," << format_double(age1) << "," << format_double(age2)
          << "," << rank1 << "," << rank2 << "," << format_double(odds[0])
          << "," << format_double(odds[1]) << "," << format_double(odds[2])
          << "\n";
    }
  }
  return load_matches_text(csv.str());
}

}  // namespace copreg
