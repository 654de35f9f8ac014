#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "copreg/io.hpp"
#include "copreg/model.hpp"
#include "copreg/solver.hpp"

// Prediction and evaluation: score grids, three-way match probabilities,
// the Skellam baseline, forecast metrics, quantile residuals, and
// tournament cross-validation.

namespace copreg {

inline constexpr int kGridMax = 20;  // scores 0..20 per margin

struct ScoreGrid {
  Eigen::MatrixXd probs;  // (kGridMax+1) x (kGridMax+1)
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double theta = 0.0;
  double total_mass = 0.0;
};

struct ThreeWay {
  double pi_win = 0.0;
  double pi_draw = 0.0;
  double pi_loss = 0.0;
};

enum class Outcome { Win = 0, Draw = 1, Loss = 2 };
Outcome outcome_from_scores(int y1, int y2);

// Joint score probabilities on [0,20]^2 at given rates and copula
// parameter. The grid is built by differencing one copula-cdf matrix, so
// it costs one copula evaluation per grid corner.
ScoreGrid score_grid(const CopulaSpec& spec, double theta, double lambda1,
                     double lambda2);
// Same, from a fit and one covariate row per margin (intercept included).
ScoreGrid score_grid(const FitResult& fit, const Eigen::VectorXd& x1,
                     const Eigen::VectorXd& x2);

ThreeWay three_way(const ScoreGrid& grid);

// Independence baseline through the distribution of the score difference.
ThreeWay skellam_three_way(double lambda1, double lambda2);

struct MatchScore {
  double rps = 0.0;
  double llh = 0.0;
  double cr = 0.0;
};
// Rank probability score, predicted probability of the truth, and the
// classification indicator. Probabilities are renormalized to sum to 1;
// argmax ties count as correct when the truth is in the argmax set.
MatchScore match_metrics(const ThreeWay& pred, Outcome outcome);

double goals_distance(const std::vector<std::array<double, 2>>& predictions,
                      const std::vector<std::array<int, 2>>& observations);

// Indices into `fits` in ascending AIC order; ties broken by family code.
std::vector<int> aic_rank(const std::vector<FitResult>& fits);

// Randomized normal quantile residuals, one vector per margin.
struct ResidualPair {
  std::vector<double> r1;
  std::vector<double> r2;
};
ResidualPair quantile_residuals(const FitResult& fit, const FitProblem& prob,
                                unsigned long long seed);

struct MetricsRow {
  std::string family;
  bool penalized = false;
  double rps = 0.0;
  double llh = 0.0;
  double cr = 0.0;
  double mse_goals = 0.0;
  double aic = 0.0;
  int n_matches = 0;
};

struct CvReport {
  MetricsRow metrics;  // averages over every predicted match
  int n_folds = 0;
  std::vector<std::string> failed_folds;
  // per predicted match, in fold order
  std::vector<ThreeWay> predictions;
  std::vector<Outcome> outcomes;
  std::vector<int> row_ids;
  bool has_betting = false;
  double bet_invested = 0.0;
  double bet_returned = 0.0;
};

// Leave-one-fold-out cross-validation keyed on a label column. The AIC
// reported is the mean training-fit AIC across folds. When the dataset
// carries odds, a constant-stake epsilon=0 backtest total is included.
CvReport cross_validate(const Dataset& data, const std::string& fold_column,
                        const ModelSpec& spec, const SolverOptions& opts);

}  // namespace copreg
