#pragma once

#include <Eigen/Dense>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "copreg/io.hpp"
#include "copreg/model.hpp"
#include "copreg/solver.hpp"

// Synthetic data generation and the two simulation studies: copula
// recovery with distinct margin coefficients, and the penalty benefit
// when the true coefficients are shared across margins.

namespace copreg {

struct StudyConfig {
  int n = 250;
  int replicates = 50;
  std::vector<Family> families;  // true data-generating families
  std::vector<double> tau_grid;  // pairs outside a family's range are skipped
  Eigen::VectorXd beta_true_1;   // length 4: intercept + 3 slopes
  Eigen::VectorXd beta_true_2;
  // when set, fit the true family only, penalized and unpenalized;
  // otherwise fit the whole candidate set unpenalized
  bool equal_coefficients = false;
  double xi = 1e9;
  unsigned long long seed = 1;
  SolverOptions solver;
};

// Copula-recovery study defaults (distinct margin coefficients).
StudyConfig basic_study_config();
// Penalty-benefit study defaults (shared margin coefficients, beta_3 = 0
// acts as a noise variable).
StudyConfig penalty_study_config();

// n x d matrix of independent U[0,1] draws.
Eigen::MatrixXd gen_design(int n, int d, unsigned long long seed);

// Exact draw from the joint pmf truncated where each Poisson tail drops
// below 5e-11. Throws when the bound needs y > 200.
std::pair<int, int> sample_pair(const CopulaSpec& spec, double theta,
                                double lambda1, double lambda2,
                                std::mt19937_64& rng);

// (1/8) * sum of squared coefficient errors over both margins.
double coef_mse(const CoefBlock& beta_hat, const Eigen::VectorXd& beta_true_1,
                const Eigen::VectorXd& beta_true_2);

struct StudyRow {
  std::string true_family;
  std::string fitted_family;
  double tau = 0.0;
  int replicate = 0;
  double mse = 0.0;
  double aic = 0.0;
  double theta_hat = 0.0;
  bool penalized = false;
  bool converged = false;
  bool at_independence = false;
  std::string error;  // nonempty when the fit failed
};

std::vector<StudyRow> run_study(const StudyConfig& config);

void write_study_csv(const std::vector<StudyRow>& rows,
                     const std::string& path);

// true family -> (AIC-winning fitted family -> count), one vote per
// (true family, tau, replicate) cell.
std::map<std::string, std::map<std::string, int>> aic_confusion(
    const std::vector<StudyRow>& rows);

// One simulated replicate dataset in the study's schema, for fitting
// outside run_study.
FitProblem make_study_problem(Family family, double tau, int n,
                              const Eigen::VectorXd& beta1,
                              const Eigen::VectorXd& beta2,
                              std::mt19937_64& rng);

// A small match dataset in the case study's shape (teams, tournament
// label, age and rank covariates, bookmaker odds) generated from a known
// shared-coefficient model. Ships as the bundled example.
Dataset make_example_dataset(int n_tournaments, int matches_per_tournament,
                             unsigned long long seed);

}  // namespace copreg
