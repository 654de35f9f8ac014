#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "copreg/betting.hpp"
#include "copreg/inference.hpp"
#include "copreg/io.hpp"
#include "copreg/simlab.hpp"
#include "copreg/solver.hpp"
#include "copreg/special.hpp"

namespace fs = std::filesystem;
using namespace copreg;

// exit codes: 1 usage, 2 data/file error, 3 structural/config error,
// 4 numeric failure
namespace {

struct CommonArgs {
  std::string data_path;
  std::string model_path;
  std::string out_dir = ".";
  unsigned long long seed = 1;
};

std::ofstream open_out(const CommonArgs& args, const std::string& name) {
  fs::create_directories(args.out_dir);
  fs::path p = fs::path(args.out_dir) / name;
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

ModelSpec load_spec(const CommonArgs& args, const std::string& family_override,
                    double xi_override) {
  ModelSpec spec = parse_model_spec(args.model_path);
  if (!family_override.empty()) spec.family = family_from_code(family_override);
  if (xi_override >= 0.0) {
    spec.xi = xi_override;
    spec.solver.xi = xi_override;
    if (xi_override > 0.0) spec.linear_equal = true;
  }
  return spec;
}

void note_unused_columns(const Dataset& data, const ModelSpec& spec) {
  std::vector<std::string> used = {data.response1, data.response2};
  used.insert(used.end(), spec.margin1_covariates.begin(),
              spec.margin1_covariates.end());
  used.insert(used.end(), spec.margin2_covariates.begin(),
              spec.margin2_covariates.end());
  for (const auto& col : data.header) {
    if (std::find(used.begin(), used.end(), col) == used.end()) {
      std::cout << "note: column '" << col << "' not used by the model\n";
    }
  }
}

FitResult fit_model(const FitProblem& prob, const ModelSpec& spec) {
  SolverOptions opts = spec.solver;
  bool penalized = spec.linear_equal && spec.xi > 0.0;
  opts.xi = penalized ? spec.xi : 0.0;
  return penalized ? fit_penalized(prob, opts) : fit(prob, opts);
}

void write_fit_report(const FitResult& res, const FitProblem& prob,
                      std::ostream& out) {
  out << "name,margin,estimate\n";
  for (int j = 0; j < prob.q1(); ++j) {
    out << prob.names1[j] << ",1," << format_double(res.beta_hat.beta1(j))
        << "\n";
  }
  for (int j = 0; j < prob.q2(); ++j) {
    out << prob.names2[j] << ",2," << format_double(res.beta_hat.beta2(j))
        << "\n";
  }
  out << "theta,copula," << format_double(res.theta_hat) << "\n";
}

void print_fit_summary(const FitResult& res, const FitProblem& prob) {
  std::cout << "family: " << family_code(res.family) << "\n"
            << "loglik: " << format_double(res.loglik) << "\n"
            << "aic: " << format_double(res.aic) << "\n"
            << "theta_hat: " << format_double(res.theta_hat) << "\n"
            << "tau_hat: " << format_double(res.tau_hat) << "\n"
            << "converged: " << (res.converged ? "yes" : "no") << "\n";
  if (res.at_independence) std::cout << "note: fit at the independence boundary\n";
  if (prob.q1() == prob.q2()) {
    double maxdiff =
        (res.beta_hat.beta1 - res.beta_hat.beta2).cwiseAbs().maxCoeff();
    std::cout << "max paired coefficient difference: "
              << format_double(maxdiff) << "\n";
  }
}

int cmd_fit(const CommonArgs& args, const std::string& family_override,
            double xi_override) {
  ModelSpec spec = load_spec(args, family_override, xi_override);
  Dataset data = load_matches(args.data_path, spec.response1, spec.response2);
  note_unused_columns(data, spec);
  FitProblem prob = build_problem(data, spec);
  FitResult res = fit_model(prob, spec);
  auto out = open_out(args, "coefficients.csv");
  write_fit_report(res, prob, out);
  print_fit_summary(res, prob);
  return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& family_override,
                double xi_override) {
  ModelSpec spec = load_spec(args, family_override, xi_override);
  Dataset data = load_matches(args.data_path, spec.response1, spec.response2);
  FitProblem prob = build_problem(data, spec);
  FitResult res = fit_model(prob, spec);
  auto tw_out = open_out(args, "three_way.csv");
  auto grid_out = open_out(args, "score_grids.csv");
  tw_out << "match_id,lambda1,lambda2,pi_win,pi_draw,pi_loss,total_mass\n";
  grid_out << "match_id,y1,y2,prob\n";
  for (int i = 0; i < prob.n(); ++i) {
    ScoreGrid grid = score_grid(res, prob.X1.row(i).transpose(),
                                prob.X2.row(i).transpose());
    ThreeWay tw = three_way(grid);
    tw_out << i << "," << format_double(grid.lambda1) << ","
           << format_double(grid.lambda2) << "," << format_double(tw.pi_win)
           << "," << format_double(tw.pi_draw) << ","
           << format_double(tw.pi_loss) << ","
           << format_double(grid.total_mass) << "\n";
    for (int a = 0; a <= kGridMax; ++a) {
      for (int b = 0; b <= kGridMax; ++b) {
        grid_out << i << "," << a << "," << b << ","
                 << format_double(grid.probs(a, b)) << "\n";
      }
    }
  }
  return 0;
}

int cmd_cv(const CommonArgs& args, const std::string& folds_column,
           const std::string& family_list, double xi_override) {
  ModelSpec spec = load_spec(args, "", xi_override);
  Dataset data = load_matches(args.data_path, spec.response1, spec.response2);
  std::vector<Family> families;
  if (family_list.empty()) {
    families = {spec.family};
  } else if (family_list == "all") {
    families = all_families();
  } else {
    std::stringstream ss(family_list);
    std::string code;
    while (std::getline(ss, code, ',')) {
      if (!code.empty()) families.push_back(family_from_code(code));
    }
  }
  auto out = open_out(args, "cv_metrics.csv");
  out << "family,penalized,rps,llh,cr,mse_goals,aic\n";
  bool also_penalized = spec.linear_equal && spec.xi > 0.0;
  for (Family fam : families) {
    for (int pen = 0; pen <= (also_penalized ? 1 : 0); ++pen) {
      ModelSpec local = spec;
      local.family = fam;
      local.linear_equal = pen != 0;
      local.xi = pen != 0 ? spec.xi : 0.0;
      CvReport rep = cross_validate(data, folds_column, local, local.solver);
      out << rep.metrics.family << "," << pen << ","
          << format_double(rep.metrics.rps) << ","
          << format_double(rep.metrics.llh) << ","
          << format_double(rep.metrics.cr) << ","
          << format_double(rep.metrics.mse_goals) << ","
          << format_double(rep.metrics.aic) << "\n";
      for (const auto& msg : rep.failed_folds) {
        std::cout << "warning: fold failed (" << rep.metrics.family << "): "
                  << msg << "\n";
      }
      if (rep.has_betting) {
        std::cout << rep.metrics.family << (pen ? " penalized" : "")
                  << " bets: invested " << format_double(rep.bet_invested)
                  << " returned " << format_double(rep.bet_returned) << "\n";
      }
    }
  }
  return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& study,
                 int replicates, int tournaments, int matches) {
  if (study == "dataset") {
    Dataset data = make_example_dataset(tournaments, matches, args.seed);
    fs::create_directories(args.out_dir);
    save_matches(data, (fs::path(args.out_dir) / "matches.csv").string());
    return 0;
  }
  StudyConfig cfg;
  if (study == "basic") {
    cfg = basic_study_config();
  } else if (study == "penalty") {
    cfg = penalty_study_config();
  } else {
    throw std::invalid_argument("unknown study '" + study +
                                "' (use basic, penalty, or dataset)");
  }
  cfg.seed = args.seed;
  if (replicates > 0) cfg.replicates = replicates;
  std::vector<StudyRow> rows = run_study(cfg);
  fs::create_directories(args.out_dir);
  write_study_csv(rows, (fs::path(args.out_dir) / "study.csv").string());
  if (study == "basic") {
    auto confusion = aic_confusion(rows);
    auto out = open_out(args, "aic_confusion.csv");
    out << "true_family,fitted_family,count\n";
    for (const auto& [truef, winners] : confusion) {
      for (const auto& [fitf, count] : winners) {
        out << truef << "," << fitf << "," << count << "\n";
      }
    }
  }
  return 0;
}

int cmd_bet(const CommonArgs& args, const std::string& folds_column,
            const std::string& odds_path, double epsilon,
            const std::string& staking) {
  ModelSpec spec = load_spec(args, "", -1.0);
  Dataset data = load_matches(args.data_path, spec.response1, spec.response2);
  CvReport rep = cross_validate(data, folds_column, spec, spec.solver);

  std::map<int, std::array<double, 3>> odds_by_row;
  if (!odds_path.empty()) {
    for (const auto& row : load_odds(odds_path)) {
      odds_by_row[row.match_id] = row.odds;
    }
  }
  std::vector<std::optional<std::array<double, 3>>> odds;
  for (std::size_t i = 0; i < rep.predictions.size(); ++i) {
    int rid = rep.row_ids[i];
    if (auto it = odds_by_row.find(rid); it != odds_by_row.end()) {
      odds.push_back(it->second);
    } else if (data.has_odds) {
      odds.push_back(std::array<double, 3>{data.odds(rid, 0),
                                           data.odds(rid, 1),
                                           data.odds(rid, 2)});
    } else {
      odds.push_back(std::nullopt);
    }
  }
  Staking mode = staking == "kelly" ? Staking::Kelly : Staking::Constant;
  BetLedger ledger =
      run_backtest(rep.predictions, odds, rep.outcomes, epsilon, mode);
  auto lout = open_out(args, "ledger.csv");
  lout << "match_id,outcome,expected_return,stake,realized,note\n";
  for (const auto& row : ledger.rows) {
    lout << rep.row_ids[row.match_id] << "," << row.outcome << ","
         << format_double(row.expected_return) << ","
         << format_double(row.stake) << "," << format_double(row.realized)
         << "," << row.note << "\n";
  }
  std::cout << "bets: " << ledger.n_bets << " invested "
            << format_double(ledger.invested) << " returned "
            << format_double(ledger.returned) << " ratio "
            << format_double(ledger.return_ratio) << "\n";
  auto curve = return_curve(rep.predictions, odds, rep.outcomes);
  auto cout_file = open_out(args, "return_curve.csv");
  cout_file << "epsilon,return_ratio_constant,return_ratio_kelly,n_bets\n";
  for (const auto& pt : curve) {
    cout_file << format_double(pt.epsilon) << ","
              << format_double(pt.return_ratio_constant) << ","
              << format_double(pt.return_ratio_kelly) << "," << pt.n_bets
              << "\n";
  }
  return 0;
}

int cmd_residuals(const CommonArgs& args, const std::string& family_override,
                  double xi_override) {
  ModelSpec spec = load_spec(args, family_override, xi_override);
  Dataset data = load_matches(args.data_path, spec.response1, spec.response2);
  FitProblem prob = build_problem(data, spec);
  FitResult res = fit_model(prob, spec);
  ResidualPair r = quantile_residuals(res, prob, args.seed);
  auto out = open_out(args, "residuals.csv");
  out << "row,residual1,residual2\n";
  for (std::size_t i = 0; i < r.r1.size(); ++i) {
    out << i << "," << format_double(r.r1[i]) << "," << format_double(r.r2[i])
        << "\n";
  }
  auto ks = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double f = norm_cdf(v[i]);
      d = std::max(d, std::max(f - i / double(v.size()),
                               (i + 1) / double(v.size()) - f));
    }
    return ks_pvalue(d, v.size());
  };
  std::cout << "ks_pvalue margin1: " << format_double(ks(r.r1)) << "\n"
            << "ks_pvalue margin2: " << format_double(ks(r.r2)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate copula regression for count data"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string family_override, family_list, folds_column = "WorldCup";
  std::string odds_path, staking = "constant", study = "basic";
  double xi_override = -1.0, epsilon = 0.0;
  int replicates = 0, tournaments = 5, matches = 64;

  auto add_common = [&](CLI::App* sub, bool needs_data) {
    if (needs_data) {
      sub->add_option("--data", args.data_path, "match CSV")->required();
      sub->add_option("--model", args.model_path, "model spec file")
          ->required();
    }
    sub->add_option("--out-dir", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "random seed");
  };

  auto* fit_cmd = app.add_subcommand("fit", "fit a model");
  add_common(fit_cmd, true);
  fit_cmd->add_option("--family", family_override, "copula family code");
  fit_cmd->add_option("--xi", xi_override, "penalty strength");

  auto* predict_cmd = app.add_subcommand("predict", "score grids + three-way");
  add_common(predict_cmd, true);
  predict_cmd->add_option("--family", family_override, "copula family code");
  predict_cmd->add_option("--xi", xi_override, "penalty strength");

  auto* cv_cmd = app.add_subcommand("cv", "tournament cross-validation");
  add_common(cv_cmd, true);
  cv_cmd->add_option("--folds-column", folds_column, "fold label column");
  cv_cmd->add_option("--family", family_list,
                     "comma list of family codes, or 'all'");
  cv_cmd->add_option("--xi", xi_override, "penalty strength");

  auto* sim_cmd = app.add_subcommand("simulate", "run simulation studies");
  add_common(sim_cmd, false);
  sim_cmd->add_option("--study", study, "basic | penalty | dataset");
  sim_cmd->add_option("--replicates", replicates, "replicates per setting");
  sim_cmd->add_option("--tournaments", tournaments, "dataset mode");
  sim_cmd->add_option("--matches", matches, "matches per tournament");

  auto* bet_cmd = app.add_subcommand("bet", "backtest against odds");
  add_common(bet_cmd, true);
  bet_cmd->add_option("--folds-column", folds_column, "fold label column");
  bet_cmd->add_option("--odds", odds_path, "odds CSV");
  bet_cmd->add_option("--epsilon", epsilon, "expected-return threshold");
  bet_cmd->add_option("--staking", staking, "constant | kelly");

  auto* res_cmd = app.add_subcommand("residuals", "quantile residuals");
  add_common(res_cmd, true);
  res_cmd->add_option("--family", family_override, "copula family code");
  res_cmd->add_option("--xi", xi_override, "penalty strength");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) return cmd_fit(args, family_override, xi_override);
    if (predict_cmd->parsed())
      return cmd_predict(args, family_override, xi_override);
    if (cv_cmd->parsed())
      return cmd_cv(args, folds_column, family_list, xi_override);
    if (sim_cmd->parsed())
      return cmd_simulate(args, study, replicates, tournaments, matches);
    if (bet_cmd->parsed())
      return cmd_bet(args, folds_column, odds_path, epsilon, staking);
    if (res_cmd->parsed())
      return cmd_residuals(args, family_override, xi_override);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
