#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "copreg/inference.hpp"

// Backtesting against bookmaker odds: the expected-return threshold rule
// with constant or Kelly staking, and return curves over the threshold.

namespace copreg {

enum class Staking { Constant, Kelly };

struct BetRow {
  int match_id = 0;
  int outcome = -1;  // 0 win, 1 draw, 2 loss; -1 means skipped
  double expected_return = 0.0;
  double stake = 0.0;
  double realized = 0.0;
  std::string note;  // set for warning/skip rows
};

struct BetLedger {
  std::vector<BetRow> rows;
  double invested = 0.0;
  double returned = 0.0;
  double return_ratio = 0.0;  // (returned - invested) / invested
  double epsilon = 0.0;
  int n_bets = 0;
};

// Componentwise pi * odds - 1. Odds below 1 are rejected.
std::array<double, 3> expected_returns(const ThreeWay& pred,
                                       const std::array<double, 3>& odds);

// max(0, (pi * odds - 1) / (odds - 1)); odds must exceed 1.
double kelly_stake(double pi, double odds);

// One row per match. A bet goes on the outcome with the largest expected
// return (ties broken in the order win, draw, loss) whenever that return
// exceeds epsilon. Matches with missing odds are skipped with a note.
BetLedger run_backtest(const std::vector<ThreeWay>& predictions,
                       const std::vector<std::optional<std::array<double, 3>>>& odds,
                       const std::vector<Outcome>& outcomes, double epsilon,
                       Staking staking);

struct ReturnCurvePoint {
  double epsilon = 0.0;
  double return_ratio_constant = 0.0;
  double return_ratio_kelly = 0.0;
  int n_bets = 0;  // at constant staking
};

// Sweep epsilon over 0..1 in steps of 0.05.
std::vector<ReturnCurvePoint> return_curve(
    const std::vector<ThreeWay>& predictions,
    const std::vector<std::optional<std::array<double, 3>>>& odds,
    const std::vector<Outcome>& outcomes);

}  // namespace copreg
