#include "copreg/betting.hpp"

#include <cmath>
#include <stdexcept>

namespace copreg {

std::array<double, 3> expected_returns(const ThreeWay& pred,
                                       const std::array<double, 3>& odds) {
  for (double o : odds) {
    if (!(o >= 1.0)) {
      throw std::invalid_argument("expected_returns: decimal odds must be >= 1");
    }
  }
  double s = pred.pi_win + pred.pi_draw + pred.pi_loss;
  if (!(s > 0.0)) {
    throw std::invalid_argument("expected_returns: forecast has no mass");
  }
  double pi[3] = {pred.pi_win / s, pred.pi_draw / s, pred.pi_loss / s};
  return {pi[0] * odds[0] - 1.0, pi[1] * odds[1] - 1.0, pi[2] * odds[2] - 1.0};
}

double kelly_stake(double pi, double odds) {
  if (!(odds > 1.0)) {
    throw std::invalid_argument("kelly_stake: odds must exceed 1");
  }
  if (!(pi > 0.0) || !(pi < 1.0)) {
    throw std::invalid_argument("kelly_stake: probability must be in (0,1)");
  }
  return std::max(0.0, (pi * odds - 1.0) / (odds - 1.0));
}

BetLedger run_backtest(
    const std::vector<ThreeWay>& predictions,
    const std::vector<std::optional<std::array<double, 3>>>& odds,
    const std::vector<Outcome>& outcomes, double epsilon, Staking staking) {
  if (predictions.size() != odds.size() ||
      predictions.size() != outcomes.size()) {
    throw std::invalid_argument("run_backtest: input lists are not aligned");
  }
  BetLedger ledger;
  ledger.epsilon = epsilon;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    BetRow row;
    row.match_id = static_cast<int>(i);
    if (!odds[i]) {
      row.note = "skipped: missing odds";
      ledger.rows.push_back(row);
      continue;
    }
    auto er = expected_returns(predictions[i], *odds[i]);
    int pick = 0;
    for (int l = 1; l < 3; ++l) {
      if (er[l] > er[pick]) pick = l;  // ties keep the earlier outcome
    }
    row.outcome = pick;
    row.expected_return = er[pick];
    if (er[pick] > epsilon) {
      double o = (*odds[i])[pick];
      if (staking == Staking::Kelly) {
        double s = predictions[i].pi_win + predictions[i].pi_draw +
                   predictions[i].pi_loss;
        double pi = (pick == 0   ? predictions[i].pi_win
                     : pick == 1 ? predictions[i].pi_draw
                                 : predictions[i].pi_loss) /
                    s;
        row.stake = o > 1.0 ? kelly_stake(pi, o) : 0.0;
      } else {
        row.stake = 1.0;
      }
      if (row.stake > 0.0) {
        ++ledger.n_bets;
        ledger.invested += row.stake;
        if (pick == static_cast<int>(outcomes[i])) {
          row.realized = row.stake * (o - 1.0);
          ledger.returned += row.stake * o;
        } else {
          row.realized = -row.stake;
        }
      }
    }
    ledger.rows.push_back(row);
  }
  if (ledger.invested > 0.0) {
    ledger.return_ratio =
        (ledger.returned - ledger.invested) / ledger.invested;
  }
  return ledger;
}

std::vector<ReturnCurvePoint> return_curve(
    const std::vector<ThreeWay>& predictions,
    const std::vector<std::optional<std::array<double, 3>>>& odds,
    const std::vector<Outcome>& outcomes) {
  std::vector<ReturnCurvePoint> curve;
  for (int step = 0; step <= 20; ++step) {
    double eps = 0.05 * step;
    BetLedger c = run_backtest(predictions, odds, outcomes, eps,
                               Staking::Constant);
    BetLedger k = run_backtest(predictions, odds, outcomes, eps,
                               Staking::Kelly);
    ReturnCurvePoint pt;
    pt.epsilon = eps;
    pt.return_ratio_constant = c.return_ratio;
    pt.return_ratio_kelly = k.return_ratio;
    pt.n_bets = c.n_bets;
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace copreg
