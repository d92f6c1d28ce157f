#include "storopt/dp_oracle.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "storopt/errors.hpp"

namespace storopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Power that moves the level from `from` to `to` in one period with a single
// mode, as (p_chg, p_dis). Empty when the move exceeds the rate limits.
struct Move {
  bool ok = false;
  double p_chg = 0.0;
  double p_dis = 0.0;
};

Move realise(const StorageParams& params, double dt, double from, double to) {
  const double beta = to - params.rho * from;
  Move m;
  if (beta >= 0.0) {
    m.p_chg = beta / (dt * params.eta_c);
    m.ok = m.p_chg <= params.p_chg_max * (1.0 + 1e-12);
    m.p_chg = std::min(m.p_chg, params.p_chg_max);
  } else {
    m.p_dis = -beta * params.eta_d / dt;
    m.ok = m.p_dis <= params.p_dis_max * (1.0 + 1e-12);
    m.p_dis = std::min(m.p_dis, params.p_dis_max);
  }
  return m;
}

}  // namespace

void DpConfig::validate() const {
  if (grid_points < 2) throw InvalidArgument("grid_points must be >= 2");
  if (action_levels < 2) throw InvalidArgument("action_levels must be >= 2");
}

SolveReport solve_dp(const StorageParams& params, const PriceSeries& prices,
                     const DpConfig& config) {
  params.validate();
  prices.validate();
  config.validate();
  const std::size_t N = config.grid_points;
  const std::size_t T = prices.size();
  const double dt = prices.dt;
  const double cap = params.capacity();
  const double spacing = cap / static_cast<double>(N - 1);
  if (dt * params.eta_c * params.p_chg_max < spacing)
    throw GridTooCoarse(fmt::format("one full-rate charge moves {:.6g} MWh, grid spacing is {:.6g}",
                                    dt * params.eta_c * params.p_chg_max, spacing));

  std::vector<double> grid(N);
  for (std::size_t k = 0; k < N; ++k)
    grid[k] = params.s_min + cap * (static_cast<double>(k) / static_cast<double>(N - 1));
  grid.front() = params.s_min;
  grid.back() = params.s_max;

  auto reward = [&](std::size_t t, const Move& m) {
    return dt * prices[t] * (m.p_dis - m.p_chg);
  };

  // value[t][i]: best profit over periods t..T-1 entering period t at grid[i].
  // choice[t][i]: grid index chosen at the end of period t.
  std::vector<std::vector<double>> value(T + 1, std::vector<double>(N, kNegInf));
  std::vector<std::vector<std::size_t>> choice(T, std::vector<std::size_t>(N, 0));
  std::fill(value[T].begin(), value[T].end(), 0.0);
  for (std::size_t t = T; t-- > 1;) {
    for (std::size_t i = 0; i < N; ++i) {
      double best = kNegInf;
      for (std::size_t k = 0; k < N; ++k) {
        if (value[t + 1][k] == kNegInf) continue;
        const Move m = realise(params, dt, grid[i], grid[k]);
        if (!m.ok) continue;
        const double v = reward(t, m) + value[t + 1][k];
        if (v > best) {
          best = v;
          choice[t][i] = k;
        }
      }
      value[t][i] = best;
    }
  }

  SolveReport report;
  double best = kNegInf;
  std::size_t first = 0;
  for (std::size_t k = 0; k < N; ++k) {
    if (value[1][k] == kNegInf) continue;
    const Move m = realise(params, dt, params.s_init, grid[k]);
    if (!m.ok) continue;
    const double v = reward(0, m) + value[1][k];
    if (v > best) {
      best = v;
      first = k;
    }
  }
  if (best == kNegInf) {
    report.status = SolveStatus::Infeasible;
    return report;
  }

  Schedule& s = report.schedule;
  double level = params.s_init;
  std::size_t k = first;
  for (std::size_t t = 0; t < T; ++t) {
    const Move m = realise(params, dt, level, grid[k]);
    s.p_chg.push_back(m.p_chg);
    s.p_dis.push_back(m.p_dis);
    s.soe.push_back(grid[k]);
    level = grid[k];
    if (t + 1 < T) k = choice[t + 1][k];
  }
  report.status = SolveStatus::Optimal;
  report.objective = objective(prices, s);
  report.scd_events = detect_scd(s);
  return report;
}

double exhaustive_micro_oracle(const StorageParams& params, const PriceSeries& prices,
                               std::size_t levels) {
  params.validate();
  prices.validate();
  const std::size_t T = prices.size();
  if (T > kMicroMaxPeriods)
    throw HorizonTooLong(fmt::format("{} periods exceed the enumeration limit of {}", T,
                                     kMicroMaxPeriods));
  if (levels < 2 || levels > kMicroMaxLevels)
    throw InvalidArgument(fmt::format("levels must be in [2, {}]", kMicroMaxLevels));

  // Action a: 0 idle, 1..L-1 charge, L..2L-2 discharge.
  const std::size_t steps = levels - 1;
  const std::size_t actions = 2 * steps + 1;
  const double dt = prices.dt;
  const double tol = 1e-9;
  double best = kNegInf;
  std::vector<std::size_t> a(T, 0);
  while (true) {
    double s = params.s_init;
    double profit = 0.0;
    bool feasible = true;
    for (std::size_t t = 0; t < T && feasible; ++t) {
      double pc = 0.0;
      double pd = 0.0;
      if (a[t] >= 1 && a[t] <= steps)
        pc = params.p_chg_max * static_cast<double>(a[t]) / static_cast<double>(steps);
      else if (a[t] > steps)
        pd = params.p_dis_max * static_cast<double>(a[t] - steps) / static_cast<double>(steps);
      s = params.rho * s + dt * (params.eta_c * pc - pd / params.eta_d);
      feasible = s >= params.s_min - tol && s <= params.s_max + tol;
      profit += dt * prices[t] * (pd - pc);
    }
    if (feasible) best = std::max(best, profit);

    std::size_t pos = 0;
    while (pos < T && ++a[pos] == actions) a[pos++] = 0;
    if (pos == T) break;
  }
  return best;
}

}  // namespace storopt
