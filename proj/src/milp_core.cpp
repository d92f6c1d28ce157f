#include "storopt/milp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

#include <fmt/core.h>

#include "storopt/errors.hpp"

namespace storopt {

MilpProblem build_milp(const StorageParams& params, const PriceSeries& prices, bool refined,
                       const PricePartition& part) {
  if (part.periods() != prices.size())
    throw InvalidArgument("build_milp: partition does not match the price series");
  MilpProblem mp;
  mp.params = params;
  mp.prices = prices;
  mp.layout = StorageLayout{prices.size()};
  mp.base = build_lp(params, prices);
  mp.refined = refined;
  if (refined) {
    mp.binary_periods = part.t_neg;
  } else {
    for (std::size_t t = 0; t < prices.size(); ++t) mp.binary_periods.push_back(t);
  }

  LpProblem& lp = mp.base;
  auto add_var = [&lp](double lo, double hi) {
    lp.objective.push_back(0.0);
    lp.lower.push_back(lo);
    lp.upper.push_back(hi);
    return lp.num_vars() - 1;
  };
  for (std::size_t t : mp.binary_periods) {
    const std::size_t uc = add_var(0.0, 1.0);
    const std::size_t ud = add_var(0.0, 1.0);
    mp.u_chg.push_back(uc);
    mp.u_dis.push_back(ud);
    const std::size_t s1 = add_var(0.0, kInfinity);
    const std::size_t s2 = add_var(0.0, kInfinity);
    const std::size_t s3 = add_var(0.0, kInfinity);
    lp.rows.push_back({{{mp.layout.p_chg(t), 1.0}, {uc, -params.p_chg_max}, {s1, 1.0}}, 0.0});
    lp.rows.push_back({{{mp.layout.p_dis(t), 1.0}, {ud, -params.p_dis_max}, {s2, 1.0}}, 0.0});
    lp.rows.push_back({{{uc, 1.0}, {ud, 1.0}, {s3, 1.0}}, 1.0});
  }
  return mp;
}

namespace {

struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  std::shared_ptr<const LpBasis> warm;  // parent's optimal basis
};

}  // namespace

MilpResult solve_milp(const MilpProblem& problem, double tol) {
  const StorageParams& params = problem.params;
  const PriceSeries& prices = problem.prices;
  const std::size_t k_count = problem.binary_periods.size();

  MilpResult result;
  std::optional<Schedule> incumbent;
  double best = -std::numeric_limits<double>::infinity();

  std::vector<bool> is_binary(prices.size(), false);
  for (std::size_t t : problem.binary_periods) is_binary[t] = true;

  std::vector<Node> stack;
  stack.push_back({problem.base.lower, problem.base.upper, nullptr});
  LpProblem lp = problem.base;

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    ++result.stats.nodes;

    lp.lower = std::move(node.lower);
    lp.upper = std::move(node.upper);
    LpSolution sol = node.warm ? solve_lp(lp, {}, *node.warm) : solve_lp(lp);
    if (sol.status == LpStatus::Infeasible) continue;
    if (sol.status != LpStatus::Optimal)
      throw InternalError(fmt::format("node relaxation ended with status {}",
                                      to_string(sol.status)));
    if (incumbent && sol.objective <= best + 1e-10 * std::max(1.0, std::abs(best))) continue;

    const Schedule schedule = extract_schedule(problem.layout, sol.x);
    std::optional<std::size_t> branch;  // index into binary_periods
    double branch_score = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const std::size_t t = problem.binary_periods[k];
      if (!(schedule.p_chg[t] > tol && schedule.p_dis[t] > tol)) continue;
      if (scd_repairable(params, prices, t)) continue;
      const double score = std::min(schedule.p_chg[t] / params.p_chg_max,
                                    schedule.p_dis[t] / params.p_dis_max);
      bool take = !branch || score > branch_score;
      if (branch && score == branch_score) {
        const std::size_t cur = problem.binary_periods[*branch];
        take = prices[t] < prices[cur] || (prices[t] == prices[cur] && t < cur);
      }
      if (take) {
        branch = k;
        branch_score = score;
      }
    }

    if (!branch) {
      for (const ScdEvent& e : detect_scd(schedule, tol)) {
        if (!is_binary[e.t] && !scd_repairable(params, prices, e.t))
          throw InternalError(fmt::format(
              "relaxation placed an irreparable SCD at unconstrained period {}", e.t + 1));
      }
      Schedule repaired = repair_scd(params, prices, schedule, tol);
      incumbent = std::move(repaired);
      best = sol.objective;
      ++result.stats.incumbent_updates;
      continue;
    }

    const std::size_t uc = problem.u_chg[*branch];
    const std::size_t ud = problem.u_dis[*branch];
    const auto warm = std::make_shared<const LpBasis>(std::move(sol.basis));
    Node charge{lp.lower, lp.upper, warm};
    Node discharge{lp.lower, lp.upper, warm};
    charge.lower[uc] = charge.upper[uc] = 1.0;
    charge.lower[ud] = charge.upper[ud] = 0.0;
    discharge.lower[uc] = discharge.upper[uc] = 0.0;
    discharge.lower[ud] = discharge.upper[ud] = 1.0;
    stack.push_back(std::move(discharge));
    stack.push_back(std::move(charge));
  }

  SolveReport& report = result.report;
  result.stats.gap = 0.0;
  if (!incumbent) {
    report.status = SolveStatus::Infeasible;
    return result;
  }
  report.status = SolveStatus::Optimal;
  report.schedule = std::move(*incumbent);
  report.objective = objective(prices, report.schedule);
  report.scd_events = detect_scd(report.schedule, tol);
  return result;
}

}  // namespace storopt
