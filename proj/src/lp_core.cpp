#include "storopt/lp_core.hpp"

#include <algorithm>
#include <cmath>

#include "storopt/errors.hpp"

namespace storopt {

LpProblem build_lp(const StorageParams& params, const PriceSeries& prices) {
  params.validate();
  prices.validate();
  const std::size_t T = prices.size();
  const StorageLayout L{T};
  const double dt = prices.dt;

  LpProblem lp;
  lp.objective.assign(L.num_vars(), 0.0);
  lp.lower.assign(L.num_vars(), 0.0);
  lp.upper.assign(L.num_vars(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    lp.objective[L.p_chg(t)] = -dt * prices[t];
    lp.objective[L.p_dis(t)] = dt * prices[t];
    lp.upper[L.p_chg(t)] = params.p_chg_max;
    lp.upper[L.p_dis(t)] = params.p_dis_max;
    lp.lower[L.soe(t)] = params.s_min;
    lp.upper[L.soe(t)] = params.s_max;

    // s_t - rho s_{t-1} - dt eta_c p^C_t + dt/eta_d p^D_t = rho s_init at t = 0, else 0
    LinearRow row;
    row.entries.push_back({L.p_chg(t), -dt * params.eta_c});
    row.entries.push_back({L.p_dis(t), dt / params.eta_d});
    row.entries.push_back({L.soe(t), 1.0});
    if (t > 0) row.entries.push_back({L.soe(t - 1), -params.rho});
    row.rhs = t == 0 ? params.rho * params.s_init : 0.0;
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

Schedule extract_schedule(const StorageLayout& layout, const std::vector<double>& x) {
  if (x.size() < layout.num_vars()) throw InvalidArgument("extract_schedule: short solution");
  Schedule s;
  for (std::size_t t = 0; t < layout.periods; ++t) {
    s.p_chg.push_back(x[layout.p_chg(t)]);
    s.p_dis.push_back(x[layout.p_dis(t)]);
    s.soe.push_back(x[layout.soe(t)]);
  }
  return s;
}

SolveReport solve_storage_lp(const StorageParams& params, const PriceSeries& prices, double tol) {
  const LpProblem lp = build_lp(params, prices);
  const LpSolution sol = solve_lp(lp);
  SolveReport report;
  switch (sol.status) {
    case LpStatus::Optimal: break;
    case LpStatus::Infeasible: report.status = SolveStatus::Infeasible; return report;
    case LpStatus::Unbounded: report.status = SolveStatus::Unbounded; return report;
    case LpStatus::IterationLimit: throw InternalError("storage LP hit the iteration limit");
  }

  const StorageLayout L{prices.size()};
  report.status = SolveStatus::Optimal;
  report.schedule = extract_schedule(L, sol.x);
  report.objective = objective(prices, report.schedule);
  report.scd_events = detect_scd(report.schedule, tol);

  DualVector duals;
  auto split = [](double d, std::vector<double>& lo, std::vector<double>& hi) {
    hi.push_back(std::max(d, 0.0));
    lo.push_back(std::max(-d, 0.0));
  };
  for (std::size_t t = 0; t < L.periods; ++t) {
    duals.lambda.push_back(sol.row_duals[t]);
    split(sol.reduced_costs[L.p_chg(t)], duals.gamma_lo, duals.gamma_hi);
    split(sol.reduced_costs[L.p_dis(t)], duals.delta_lo, duals.delta_hi);
    split(sol.reduced_costs[L.soe(t)], duals.sigma_lo, duals.sigma_hi);
  }
  report.duals = std::move(duals);
  report.kkt_max_residual = kkt_verify(params, prices, report, tol);
  return report;
}

double KktResiduals::max() const noexcept {
  return std::max({stationarity, primal, complementarity, scd_identity});
}

KktResiduals kkt_residuals(const StorageParams& params, const PriceSeries& prices,
                           const SolveReport& report, double tol) {
  if (!report.duals) throw MissingDuals("report carries no dual multipliers");
  const DualVector& du = *report.duals;
  const Schedule& s = report.schedule;
  s.validate_shape();
  const std::size_t T = s.size();
  if (prices.size() != T || du.lambda.size() != T || du.sigma_lo.size() != T ||
      du.sigma_hi.size() != T || du.gamma_lo.size() != T || du.gamma_hi.size() != T ||
      du.delta_lo.size() != T || du.delta_hi.size() != T)
    throw InvalidArgument("kkt_residuals: dimension mismatch");

  const double dt = prices.dt;
  const double eta = params.round_trip();
  KktResiduals r;
  auto worst = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };
  // Natural residual of a complementarity pair g >= 0, mu >= 0, g * mu = 0.
  auto pair = [&](double g, double mu) {
    worst(r.complementarity, std::min(g, mu));
    if (mu < 0.0) worst(r.complementarity, mu);
  };

  for (std::size_t t = 0; t < T; ++t) {
    const double lam = du.lambda[t];
    const double lam_next = t + 1 < T ? du.lambda[t + 1] : 0.0;
    worst(r.stationarity,
          -dt * prices[t] + lam * dt / params.eta_d + du.delta_hi[t] - du.delta_lo[t]);
    worst(r.stationarity,
          dt * prices[t] - lam * dt * params.eta_c + du.gamma_hi[t] - du.gamma_lo[t]);
    worst(r.stationarity, lam - params.rho * lam_next + du.sigma_hi[t] - du.sigma_lo[t]);

    const double prev = t == 0 ? params.s_init : s.soe[t - 1];
    worst(r.primal, s.soe[t] - params.rho * prev -
                        dt * (params.eta_c * s.p_chg[t] - s.p_dis[t] / params.eta_d));
    worst(r.primal, std::max({0.0, -s.p_chg[t], s.p_chg[t] - params.p_chg_max}));
    worst(r.primal, std::max({0.0, -s.p_dis[t], s.p_dis[t] - params.p_dis_max}));
    worst(r.primal, std::max({0.0, params.s_min - s.soe[t], s.soe[t] - params.s_max}));

    pair(s.p_chg[t], du.gamma_lo[t]);
    pair(params.p_chg_max - s.p_chg[t], du.gamma_hi[t]);
    pair(s.p_dis[t], du.delta_lo[t]);
    pair(params.p_dis_max - s.p_dis[t], du.delta_hi[t]);
    pair(s.soe[t] - params.s_min, du.sigma_lo[t]);
    pair(params.s_max - s.soe[t], du.sigma_hi[t]);
  }
  for (const ScdEvent& e : detect_scd(s, tol)) {
    worst(r.scd_identity,
          dt * prices[e.t] * (1.0 - eta) + eta * du.delta_hi[e.t] + du.gamma_hi[e.t]);
  }
  return r;
}

double dual_objective(const StorageParams& params, const PriceSeries& prices,
                      const DualVector& duals) {
  const std::size_t T = prices.size();
  if (duals.lambda.size() != T) throw InvalidArgument("dual_objective: dimension mismatch");
  double v = T ? duals.lambda[0] * params.rho * params.s_init : 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    v += duals.gamma_hi[t] * params.p_chg_max + duals.delta_hi[t] * params.p_dis_max +
         duals.sigma_hi[t] * params.s_max - duals.sigma_lo[t] * params.s_min;
  }
  return v;
}

const char* to_string(SolveStatus value) {
  switch (value) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

}  // namespace storopt
