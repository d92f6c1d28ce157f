#include "storopt/storage_model.hpp"

#include <cmath>
#include <string>

#include "storopt/errors.hpp"

namespace storopt {

namespace {

bool in_unit_interval(double v) { return v > 0.0 && v <= 1.0; }

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

void StorageParams::validate() const {
  const double values[] = {s_min, s_max, s_init, p_chg_max, p_dis_max, eta_c, eta_d, rho, dt};
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("storage parameters must be finite");
  }
  if (!(s_min >= 0.0)) throw InvalidArgument("s_min must be >= 0");
  if (!(s_min < s_max)) throw InvalidArgument("s_min must be < s_max");
  if (!(s_init >= s_min && s_init <= s_max))
    throw InvalidArgument("s_init must lie in [s_min, s_max]");
  if (!(p_chg_max > 0.0)) throw InvalidArgument("p_chg_max must be > 0");
  if (!(p_dis_max > 0.0)) throw InvalidArgument("p_dis_max must be > 0");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!in_unit_interval(eta_c)) throw InvalidArgument("eta_c must be in (0, 1]");
  if (!in_unit_interval(eta_d)) throw InvalidArgument("eta_d must be in (0, 1]");
  if (!in_unit_interval(rho)) throw InvalidArgument("rho must be in (0, 1]");
}

void Schedule::validate_shape() const {
  if (soe.empty()) throw InvalidArgument("schedule is empty");
  require_same_length(p_chg.size(), soe.size(), "schedule p_chg");
  require_same_length(p_dis.size(), soe.size(), "schedule p_dis");
}

std::vector<double> propagate_soe(const StorageParams& params, std::span<const double> p_chg,
                                  std::span<const double> p_dis) {
  require_same_length(p_chg.size(), p_dis.size(), "propagate_soe");
  if (p_chg.empty()) throw InvalidArgument("propagate_soe: empty horizon");
  std::vector<double> soe(p_chg.size());
  double s = params.s_init;
  for (std::size_t t = 0; t < p_chg.size(); ++t) {
    if (p_chg[t] < 0.0 || p_dis[t] < 0.0)
      throw InvalidArgument("propagate_soe: negative power at period " + std::to_string(t + 1));
    s = params.rho * s + params.dt * (params.eta_c * p_chg[t] - p_dis[t] / params.eta_d);
    soe[t] = s;
  }
  return soe;
}

double soe_between(const StorageParams& params, std::span<const double> p_chg,
                   std::span<const double> p_dis, std::size_t first, std::size_t last,
                   double s_before) {
  require_same_length(p_chg.size(), p_dis.size(), "soe_between");
  if (last + 1 == first) return s_before;
  if (first > last || last >= p_chg.size()) throw InvalidArgument("soe_between: bad range");
  // rho^(last - t) accumulated from the back.
  double weight = 1.0;
  double inflow = 0.0;
  for (std::size_t t = last + 1; t-- > first;) {
    inflow += weight * (params.eta_c * p_chg[t] - p_dis[t] / params.eta_d);
    weight *= params.rho;
  }
  return weight * s_before + params.dt * inflow;
}

double objective(std::span<const double> prices, const Schedule& schedule, double dt) {
  schedule.validate_shape();
  require_same_length(prices.size(), schedule.size(), "objective");
  double z = 0.0;
  for (std::size_t t = 0; t < prices.size(); ++t)
    z += dt * prices[t] * (schedule.p_dis[t] - schedule.p_chg[t]);
  return z;
}

FeasibilityReport feasibility_check(const StorageParams& params, const Schedule& schedule,
                                    double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("feasibility_check: tol must be > 0");
  schedule.validate_shape();
  FeasibilityReport report;
  auto flag = [&](std::size_t t, const char* tag, double magnitude) {
    if (magnitude > tol) report.violations.push_back({t, tag, magnitude});
  };

  double prev = params.s_init;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    const double pc = schedule.p_chg[t];
    const double pd = schedule.p_dis[t];
    const double s = schedule.soe[t];
    flag(t, "bound_pc", std::max(-pc, pc - params.p_chg_max));
    flag(t, "bound_pd", std::max(-pd, pd - params.p_dis_max));
    flag(t, "bound_soe", std::max(params.s_min - s, s - params.s_max));
    const double expected =
        params.rho * prev + params.dt * (params.eta_c * pc - pd / params.eta_d);
    flag(t, "soe_recursion", std::abs(s - expected));
    prev = s;
  }
  report.feasible = report.violations.empty();
  return report;
}

std::vector<ScdEvent> detect_scd(const Schedule& schedule, double tol) {
  if (tol < 0.0) throw InvalidArgument("detect_scd: tol must be >= 0");
  schedule.validate_shape();
  std::vector<ScdEvent> events;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    if (schedule.p_chg[t] > tol && schedule.p_dis[t] > tol)
      events.push_back({t, schedule.p_chg[t], schedule.p_dis[t]});
  }
  return events;
}

double duration_of_charge(const StorageParams& params) {
  return params.capacity() / (params.eta_c * params.p_chg_max);
}

double duration_of_discharge(const StorageParams& params) {
  return params.capacity() / ((1.0 / params.eta_d) * params.p_dis_max);
}

bool check_assumption_leakage(const StorageParams& params) {
  return (1.0 - params.rho) * params.s_max <= params.max_net_charge();
}

double net_exchange(const StorageParams& params, const Schedule& schedule, std::size_t t) {
  if (t >= schedule.size()) throw InvalidArgument("net_exchange: period out of range");
  const double prev = t == 0 ? params.s_init : schedule.soe[t - 1];
  return schedule.soe[t] - params.rho * prev;
}

bool scd_repairable(const StorageParams& params, const PriceSeries& prices, std::size_t t) {
  return prices[t] == 0.0 || params.lossless();
}

Schedule repair_scd(const StorageParams& params, const PriceSeries& prices,
                    const Schedule& schedule, double tol) {
  schedule.validate_shape();
  require_same_length(prices.size(), schedule.size(), "repair_scd");
  Schedule out = schedule;
  for (const ScdEvent& e : detect_scd(schedule, tol)) {
    if (!scd_repairable(params, prices, e.t)) {
      throw RepairNotApplicable(
          e.t, prices[e.t] < 0.0 ? "negative price with a lossy round trip"
                                 : "positive price with a lossy round trip");
    }
    const double beta = net_exchange(params, schedule, e.t);
    if (beta <= 0.0) {
      out.p_chg[e.t] = 0.0;
      out.p_dis[e.t] = -params.eta_d * beta / params.dt;
    } else {
      out.p_chg[e.t] = beta / (params.eta_c * params.dt);
      out.p_dis[e.t] = 0.0;
    }
  }
  return out;
}

}  // namespace storopt
