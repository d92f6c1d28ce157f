#include <doctest.h>

#include "storopt/errors.hpp"
#include "storopt/exactness.hpp"
#include "storopt/lp_core.hpp"
#include "support.hpp"

using namespace storopt;
using namespace storopt::testing;

namespace {

LpProblem make_lp(std::vector<double> c, std::vector<double> lo, std::vector<double> up,
                  std::vector<LinearRow> rows) {
  return LpProblem{std::move(c), std::move(lo), std::move(up), std::move(rows)};
}

// Checks primal feasibility, dual sign conditions and complementary slackness
// directly from the problem data.
void check_optimality(const LpProblem& lp, const LpSolution& sol, double tol) {
  REQUIRE(sol.status == LpStatus::Optimal);
  for (const LinearRow& row : lp.rows) {
    double lhs = 0.0;
    for (const SparseEntry& e : row.entries) lhs += e.value * sol.x[e.col];
    CHECK(std::abs(lhs - row.rhs) <= tol);
  }
  std::vector<double> d = lp.objective;
  for (std::size_t i = 0; i < lp.rows.size(); ++i)
    for (const SparseEntry& e : lp.rows[i].entries) d[e.col] -= sol.row_duals[i] * e.value;
  double dual = 0.0;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) dual += sol.row_duals[i] * lp.rows[i].rhs;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    CHECK(sol.x[j] >= lp.lower[j] - tol);
    CHECK(sol.x[j] <= lp.upper[j] + tol);
    CHECK(std::abs(d[j] - sol.reduced_costs[j]) <= tol);
    if (d[j] > tol) CHECK(sol.x[j] >= lp.upper[j] - tol);
    if (d[j] < -tol) CHECK(sol.x[j] <= lp.lower[j] + tol);
    if (d[j] > 0.0)
      dual += d[j] * (lp.upper[j] < kInfinity ? lp.upper[j] : sol.x[j]);
    else
      dual += d[j] * lp.lower[j];
  }
  CHECK(rel_close(dual, sol.objective, 1e-8, 1e-8));
}

}  // namespace

TEST_CASE("generic bounded LPs") {
  SUBCASE("box-only problem sits on the profitable bounds") {
    const LpProblem lp = make_lp({1, -2, 0}, {0, -1, 2}, {3, 4, 5}, {});
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == 3.0);
    CHECK(s.x[1] == -1.0);
    CHECK(s.objective == doctest::Approx(5.0));
  }
  SUBCASE("two-variable textbook problem") {
    // max 3x + 2y, x + y + s1 = 4, x + 3y + s2 = 6, x <= 3
    const LpProblem lp = make_lp({3, 2, 0, 0}, {0, 0, 0, 0}, {3, kInfinity, kInfinity, kInfinity},
                                 {{{{0, 1}, {1, 1}, {2, 1}}, 4}, {{{0, 1}, {1, 3}, {3, 1}}, 6}});
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(3.0));
    CHECK(s.x[1] == doctest::Approx(1.0));
    CHECK(s.objective == doctest::Approx(11.0));
    check_optimality(lp, s, 1e-9);
  }
  SUBCASE("infeasible equalities") {
    const LpProblem lp = make_lp({1, 1}, {0, 0}, {1, 1}, {{{{0, 1}, {1, 1}}, 3}});
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
  }
  SUBCASE("unbounded ray") {
    const LpProblem lp = make_lp({1, 0}, {0, 0}, {kInfinity, kInfinity}, {{{{0, 1}, {1, -1}}, 0}});
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
  }
  SUBCASE("redundant rows") {
    const LpProblem lp = make_lp({1, 1}, {0, 0}, {5, 5},
                                 {{{{0, 1}, {1, 1}}, 4}, {{{0, 2}, {1, 2}}, 8}});
    const LpSolution s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(4.0));
    check_optimality(lp, s, 1e-9);
  }
  SUBCASE("malformed problems are rejected") {
    CHECK_THROWS_AS(solve_lp(make_lp({1}, {2}, {1}, {})), InvalidArgument);
    CHECK_THROWS_AS(solve_lp(make_lp({1}, {-kInfinity}, {1}, {})), InvalidArgument);
    CHECK_THROWS_AS(solve_lp(make_lp({1}, {0}, {1}, {{{{3, 1}}, 0}})), InvalidArgument);
  }
}

TEST_CASE("random dense LPs satisfy optimality conditions") {
  Rng rng(101);
  int optimal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = pick(rng, 2, 14);
    const std::size_t m = pick(rng, 1, n);
    std::vector<double> x0(n), lo(n), up(n), c(n);
    for (std::size_t j = 0; j < n; ++j) {
      lo[j] = round_to(uniform(rng, -3, 1), 0.5);
      up[j] = coin(rng, 0.2) ? kInfinity : lo[j] + round_to(uniform(rng, 0, 4), 0.5);
      x0[j] = up[j] == kInfinity ? lo[j] + uniform(rng, 0, 3) : uniform(rng, lo[j], up[j]);
      c[j] = round_to(uniform(rng, -5, 5), 0.1);
    }
    std::vector<LinearRow> rows(m);
    for (auto& row : rows) {
      for (std::size_t j = 0; j < n; ++j)
        if (coin(rng, 0.5)) row.entries.push_back({j, round_to(uniform(rng, -3, 3), 0.25)});
      for (const SparseEntry& e : row.entries) row.rhs += e.value * x0[e.col];
    }
    const LpProblem lp = make_lp(c, lo, up, rows);
    const LpSolution s = solve_lp(lp);
    CAPTURE(trial);
    REQUIRE(s.status != LpStatus::Infeasible);
    REQUIRE(s.status != LpStatus::IterationLimit);
    if (s.status == LpStatus::Unbounded) continue;
    ++optimal;
    check_optimality(lp, s, 1e-7);
  }
  CHECK(optimal > 100);
}

TEST_CASE("warm start after bound changes matches a cold solve") {
  Rng rng(303);
  int infeasible = 0, optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const StorageParams p = random_params(rng);
    const PriceSeries c = random_prices(rng, pick(rng, 2, 20), p.dt);
    LpProblem lp = build_lp(p, c);
    const LpSolution parent = solve_lp(lp);
    REQUIRE(parent.status == LpStatus::Optimal);
    // Pin a few power and SoE columns, as branching does.
    for (int k = 0, fixes = static_cast<int>(pick(rng, 1, 4)); k < fixes; ++k) {
      const std::size_t j = pick(rng, 0, lp.num_vars() - 1);
      const double v = coin(rng, 0.5) ? lp.lower[j] : uniform(rng, lp.lower[j], lp.upper[j]);
      lp.lower[j] = lp.upper[j] = v;
    }
    const LpSolution cold = solve_lp(lp);
    const LpSolution warm = solve_lp(lp, {}, parent.basis);
    CAPTURE(trial);
    REQUIRE(warm.status == cold.status);
    if (cold.status == LpStatus::Infeasible) {
      ++infeasible;
      continue;
    }
    ++optimal;
    CHECK(rel_close(warm.objective, cold.objective, 1e-9, 1e-9));
    check_optimality(lp, warm, 1e-7);
  }
  CHECK(infeasible > 10);
  CHECK(optimal > 100);
}

TEST_CASE("storage LP structure") {
  const StorageParams p = unit_storage(0.5, 0.4, 0.9);
  const LpProblem one = build_lp(p, series({7.0}));
  CHECK(one.num_vars() == 3);
  CHECK(one.num_rows() == 1);

  PriceSeries day = series(std::vector<double>(24, 0.0), 0.5);
  for (std::size_t t = 0; t < 24; ++t) day.prices[t] = double(t) - 5.0;
  const LpProblem lp = build_lp(p, day);
  const StorageLayout L{24};
  CHECK(lp.num_vars() == 72);
  CHECK(lp.num_rows() == 24);
  for (std::size_t t = 0; t < 24; ++t) {
    CHECK(lp.objective[L.p_dis(t)] == 0.5 * day[t]);
    CHECK(lp.objective[L.p_chg(t)] == -0.5 * day[t]);
    CHECK(lp.objective[L.soe(t)] == 0.0);
    CHECK(lp.upper[L.p_chg(t)] == 0.5);
    CHECK(lp.upper[L.p_dis(t)] == 0.4);
    CHECK(lp.lower[L.soe(t)] == 0.0);
    CHECK(lp.upper[L.soe(t)] == 1.0);
  }
}

TEST_CASE("storage LP closed-form cases") {
  SUBCASE("zero prices give an idle schedule") {
    const StorageParams p = unit_storage(1, 1, 0.9);
    const SolveReport r = solve_storage_lp(p, series({0, 0, 0, 0}));
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == 0.0);
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(r.schedule.p_chg[t] == 0.0);
      CHECK(r.schedule.p_dis[t] == 0.0);
    }
  }
  SUBCASE("one period from a full store") {
    StorageParams p = unit_storage(1, 2.0, 0.9);
    p.s_init = 1.0;
    const SolveReport r = solve_storage_lp(p, series({30.0}));
    REQUIRE(r.status == SolveStatus::Optimal);
    const double sold = std::min(2.0, 0.9 * 1.0);
    CHECK(r.schedule.p_dis[0] == doctest::Approx(sold));
    CHECK(r.objective == doctest::Approx(30.0 * sold));
  }
  SUBCASE("fast lossy store burns energy at a negative price") {
    const StorageParams p = unit_storage(2, 2, 0.9);
    const SolveReport r = solve_storage_lp(p, series({-10.0, 20.0}));
    REQUIRE(r.status == SolveStatus::Optimal);
    REQUIRE(r.scd_events.size() == 1);
    CHECK(r.scd_events[0].t == 0);
    const KktResiduals k = kkt_residuals(p, series({-10.0, 20.0}), r);
    CHECK(k.scd_identity <= 1e-7);
    CHECK(k.max() <= 1e-7);
  }
}

TEST_CASE("storage LP optimality system on random instances") {
  Rng rng(202);
  for (int trial = 0; trial < 150; ++trial) {
    const StorageParams p = random_params(rng);
    const PriceSeries c = random_prices(rng, pick(rng, 1, 48), p.dt);
    const SolveReport r = solve_storage_lp(p, c);
    CAPTURE(trial);
    if (r.status != SolveStatus::Optimal) {
      // Only leakage from a raised floor can make the store infeasible.
      CHECK(p.rho < 1.0);
      continue;
    }
    CHECK(feasibility_check(p, r.schedule).feasible);
    REQUIRE(r.kkt_max_residual.has_value());
    CHECK(*r.kkt_max_residual <= 1e-7);
    CHECK(rel_close(r.objective, objective(c, r.schedule), 1e-9));
    CHECK(rel_close(dual_objective(p, c, *r.duals), r.objective, 1e-8, 1e-8));
    const DualVector& d = *r.duals;
    for (std::size_t t = 0; t < c.size(); ++t) {
      CHECK(d.sigma_lo[t] >= 0.0);
      CHECK(d.sigma_hi[t] >= 0.0);
      CHECK(d.gamma_lo[t] >= 0.0);
      CHECK(d.gamma_hi[t] >= 0.0);
      CHECK(d.delta_lo[t] >= 0.0);
      CHECK(d.delta_hi[t] >= 0.0);
    }
  }
}

TEST_CASE("kkt residual detects perturbed multipliers") {
  const StorageParams p = unit_storage(0.4, 0.4, 0.9);
  const PriceSeries c = series({10, -4, 25, 3, -8, 40});
  SolveReport r = solve_storage_lp(p, c);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(kkt_verify(p, c, r) <= 1e-7);
  r.duals->lambda[2] += 1e-3;
  CHECK(kkt_verify(p, c, r) >= 1e-3 - 1e-7);
  r.duals.reset();
  CHECK_THROWS_AS(kkt_verify(p, c, r), MissingDuals);
}

TEST_CASE("scaling prices scales the optimum") {
  Rng rng(303);
  for (int trial = 0; trial < 40; ++trial) {
    const StorageParams p = random_params(rng);
    const PriceSeries c = random_prices(rng, pick(rng, 2, 36), p.dt);
    const SolveReport base = solve_storage_lp(p, c);
    if (base.status != SolveStatus::Optimal) continue;
    const double alpha = uniform(rng, 0.1, 10.0);
    PriceSeries scaled = c;
    for (double& v : scaled.prices) v *= alpha;
    const SolveReport r = solve_storage_lp(p, scaled);
    REQUIRE(r.status == SolveStatus::Optimal);
    CAPTURE(trial);
    CHECK(rel_close(r.objective, alpha * base.objective, 1e-8, 1e-8));
    CHECK(rel_close(objective(scaled, base.schedule), r.objective, 1e-8, 1e-8));
  }
}

TEST_CASE("storage LP is deterministic") {
  Rng rng(404);
  const StorageParams p = random_params(rng);
  const PriceSeries c = random_prices(rng, 40, p.dt);
  const SolveReport a = solve_storage_lp(p, c);
  const SolveReport b = solve_storage_lp(p, c);
  CHECK(a.objective == b.objective);
  CHECK(a.schedule.p_chg == b.schedule.p_chg);
  CHECK(a.schedule.p_dis == b.schedule.p_dis);
  CHECK(a.schedule.soe == b.schedule.soe);
  if (a.duals) CHECK(a.duals->lambda == b.duals->lambda);
}

TEST_CASE("lossless LP optimum repairs to an equal-profit SCD-free schedule") {
  Rng rng(505);
  for (int trial = 0; trial < 60; ++trial) {
    ParamRanges ranges;
    ranges.lossless_prob = 1.0;
    const StorageParams p = random_params(rng, ranges);
    const PriceSeries c = random_prices(rng, pick(rng, 2, 36), p.dt);
    const SolveReport r = solve_storage_lp(p, c);
    if (r.status != SolveStatus::Optimal) continue;
    const Schedule fixed = repair_scd(p, c, r.schedule);
    CAPTURE(trial);
    CHECK(detect_scd(fixed).empty());
    CHECK(feasibility_check(p, fixed).feasible);
    CHECK(rel_close(objective(c, fixed), r.objective, 1e-10, 1e-10));
  }
}
