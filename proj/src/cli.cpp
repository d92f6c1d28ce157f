#include "storopt/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "storopt/dp_oracle.hpp"
#include "storopt/errors.hpp"
#include "storopt/exactness.hpp"
#include "storopt/io.hpp"
#include "storopt/lp_core.hpp"
#include "storopt/milp_core.hpp"

namespace storopt::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

struct Options {
  std::string params_path;
  std::string prices_path;
  std::string schedule_path;
  std::string manifest_path;
  std::string out_dir = ".";
  std::string csv_path;
  std::string formulation = "lp";
  double dt = 1.0;
  double tol = kDefaultTolerance;
  std::size_t grid = DpConfig{}.grid_points;
  std::size_t levels = DpConfig{}.action_levels;
  bool final_level = false;
  bool deterministic = false;
};

struct Instance {
  StorageParams params;
  PriceSeries prices;
};

Instance load_instance(const std::string& params_path, const std::string& prices_path) {
  Instance inst;
  try {
    inst.params = io::read_params_file(params_path);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), params_path + ": " + e.what());
  }
  try {
    inst.prices = io::read_price_csv_file(prices_path, inst.params.dt);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), prices_path + ": " + e.what());
  }
  return inst;
}

void print_json(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

int cmd_partition(const Options& o, std::ostream& out) {
  const PriceSeries prices = io::read_price_csv_file(o.prices_path, o.dt);
  print_json(out, io::partition_to_json(partition(prices)));
  return kOk;
}

int cmd_advise(const Options& o, std::ostream& out) {
  const Instance inst = load_instance(o.params_path, o.prices_path);
  const Advice advice = advise(inst.params, partition(inst.prices), o.final_level);
  print_json(out, io::advice_to_json(advice));
  return advice.recommendation == Recommendation::SolveLP ? kOk : kUseMilp;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const Instance inst = load_instance(o.params_path, o.prices_path);
  const StorageParams& params = inst.params;
  const PriceSeries& prices = inst.prices;
  const PricePartition part = partition(prices);

  SolveReport report;
  json extra = json::object();
  if (o.formulation == "lp") {
    report = solve_storage_lp(params, prices, o.tol);
  } else if (o.formulation == "milp" || o.formulation == "refined") {
    const MilpProblem mp = build_milp(params, prices, o.formulation == "refined", part);
    const MilpResult res = solve_milp(mp, o.tol);
    report = res.report;
    extra["binaries"] = mp.binary_count();
    extra["bnb"] = {{"nodes", res.stats.nodes},
                    {"incumbent_updates", res.stats.incumbent_updates},
                    {"gap", res.stats.gap}};
  } else {
    const DpConfig cfg{o.grid, o.levels};
    report = solve_dp(params, prices, cfg);
    const SolveReport lp = solve_storage_lp(params, prices, o.tol);
    extra["dp"] = {{"grid_points", cfg.grid_points}, {"action_levels", cfg.action_levels}};
    if (report.status == SolveStatus::Optimal && lp.status == SolveStatus::Optimal)
      extra["dp"]["epsilon"] = lp.objective - report.objective;
  }

  json doc = io::report_to_json(report, prices.dt);
  doc["formulation"] = o.formulation;
  if (report.status == SolveStatus::Optimal) {
    doc["physically_infeasible"] = !report.scd_events.empty();
    doc["feasibility"] = io::feasibility_to_json(feasibility_check(params, report.schedule, o.tol));
  }
  doc.update(extra);

  fs::create_directories(o.out_dir);
  {
    std::ofstream f(fs::path(o.out_dir) / "report.json");
    f << doc.dump(2) << '\n';
    if (!f) throw Error("cannot write report.json in " + o.out_dir);
  }
  if (report.status == SolveStatus::Optimal) {
    std::ofstream f(fs::path(o.out_dir) / "plot.csv");
    io::write_plot_csv(f, prices, report.schedule);
    if (!f) throw Error("cannot write plot.csv in " + o.out_dir);
  }
  print_json(out, doc);
  return report.status == SolveStatus::Optimal ? kOk : kCheckFailed;
}

int cmd_check(const Options& o, std::ostream& out) {
  const Instance inst = load_instance(o.params_path, o.prices_path);
  std::ifstream in(o.schedule_path);
  if (!in) throw ParseError(0, "cannot open " + o.schedule_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, o.schedule_path + ": " + e.what());
  }
  double dt = 0.0;
  const Schedule schedule = io::schedule_from_json(doc, dt);
  if (dt != inst.params.dt)
    throw ParseError(0, fmt::format("schedule dt_hours {} differs from params dt_hours {}", dt,
                                    inst.params.dt));
  if (schedule.size() != inst.prices.size())
    throw ParseError(0, fmt::format("schedule has {} periods, prices have {}", schedule.size(),
                                    inst.prices.size()));

  const FeasibilityReport feas = feasibility_check(inst.params, schedule, o.tol);
  const std::vector<ScdEvent> events = detect_scd(schedule, o.tol);
  json verdicts = json::array();
  for (std::size_t t : partition(inst.prices).t_neg) {
    const NetExchangeVerdict v =
        classify_net_exchange(inst.params, inst.prices, schedule, t, o.tol);
    verdicts.push_back({{"t", t + 1}, {"beta", v.beta}, {"class", to_string(v.kind)}});
  }
  json report = io::feasibility_to_json(feas);
  report["scd_events"] = io::scd_events_to_json(events);
  report["objective"] = objective(inst.prices, schedule);
  report["net_exchange"] = verdicts;
  print_json(out, report);
  return feas.feasible && events.empty() ? kOk : kCheckFailed;
}

struct CompareRow {
  std::string label;
  Instance inst;
};

struct CompareResult {
  std::string advice;
  double lp = 0.0, milp = 0.0;
  std::optional<double> dp;
  std::size_t lp_scd = 0, milp_scd = 0, dp_scd = 0, nodes = 0;
  double lp_ms = 0.0, milp_ms = 0.0, dp_ms = 0.0;
  bool flagged = false;
};

std::vector<CompareRow> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<CompareRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "params_path,prices_path,label")
        throw ParseError(line_no, "expected header 'params_path,prices_path,label'");
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw ParseError(line_no, "expected params_path,prices_path,label");
    auto resolve = [&](const std::string& p) {
      const fs::path q(p);
      return (q.is_absolute() ? q : base / q).string();
    };
    try {
      rows.push_back({fields[2], load_instance(resolve(fields[0]), resolve(fields[1]))});
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return rows;
}

CompareResult compare_one(const Instance& inst, double tol) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  CompareResult r;
  const PricePartition part = partition(inst.prices);
  const Advice advice = advise(inst.params, part);
  r.advice = to_string(advice.recommendation);

  auto t0 = clock::now();
  const SolveReport lp = solve_storage_lp(inst.params, inst.prices, tol);
  auto t1 = clock::now();
  r.lp_ms = ms(t0, t1);
  if (lp.status != SolveStatus::Optimal) throw InternalError("storage LP not optimal");
  r.lp = lp.objective;
  r.lp_scd = lp.scd_events.size();
  bool irreparable = false;
  for (const ScdEvent& e : lp.scd_events)
    irreparable = irreparable || !scd_repairable(inst.params, inst.prices, e.t);
  r.flagged = advice.recommendation == Recommendation::SolveLP && irreparable;

  t0 = clock::now();
  const MilpResult milp = solve_milp(build_milp(inst.params, inst.prices, true, part), tol);
  t1 = clock::now();
  r.milp_ms = ms(t0, t1);
  if (milp.report.status != SolveStatus::Optimal) throw InternalError("refined MILP not optimal");
  r.milp = milp.report.objective;
  r.milp_scd = milp.report.scd_events.size();
  r.nodes = milp.stats.nodes;

  t0 = clock::now();
  try {
    const SolveReport dp = solve_dp(inst.params, inst.prices);
    if (dp.status == SolveStatus::Optimal) {
      r.dp = dp.objective;
      r.dp_scd = dp.scd_events.size();
    }
  } catch (const GridTooCoarse&) {
  }
  t1 = clock::now();
  r.dp_ms = ms(t0, t1);
  return r;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const std::vector<CompareRow> rows = read_manifest(o.manifest_path);
  std::vector<std::future<CompareResult>> jobs;
  for (const CompareRow& row : rows)
    jobs.push_back(std::async(std::launch::async, compare_one, std::cref(row.inst), o.tol));

  std::ostringstream table;
  table << "label,advice,lp_objective,lp_scd,milp_objective,milp_scd,milp_nodes,dp_objective,"
           "dp_scd,lp_ms,milp_ms,dp_ms,flag\n";
  bool any_flag = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CompareResult r = jobs[i].get();
    any_flag = any_flag || r.flagged;
    auto wall = [&](double v) { return fmt::format("{:.3f}", o.deterministic ? 0.0 : v); };
    table << rows[i].label << ',' << r.advice << ',' << io::format_number(r.lp) << ','
          << r.lp_scd << ',' << io::format_number(r.milp) << ',' << r.milp_scd << ','
          << r.nodes << ',' << (r.dp ? io::format_number(*r.dp) : std::string()) << ','
          << (r.dp ? std::to_string(r.dp_scd) : std::string()) << ',' << wall(r.lp_ms) << ','
          << wall(r.milp_ms) << ',' << wall(r.dp_ms) << ','
          << (r.flagged ? "advice_lp_irreparable_scd" : "ok") << '\n';
  }
  out << table.str();
  if (!o.csv_path.empty()) {
    std::ofstream f(o.csv_path);
    f << table.str();
    if (!f) throw Error("cannot write " + o.csv_path);
  }
  return any_flag ? kInternal : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Storage arbitrage scheduling and LP relaxation exactness checks", "storopt"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success (advise: LP relaxation suffices), 1 check failed or no optimum,\n"
      "2 bad input, 3 internal invariant breach, 10 refined MILP advised.");
  Options o;

  auto add_instance = [&o](CLI::App* sub) {
    sub->add_option("--params", o.params_path, "Storage parameter file (key=value)")->required();
    sub->add_option("--prices", o.prices_path, "Price CSV (t,price_eur_per_mwh)")->required();
  };
  auto add_tol = [&o](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "Feasibility and SCD tolerance")->check(CLI::PositiveNumber);
  };

  CLI::App* part = app.add_subcommand("partition", "Print the sign-pattern decomposition");
  part->add_option("--prices", o.prices_path, "Price CSV")->required();
  part->add_option("--dt", o.dt, "Period length in hours")->check(CLI::PositiveNumber);

  CLI::App* adv = app.add_subcommand("advise", "Decide between the LP and the refined MILP");
  add_instance(adv);
  adv->add_flag("--final-level-constrained", o.final_level, "A terminal SoE is required");

  CLI::App* solve = app.add_subcommand("solve", "Solve and write report.json and plot.csv");
  add_instance(solve);
  add_tol(solve);
  solve->add_option("--formulation", o.formulation, "lp, milp, refined or dp")
      ->check(CLI::IsMember({"lp", "milp", "refined", "dp"}));
  solve->add_option("--grid", o.grid, "DP grid points")->check(CLI::Range(2, 1000000));
  solve->add_option("--levels", o.levels, "DP action levels")->check(CLI::Range(2, 1000000));
  solve->add_option("--out", o.out_dir, "Output directory");

  CLI::App* check = app.add_subcommand("check", "Validate a schedule JSON");
  add_instance(check);
  add_tol(check);
  check->add_option("--schedule", o.schedule_path, "Schedule JSON")->required();

  CLI::App* cmp = app.add_subcommand("compare", "Run LP, refined MILP and DP over a manifest");
  cmp->add_option("--manifest", o.manifest_path, "CSV params_path,prices_path,label")->required();
  cmp->add_option("--csv", o.csv_path, "Also write the table to this file");
  cmp->add_flag("--deterministic", o.deterministic, "Report zero wall times");
  add_tol(cmp);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kBadInput;
  }

  try {
    if (*part) return cmd_partition(o, out);
    if (*adv) return cmd_advise(o, out);
    if (*solve) return cmd_solve(o, out);
    if (*check) return cmd_check(o, out);
    return cmd_compare(o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const GridTooCoarse& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace storopt::cli
