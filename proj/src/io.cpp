#include "storopt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>

#include <fmt/core.h>

#include "storopt/errors.hpp"

namespace storopt::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  return in;
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json one_based(const std::vector<std::size_t>& v) {
  json a = json::array();
  for (std::size_t t : v) a.push_back(t + 1);
  return a;
}

std::vector<double> number_array(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw ParseError(0, fmt::format("schedule field '{}' must be an array", key));
  std::vector<double> out;
  for (const json& v : doc[key]) {
    if (!v.is_number()) throw ParseError(0, fmt::format("schedule field '{}' holds a non-number", key));
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

PriceSeries read_price_csv(std::istream& in, double dt) {
  PriceSeries series;
  series.dt = dt;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim(view);
    if (view.empty()) continue;
    if (!header) {
      if (view != "t,price_eur_per_mwh")
        throw ParseError(line_no, "expected header 't,price_eur_per_mwh'");
      header = true;
      continue;
    }
    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos)
      throw ParseError(line_no, "expected two comma-separated fields");
    const auto t = parse_int(view.substr(0, comma));
    if (!t) throw ParseError(line_no, "period index is not an integer");
    if (*t != static_cast<long long>(series.prices.size()) + 1)
      throw ParseError(line_no, fmt::format("expected period {}, found {}",
                                            series.prices.size() + 1, *t));
    const auto price = parse_double(view.substr(comma + 1));
    if (!price) throw ParseError(line_no, "price is not a finite decimal number");
    series.prices.push_back(*price);
  }
  if (!header) throw ParseError(line_no, "missing header");
  if (series.prices.empty()) throw ParseError(line_no, "no price rows");
  if (!(dt > 0.0)) throw ParseError(0, "dt must be > 0");
  return series;
}

PriceSeries read_price_csv_file(const std::string& path, double dt) {
  std::ifstream in = open_input(path);
  return read_price_csv(in, dt);
}

StorageParams read_params(std::istream& in) {
  static const char* const kKeys[] = {"s_min", "s_max", "s_init", "p_chg_max", "p_dis_max",
                                      "eta_c", "eta_d", "rho",    "dt_hours"};
  std::map<std::string, double, std::less<>> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const std::string key(trim(view.substr(0, eq)));
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
      throw ParseError(line_no, fmt::format("unknown key '{}'", key));
    if (values.count(key)) throw ParseError(line_no, fmt::format("duplicate key '{}'", key));
    const auto v = parse_double(view.substr(eq + 1));
    if (!v) throw ParseError(line_no, fmt::format("value of '{}' is not a finite number", key));
    values[key] = *v;
  }
  for (const char* key : kKeys) {
    if (!values.count(key)) throw ParseError(0, fmt::format("missing key '{}'", key));
  }
  StorageParams p;
  p.s_min = values["s_min"];
  p.s_max = values["s_max"];
  p.s_init = values["s_init"];
  p.p_chg_max = values["p_chg_max"];
  p.p_dis_max = values["p_dis_max"];
  p.eta_c = values["eta_c"];
  p.eta_d = values["eta_d"];
  p.rho = values["rho"];
  p.dt = values["dt_hours"];
  p.validate();
  return p;
}

StorageParams read_params_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_params(in);
}

json schedule_to_json(const Schedule& schedule, double dt) {
  return json{{"dt_hours", dt},
              {"p_chg", numbers(schedule.p_chg)},
              {"p_dis", numbers(schedule.p_dis)},
              {"soe", numbers(schedule.soe)}};
}

Schedule schedule_from_json(const json& doc, double& dt) {
  if (!doc.is_object()) throw ParseError(0, "schedule must be a JSON object");
  if (!doc.contains("dt_hours") || !doc["dt_hours"].is_number())
    throw ParseError(0, "schedule field 'dt_hours' must be a number");
  dt = doc["dt_hours"].get<double>();
  if (!(dt > 0.0)) throw ParseError(0, "schedule field 'dt_hours' must be > 0");
  Schedule s;
  s.p_chg = number_array(doc, "p_chg");
  s.p_dis = number_array(doc, "p_dis");
  s.soe = number_array(doc, "soe");
  if (s.soe.empty() || s.p_chg.size() != s.soe.size() || s.p_dis.size() != s.soe.size())
    throw ParseError(0, "schedule arrays must be non-empty and of equal length");
  return s;
}

json partition_to_json(const PricePartition& part) {
  json blocks = json::array();
  for (const Block& b : part.blocks) blocks.push_back({{"positive", b.positive}, {"negative", b.negative}});
  json longest = nullptr;
  if (part.longest_neg)
    longest = {{"first", part.longest_neg->first + 1}, {"last", part.longest_neg->last + 1}};
  return json{{"periods", part.periods()},      {"t_neg", one_based(part.t_neg)},
              {"t_pos", one_based(part.t_pos)},   {"t_zero", one_based(part.t_zero)},
              {"blocks", blocks},                 {"longest_neg", longest},
              {"n_bar", part.n_bar}};
}

json advice_to_json(const Advice& advice) {
  json rationale = json::array();
  for (const RuleOutcome& r : advice.rationale)
    rationale.push_back({{"rule", r.rule}, {"fired", r.fired}, {"detail", r.detail}});
  return json{{"recommendation", to_string(advice.recommendation)}, {"rationale", rationale}};
}

json scd_events_to_json(const std::vector<ScdEvent>& events) {
  json a = json::array();
  for (const ScdEvent& e : events) a.push_back({{"t", e.t + 1}, {"p_chg", e.p_chg}, {"p_dis", e.p_dis}});
  return a;
}

json feasibility_to_json(const FeasibilityReport& report) {
  json v = json::array();
  for (const Violation& x : report.violations)
    v.push_back({{"t", x.t + 1}, {"tag", x.tag}, {"magnitude", x.magnitude}});
  return json{{"feasible", report.feasible}, {"violations", v}};
}

json report_to_json(const SolveReport& report, double dt) {
  json doc{{"status", to_string(report.status)}};
  if (report.status != SolveStatus::Optimal) return doc;
  doc["objective"] = report.objective;
  doc["schedule"] = schedule_to_json(report.schedule, dt);
  doc["scd_events"] = scd_events_to_json(report.scd_events);
  if (report.kkt_max_residual) doc["kkt_max_residual"] = *report.kkt_max_residual;
  if (report.duals) {
    const DualVector& d = *report.duals;
    doc["duals"] = {{"lambda", numbers(d.lambda)},     {"sigma_lo", numbers(d.sigma_lo)},
                    {"sigma_hi", numbers(d.sigma_hi)}, {"gamma_lo", numbers(d.gamma_lo)},
                    {"gamma_hi", numbers(d.gamma_hi)}, {"delta_lo", numbers(d.delta_lo)},
                    {"delta_hi", numbers(d.delta_hi)}};
  }
  return doc;
}

void write_plot_csv(std::ostream& out, const PriceSeries& prices, const Schedule& schedule) {
  if (prices.size() != schedule.size()) throw InvalidArgument("write_plot_csv: length mismatch");
  out << "t,price,p_chg,p_dis,soe\n";
  for (std::size_t t = 0; t < prices.size(); ++t) {
    out << t + 1 << ',' << format_number(prices[t]) << ',' << format_number(schedule.p_chg[t])
        << ',' << format_number(schedule.p_dis[t]) << ',' << format_number(schedule.soe[t])
        << '\n';
  }
}

std::string format_number(double value) { return fmt::format("{}", value); }

}  // namespace storopt::io
