#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "storopt/exactness.hpp"
#include "storopt/lp_core.hpp"
#include "storopt/milp_core.hpp"
#include "storopt/price_partition.hpp"
#include "storopt/storage_model.hpp"

namespace storopt::io {

using nlohmann::json;

/// Reads "t,price_eur_per_mwh" CSV with contiguous 1-based t.
/// Throws ParseError carrying the offending line number.
PriceSeries read_price_csv(std::istream& in, double dt);
PriceSeries read_price_csv_file(const std::string& path, double dt);

/// Flat key=value file; '#' starts a comment. All nine keys are required:
/// s_min s_max s_init p_chg_max p_dis_max eta_c eta_d rho dt_hours.
StorageParams read_params(std::istream& in);
StorageParams read_params_file(const std::string& path);

json schedule_to_json(const Schedule& schedule, double dt);
/// Inverse of schedule_to_json; writes dt_hours to `dt`. Throws ParseError.
Schedule schedule_from_json(const json& doc, double& dt);

json partition_to_json(const PricePartition& part);
json advice_to_json(const Advice& advice);
json scd_events_to_json(const std::vector<ScdEvent>& events);
json feasibility_to_json(const FeasibilityReport& report);
json report_to_json(const SolveReport& report, double dt);

/// Columns t,price,p_chg,p_dis,soe with 1-based t.
void write_plot_csv(std::ostream& out, const PriceSeries& prices, const Schedule& schedule);

/// Shortest decimal that round-trips, locale independent.
std::string format_number(double value);

}  // namespace storopt::io
