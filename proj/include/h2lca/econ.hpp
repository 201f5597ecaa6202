#pragma once

#include "h2lca/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace h2lca {

struct EconParams {
    double specific_energy_kwh_per_kg = 52.5;
    double op_cost_aud_per_kg = 1.96;
    // Monetary credit per eligible kilogram. A configuration default, not a
    // published figure; override it per jurisdiction.
    double credit_rate_aud_per_kg = 2.00;
    double credit_ci_cap = 0.6; // kg CO2eq per kg H2

    /// All parameters must be >= 0 and specific energy positive.
    void validate() const;

    /// Key/value text: specific-energy, op-cost, credit-rate, credit-ci-cap.
    static EconParams parse(const std::string& text);
    static EconParams load(const std::string& path);
    std::string serialize() const;
};

/// Per-kilogram production cost at a spot price:
/// price/1000 * specific_energy + op_cost. Negative prices pass through.
double cost_per_kg(double price_aud_per_mwh, const EconParams& econ);

/// Total credit earnings of a dispatch list: rate * credit_rate summed
/// over eligible hours.
double credit_earnings(const std::vector<HourlyDispatch>& dispatch, const EconParams& econ);

/// Hydrogen mass of a dispatch list in kg. Integer rates sum exactly.
double total_h2_kg(const std::vector<HourlyDispatch>& dispatch);

/// Operating cost of a dispatch list as the single product
/// op_cost * total mass, so the total carries one rounding instead of one
/// per hour and stays exactly proportional to production.
double op_cost_total(const std::vector<HourlyDispatch>& dispatch, const EconParams& econ);

/// Calendar-month totals. Mass is kept in kilograms internally; the
/// metric-ton views only divide on the way out, so monthly sums stay exact
/// for integer-kg dispatch data.
struct MonthlyAggregate {
    std::string zone;
    int year = 0;
    int month = 0; // 1..12
    double h2_kg = 0.0;
    double emissions_kg = 0.0;
    double elec_cost_aud = 0.0;
    double op_cost_aud = 0.0;
    double credits_aud = 0.0;

    double h2_t() const { return h2_kg / 1000.0; }
    double emissions_t() const { return emissions_kg / 1000.0; }
    /// (elec + op) / kg; absent for a zero-production month.
    std::optional<double> avg_cost_per_kg() const;
    /// kg CO2eq per kg H2; absent for a zero-production month.
    std::optional<double> ci_ratio() const;
};

/// Groups a time-sorted dispatch list by UTC calendar month.
std::vector<MonthlyAggregate> aggregate_monthly(const std::vector<HourlyDispatch>& dispatch,
                                                const std::string& zone);

/// One scenario's dispatch over one zone's series, ready for comparison.
struct ScenarioResult {
    std::string zone;
    ScenarioKind scenario = ScenarioKind::Baseline;
    std::vector<HourlyDispatch> dispatch;
};

/// Yearly cross-scenario totals. total_cost excludes credits, which stay
/// in their own column.
struct ComparisonRow {
    std::string zone;
    ScenarioKind scenario = ScenarioKind::Baseline;
    double h2_kg = 0.0;
    double emissions_kg = 0.0;
    double elec_cost_aud = 0.0;
    double op_cost_aud = 0.0;
    double credits_aud = 0.0;

    double h2_t() const { return h2_kg / 1000.0; }
    double emissions_t() const { return emissions_kg / 1000.0; }
    double total_cost_aud() const { return elec_cost_aud + op_cost_aud; }
    std::optional<double> cost_per_kg() const;
    std::optional<double> ci_ratio() const;
};

/// Builds one row per result. Yearly figures are the sums of the monthly
/// aggregates, so the two views cannot drift apart. All results must cover
/// the same hours; rows come out zone-major, scenarios in baseline,
/// green-rule, credit-threshold order.
std::vector<ComparisonRow> build_comparison(const std::vector<ScenarioResult>& results);

/// CSV with header `zone,year,month,h2_t,emissions_t,elec_cost_aud,
/// op_cost_aud,credits_aud,avg_cost_per_kg_aud,ci_ratio_kg_per_kg`.
/// Undefined per-kg fields are empty cells.
std::string monthly_to_csv(const std::vector<MonthlyAggregate>& months);

/// JSON mirror of monthly_to_csv; undefined fields are null.
std::string monthly_to_json(const std::vector<MonthlyAggregate>& months);

/// CSV with header `zone,scenario,h2_t,emissions_t,elec_cost_aud,
/// op_cost_aud,total_cost_aud,credits_aud,cost_per_kg_aud,
/// ci_ratio_kg_per_kg`.
std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);

/// JSON mirror of comparison_to_csv.
std::string comparison_to_json(const std::vector<ComparisonRow>& rows);

struct HistogramBin {
    double low = 0.0;  // inclusive
    double high = 0.0; // exclusive
    long long count = 0;
    double share = 0.0;
};

struct Histogram {
    double bin_width = 0.0;
    std::vector<HistogramBin> bins; // occupied bins only, ascending
};

/// Fixed-width binning with half-open bins [k*w, (k+1)*w); negatives land
/// in negative bins. Default widths: 10 g/kWh for CI, 10 AUD/MWh for price.
Histogram build_histogram(const std::vector<double>& values, double bin_width);

/// CSV with header `bin_low,bin_high,count,share`.
std::string histogram_to_csv(const Histogram& h);

/// JSON mirror of histogram_to_csv.
std::string histogram_to_json(const Histogram& h);

} // namespace h2lca
