#pragma once

#include "h2lca/data_ingest.hpp"
#include "h2lca/esn.hpp"
#include "h2lca/system_model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace h2lca {

struct EconParams; // econ.hpp

struct ElectrolyzerSpec {
    double specific_energy_kwh_per_kg = 52.5;
    double max_rate_kg_h = 20.0;
    double min_rate_kg_h = 0.0;

    /// Throws Error unless specific_energy > 0 and 0 <= min <= max.
    void validate() const;
};

struct RuleBreakpoint {
    double ci_threshold; // kg CO2eq per kg H2, inclusive upper bound
    double rate_kg_h;
};

/// Step function mapping per-kg carbon intensity to a production rate.
/// Breakpoints are ordered by threshold; an hour lands on the first
/// breakpoint whose threshold is >= its ci, or on the default rate when
/// every threshold is exceeded.
struct ProductionRule {
    std::vector<RuleBreakpoint> breakpoints;
    double default_rate_above_last = 0.0;

    double rate_for(double ci_kg) const;

    /// Structural checks: thresholds strictly increasing, rates
    /// non-increasing even integers in [0, max_rate], and a zero default
    /// when the last breakpoint is already a shutoff. Throws Error.
    void validate(double max_rate) const;

    /// The built-in table: 20 kg/h up to 14.50, 2-kg steps down to 2 kg/h
    /// at 19.00, off above that. An hour at exactly 17.00 runs at 8 kg/h.
    static ProductionRule default_green_rule();

    /// Threshold-table text: one `threshold rate` pair per line, optional
    /// `default-rate-above-last = r`, '#' comments.
    static ProductionRule parse(const std::string& text);
    static ProductionRule load(const std::string& path);
    std::string serialize() const;
};

enum class ScenarioKind { Baseline, GreenRule, CreditThreshold };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_kind_from(const std::string& name);

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Baseline;
    std::optional<ProductionRule> rule; // green-rule only
    double credit_ci_cap = 0.6;         // kg CO2eq per kg H2, credit-threshold only
    ElectrolyzerSpec electrolyzer;

    /// Kind-specific fields must be present exactly when required:
    /// a rule iff green-rule. Throws Error.
    void validate() const;

    /// Key/value text: `kind = ...`, `credit-ci-cap = ...`, electrolyzer
    /// keys (`specific-energy`, `max-rate`, `min-rate`) and repeated
    /// `breakpoint = threshold rate` lines plus `default-rate-above-last`.
    static ScenarioConfig parse(const std::string& text);

    /// Accepts a built-in name (baseline, green-rule, credit-threshold)
    /// or a config file path.
    static ScenarioConfig load(const std::string& path_or_name);
    static std::optional<ScenarioConfig> builtin(const std::string& name);

    std::string serialize() const;
};

/// Grid CI in g CO2eq/kWh expressed per kilogram of hydrogen:
/// grid_ci * specific_energy / 1000, in kg CO2eq/kg H2.
double ci_per_kg(double grid_ci, const ElectrolyzerSpec& spec);

/// Hourly rate decision. Baseline always runs at max_rate; green-rule
/// follows the breakpoint table; credit-threshold runs at max_rate when
/// ci_kg <= credit_ci_cap and shuts off otherwise.
double decide_rate(const ScenarioConfig& config, double ci_kg);

struct HourlyDispatch {
    std::int64_t timestamp = 0;
    double rate_kg_h = 0.0;
    double energy_kwh = 0.0;
    double emissions_kg = 0.0;
    double elec_cost_aud = 0.0;
    double op_cost_aud = 0.0;
    double credit_aud = 0.0;
    bool credit_eligible = false;
};

/// Emissions accounting for dispatched hydrogen: binds a system model's
/// generation capabilities to the canonical grid sources (metadata keys
/// `source-<name>`), factors the product block once, and prices each
/// hour's production against that hour's generation mix.
class EmissionsModel {
public:
    explicit EmissionsModel(const SystemModel& model);

    /// Life-cycle CO2 for `rate` kg of hydrogen in one hour, with the
    /// electrolyzer's energy draw allocated to generation capabilities in
    /// proportion to `shares` (which must sum to 1 within 1e-9).
    /// Returns kilograms. Rate 0 short-circuits to 0.
    double hourly_emissions_kg(double rate_kg_h, const std::array<double, kNumSources>& shares) const;

    /// Per-source emission factors implied by the model's own aspect rows,
    /// in g CO2eq/kWh; unbound sources carry 0. The independent route for
    /// carbon-intensity reconstruction checks against this table.
    EmissionFactorTable derived_ef() const;

    /// Electrolyzer energy draw per kg H2 read off its capability.
    double specific_energy_kwh_per_kg() const { return m_specific_energy; }

    const SteadyStateSolver& solver() const { return *m_solver; }

private:
    SystemModel m_model;
    std::unique_ptr<SteadyStateSolver> m_solver;
    int m_h2_row = -1;                        // A row of the hydrogen demand
    int m_co2_row = -1;                       // B row of the CO2 aspect
    std::array<int, kNumSources> m_source_row;  // A row of each source's injection, -1 if unbound
    std::array<int, kNumSources> m_source_col;  // capability column per source, -1 if unbound
    double m_specific_energy = 0.0;
    enum class MassUnit { Gram, Kilogram, Tonne };
    MassUnit m_co2_unit = MassUnit::Kilogram; // the CO2 operand's declared unit
};

enum class CiSource {
    Auto,          // reported when present, reconstructed otherwise
    Reported,      // reported only; missing value is an error
    Reconstructed  // always recomputed from the mix
};

/// Runs one scenario over an aligned series: one dispatch record per hour,
/// order preserved. Costs and credits follow `econ`; emissions follow the
/// model via `emissions`.
std::vector<HourlyDispatch> run_scenario(const AlignedSeries& series, const ScenarioConfig& config,
                                         const EconParams& econ, const EmissionsModel& emissions,
                                         CiSource ci_source = CiSource::Auto);

/// CSV with header
/// `timestamp,rate_kg_h,energy_kwh,emissions_kg,elec_cost_aud,op_cost_aud,credit_aud,eligible`.
std::string dispatch_to_csv(const std::vector<HourlyDispatch>& dispatch);

/// JSON mirror of dispatch_to_csv.
std::string dispatch_to_json(const std::vector<HourlyDispatch>& dispatch);

} // namespace h2lca
