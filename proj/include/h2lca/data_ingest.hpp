#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace h2lca {

/// Canonical generation sources, in canonical column order.
enum class Source {
    Coal,
    Gas,
    Oil,
    Biomass,
    Solar,
    Geothermal,
    Wind,
    Hydro,
    BatteryDischarge,
    Import
};

inline constexpr std::size_t kNumSources = 10;

/// Canonical source column names, index-aligned with Source.
const std::array<std::string, kNumSources>& source_names();

/// One hour of zone generation, MWh per source. reported_ci is the
/// provider's own carbon intensity (g CO2eq/kWh) when published.
struct HourlyGridRecord {
    std::int64_t timestamp = 0; // epoch seconds, hour aligned, UTC
    std::string zone;
    std::array<double, kNumSources> generation{}; // MWh, >= 0
    std::optional<double> reported_ci;            // g CO2eq/kWh

    double total_generation() const;
};

/// One hour of zone spot price. Negative prices are legitimate.
struct HourlyPriceRecord {
    std::int64_t timestamp = 0;
    std::string zone;
    double price_aud_per_mwh = 0.0;
};

/// Life-cycle emission factors per source, g CO2eq/kWh.
/// Sources without a factor are explicitly zero.
struct EmissionFactorTable {
    std::array<double, kNumSources> g_per_kwh{};

    double operator[](Source s) const { return g_per_kwh[static_cast<std::size_t>(s)]; }
    double& operator[](Source s) { return g_per_kwh[static_cast<std::size_t>(s)]; }
};

/// Column mapping and cadence rules for provider exports that do not use
/// the canonical layout. Loaded from a key/value text file:
///   timestamp-column = SETTLEMENTDATE
///   zone-column = REGIONID          (or: zone = NSW1 for single-zone files)
///   unit = mw | mwh                 (mw converts by the interval length)
///   interval-minutes = 5|30|60
///   aggregate = mean                (sub-hourly price folding)
///   max-gap-minutes = 60
///   column.coal = Black Coal (MW)   (canonical source <- provider header)
///   price-column = RRP
struct AdapterConfig {
    std::string timestamp_column = "timestamp";
    std::string zone_column;
    std::string fixed_zone;
    std::string price_column;
    std::map<std::string, std::string> source_columns; // canonical id -> provider header
    bool megawatts = false;
    int interval_minutes = 60;
    int max_gap_minutes = 60;

    static AdapterConfig parse(const std::string& text);
    static AdapterConfig load(const std::string& path);
};

/// Loads canonical generation CSV
/// (`timestamp,zone,coal,...,import,reported_ci`). Malformed rows,
/// negative generation and duplicate (zone, hour) pairs are errors that
/// name the offending line. Records come back sorted by (zone, time).
std::vector<HourlyGridRecord> load_generation_series(const std::string& path);

/// Provider-layout variant; adapter maps headers and units. Canonical
/// sources without a mapped column read as zero.
std::vector<HourlyGridRecord> load_generation_series(const std::string& path,
                                                     const AdapterConfig& adapter);

/// Loads canonical hourly price CSV (`timestamp,zone,price_aud_per_mwh`).
/// Gaps wider than max_gap_minutes within a zone are errors naming the
/// interval.
std::vector<HourlyPriceRecord> load_price_series(const std::string& path,
                                                 int max_gap_minutes = 60);

/// Provider-layout variant; 5/30-minute series are averaged onto the hour.
std::vector<HourlyPriceRecord> load_price_series(const std::string& path,
                                                 const AdapterConfig& adapter);

struct AlignedRecord {
    std::int64_t timestamp = 0;
    std::array<double, kNumSources> generation{};
    std::optional<double> reported_ci;
    double price_aud_per_mwh = 0.0;
};

struct CoverageStats {
    std::size_t matched = 0;
    std::size_t grid_only = 0;
    std::size_t price_only = 0;
};

/// Inner join of one zone's generation and price series on the hour.
struct AlignedSeries {
    std::string zone;
    std::vector<AlignedRecord> records; // strictly increasing timestamps
    CoverageStats coverage;
};

/// Joins the two series for one zone; hours present on only one side are
/// dropped (counted in coverage). An empty intersection is an error.
AlignedSeries align_series(const std::vector<HourlyGridRecord>& grid,
                           const std::vector<HourlyPriceRecord>& price, const std::string& zone);

/// Zones present in a generation series, in first-appearance order.
std::vector<std::string> zones_of(const std::vector<HourlyGridRecord>& grid);

/// Sums all zones of both series into one synthetic "all" zone per hour
/// (union of hours; price is generation-weighted across the zones priced
/// that hour). Reported CI does not aggregate and is dropped.
void aggregate_zones(std::vector<HourlyGridRecord>& grid, std::vector<HourlyPriceRecord>& price);

/// Generation-weighted mean emission factor for one hour, g CO2eq/kWh.
/// Zero total generation leaves the CI undefined: error.
double reconstruct_ci(const HourlyGridRecord& rec, const EmissionFactorTable& ef);

struct CiDeviation {
    std::int64_t timestamp = 0;
    double reported = 0.0;
    double reconstructed = 0.0;
    double deviation = 0.0; // |reconstructed - reported|
    bool flagged = false;
};

struct CiValidationReport {
    std::vector<CiDeviation> rows; // hours carrying a reported CI
    double max_deviation = 0.0;
    double mean_deviation = 0.0;
    std::size_t flagged = 0;
    double tolerance = 0.0;
};

/// Compares reconstructed vs reported CI per hour; deviations above the
/// tolerance (default 2 g CO2eq/kWh) are flagged, never fatal.
CiValidationReport validate_reported_ci(const std::vector<HourlyGridRecord>& records,
                                        const EmissionFactorTable& ef, double tolerance = 2.0);

std::string ci_report_to_csv(const CiValidationReport& rep);

} // namespace h2lca
