#include "h2lca/data_ingest.hpp"
#include "h2lca/econ.hpp"
#include "h2lca/errors.hpp"
#include "h2lca/esn.hpp"
#include "h2lca/incidence.hpp"
#include "h2lca/scenario.hpp"
#include "h2lca/system_model.hpp"
#include "h2lca/textio.hpp"
#include "h2lca/timeutil.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace {

using namespace h2lca;

struct IngestFlags {
    std::string generation;
    std::string prices;
    std::string gen_adapter;
    std::string price_adapter;
    std::string zone;
    int year = 0;
};

void add_ingest_flags(CLI::App* cmd, IngestFlags& f, bool with_prices) {
    cmd->add_option("--generation", f.generation, "canonical or provider generation CSV")
        ->required();
    if (with_prices)
        cmd->add_option("--prices", f.prices, "canonical or provider price CSV")->required();
    cmd->add_option("--generation-adapter", f.gen_adapter,
                    "adapter config for a provider generation file");
    if (with_prices)
        cmd->add_option("--price-adapter", f.price_adapter,
                        "adapter config for a provider price file");
    cmd->add_option("--zone", f.zone, "zone to evaluate, or 'all' to merge zones");
    cmd->add_option("--year", f.year, "keep only hours of this UTC calendar year");
}

std::vector<HourlyGridRecord> load_grid(const IngestFlags& f) {
    auto grid = f.gen_adapter.empty()
                    ? load_generation_series(f.generation)
                    : load_generation_series(f.generation, AdapterConfig::load(f.gen_adapter));
    if (f.year != 0) {
        std::vector<HourlyGridRecord> kept;
        for (auto& r : grid)
            if (parts_from_epoch(r.timestamp).year == f.year) kept.push_back(std::move(r));
        if (kept.empty())
            throw IngestError("no generation records in year " + std::to_string(f.year));
        grid = std::move(kept);
    }
    return grid;
}

std::vector<HourlyPriceRecord> load_prices(const IngestFlags& f) {
    auto prices = f.price_adapter.empty()
                      ? load_price_series(f.prices)
                      : load_price_series(f.prices, AdapterConfig::load(f.price_adapter));
    if (f.year != 0) {
        std::vector<HourlyPriceRecord> kept;
        for (auto& r : prices)
            if (parts_from_epoch(r.timestamp).year == f.year) kept.push_back(std::move(r));
        if (kept.empty()) throw IngestError("no price records in year " + std::to_string(f.year));
        prices = std::move(kept);
    }
    return prices;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ", ";
        out += p;
    }
    return out;
}

// Zones to evaluate. An explicit zone wins; 'all' merges every zone into
// one series (mutating both inputs); otherwise a single-zone file picks
// itself and a multi-zone file must be disambiguated.
std::vector<std::string> resolve_zones(std::vector<HourlyGridRecord>& grid,
                                       std::vector<HourlyPriceRecord>& prices,
                                       const std::string& flag, bool each_zone) {
    if (flag == "all") {
        aggregate_zones(grid, prices);
        return {"all"};
    }
    const auto zones = zones_of(grid);
    if (!flag.empty()) return {flag};
    if (zones.size() == 1) return zones;
    if (each_zone) return zones;
    throw IngestError("generation series covers zones " + join(zones) +
                      "; pick one with --zone (or --zone all)");
}

ScenarioConfig load_scenario(const std::string& scenario, const std::string& rule_path) {
    ScenarioConfig cfg = ScenarioConfig::load(scenario);
    if (!rule_path.empty()) {
        cfg.rule = ProductionRule::load(rule_path);
        cfg.validate();
    }
    return cfg;
}

CiSource parse_ci_source(const std::string& v) {
    if (v.empty()) return CiSource::Auto;
    if (v == "reported") return CiSource::Reported;
    if (v == "reconstructed") return CiSource::Reconstructed;
    throw Error("unknown ci source '" + v + "'");
}

double selected_ci(const AlignedRecord& rec, const EmissionFactorTable& ef, CiSource source) {
    HourlyGridRecord g;
    g.timestamp = rec.timestamp;
    g.generation = rec.generation;
    g.reported_ci = rec.reported_ci;
    switch (source) {
    case CiSource::Reported:
        if (!rec.reported_ci)
            throw IngestError("no reported carbon intensity at " + format_timestamp(rec.timestamp));
        return *rec.reported_ci;
    case CiSource::Reconstructed:
        return reconstruct_ci(g, ef);
    case CiSource::Auto:
        return rec.reported_ci ? *rec.reported_ci : reconstruct_ci(g, ef);
    }
    throw Error("unhandled ci source");
}

void emit(const std::filesystem::path& out_dir, const std::string& stem, const std::string& format,
          const std::string& csv, const std::string& json) {
    const auto path = out_dir / (stem + (format == "json" ? ".json" : ".csv"));
    write_file(path.string(), format == "json" ? json : csv);
    std::printf("wrote %s\n", path.string().c_str());
}

int cmd_validate_model(const std::string& model_path) {
    const SystemModel m = parse_system_model(read_file(model_path));
    const ValidationReport rep = validate_model(m);
    if (!rep.ok()) {
        for (const auto& v : rep.violations)
            std::fprintf(stderr, "%s: %s\n", v.subject.c_str(), v.message.c_str());
        return 1;
    }
    std::printf("model OK: %zu operands, %zu processes, %zu resources, %zu capabilities, "
                "%zu buffers\n",
                m.operands.size(), m.processes.size(), m.resources.size(), m.capabilities.size(),
                enumerate_buffers(m).size());
    return 0;
}

int cmd_build_matrix(const std::string& model_path, bool full, const std::string& format,
                     const std::string& out) {
    const SystemModel m = parse_system_model(read_file(model_path));
    IncidenceMatrix matrix = build_incidence_matrix(m);
    if (!full) matrix = eliminate_zero_rows(matrix);
    const std::string text = format == "json" ? matrix_to_json(matrix) : matrix_to_csv(matrix);
    if (out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_file(out, text);
        std::printf("wrote %s (%ld x %ld)\n", out.c_str(), static_cast<long>(matrix.values.rows()),
                    static_cast<long>(matrix.values.cols()));
    }
    return 0;
}

int cmd_validate_ci(const std::string& model_path, const IngestFlags& flags, double tolerance,
                    const std::string& out) {
    const SystemModel m = parse_system_model(read_file(model_path));
    const EmissionsModel emissions(m);
    auto grid = load_grid(flags);
    if (!flags.zone.empty() && flags.zone != "all") {
        std::vector<HourlyGridRecord> kept;
        for (auto& r : grid)
            if (r.zone == flags.zone) kept.push_back(std::move(r));
        if (kept.empty()) throw IngestError("no generation records for zone '" + flags.zone + "'");
        grid = std::move(kept);
    }
    const CiValidationReport rep = validate_reported_ci(grid, emissions.derived_ef(), tolerance);
    std::printf("%zu reported hours: max deviation %s, mean %s, %zu flagged above %s g/kWh\n",
                rep.rows.size(), fmt_double(rep.max_deviation).c_str(),
                fmt_double(rep.mean_deviation).c_str(), rep.flagged,
                fmt_double(rep.tolerance).c_str());
    if (!out.empty()) {
        write_file(out, ci_report_to_csv(rep));
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int cmd_run(const std::string& model_path, const IngestFlags& flags, const std::string& scenario,
            const std::string& rule_path, const std::string& econ_path,
            const std::string& ci_source_flag, const std::string& out_dir_flag,
            const std::string& format) {
    const SystemModel m = parse_system_model(read_file(model_path));
    const EmissionsModel emissions(m);
    const ScenarioConfig cfg = load_scenario(scenario, rule_path);
    const EconParams econ = econ_path.empty() ? EconParams{} : EconParams::load(econ_path);
    const CiSource ci_source = parse_ci_source(ci_source_flag);

    auto grid = load_grid(flags);
    auto prices = load_prices(flags);
    const auto zones = resolve_zones(grid, prices, flags.zone, false);
    const AlignedSeries series = align_series(grid, prices, zones.front());

    const auto dispatch = run_scenario(series, cfg, econ, emissions, ci_source);
    const auto monthly = aggregate_monthly(dispatch, series.zone);

    const auto ef = emissions.derived_ef();
    std::vector<double> ci_values, price_values;
    ci_values.reserve(series.records.size());
    for (const auto& rec : series.records) {
        ci_values.push_back(selected_ci(rec, ef, ci_source));
        price_values.push_back(rec.price_aud_per_mwh);
    }

    const std::filesystem::path out_dir(out_dir_flag);
    std::filesystem::create_directories(out_dir);
    emit(out_dir, "dispatch", format, dispatch_to_csv(dispatch), dispatch_to_json(dispatch));
    emit(out_dir, "monthly", format, monthly_to_csv(monthly), monthly_to_json(monthly));
    const Histogram ci_hist = build_histogram(ci_values, 10.0);
    const Histogram price_hist = build_histogram(price_values, 10.0);
    emit(out_dir, "ci_histogram", format, histogram_to_csv(ci_hist), histogram_to_json(ci_hist));
    emit(out_dir, "price_histogram", format, histogram_to_csv(price_hist),
         histogram_to_json(price_hist));

    double h2 = 0.0, emitted = 0.0;
    for (const auto& d : dispatch) {
        h2 += d.rate_kg_h;
        emitted += d.emissions_kg;
    }
    std::printf("%s over %zu hours in zone %s: %s kg H2, %s kg CO2, credits %s AUD\n",
                to_string(cfg.kind), dispatch.size(), series.zone.c_str(), fmt_double(h2).c_str(),
                fmt_double(emitted).c_str(), fmt_double(credit_earnings(dispatch, econ)).c_str());
    if (series.coverage.grid_only + series.coverage.price_only > 0)
        std::printf("coverage: %zu matched hours, %zu generation-only, %zu price-only\n",
                    series.coverage.matched, series.coverage.grid_only,
                    series.coverage.price_only);
    return 0;
}

int cmd_compare(const std::string& model_path, const IngestFlags& flags,
                const std::vector<std::string>& scenarios, const std::string& rule_path,
                const std::string& econ_path, const std::string& ci_source_flag,
                const std::string& out_dir_flag, const std::string& format) {
    const SystemModel m = parse_system_model(read_file(model_path));
    const EmissionsModel emissions(m);
    const EconParams econ = econ_path.empty() ? EconParams{} : EconParams::load(econ_path);
    const CiSource ci_source = parse_ci_source(ci_source_flag);

    std::vector<std::string> names = scenarios;
    if (names.empty()) names = {"baseline", "green-rule", "credit-threshold"};

    auto grid = load_grid(flags);
    auto prices = load_prices(flags);
    const auto zones = resolve_zones(grid, prices, flags.zone, true);

    std::vector<ScenarioResult> results;
    for (const auto& zone : zones) {
        const AlignedSeries series = align_series(grid, prices, zone);
        for (const auto& name : names) {
            const ScenarioConfig cfg = load_scenario(name, rule_path);
            results.push_back({zone, cfg.kind, run_scenario(series, cfg, econ, emissions,
                                                            ci_source)});
        }
    }
    const auto rows = build_comparison(results);

    const std::filesystem::path out_dir(out_dir_flag);
    std::filesystem::create_directories(out_dir);
    emit(out_dir, "comparison", format, comparison_to_csv(rows), comparison_to_json(rows));
    for (const auto& r : rows)
        std::printf("%s %s: %s t H2, %s t CO2, total cost %s AUD\n", r.zone.c_str(),
                    to_string(r.scenario), fmt_double(r.h2_t()).c_str(),
                    fmt_double(r.emissions_t()).c_str(), fmt_double(r.total_cost_aud()).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hetero-functional grid-to-hydrogen life-cycle toolkit"};
    app.require_subcommand(1);

    std::string model_path, scenario = "baseline", rule_path, econ_path, ci_source_flag;
    std::string out_dir = ".", format = "csv", out_file;
    std::vector<std::string> scenario_list;
    bool full_matrix = false;
    double tolerance = 2.0;
    IngestFlags ingest;

    auto* validate_model_cmd = app.add_subcommand("validate-model", "parse and check a model");
    validate_model_cmd->add_option("--model", model_path, "system model file")->required();

    auto* build_matrix_cmd =
        app.add_subcommand("build-matrix", "emit the hetero-functional incidence matrix");
    build_matrix_cmd->add_option("--model", model_path, "system model file")->required();
    build_matrix_cmd->add_flag("--full", full_matrix, "keep all-zero rows");
    build_matrix_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    build_matrix_cmd->add_option("--out", out_file, "output file (default stdout)");

    auto* validate_ci_cmd =
        app.add_subcommand("validate-ci", "check reported carbon intensity against the mix");
    validate_ci_cmd->add_option("--model", model_path, "system model file")->required();
    add_ingest_flags(validate_ci_cmd, ingest, false);
    validate_ci_cmd->add_option("--tolerance", tolerance, "flag deviations above this, g/kWh");
    validate_ci_cmd->add_option("--out", out_file, "per-hour deviation CSV");

    auto* run_cmd = app.add_subcommand("run", "dispatch one scenario over a series");
    run_cmd->add_option("--model", model_path, "system model file")->required();
    add_ingest_flags(run_cmd, ingest, true);
    run_cmd->add_option("--scenario", scenario, "baseline, green-rule, credit-threshold or file");
    run_cmd->add_option("--rule", rule_path, "production-rule table file");
    run_cmd->add_option("--econ", econ_path, "economic parameter file");
    run_cmd->add_option("--ci-source", ci_source_flag, "reported or reconstructed")
        ->check(CLI::IsMember({"reported", "reconstructed"}));
    run_cmd->add_option("--out-dir", out_dir, "output directory");
    run_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* compare_cmd = app.add_subcommand("compare", "yearly cross-scenario table");
    compare_cmd->add_option("--model", model_path, "system model file")->required();
    add_ingest_flags(compare_cmd, ingest, true);
    compare_cmd->add_option("--scenario", scenario_list,
                            "scenarios to compare (default: all three)");
    compare_cmd->add_option("--rule", rule_path, "production-rule table file");
    compare_cmd->add_option("--econ", econ_path, "economic parameter file");
    compare_cmd->add_option("--ci-source", ci_source_flag, "reported or reconstructed")
        ->check(CLI::IsMember({"reported", "reconstructed"}));
    compare_cmd->add_option("--out-dir", out_dir, "output directory");
    compare_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_model_cmd->parsed()) return cmd_validate_model(model_path);
        if (build_matrix_cmd->parsed())
            return cmd_build_matrix(model_path, full_matrix, format, out_file);
        if (validate_ci_cmd->parsed())
            return cmd_validate_ci(model_path, ingest, tolerance, out_file);
        if (run_cmd->parsed())
            return cmd_run(model_path, ingest, scenario, rule_path, econ_path, ci_source_flag,
                           out_dir, format);
        if (compare_cmd->parsed())
            return cmd_compare(model_path, ingest, scenario_list, rule_path, econ_path,
                               ci_source_flag, out_dir, format);
    } catch (const h2lca::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
