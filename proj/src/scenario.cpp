#include "h2lca/scenario.hpp"

#include "h2lca/econ.hpp"
#include "h2lca/errors.hpp"
#include "h2lca/incidence.hpp"
#include "h2lca/textio.hpp"
#include "h2lca/timeutil.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace h2lca {

void ElectrolyzerSpec::validate() const {
    if (!(specific_energy_kwh_per_kg > 0.0))
        throw Error("specific energy must be positive, got " +
                    fmt_double(specific_energy_kwh_per_kg));
    if (min_rate_kg_h < 0.0 || min_rate_kg_h > max_rate_kg_h)
        throw Error("rate bounds must satisfy 0 <= min <= max, got min " +
                    fmt_double(min_rate_kg_h) + ", max " + fmt_double(max_rate_kg_h));
}

double ProductionRule::rate_for(double ci_kg) const {
    for (const auto& bp : breakpoints) {
        if (ci_kg <= bp.ci_threshold) return bp.rate_kg_h;
    }
    return default_rate_above_last;
}

namespace {

bool is_even_kg(double rate) {
    return rate == 2.0 * std::round(rate / 2.0);
}

} // namespace

void ProductionRule::validate(double max_rate) const {
    if (breakpoints.empty()) throw Error("production rule has no breakpoints");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        const auto& bp = breakpoints[i];
        if (bp.rate_kg_h < 0.0 || bp.rate_kg_h > max_rate || !is_even_kg(bp.rate_kg_h))
            throw Error("rule rate " + fmt_double(bp.rate_kg_h) +
                        " is not an even number of kilograms in [0, " + fmt_double(max_rate) +
                        "]");
        if (i == 0) continue;
        if (!(breakpoints[i - 1].ci_threshold < bp.ci_threshold))
            throw Error("rule thresholds must be strictly increasing, got " +
                        fmt_double(breakpoints[i - 1].ci_threshold) + " before " +
                        fmt_double(bp.ci_threshold));
        if (breakpoints[i - 1].rate_kg_h < bp.rate_kg_h)
            throw Error("rule rates must be non-increasing, got " +
                        fmt_double(breakpoints[i - 1].rate_kg_h) + " before " +
                        fmt_double(bp.rate_kg_h));
    }
    const double last = breakpoints.back().rate_kg_h;
    if (default_rate_above_last < 0.0 || default_rate_above_last > max_rate ||
        !is_even_kg(default_rate_above_last))
        throw Error("rule rate " + fmt_double(default_rate_above_last) +
                    " is not an even number of kilograms in [0, " + fmt_double(max_rate) + "]");
    if (default_rate_above_last > last)
        throw Error("default rate " + fmt_double(default_rate_above_last) +
                    " exceeds the last breakpoint rate " + fmt_double(last));
    if (last == 0.0 && default_rate_above_last != 0.0)
        throw Error("default rate must be 0 when the last breakpoint already shuts off");
}

ProductionRule ProductionRule::default_green_rule() {
    ProductionRule r;
    r.breakpoints = {{14.50, 20.0}, {15.00, 18.0}, {15.50, 16.0}, {16.00, 14.0}, {16.50, 12.0},
                     {16.99, 10.0}, {17.00, 8.0},  {17.50, 6.0},  {18.00, 4.0},  {19.00, 2.0}};
    r.default_rate_above_last = 0.0;
    return r;
}

ProductionRule ProductionRule::parse(const std::string& text) {
    ProductionRule r;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        std::string line = lines[i];
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            const std::string key = trim(line.substr(0, eq));
            if (key != "default-rate-above-last")
                throw ParseError(line_no, "unknown rule key '" + key + "'");
            r.default_rate_above_last = parse_number(trim(line.substr(eq + 1)), line_no);
            continue;
        }
        std::istringstream row(line);
        std::string t, v, extra;
        row >> t >> v;
        if (!row || (row >> extra))
            throw ParseError(line_no, "expected 'threshold rate', got '" + line + "'");
        r.breakpoints.push_back({parse_number(t, line_no), parse_number(v, line_no)});
    }
    return r;
}

ProductionRule ProductionRule::load(const std::string& path) {
    return parse(read_file(path));
}

std::string ProductionRule::serialize() const {
    std::ostringstream out;
    for (const auto& bp : breakpoints)
        out << fmt_double(bp.ci_threshold) << " " << fmt_double(bp.rate_kg_h) << "\n";
    out << "default-rate-above-last = " << fmt_double(default_rate_above_last) << "\n";
    return out.str();
}

const char* to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::Baseline: return "baseline";
    case ScenarioKind::GreenRule: return "green-rule";
    case ScenarioKind::CreditThreshold: return "credit-threshold";
    }
    return "?";
}

ScenarioKind scenario_kind_from(const std::string& name) {
    if (name == "baseline") return ScenarioKind::Baseline;
    if (name == "green-rule") return ScenarioKind::GreenRule;
    if (name == "credit-threshold") return ScenarioKind::CreditThreshold;
    throw Error("unknown scenario kind '" + name +
                "' (expected baseline, green-rule or credit-threshold)");
}

void ScenarioConfig::validate() const {
    electrolyzer.validate();
    if (kind == ScenarioKind::GreenRule) {
        if (!rule) throw Error("green-rule scenario has no production rule");
        rule->validate(electrolyzer.max_rate_kg_h);
    } else if (rule) {
        throw Error(std::string("production rule provided for ") + to_string(kind) +
                    " scenario, which does not use one");
    }
    if (credit_ci_cap < 0.0)
        throw Error("credit-ci-cap must be >= 0, got " + fmt_double(credit_ci_cap));
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
    ScenarioConfig cfg;
    bool kind_seen = false;
    ProductionRule rule;
    bool rule_seen = false;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        std::string line = lines[i];
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "kind") {
            cfg.kind = scenario_kind_from(val);
            kind_seen = true;
        } else if (key == "credit-ci-cap") {
            cfg.credit_ci_cap = parse_number(val, line_no);
        } else if (key == "specific-energy") {
            cfg.electrolyzer.specific_energy_kwh_per_kg = parse_number(val, line_no);
        } else if (key == "max-rate") {
            cfg.electrolyzer.max_rate_kg_h = parse_number(val, line_no);
        } else if (key == "min-rate") {
            cfg.electrolyzer.min_rate_kg_h = parse_number(val, line_no);
        } else if (key == "breakpoint") {
            std::istringstream row(val);
            std::string t, v, extra;
            row >> t >> v;
            if (!row || (row >> extra))
                throw ParseError(line_no, "breakpoint expects 'threshold rate', got '" + val + "'");
            rule.breakpoints.push_back({parse_number(t, line_no), parse_number(v, line_no)});
            rule_seen = true;
        } else if (key == "default-rate-above-last") {
            rule.default_rate_above_last = parse_number(val, line_no);
            rule_seen = true;
        } else {
            throw ParseError(line_no, "unknown scenario key '" + key + "'");
        }
    }
    if (!kind_seen) throw Error("scenario config does not set 'kind'");
    if (rule_seen) cfg.rule = std::move(rule);
    else if (cfg.kind == ScenarioKind::GreenRule) cfg.rule = ProductionRule::default_green_rule();
    cfg.validate();
    return cfg;
}

std::optional<ScenarioConfig> ScenarioConfig::builtin(const std::string& name) {
    if (name != "baseline" && name != "green-rule" && name != "credit-threshold")
        return std::nullopt;
    ScenarioConfig cfg;
    cfg.kind = scenario_kind_from(name);
    if (cfg.kind == ScenarioKind::GreenRule) cfg.rule = ProductionRule::default_green_rule();
    return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path_or_name) {
    if (auto b = builtin(path_or_name)) return *b;
    return parse(read_file(path_or_name));
}

std::string ScenarioConfig::serialize() const {
    std::ostringstream out;
    out << "kind = " << to_string(kind) << "\n";
    out << "credit-ci-cap = " << fmt_double(credit_ci_cap) << "\n";
    out << "specific-energy = " << fmt_double(electrolyzer.specific_energy_kwh_per_kg) << "\n";
    out << "max-rate = " << fmt_double(electrolyzer.max_rate_kg_h) << "\n";
    out << "min-rate = " << fmt_double(electrolyzer.min_rate_kg_h) << "\n";
    if (rule) {
        for (const auto& bp : rule->breakpoints)
            out << "breakpoint = " << fmt_double(bp.ci_threshold) << " "
                << fmt_double(bp.rate_kg_h) << "\n";
        out << "default-rate-above-last = " << fmt_double(rule->default_rate_above_last) << "\n";
    }
    return out.str();
}

double ci_per_kg(double grid_ci, const ElectrolyzerSpec& spec) {
    return grid_ci * spec.specific_energy_kwh_per_kg / 1000.0;
}

double decide_rate(const ScenarioConfig& config, double ci_kg) {
    switch (config.kind) {
    case ScenarioKind::Baseline:
        return config.electrolyzer.max_rate_kg_h;
    case ScenarioKind::GreenRule:
        if (!config.rule) throw Error("green-rule scenario has no production rule");
        return config.rule->rate_for(ci_kg);
    case ScenarioKind::CreditThreshold:
        return ci_kg <= config.credit_ci_cap ? config.electrolyzer.max_rate_kg_h : 0.0;
    }
    throw Error("unhandled scenario kind");
}

namespace {

std::string required_meta(const SystemModel& m, const std::string& key) {
    const auto it = m.metadata.find(key);
    if (it == m.metadata.end() || trim(it->second).empty())
        throw ModelError("model metadata missing key '" + key + "'");
    return trim(it->second);
}

std::set<std::string> split_ids(const std::string& value) {
    std::set<std::string> out;
    std::istringstream in(value);
    std::string id;
    while (in >> id) out.insert(id);
    return out;
}

} // namespace

EmissionsModel::EmissionsModel(const SystemModel& model) : m_model(model) {
    const std::string elec_op = required_meta(m_model, "operand-electricity");
    const std::string h2_op = required_meta(m_model, "operand-hydrogen");
    const std::string co2_op = required_meta(m_model, "operand-co2");

    // The aspect set that yields a square product block; a model may also
    // carry a plain `aspects` list for inspection tooling.
    const auto adj = m_model.metadata.find("aspects-adjusted");
    const std::string aspect_list =
        adj != m_model.metadata.end() ? adj->second : required_meta(m_model, "aspects");
    const auto aspects = split_ids(aspect_list);

    const auto reduced = eliminate_zero_rows(build_incidence_matrix(m_model));
    const auto part = partition(reduced, aspects);
    m_solver = std::make_unique<SteadyStateSolver>(part);
    const auto& p = m_solver->partitioned();

    for (std::size_t i = 0; i < p.a_rows.size(); ++i) {
        if (p.a_rows[i].operand == h2_op) {
            if (m_h2_row >= 0)
                throw ModelError("hydrogen operand '" + h2_op + "' spans several product rows");
            m_h2_row = static_cast<int>(i);
        }
    }
    if (m_h2_row < 0)
        throw ModelError("hydrogen operand '" + h2_op + "' has no product row");
    m_co2_row = p.b_row_index_for_operand(co2_op);
    if (m_co2_row < 0)
        throw ModelError("CO2 operand '" + co2_op + "' has no aspect row");

    const std::string co2_unit = m_model.find_operand(co2_op)->unit;
    if (co2_unit == "g") m_co2_unit = MassUnit::Gram;
    else if (co2_unit == "kg") m_co2_unit = MassUnit::Kilogram;
    else if (co2_unit == "t") m_co2_unit = MassUnit::Tonne;
    else throw ModelError("unsupported CO2 unit '" + co2_unit + "' (expected g, kg or t)");

    m_source_row.fill(-1);
    m_source_col.fill(-1);
    const auto& names = source_names();
    for (std::size_t s = 0; s < kNumSources; ++s) {
        const auto it = m_model.metadata.find("source-" + names[s]);
        if (it == m_model.metadata.end()) continue;
        const std::string process = trim(it->second);
        const Capability* cap = nullptr;
        for (const auto& c : m_model.capabilities) {
            if (c.process == process) {
                cap = &c;
                break;
            }
        }
        if (!cap) throw ModelError("no capability performs source process '" + process + "'");
        const Flow* inj = nullptr;
        for (const auto& f : cap->flows) {
            if (f.operand == elec_op && f.rate > 0.0) {
                inj = &f;
                break;
            }
        }
        if (!inj)
            throw ModelError("capability '" + cap->id + "' does not inject '" + elec_op + "'");
        const int row = p.a_row_index(inj->operand, inj->buffer);
        if (row < 0)
            throw ModelError("injection of capability '" + cap->id +
                             "' does not land on a product row");
        m_source_row[s] = row;
        for (std::size_t j = 0; j < p.cols.size(); ++j) {
            if (p.cols[j] == cap->id) m_source_col[s] = static_cast<int>(j);
        }
    }

    const std::string elz_id = required_meta(m_model, "capability-electrolyzer");
    const Capability* elz = m_model.find_capability(elz_id);
    if (!elz) throw ModelError("unknown electrolyzer capability '" + elz_id + "'");
    double pull = 0.0, h2_inj = 0.0;
    for (const auto& f : elz->flows) {
        if (f.operand == elec_op && f.rate < 0.0) pull = -f.rate;
        if (f.operand == h2_op && f.rate > 0.0) h2_inj = f.rate;
    }
    if (pull <= 0.0 || h2_inj <= 0.0)
        throw ModelError("capability '" + elz_id + "' must pull '" + elec_op + "' and inject '" +
                         h2_op + "'");
    m_specific_energy = pull / h2_inj;
}

double EmissionsModel::hourly_emissions_kg(double rate_kg_h,
                                           const std::array<double, kNumSources>& shares) const {
    if (rate_kg_h < 0.0) throw Error("rate must be >= 0, got " + fmt_double(rate_kg_h));
    if (rate_kg_h == 0.0) return 0.0;
    double sum = 0.0;
    for (double s : shares) sum += s;
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error("inconsistent share vector (sum = " + fmt_double(sum) + ")");

    const auto& p = m_solver->partitioned();
    Eigen::VectorXd dy = Eigen::VectorXd::Zero(p.a.rows());
    dy(m_h2_row) = rate_kg_h;
    const double energy = rate_kg_h * m_specific_energy;
    for (std::size_t s = 0; s < kNumSources; ++s) {
        if (m_source_row[s] >= 0) dy(m_source_row[s]) += shares[s] * energy;
    }
    const LcaResult r = m_solver->solve(dy);
    const double v = r.delta_e(m_co2_row);
    // One exact operation per unit: dividing grams by 1000 rounds once,
    // where a 1e-3 multiplier would drift off clean totals.
    switch (m_co2_unit) {
    case MassUnit::Gram: return v / 1000.0;
    case MassUnit::Tonne: return v * 1000.0;
    case MassUnit::Kilogram: break;
    }
    return v;
}

EmissionFactorTable EmissionsModel::derived_ef() const {
    EmissionFactorTable ef{};
    const auto& p = m_solver->partitioned();
    for (std::size_t s = 0; s < kNumSources; ++s) {
        if (m_source_col[s] < 0) continue;
        const double inj = p.a(m_source_row[s], m_source_col[s]);
        // B holds the CO2 operand's own unit; the table wants g per kWh.
        const double own = p.b(m_co2_row, m_source_col[s]) / inj;
        switch (m_co2_unit) {
        case MassUnit::Gram: ef.g_per_kwh[s] = own; break;
        case MassUnit::Kilogram: ef.g_per_kwh[s] = own * 1000.0; break;
        case MassUnit::Tonne: ef.g_per_kwh[s] = own * 1e6; break;
        }
    }
    return ef;
}

std::vector<HourlyDispatch> run_scenario(const AlignedSeries& series, const ScenarioConfig& config,
                                         const EconParams& econ, const EmissionsModel& emissions,
                                         CiSource ci_source) {
    config.validate();
    const EmissionFactorTable ef = emissions.derived_ef();
    std::vector<HourlyDispatch> out;
    out.reserve(series.records.size());
    for (const auto& rec : series.records) {
        double total = 0.0;
        for (double g : rec.generation) total += g;

        auto reconstructed = [&]() {
            if (total <= 0.0)
                throw IngestError("zero total generation at " + format_timestamp(rec.timestamp) +
                                  ": carbon intensity is undefined");
            double weighted = 0.0;
            for (std::size_t s = 0; s < kNumSources; ++s)
                weighted += rec.generation[s] * ef.g_per_kwh[s];
            return weighted / total;
        };

        double grid_ci = 0.0;
        switch (ci_source) {
        case CiSource::Reported:
            if (!rec.reported_ci)
                throw IngestError("no reported carbon intensity at " +
                                  format_timestamp(rec.timestamp));
            grid_ci = *rec.reported_ci;
            break;
        case CiSource::Reconstructed:
            grid_ci = reconstructed();
            break;
        case CiSource::Auto:
            grid_ci = rec.reported_ci ? *rec.reported_ci : reconstructed();
            break;
        }

        const double ci_kg = ci_per_kg(grid_ci, config.electrolyzer);
        HourlyDispatch d;
        d.timestamp = rec.timestamp;
        d.rate_kg_h = decide_rate(config, ci_kg);
        d.energy_kwh = d.rate_kg_h * config.electrolyzer.specific_energy_kwh_per_kg;
        if (d.rate_kg_h > 0.0) {
            if (total <= 0.0)
                throw IngestError("zero total generation at " + format_timestamp(rec.timestamp) +
                                  ": cannot attribute dispatched energy");
            std::array<double, kNumSources> shares{};
            for (std::size_t s = 0; s < kNumSources; ++s) shares[s] = rec.generation[s] / total;
            d.emissions_kg = emissions.hourly_emissions_kg(d.rate_kg_h, shares);
        }
        d.elec_cost_aud = d.energy_kwh / 1000.0 * rec.price_aud_per_mwh;
        d.op_cost_aud = d.rate_kg_h * econ.op_cost_aud_per_kg;
        d.credit_eligible = ci_kg <= econ.credit_ci_cap;
        d.credit_aud = d.credit_eligible ? d.rate_kg_h * econ.credit_rate_aud_per_kg : 0.0;
        out.push_back(d);
    }
    return out;
}

std::string dispatch_to_csv(const std::vector<HourlyDispatch>& dispatch) {
    std::ostringstream out;
    out << "timestamp,rate_kg_h,energy_kwh,emissions_kg,elec_cost_aud,op_cost_aud,credit_aud,"
           "eligible\n";
    for (const auto& d : dispatch) {
        out << format_timestamp(d.timestamp) << "," << fmt_double(d.rate_kg_h) << ","
            << fmt_double(d.energy_kwh) << "," << fmt_double(d.emissions_kg) << ","
            << fmt_double(d.elec_cost_aud) << "," << fmt_double(d.op_cost_aud) << ","
            << fmt_double(d.credit_aud) << "," << (d.credit_eligible ? "1" : "0") << "\n";
    }
    return out.str();
}

std::string dispatch_to_json(const std::vector<HourlyDispatch>& dispatch) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : dispatch) {
        arr.push_back({{"timestamp", format_timestamp(d.timestamp)},
                       {"rate_kg_h", d.rate_kg_h},
                       {"energy_kwh", d.energy_kwh},
                       {"emissions_kg", d.emissions_kg},
                       {"elec_cost_aud", d.elec_cost_aud},
                       {"op_cost_aud", d.op_cost_aud},
                       {"credit_aud", d.credit_aud},
                       {"eligible", d.credit_eligible}});
    }
    return arr.dump(2) + "\n";
}

} // namespace h2lca
