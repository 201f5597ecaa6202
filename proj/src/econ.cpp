#include "h2lca/econ.hpp"

#include "h2lca/errors.hpp"
#include "h2lca/textio.hpp"
#include "h2lca/timeutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace h2lca {

void EconParams::validate() const {
    if (!(specific_energy_kwh_per_kg > 0.0))
        throw Error("specific energy must be positive, got " +
                    fmt_double(specific_energy_kwh_per_kg));
    if (op_cost_aud_per_kg < 0.0 || credit_rate_aud_per_kg < 0.0 || credit_ci_cap < 0.0)
        throw Error("economic parameters must be >= 0");
}

EconParams EconParams::parse(const std::string& text) {
    EconParams p;
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
        const double val = parse_number(trim(line.substr(eq + 1)), line_no);
        if (key == "specific-energy") p.specific_energy_kwh_per_kg = val;
        else if (key == "op-cost") p.op_cost_aud_per_kg = val;
        else if (key == "credit-rate") p.credit_rate_aud_per_kg = val;
        else if (key == "credit-ci-cap") p.credit_ci_cap = val;
        else throw ParseError(line_no, "unknown econ key '" + key + "'");
    }
    p.validate();
    return p;
}

EconParams EconParams::load(const std::string& path) {
    return parse(read_file(path));
}

std::string EconParams::serialize() const {
    std::ostringstream out;
    out << "specific-energy = " << fmt_double(specific_energy_kwh_per_kg) << "\n";
    out << "op-cost = " << fmt_double(op_cost_aud_per_kg) << "\n";
    out << "credit-rate = " << fmt_double(credit_rate_aud_per_kg) << "\n";
    out << "credit-ci-cap = " << fmt_double(credit_ci_cap) << "\n";
    return out.str();
}

double cost_per_kg(double price_aud_per_mwh, const EconParams& econ) {
    return price_aud_per_mwh / 1000.0 * econ.specific_energy_kwh_per_kg + econ.op_cost_aud_per_kg;
}

double credit_earnings(const std::vector<HourlyDispatch>& dispatch, const EconParams& econ) {
    double total = 0.0;
    for (const auto& d : dispatch) {
        if (d.credit_eligible) total += d.rate_kg_h * econ.credit_rate_aud_per_kg;
    }
    return total;
}

double total_h2_kg(const std::vector<HourlyDispatch>& dispatch) {
    double kg = 0.0;
    for (const auto& d : dispatch) kg += d.rate_kg_h;
    return kg;
}

double op_cost_total(const std::vector<HourlyDispatch>& dispatch, const EconParams& econ) {
    return econ.op_cost_aud_per_kg * total_h2_kg(dispatch);
}

std::optional<double> MonthlyAggregate::avg_cost_per_kg() const {
    if (h2_kg <= 0.0) return std::nullopt;
    return (elec_cost_aud + op_cost_aud) / h2_kg;
}

std::optional<double> MonthlyAggregate::ci_ratio() const {
    if (h2_kg <= 0.0) return std::nullopt;
    return emissions_kg / h2_kg;
}

std::optional<double> ComparisonRow::cost_per_kg() const {
    if (h2_kg <= 0.0) return std::nullopt;
    return total_cost_aud() / h2_kg;
}

std::optional<double> ComparisonRow::ci_ratio() const {
    if (h2_kg <= 0.0) return std::nullopt;
    return emissions_kg / h2_kg;
}

std::vector<MonthlyAggregate> aggregate_monthly(const std::vector<HourlyDispatch>& dispatch,
                                                const std::string& zone) {
    std::vector<MonthlyAggregate> out;
    for (const auto& d : dispatch) {
        const UtcParts t = parts_from_epoch(d.timestamp);
        if (out.empty() || out.back().year != t.year || out.back().month != t.month) {
            MonthlyAggregate m;
            m.zone = zone;
            m.year = t.year;
            m.month = t.month;
            out.push_back(m);
        }
        auto& m = out.back();
        m.h2_kg += d.rate_kg_h; // one-hour steps: kg/h over 1 h
        m.emissions_kg += d.emissions_kg;
        m.elec_cost_aud += d.elec_cost_aud;
        m.op_cost_aud += d.op_cost_aud;
        m.credits_aud += d.credit_aud;
    }
    return out;
}

namespace {

int scenario_rank(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::Baseline: return 0;
    case ScenarioKind::GreenRule: return 1;
    case ScenarioKind::CreditThreshold: return 2;
    }
    return 3;
}

} // namespace

std::vector<ComparisonRow> build_comparison(const std::vector<ScenarioResult>& results) {
    if (results.empty()) return {};
    for (const auto& r : results) {
        if (r.dispatch.empty())
            throw Error("comparison input for zone '" + r.zone + "', scenario " +
                        to_string(r.scenario) + " is empty");
        if (r.dispatch.size() != results.front().dispatch.size() ||
            r.dispatch.front().timestamp != results.front().dispatch.front().timestamp ||
            r.dispatch.back().timestamp != results.front().dispatch.back().timestamp)
            throw Error("comparison inputs cover different periods (zone '" + r.zone +
                        "', scenario " + to_string(r.scenario) + " does not match zone '" +
                        results.front().zone + "')");
    }

    std::vector<const ScenarioResult*> order;
    order.reserve(results.size());
    for (const auto& r : results) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        if (a->zone != b->zone) return a->zone < b->zone;
        return scenario_rank(a->scenario) < scenario_rank(b->scenario);
    });

    std::vector<ComparisonRow> rows;
    rows.reserve(order.size());
    for (const auto* r : order) {
        ComparisonRow row;
        row.zone = r->zone;
        row.scenario = r->scenario;
        // Sum the monthly view rather than the raw hours, so the yearly
        // table is exactly the monthly table's column sums.
        for (const auto& m : aggregate_monthly(r->dispatch, r->zone)) {
            row.h2_kg += m.h2_kg;
            row.emissions_kg += m.emissions_kg;
            row.elec_cost_aud += m.elec_cost_aud;
            row.op_cost_aud += m.op_cost_aud;
            row.credits_aud += m.credits_aud;
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string();
}

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

std::string monthly_to_csv(const std::vector<MonthlyAggregate>& months) {
    std::ostringstream out;
    out << "zone,year,month,h2_t,emissions_t,elec_cost_aud,op_cost_aud,credits_aud,"
           "avg_cost_per_kg_aud,ci_ratio_kg_per_kg\n";
    for (const auto& m : months) {
        out << m.zone << "," << m.year << "," << m.month << "," << fmt_double(m.h2_t()) << ","
            << fmt_double(m.emissions_t()) << "," << fmt_double(m.elec_cost_aud) << ","
            << fmt_double(m.op_cost_aud) << "," << fmt_double(m.credits_aud) << ","
            << opt_cell(m.avg_cost_per_kg()) << "," << opt_cell(m.ci_ratio()) << "\n";
    }
    return out.str();
}

std::string monthly_to_json(const std::vector<MonthlyAggregate>& months) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : months) {
        arr.push_back({{"zone", m.zone},
                       {"year", m.year},
                       {"month", m.month},
                       {"h2_t", m.h2_t()},
                       {"emissions_t", m.emissions_t()},
                       {"elec_cost_aud", m.elec_cost_aud},
                       {"op_cost_aud", m.op_cost_aud},
                       {"credits_aud", m.credits_aud},
                       {"avg_cost_per_kg_aud", opt_json(m.avg_cost_per_kg())},
                       {"ci_ratio_kg_per_kg", opt_json(m.ci_ratio())}});
    }
    return arr.dump(2) + "\n";
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << "zone,scenario,h2_t,emissions_t,elec_cost_aud,op_cost_aud,total_cost_aud,credits_aud,"
           "cost_per_kg_aud,ci_ratio_kg_per_kg\n";
    for (const auto& r : rows) {
        out << r.zone << "," << to_string(r.scenario) << "," << fmt_double(r.h2_t()) << ","
            << fmt_double(r.emissions_t()) << "," << fmt_double(r.elec_cost_aud) << ","
            << fmt_double(r.op_cost_aud) << "," << fmt_double(r.total_cost_aud()) << ","
            << fmt_double(r.credits_aud) << "," << opt_cell(r.cost_per_kg()) << ","
            << opt_cell(r.ci_ratio()) << "\n";
    }
    return out.str();
}

std::string comparison_to_json(const std::vector<ComparisonRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"zone", r.zone},
                       {"scenario", to_string(r.scenario)},
                       {"h2_t", r.h2_t()},
                       {"emissions_t", r.emissions_t()},
                       {"elec_cost_aud", r.elec_cost_aud},
                       {"op_cost_aud", r.op_cost_aud},
                       {"total_cost_aud", r.total_cost_aud()},
                       {"credits_aud", r.credits_aud},
                       {"cost_per_kg_aud", opt_json(r.cost_per_kg())},
                       {"ci_ratio_kg_per_kg", opt_json(r.ci_ratio())}});
    }
    return arr.dump(2) + "\n";
}

Histogram build_histogram(const std::vector<double>& values, double bin_width) {
    if (!(bin_width > 0.0)) throw Error("bin width must be positive");
    Histogram h;
    h.bin_width = bin_width;
    std::map<long long, long long> counts;
    for (double v : values) {
        counts[static_cast<long long>(std::floor(v / bin_width))] += 1;
    }
    const double total = static_cast<double>(values.size());
    for (const auto& [k, n] : counts) {
        HistogramBin bin;
        bin.low = static_cast<double>(k) * bin_width;
        bin.high = static_cast<double>(k + 1) * bin_width;
        bin.count = n;
        bin.share = static_cast<double>(n) / total;
        h.bins.push_back(bin);
    }
    return h;
}

std::string histogram_to_csv(const Histogram& h) {
    std::ostringstream out;
    out << "bin_low,bin_high,count,share\n";
    for (const auto& b : h.bins) {
        out << fmt_double(b.low) << "," << fmt_double(b.high) << "," << b.count << ","
            << fmt_double(b.share) << "\n";
    }
    return out.str();
}

std::string histogram_to_json(const Histogram& h) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : h.bins) {
        arr.push_back(
            {{"bin_low", b.low}, {"bin_high", b.high}, {"count", b.count}, {"share", b.share}});
    }
    nlohmann::json doc = {{"bin_width", h.bin_width}, {"bins", arr}};
    return doc.dump(2) + "\n";
}

} // namespace h2lca
