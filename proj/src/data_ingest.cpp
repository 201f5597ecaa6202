#include "h2lca/data_ingest.hpp"

#include "h2lca/errors.hpp"
#include "h2lca/textio.hpp"
#include "h2lca/timeutil.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace h2lca {

const std::array<std::string, kNumSources>& source_names() {
    static const std::array<std::string, kNumSources> names = {
        "coal",  "gas",  "oil",   "biomass",           "solar",
        "geothermal", "wind", "hydro", "battery_discharge", "import"};
    return names;
}

double HourlyGridRecord::total_generation() const {
    double t = 0.0;
    for (double g : generation) t += g;
    return t;
}

namespace {

const std::string kGenerationHeader =
    "timestamp,zone,coal,gas,oil,biomass,solar,geothermal,wind,hydro,battery_discharge,import,"
    "reported_ci";
const std::string kPriceHeader = "timestamp,zone,price_aud_per_mwh";

std::int64_t parse_row_timestamp(const std::string& token, std::size_t line_no) {
    try {
        return parse_timestamp(token);
    } catch (const Error& e) {
        throw ParseError(line_no, e.what());
    }
}

void check_gaps(const std::vector<HourlyPriceRecord>& recs, int max_gap_minutes) {
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (recs[i].zone != recs[i - 1].zone) continue;
        const std::int64_t gap = recs[i].timestamp - recs[i - 1].timestamp;
        if (gap > static_cast<std::int64_t>(max_gap_minutes) * 60) {
            throw IngestError("price series gap of " + std::to_string(gap / 60) +
                              " minutes between " + format_timestamp(recs[i - 1].timestamp) +
                              " and " + format_timestamp(recs[i].timestamp) + " in zone '" +
                              recs[i].zone + "' exceeds max gap " +
                              std::to_string(max_gap_minutes) + " minutes");
        }
    }
}

} // namespace

AdapterConfig AdapterConfig::parse(const std::string& text) {
    AdapterConfig cfg;
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
        if (key == "timestamp-column") cfg.timestamp_column = val;
        else if (key == "zone-column") cfg.zone_column = val;
        else if (key == "zone") cfg.fixed_zone = val;
        else if (key == "price-column") cfg.price_column = val;
        else if (key == "unit") {
            if (val == "mw") cfg.megawatts = true;
            else if (val == "mwh") cfg.megawatts = false;
            else throw ParseError(line_no, "unit must be 'mw' or 'mwh'");
        } else if (key == "interval-minutes") {
            cfg.interval_minutes = static_cast<int>(parse_number(val, line_no));
            if (cfg.interval_minutes != 5 && cfg.interval_minutes != 30 &&
                cfg.interval_minutes != 60)
                throw ParseError(line_no, "interval-minutes must be 5, 30 or 60");
        } else if (key == "max-gap-minutes") {
            cfg.max_gap_minutes = static_cast<int>(parse_number(val, line_no));
        } else if (key == "aggregate") {
            if (val != "mean") throw ParseError(line_no, "only 'mean' aggregation is supported");
        } else if (key.rfind("column.", 0) == 0) {
            const std::string source = key.substr(7);
            const auto& names = source_names();
            if (std::find(names.begin(), names.end(), source) == names.end())
                throw ParseError(line_no, "unknown canonical source '" + source + "'");
            cfg.source_columns[source] = val;
        } else {
            throw ParseError(line_no, "unknown adapter key '" + key + "'");
        }
    }
    if (cfg.zone_column.empty() && cfg.fixed_zone.empty())
        throw Error("adapter config needs either zone-column or zone");
    return cfg;
}

AdapterConfig AdapterConfig::load(const std::string& path) {
    return parse(read_file(path));
}

std::vector<HourlyGridRecord> load_generation_series(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    if (lines.empty()) throw IngestError("'" + path + "' is empty");
    if (trim(lines[0]) != kGenerationHeader)
        throw ParseError(1, "unexpected header; canonical generation layout is '" +
                                kGenerationHeader + "'");

    std::vector<HourlyGridRecord> out;
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 13)
            throw ParseError(line_no, "expected 13 fields, got " + std::to_string(f.size()));
        HourlyGridRecord r;
        r.timestamp = parse_row_timestamp(f[0], line_no);
        if (!hour_aligned(r.timestamp))
            throw ParseError(line_no, "timestamp " + f[0] + " is not aligned to the hour");
        r.zone = f[1];
        if (r.zone.empty()) throw ParseError(line_no, "zone is empty");
        for (std::size_t s = 0; s < kNumSources; ++s) {
            r.generation[s] = parse_number(f[2 + s], line_no);
            if (r.generation[s] < 0.0)
                throw ParseError(line_no, "negative generation " + f[2 + s] + " for source '" +
                                              source_names()[s] + "'");
        }
        if (!f[12].empty()) r.reported_ci = parse_number(f[12], line_no);
        if (!seen.insert({r.zone, r.timestamp}).second)
            throw ParseError(line_no, "duplicate record for zone '" + r.zone + "' at " + f[0]);
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.zone != b.zone ? a.zone < b.zone : a.timestamp < b.timestamp;
    });
    return out;
}

std::vector<HourlyGridRecord> load_generation_series(const std::string& path,
                                                     const AdapterConfig& adapter) {
    const auto lines = split_lines(read_file(path));
    if (lines.empty()) throw IngestError("'" + path + "' is empty");
    const auto header = split(lines[0], ',');
    auto column_of = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) return static_cast<int>(c);
        }
        throw IngestError("provider file lacks column '" + name + "'");
    };

    const int ts_col = column_of(adapter.timestamp_column);
    const int zone_col = adapter.zone_column.empty() ? -1 : column_of(adapter.zone_column);
    std::map<std::size_t, int> src_cols; // canonical source index -> provider column
    const auto& names = source_names();
    for (const auto& [source, col_name] : adapter.source_columns) {
        const auto it = std::find(names.begin(), names.end(), source);
        src_cols[static_cast<std::size_t>(it - names.begin())] = column_of(col_name);
    }
    // MW read at a cadence of `interval` minutes carries interval/60 MWh.
    const double energy_scale = adapter.megawatts ? adapter.interval_minutes / 60.0 : 1.0;

    std::map<std::pair<std::string, std::int64_t>, HourlyGridRecord> by_hour;
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                          " fields, got " + std::to_string(f.size()));
        const std::int64_t ts = parse_row_timestamp(f[static_cast<std::size_t>(ts_col)], line_no);
        const std::string zone =
            zone_col >= 0 ? f[static_cast<std::size_t>(zone_col)] : adapter.fixed_zone;
        if (zone.empty()) throw ParseError(line_no, "zone is empty");
        if (!seen.insert({zone, ts}).second)
            throw ParseError(line_no, "duplicate record for zone '" + zone + "' at " +
                                          format_timestamp(ts));
        const std::int64_t hour = ts - (ts % 3600 + 3600) % 3600;
        auto& rec = by_hour[{zone, hour}];
        rec.timestamp = hour;
        rec.zone = zone;
        for (const auto& [s, col] : src_cols) {
            const double v = parse_number(f[static_cast<std::size_t>(col)], line_no);
            if (v < 0.0)
                throw ParseError(line_no, "negative generation " + fmt_double(v) +
                                              " for source '" + names[s] + "'");
            rec.generation[s] += v * energy_scale;
        }
    }

    std::vector<HourlyGridRecord> out;
    out.reserve(by_hour.size());
    for (auto& [key, rec] : by_hour) out.push_back(std::move(rec));
    return out;
}

std::vector<HourlyPriceRecord> load_price_series(const std::string& path, int max_gap_minutes) {
    const auto lines = split_lines(read_file(path));
    if (lines.empty()) throw IngestError("'" + path + "' is empty");
    if (trim(lines[0]) != kPriceHeader)
        throw ParseError(1, "unexpected header; canonical price layout is '" + kPriceHeader + "'");

    std::vector<HourlyPriceRecord> out;
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 3)
            throw ParseError(line_no, "expected 3 fields, got " + std::to_string(f.size()));
        HourlyPriceRecord r;
        r.timestamp = parse_row_timestamp(f[0], line_no);
        if (!hour_aligned(r.timestamp))
            throw ParseError(line_no, "timestamp " + f[0] + " is not aligned to the hour");
        r.zone = f[1];
        if (r.zone.empty()) throw ParseError(line_no, "zone is empty");
        r.price_aud_per_mwh = parse_number(f[2], line_no);
        if (!seen.insert({r.zone, r.timestamp}).second)
            throw ParseError(line_no, "duplicate record for zone '" + r.zone + "' at " + f[0]);
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.zone != b.zone ? a.zone < b.zone : a.timestamp < b.timestamp;
    });
    check_gaps(out, max_gap_minutes);
    return out;
}

std::vector<HourlyPriceRecord> load_price_series(const std::string& path,
                                                 const AdapterConfig& adapter) {
    if (adapter.price_column.empty())
        throw Error("price adapter config needs price-column");
    const auto lines = split_lines(read_file(path));
    if (lines.empty()) throw IngestError("'" + path + "' is empty");
    const auto header = split(lines[0], ',');
    auto column_of = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) return static_cast<int>(c);
        }
        throw IngestError("provider file lacks column '" + name + "'");
    };
    const int ts_col = column_of(adapter.timestamp_column);
    const int zone_col = adapter.zone_column.empty() ? -1 : column_of(adapter.zone_column);
    const int price_col = column_of(adapter.price_column);

    struct Bucket {
        double sum = 0.0;
        int n = 0;
    };
    std::vector<HourlyPriceRecord> raw;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                          " fields, got " + std::to_string(f.size()));
        HourlyPriceRecord r;
        r.timestamp = parse_row_timestamp(f[static_cast<std::size_t>(ts_col)], line_no);
        r.zone = zone_col >= 0 ? f[static_cast<std::size_t>(zone_col)] : adapter.fixed_zone;
        if (r.zone.empty()) throw ParseError(line_no, "zone is empty");
        r.price_aud_per_mwh = parse_number(f[static_cast<std::size_t>(price_col)], line_no);
        raw.push_back(std::move(r));
    }
    std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        return a.zone != b.zone ? a.zone < b.zone : a.timestamp < b.timestamp;
    });
    check_gaps(raw, adapter.max_gap_minutes);

    std::map<std::pair<std::string, std::int64_t>, Bucket> buckets;
    for (const auto& r : raw) {
        const std::int64_t hour = r.timestamp - (r.timestamp % 3600 + 3600) % 3600;
        auto& b = buckets[{r.zone, hour}];
        b.sum += r.price_aud_per_mwh;
        b.n += 1;
    }
    std::vector<HourlyPriceRecord> out;
    out.reserve(buckets.size());
    for (const auto& [key, b] : buckets) {
        out.push_back({key.second, key.first, b.sum / b.n});
    }
    return out;
}

AlignedSeries align_series(const std::vector<HourlyGridRecord>& grid,
                           const std::vector<HourlyPriceRecord>& price, const std::string& zone) {
    std::map<std::int64_t, const HourlyGridRecord*> g;
    for (const auto& r : grid) {
        if (r.zone == zone) g[r.timestamp] = &r;
    }
    std::map<std::int64_t, double> p;
    for (const auto& r : price) {
        if (r.zone == zone) p[r.timestamp] = r.price_aud_per_mwh;
    }
    if (g.empty()) throw IngestError("no generation records for zone '" + zone + "'");
    if (p.empty()) throw IngestError("no price records for zone '" + zone + "'");

    AlignedSeries s;
    s.zone = zone;
    for (const auto& [ts, rec] : g) {
        const auto it = p.find(ts);
        if (it == p.end()) {
            ++s.coverage.grid_only;
            continue;
        }
        AlignedRecord a;
        a.timestamp = ts;
        a.generation = rec->generation;
        a.reported_ci = rec->reported_ci;
        a.price_aud_per_mwh = it->second;
        s.records.push_back(std::move(a));
        ++s.coverage.matched;
    }
    s.coverage.price_only = p.size() - s.coverage.matched;
    if (s.records.empty())
        throw IngestError("generation and price series share no hours for zone '" + zone + "'");
    return s;
}

std::vector<std::string> zones_of(const std::vector<HourlyGridRecord>& grid) {
    std::vector<std::string> out;
    for (const auto& r : grid) {
        if (std::find(out.begin(), out.end(), r.zone) == out.end()) out.push_back(r.zone);
    }
    return out;
}

void aggregate_zones(std::vector<HourlyGridRecord>& grid, std::vector<HourlyPriceRecord>& price) {
    std::map<std::int64_t, HourlyGridRecord> gen_sum;
    std::map<std::pair<std::int64_t, std::string>, double> zone_total;
    for (const auto& r : grid) {
        auto& agg = gen_sum[r.timestamp];
        agg.timestamp = r.timestamp;
        agg.zone = "all";
        for (std::size_t s = 0; s < kNumSources; ++s) agg.generation[s] += r.generation[s];
        zone_total[{r.timestamp, r.zone}] = r.total_generation();
    }

    struct Weighted {
        double weighted_sum = 0.0;
        double weight = 0.0;
        double plain_sum = 0.0;
        int n = 0;
    };
    std::map<std::int64_t, Weighted> price_agg;
    for (const auto& r : price) {
        auto& w = price_agg[r.timestamp];
        const auto it = zone_total.find({r.timestamp, r.zone});
        const double weight = it == zone_total.end() ? 0.0 : it->second;
        w.weighted_sum += r.price_aud_per_mwh * weight;
        w.weight += weight;
        w.plain_sum += r.price_aud_per_mwh;
        w.n += 1;
    }

    grid.clear();
    for (auto& [ts, rec] : gen_sum) grid.push_back(std::move(rec));
    price.clear();
    for (const auto& [ts, w] : price_agg) {
        const double p = w.weight > 0.0 ? w.weighted_sum / w.weight : w.plain_sum / w.n;
        price.push_back({ts, "all", p});
    }
}

double reconstruct_ci(const HourlyGridRecord& rec, const EmissionFactorTable& ef) {
    const double total = rec.total_generation();
    if (total <= 0.0) {
        throw IngestError("zero total generation at " + format_timestamp(rec.timestamp) +
                          ": carbon intensity is undefined");
    }
    double weighted = 0.0;
    for (std::size_t s = 0; s < kNumSources; ++s) weighted += rec.generation[s] * ef.g_per_kwh[s];
    return weighted / total;
}

CiValidationReport validate_reported_ci(const std::vector<HourlyGridRecord>& records,
                                        const EmissionFactorTable& ef, double tolerance) {
    CiValidationReport rep;
    rep.tolerance = tolerance;
    double sum = 0.0;
    for (const auto& r : records) {
        if (!r.reported_ci) continue;
        CiDeviation d;
        d.timestamp = r.timestamp;
        d.reported = *r.reported_ci;
        d.reconstructed = reconstruct_ci(r, ef);
        d.deviation = std::abs(d.reconstructed - d.reported);
        d.flagged = d.deviation > tolerance;
        if (d.flagged) ++rep.flagged;
        rep.max_deviation = std::max(rep.max_deviation, d.deviation);
        sum += d.deviation;
        rep.rows.push_back(d);
    }
    if (!rep.rows.empty()) rep.mean_deviation = sum / static_cast<double>(rep.rows.size());
    return rep;
}

std::string ci_report_to_csv(const CiValidationReport& rep) {
    std::ostringstream out;
    out << "timestamp,reported_ci,reconstructed_ci,deviation,flagged\n";
    for (const auto& d : rep.rows) {
        out << format_timestamp(d.timestamp) << "," << fmt_double(d.reported) << ","
            << fmt_double(d.reconstructed) << "," << fmt_double(d.deviation) << ","
            << (d.flagged ? "1" : "0") << "\n";
    }
    return out.str();
}

} // namespace h2lca
