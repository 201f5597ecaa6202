#include <doctest.h>

#include <h2lca/data_ingest.hpp>
#include <h2lca/errors.hpp>
#include <h2lca/textio.hpp>
#include <h2lca/timeutil.hpp>

#include "test_support.hpp"

using namespace h2lca;

namespace {

const char* kGenHeader = "timestamp,zone,coal,gas,oil,biomass,solar,geothermal,wind,hydro,"
                         "battery_discharge,import,reported_ci";

std::string gen_csv(const std::vector<std::string>& rows) {
    std::string text = std::string(kGenHeader) + "\n";
    for (const auto& r : rows) text += r + "\n";
    return text;
}

std::string write_temp(const h2test::TempDir& dir, const std::string& name,
                       const std::string& content) {
    const std::string path = dir.file(name);
    write_file(path, content);
    return path;
}

} // namespace

TEST_CASE("source names are the canonical column order") {
    const auto& names = source_names();
    REQUIRE(names.size() == kNumSources);
    CHECK(names[0] == "coal");
    CHECK(names[3] == "biomass");
    CHECK(names[7] == "hydro");
    CHECK(names[8] == "battery_discharge");
    CHECK(names[9] == "import");
}

TEST_CASE("canonical generation fixture loads completely") {
    const auto recs = load_generation_series(h2test::fixture_path("generation_24h.csv"));
    REQUIRE(recs.size() == 24);
    CHECK(recs.front().zone == "nsw");
    CHECK(recs.front().timestamp == parse_timestamp("2023-06-01T00:00:00Z"));
    CHECK(recs.back().timestamp == parse_timestamp("2023-06-01T23:00:00Z"));

    const auto& h0 = recs.front();
    CHECK(h0.generation[static_cast<std::size_t>(Source::Coal)] == 600.0);
    CHECK(h0.generation[static_cast<std::size_t>(Source::Gas)] == 200.0);
    CHECK(h0.generation[static_cast<std::size_t>(Source::Import)] == 20.0);
    CHECK(h0.total_generation() == 1115.0);
    REQUIRE(h0.reported_ci.has_value());
    CHECK(*h0.reported_ci == doctest::Approx(546.9955156950673).epsilon(1e-15));

    for (std::size_t i = 1; i < recs.size(); ++i) {
        CHECK(recs[i].timestamp == recs[i - 1].timestamp + 3600);
    }
}

TEST_CASE("generation loader sorts by zone then time") {
    h2test::TempDir dir;
    const std::string path = write_temp(
        dir, "g.csv",
        gen_csv({"2023-06-01T01:00:00Z,b,1,0,0,0,0,0,0,0,0,0,",
                 "2023-06-01T00:00:00Z,b,2,0,0,0,0,0,0,0,0,0,",
                 "2023-06-01T00:00:00Z,a,3,0,0,0,0,0,0,0,0,0,"}));
    const auto recs = load_generation_series(path);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].zone == "a");
    CHECK(recs[1].zone == "b");
    CHECK(recs[1].generation[0] == 2.0);
    CHECK(recs[2].generation[0] == 1.0);
    // Empty trailing field means no reported CI.
    CHECK_FALSE(recs[0].reported_ci.has_value());
}

TEST_CASE("generation loader rejects malformed input by line") {
    h2test::TempDir dir;

    CHECK_THROWS_MSG(load_generation_series(write_temp(dir, "empty.csv", "")), IngestError,
                     "is empty");
    CHECK_THROWS_MSG(load_generation_series(write_temp(dir, "hdr.csv", "time,zone,coal\n")),
                     ParseError, "unexpected header; canonical generation layout is");
    CHECK_THROWS_MSG(load_generation_series(write_temp(
                         dir, "short.csv", gen_csv({"2023-06-01T00:00:00Z,nsw,1,2,3"}))),
                     ParseError, "line 2: expected 13 fields, got 5");
    CHECK_THROWS_MSG(
        load_generation_series(write_temp(
            dir, "neg.csv", gen_csv({"2023-06-01T00:00:00Z,nsw,1,0,0,0,-4,0,0,0,0,0,"}))),
        ParseError, "negative generation -4 for source 'solar'");
    CHECK_THROWS_MSG(load_generation_series(write_temp(
                         dir, "dup.csv",
                         gen_csv({"2023-06-01T00:00:00Z,nsw,1,0,0,0,0,0,0,0,0,0,",
                                  "2023-06-01T00:00:00Z,nsw,2,0,0,0,0,0,0,0,0,0,"}))),
                     ParseError, "duplicate record for zone 'nsw' at 2023-06-01T00:00:00Z");
    CHECK_THROWS_MSG(load_generation_series(write_temp(
                         dir, "mid.csv", gen_csv({"2023-06-01T00:30:00Z,nsw,1,0,0,0,0,0,0,0,0,0,"}))),
                     ParseError, "not aligned to the hour");
    CHECK_THROWS_MSG(load_generation_series(write_temp(
                         dir, "ts.csv", gen_csv({"yesterday,nsw,1,0,0,0,0,0,0,0,0,0,"}))),
                     ParseError, "invalid timestamp 'yesterday'");
}

TEST_CASE("canonical price fixture loads and accepts negative prices") {
    const auto recs = load_price_series(h2test::fixture_path("prices_24h.csv"));
    REQUIRE(recs.size() == 24);
    CHECK(recs[0].price_aud_per_mwh == 82.0);
    CHECK(recs[10].price_aud_per_mwh == -5.0);
    CHECK(recs[11].price_aud_per_mwh == -20.0);
    CHECK(recs[19].price_aud_per_mwh == 390.0);
}

TEST_CASE("price gaps beyond the limit are errors") {
    h2test::TempDir dir;
    const std::string text = "timestamp,zone,price_aud_per_mwh\n"
                             "2023-06-01T00:00:00Z,nsw,50\n"
                             "2023-06-01T03:00:00Z,nsw,60\n";
    const std::string path = write_temp(dir, "p.csv", text);
    CHECK_THROWS_MSG(load_price_series(path), IngestError,
                     "price series gap of 180 minutes between 2023-06-01T00:00:00Z and "
                     "2023-06-01T03:00:00Z in zone 'nsw' exceeds max gap 60 minutes");
    // A wider allowance accepts the same series.
    CHECK(load_price_series(path, 180).size() == 2);
    // Gaps across zones do not count.
    const std::string two_zones = "timestamp,zone,price_aud_per_mwh\n"
                                  "2023-06-01T00:00:00Z,a,50\n"
                                  "2023-06-05T00:00:00Z,b,60\n";
    CHECK(load_price_series(write_temp(dir, "z.csv", two_zones)).size() == 2);
}

TEST_CASE("adapter config parses the provider mapping") {
    const AdapterConfig cfg = AdapterConfig::load(h2test::fixture_path("aemo_adapter.cfg"));
    CHECK(cfg.timestamp_column == "SETTLEMENTDATE");
    CHECK(cfg.zone_column == "REGIONID");
    CHECK(cfg.megawatts);
    CHECK(cfg.interval_minutes == 60);
    CHECK(cfg.source_columns.at("coal") == "Black Coal (MW)");
    CHECK(cfg.source_columns.at("hydro") == "Hydro (MW)");
    CHECK(cfg.source_columns.count("oil") == 0);
}

TEST_CASE("adapter config rejects bad keys and values") {
    CHECK_THROWS_MSG(AdapterConfig::parse("zone = x\nunit = amps\n"), ParseError,
                     "unit must be 'mw' or 'mwh'");
    CHECK_THROWS_MSG(AdapterConfig::parse("zone = x\ninterval-minutes = 15\n"), ParseError,
                     "interval-minutes must be 5, 30 or 60");
    CHECK_THROWS_MSG(AdapterConfig::parse("zone = x\naggregate = median\n"), ParseError,
                     "only 'mean' aggregation is supported");
    CHECK_THROWS_MSG(AdapterConfig::parse("zone = x\ncolumn.plutonium = P\n"), ParseError,
                     "unknown canonical source 'plutonium'");
    CHECK_THROWS_MSG(AdapterConfig::parse("zone = x\nwhatever = 1\n"), ParseError,
                     "unknown adapter key 'whatever'");
    CHECK_THROWS_MSG(AdapterConfig::parse("unit = mw\n"), Error,
                     "adapter config needs either zone-column or zone");
}

TEST_CASE("provider generation export maps onto canonical sources") {
    const AdapterConfig cfg = AdapterConfig::load(h2test::fixture_path("aemo_adapter.cfg"));
    const auto recs =
        load_generation_series(h2test::fixture_path("aemo_gen_hourly_mw.csv"), cfg);
    REQUIRE(recs.size() == 6);
    CHECK(recs[0].zone == "NSW1");
    CHECK(recs[0].timestamp == parse_timestamp("2023-06-01T00:00:00Z"));

    // 5400 MW held for a full hour is 5400 MWh.
    CHECK(recs[0].generation[static_cast<std::size_t>(Source::Coal)] == 5400.0);
    CHECK(recs[0].generation[static_cast<std::size_t>(Source::Gas)] == 900.0);
    CHECK(recs[5].generation[static_cast<std::size_t>(Source::Solar)] == 300.0);
    // Unmapped canonical sources read as zero.
    CHECK(recs[0].generation[static_cast<std::size_t>(Source::Oil)] == 0.0);
    CHECK(recs[0].generation[static_cast<std::size_t>(Source::Import)] == 0.0);
    CHECK_FALSE(recs[0].reported_ci.has_value());
}

TEST_CASE("sub-hourly megawatt readings accumulate into the hour") {
    h2test::TempDir dir;
    const std::string text = "T,Z,P\n"
                             "2023-06-01 00:00:00,q,100\n"
                             "2023-06-01 00:30:00,q,200\n"
                             "2023-06-01 01:00:00,q,300\n";
    const std::string path = write_temp(dir, "mw.csv", text);
    AdapterConfig cfg;
    cfg.timestamp_column = "T";
    cfg.zone_column = "Z";
    cfg.megawatts = true;
    cfg.interval_minutes = 30;
    cfg.source_columns["coal"] = "P";

    const auto recs = load_generation_series(path, cfg);
    REQUIRE(recs.size() == 2);
    // 100 MW and 200 MW half-hours make 150 MWh.
    CHECK(recs[0].generation[0] == 150.0);
    CHECK(recs[1].generation[0] == 150.0);
}

TEST_CASE("provider loader flags missing columns and duplicate readings") {
    h2test::TempDir dir;
    AdapterConfig cfg;
    cfg.timestamp_column = "T";
    cfg.fixed_zone = "q";
    cfg.source_columns["coal"] = "C";

    CHECK_THROWS_MSG(
        load_generation_series(write_temp(dir, "m.csv", "T,X\n2023-06-01T00:00:00Z,5\n"), cfg),
        IngestError, "provider file lacks column 'C'");
    CHECK_THROWS_MSG(load_generation_series(write_temp(dir, "d.csv",
                                                       "T,C\n"
                                                       "2023-06-01T00:00:00Z,5\n"
                                                       "2023-06-01T00:00:00Z,6\n"),
                                            cfg),
                     ParseError, "duplicate record for zone 'q' at 2023-06-01T00:00:00Z");
    CHECK_THROWS_MSG(
        load_generation_series(write_temp(dir, "n.csv", "T,C\n2023-06-01T00:00:00Z,-1\n"), cfg),
        ParseError, "negative generation -1 for source 'coal'");
}

TEST_CASE("half-hourly provider prices average onto the hour") {
    const AdapterConfig cfg = AdapterConfig::load(h2test::fixture_path("aemo_price_adapter.cfg"));
    const auto recs = load_price_series(h2test::fixture_path("aemo_prices_30min.csv"), cfg);
    REQUIRE(recs.size() == 6);
    CHECK(recs[0].zone == "NSW1");
    CHECK(recs[0].price_aud_per_mwh == 82.0); // (84 + 80) / 2
    CHECK(recs[1].price_aud_per_mwh == 78.0);
    CHECK(recs[5].price_aud_per_mwh == 72.0);

    // Those means line up with the canonical fixture's first six hours.
    const auto canon = load_price_series(h2test::fixture_path("prices_24h.csv"));
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i].timestamp == canon[i].timestamp);
        CHECK(recs[i].price_aud_per_mwh == canon[i].price_aud_per_mwh);
    }
}

TEST_CASE("price adapter requires a price column and contiguous samples") {
    h2test::TempDir dir;
    AdapterConfig cfg;
    cfg.timestamp_column = "T";
    cfg.fixed_zone = "q";
    CHECK_THROWS_MSG(load_price_series(dir.file("missing.csv"), cfg), Error,
                     "price adapter config needs price-column");

    cfg.price_column = "RRP";
    cfg.max_gap_minutes = 30;
    const std::string gapped = "T,RRP\n"
                               "2023-06-01T00:00:00Z,50\n"
                               "2023-06-01T01:30:00Z,60\n";
    CHECK_THROWS_MSG(load_price_series(write_temp(dir, "gap.csv", gapped), cfg), IngestError,
                     "price series gap of 90 minutes");
}

TEST_CASE("align joins the hour intersection and counts the rest") {
    const auto grid = load_generation_series(h2test::fixture_path("generation_24h.csv"));
    const auto price = load_price_series(h2test::fixture_path("prices_24h.csv"));

    const AlignedSeries s = align_series(grid, price, "nsw");
    CHECK(s.zone == "nsw");
    REQUIRE(s.records.size() == 24);
    CHECK(s.coverage.matched == 24);
    CHECK(s.coverage.grid_only == 0);
    CHECK(s.coverage.price_only == 0);
    CHECK(s.records[0].price_aud_per_mwh == 82.0);
    CHECK(s.records[0].generation[0] == 600.0);
    for (std::size_t i = 1; i < s.records.size(); ++i) {
        CHECK(s.records[i].timestamp > s.records[i - 1].timestamp);
    }
}

TEST_CASE("align reports one-sided hours and rejects empty joins") {
    const auto grid = load_generation_series(h2test::fixture_path("generation_24h.csv"));
    auto price = load_price_series(h2test::fixture_path("prices_24h.csv"));
    price.resize(20); // drop the last four hours
    price.push_back({parse_timestamp("2023-06-02T07:00:00Z"), "nsw", 100.0});

    const AlignedSeries s = align_series(grid, price, "nsw");
    CHECK(s.coverage.matched == 20);
    CHECK(s.coverage.grid_only == 4);
    CHECK(s.coverage.price_only == 1);

    CHECK_THROWS_MSG(align_series(grid, price, "vic"), IngestError,
                     "no generation records for zone 'vic'");
    std::vector<HourlyPriceRecord> other = {{parse_timestamp("2024-01-01T00:00:00Z"), "nsw", 5.0}};
    CHECK_THROWS_MSG(align_series(grid, other, "nsw"), IngestError,
                     "generation and price series share no hours for zone 'nsw'");
    std::vector<HourlyGridRecord> none;
    CHECK_THROWS_MSG(align_series(none, price, "nsw"), IngestError,
                     "no generation records for zone 'nsw'");
    std::vector<HourlyPriceRecord> no_price;
    CHECK_THROWS_MSG(align_series(grid, no_price, "nsw"), IngestError,
                     "no price records for zone 'nsw'");
}

TEST_CASE("zones list in first-appearance order") {
    std::vector<HourlyGridRecord> grid(3);
    grid[0].zone = "vic";
    grid[1].zone = "nsw";
    grid[2].zone = "vic";
    CHECK(zones_of(grid) == std::vector<std::string>{"vic", "nsw"});
}

TEST_CASE("zone aggregation sums generation and weights price by it") {
    const std::int64_t t0 = parse_timestamp("2023-06-01T00:00:00Z");
    std::vector<HourlyGridRecord> grid(2);
    grid[0].timestamp = t0;
    grid[0].zone = "a";
    grid[0].generation[0] = 6.0;
    grid[0].generation[4] = 4.0;
    grid[0].reported_ci = 500.0;
    grid[1].timestamp = t0;
    grid[1].zone = "b";
    grid[1].generation[0] = 30.0;
    std::vector<HourlyPriceRecord> price = {{t0, "a", 100.0}, {t0, "b", 50.0}};

    aggregate_zones(grid, price);
    REQUIRE(grid.size() == 1);
    REQUIRE(price.size() == 1);
    CHECK(grid[0].zone == "all");
    CHECK(grid[0].generation[0] == 36.0);
    CHECK(grid[0].generation[4] == 4.0);
    // Reported CI is a zone-level statement; the synthetic zone has none.
    CHECK_FALSE(grid[0].reported_ci.has_value());
    // (100*10 + 50*30) / 40
    CHECK(price[0].zone == "all");
    CHECK(price[0].price_aud_per_mwh == 62.5);
}

TEST_CASE("zone aggregation falls back to a plain mean without generation weights") {
    const std::int64_t t0 = parse_timestamp("2023-06-01T00:00:00Z");
    const std::int64_t t1 = t0 + 3600;
    std::vector<HourlyGridRecord> grid(1);
    grid[0].timestamp = t0;
    grid[0].zone = "a";
    grid[0].generation[0] = 1.0;
    // Prices exist for an hour with no generation records at all.
    std::vector<HourlyPriceRecord> price = {{t1, "a", 30.0}, {t1, "b", 50.0}};

    aggregate_zones(grid, price);
    REQUIRE(price.size() == 1);
    CHECK(price[0].timestamp == t1);
    CHECK(price[0].price_aud_per_mwh == 40.0);
}

TEST_CASE("reconstructed carbon intensity matches the self-consistent fixture") {
    const auto recs = load_generation_series(h2test::fixture_path("generation_24h.csv"));
    const EmissionFactorTable ef = h2test::reference_ef();

    // Hour 0 by hand: (600*820 + 200*490 + 20*650 + 30*230) / 1115.
    CHECK(reconstruct_ci(recs[0], ef) == 609900.0 / 1115.0);
    for (const auto& r : recs) {
        REQUIRE(r.reported_ci.has_value());
        CHECK(reconstruct_ci(r, ef) == *r.reported_ci);
    }

    HourlyGridRecord dark;
    dark.timestamp = parse_timestamp("2023-06-01T00:00:00Z");
    CHECK_THROWS_MSG(reconstruct_ci(dark, ef), IngestError,
                     "zero total generation at 2023-06-01T00:00:00Z: carbon intensity is "
                     "undefined");
}

TEST_CASE("CI validation finds zero deviation on exact data") {
    const auto recs = load_generation_series(h2test::fixture_path("generation_24h.csv"));
    const CiValidationReport rep = validate_reported_ci(recs, h2test::reference_ef());
    CHECK(rep.rows.size() == 24);
    CHECK(rep.max_deviation == 0.0);
    CHECK(rep.mean_deviation == 0.0);
    CHECK(rep.flagged == 0);
    CHECK(rep.tolerance == 2.0);
}

TEST_CASE("CI validation bounds rounding noise without flagging it") {
    const auto recs = load_generation_series(h2test::fixture_path("generation_24h_rounded.csv"));
    const CiValidationReport rep = validate_reported_ci(recs, h2test::reference_ef());
    CHECK(rep.rows.size() == 24);
    CHECK(rep.max_deviation <= 0.5);
    CHECK(rep.max_deviation > 0.0);
    CHECK(rep.mean_deviation <= 0.25);
    CHECK(rep.flagged == 0);

    // A tolerance below the rounding magnitude starts flagging hours.
    const CiValidationReport strict = validate_reported_ci(recs, h2test::reference_ef(), 0.3);
    CHECK(strict.flagged > 0);
    std::size_t marked = 0;
    for (const auto& d : strict.rows) {
        if (d.flagged) {
            ++marked;
            CHECK(d.deviation > 0.3);
        }
    }
    CHECK(marked == strict.flagged);
}

TEST_CASE("CI validation skips hours without a reported value") {
    h2test::TempDir dir;
    const std::string path = write_temp(
        dir, "g.csv",
        gen_csv({"2023-06-01T00:00:00Z,nsw,10,0,0,0,0,0,0,0,0,0,820",
                 "2023-06-01T01:00:00Z,nsw,10,0,0,0,0,0,0,0,0,0,"}));
    const auto rep = validate_reported_ci(load_generation_series(path), h2test::reference_ef());
    CHECK(rep.rows.size() == 1);
    CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("CI report CSV lists one row per reported hour") {
    const auto recs = load_generation_series(h2test::fixture_path("generation_24h_rounded.csv"));
    const auto rep = validate_reported_ci(recs, h2test::reference_ef(), 0.3);
    const auto lines = split_lines(ci_report_to_csv(rep));
    CHECK(lines[0] == "timestamp,reported_ci,reconstructed_ci,deviation,flagged");
    std::size_t data = 0, flagged = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++data;
        const auto f = split(lines[i], ',');
        REQUIRE(f.size() == 5);
        if (f[4] == "1") ++flagged;
    }
    CHECK(data == 24);
    CHECK(flagged == rep.flagged);
    CHECK(lines[1].rfind("2023-06-01T00:00:00Z,547,", 0) == 0);
}
