// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if
// any fail. Tolerances are pinned here, next to the checks that use them.

#include <h2lca/data_ingest.hpp>
#include <h2lca/econ.hpp>
#include <h2lca/errors.hpp>
#include <h2lca/esn.hpp>
#include <h2lca/incidence.hpp>
#include <h2lca/scenario.hpp>
#include <h2lca/system_model.hpp>
#include <h2lca/textio.hpp>
#include <h2lca/timeutil.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace h2lca;

namespace {

constexpr double kRouteTolerance = 1e-9;    // solver route vs forward route, max-abs
constexpr double kCentTolerance = 0.005;    // "to the cent" cost anchors
constexpr double kRoundedCiMax = 0.5;       // integer-rounded reported CI, g/kWh
constexpr double kRoundedCiMean = 0.25;
constexpr double kYearBudgetSeconds = 1.0;
constexpr double kNetsBudgetSeconds = 10.0;

std::string fixture(const std::string& name) {
    return std::string(H2LCA_FIXTURE_DIR) + "/" + name;
}

SystemModel reference_model() {
    return parse_system_model(read_file(fixture("australia_h2.model")));
}

std::array<double, kNumSources> single_source(Source s, double mwh) {
    std::array<double, kNumSources> g{};
    g[static_cast<std::size_t>(s)] = mwh;
    return g;
}

AlignedSeries constant_series(int hours, Source src, double mwh, double price) {
    AlignedSeries s;
    s.zone = "synthetic";
    const std::int64_t t0 = parse_timestamp("2023-01-01T00:00:00Z");
    for (int h = 0; h < hours; ++h) {
        AlignedRecord r;
        r.timestamp = t0 + 3600 * static_cast<std::int64_t>(h);
        r.generation = single_source(src, mwh);
        r.price_aud_per_mwh = price;
        s.records.push_back(r);
    }
    s.coverage.matched = s.records.size();
    return s;
}

AlignedSeries fixture_day() {
    return align_series(load_generation_series(fixture("generation_24h.csv")),
                        load_price_series(fixture("prices_24h.csv")), "nsw");
}

double elapsed_s(std::chrono::steady_clock::time_point from) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

// 1. A constant 20 kg/h year lands on exact integer totals, fast.
bool year_of_production(std::string& detail) {
    const EmissionsModel emissions(reference_model());
    const EconParams econ;
    const ScenarioConfig cfg = *ScenarioConfig::builtin("baseline");
    const AlignedSeries year = constant_series(8760, Source::Wind, 500.0, 50.0);

    const auto start = std::chrono::steady_clock::now();
    const auto dispatch = run_scenario(year, cfg, econ, emissions);
    const double total = total_h2_kg(dispatch);
    const auto months = aggregate_monthly(dispatch, year.zone);
    const double seconds = elapsed_s(start);

    if (total != 175200.0) {
        detail = "total " + fmt_double(total) + " kg, wanted exactly 175200";
        return false;
    }
    if (months.size() != 12) {
        detail = "got " + std::to_string(months.size()) + " months";
        return false;
    }
    const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    for (int m = 0; m < 12; ++m) {
        const double want = days[m] * 480.0; // 24 h * 20 kg
        if (months[m].h2_kg != want) {
            detail = "month " + std::to_string(m + 1) + ": " + fmt_double(months[m].h2_kg) +
                     " kg, wanted exactly " + fmt_double(want);
            return false;
        }
    }
    if (months[1].h2_kg != 13440.0 || months[0].h2_kg != 14880.0) {
        detail = "February or January total off the integer grid";
        return false;
    }
    if (seconds >= kYearBudgetSeconds) {
        detail = "took " + fmt_double(seconds) + " s, budget " + fmt_double(kYearBudgetSeconds);
        return false;
    }
    return true;
}

// 2. Steady-state solve agrees with a plain forward step on 500 random
// small nets, checked through hand-rolled loops rather than the solver's
// own algebra.
bool random_net_routes(std::string& detail) {
    std::mt19937 rng(2024u);
    std::uniform_int_distribution<int> trans_dist(1, 6);
    std::uniform_int_distribution<int> extra_dist(1, 2);
    std::uniform_int_distribution<int> entry_dist(-3, 3);
    std::uniform_int_distribution<int> demand_dist(-5, 5);

    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    int built = 0, attempts = 0;
    while (built < 500) {
        if (++attempts > 5000) {
            detail = "could not find 500 well-conditioned nets";
            return false;
        }
        const int t = trans_dist(rng);
        const int extra = std::min<int>(extra_dist(rng), 8 - t); // places = t + extra <= 8
        PartitionedMatrix p;
        p.a = Eigen::MatrixXd(t, t);
        for (int i = 0; i < t; ++i) {
            double off = 0.0;
            for (int j = 0; j < t; ++j) {
                if (i == j) continue;
                p.a(i, j) = entry_dist(rng);
                off += std::abs(p.a(i, j));
            }
            p.a(i, i) = off + 1 + std::abs(entry_dist(rng)); // diagonally dominant
        }
        p.b = Eigen::MatrixXd(std::max(extra, 1), t);
        for (int i = 0; i < p.b.rows(); ++i)
            for (int j = 0; j < t; ++j) p.b(i, j) = entry_dist(rng);
        for (int j = 0; j < t; ++j) p.cols.push_back("t" + std::to_string(j));
        for (int i = 0; i < t; ++i) p.a_rows.push_back({"y" + std::to_string(i), "b"});
        for (int i = 0; i < p.b.rows(); ++i) p.b_rows.push_back({"e" + std::to_string(i), "b"});

        const SteadyStateSolver solver(p);
        if (solver.condition_estimate() >= 1e6) continue;

        Eigen::VectorXd dy(t);
        for (int j = 0; j < t; ++j) dy(j) = demand_dist(rng);
        const LcaResult res = solver.solve(dy);

        // Forward route: one unit-time step q' = M+ x - M- x with the
        // stacked [A; B] split by sign, accumulated element by element.
        for (int i = 0; i < t + p.b.rows(); ++i) {
            double plus = 0.0, minus = 0.0;
            for (int j = 0; j < t; ++j) {
                const double v = i < t ? p.a(i, j) : p.b(i - t, j);
                if (v > 0.0) plus += v * res.firing(j);
                else minus += -v * res.firing(j);
            }
            const double target = i < t ? dy(i) : res.delta_e(i - t);
            worst = std::max(worst, std::abs((plus - minus) - target));
        }
        ++built;
    }
    const double seconds = elapsed_s(start);
    if (worst > kRouteTolerance) {
        detail = "max deviation " + fmt_double(worst);
        return false;
    }
    if (seconds >= kNetsBudgetSeconds) {
        detail = "took " + fmt_double(seconds) + " s, budget " + fmt_double(kNetsBudgetSeconds);
        return false;
    }
    detail = "max deviation " + fmt_double(worst) + " over 500 nets";
    return true;
}

// 3. Instantaneous firing is the stepped update with u- = u+, bit for bit,
// and balanced stepped schedules conserve the in-flight tokens exactly.
bool firing_mode_identity(std::string& detail) {
    const EngineeringSystemNet net(reference_model());
    const Eigen::Index t = net.transitions();
    std::mt19937 rng(7u);
    std::uniform_int_distribution<int> u_dist(0, 5);

    for (int trial = 0; trial < 100; ++trial) {
        FiringSchedule inst;
        inst.dt = trial % 2 == 0 ? 1.0 : 0.3;
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd u(t);
            for (Eigen::Index j = 0; j < t; ++j) u(j) = u_dist(rng);
            inst.u_plus.push_back(u);
        }
        FiringSchedule stepped = inst;
        stepped.u_minus = stepped.u_plus;

        const auto a = simulate(net, net.zero_marking(), inst, FiringMode::Instantaneous);
        const auto b = simulate(net, net.zero_marking(), stepped, FiringMode::Stepped);
        for (std::size_t k = 0; k < a.size(); ++k) {
            for (Eigen::Index i = 0; i < net.places(); ++i) {
                if (a[k].q_b(i) != b[k].q_b(i)) {
                    detail = "trial " + std::to_string(trial) + " step " + std::to_string(k) +
                             " diverges at " + net.place_label(i);
                    return false;
                }
            }
            if (!a[k].q_e.isZero(0.0) || !b[k].q_e.isZero(0.0)) {
                detail = "in-flight tokens moved under equal u- and u+";
                return false;
            }
        }
    }

    for (int trial = 0; trial < 100; ++trial) {
        FiringSchedule sched;
        sched.dt = 1.0;
        for (int k = 0; k < 6; ++k) {
            Eigen::VectorXd u(t);
            for (Eigen::Index j = 0; j < t; ++j) u(j) = u_dist(rng);
            sched.u_plus.push_back(u);
        }
        sched.u_minus = sched.u_plus;
        std::shuffle(sched.u_minus.begin(), sched.u_minus.end(), rng);

        const auto traj = simulate(net, net.zero_marking(), sched, FiringMode::Stepped);
        if (!traj.back().q_e.isZero(0.0)) {
            detail = "balanced schedule left in-flight tokens, trial " + std::to_string(trial);
            return false;
        }
    }
    return true;
}

// 4. Reported carbon intensity: the exact fixture deviates by exactly
// zero; the integer-rounded fixture stays inside the rounding band.
bool ci_validation_bands(std::string& detail) {
    const EmissionsModel emissions(reference_model());
    const EmissionFactorTable ef = emissions.derived_ef();

    const auto exact = load_generation_series(fixture("generation_24h.csv"));
    const CiValidationReport clean = validate_reported_ci(exact, ef);
    if (clean.max_deviation != 0.0 || clean.flagged != 0) {
        detail = "self-consistent fixture: max " + fmt_double(clean.max_deviation) + ", " +
                 std::to_string(clean.flagged) + " flagged";
        return false;
    }

    const auto rounded = load_generation_series(fixture("generation_24h_rounded.csv"));
    const CiValidationReport rep = validate_reported_ci(rounded, ef);
    if (rep.max_deviation > kRoundedCiMax || rep.mean_deviation > kRoundedCiMean) {
        detail = "rounded fixture: max " + fmt_double(rep.max_deviation) + ", mean " +
                 fmt_double(rep.mean_deviation);
        return false;
    }
    detail = "rounded fixture: max " + fmt_double(rep.max_deviation) + ", mean " +
             fmt_double(rep.mean_deviation);
    return true;
}

// 5. Rule anchors: the green table at its corners, the credit cap at and
// just past the threshold.
bool rule_anchors(std::string& detail) {
    const ScenarioConfig green = *ScenarioConfig::builtin("green-rule");
    const ScenarioConfig credit = *ScenarioConfig::builtin("credit-threshold");

    struct Anchor {
        const ScenarioConfig* cfg;
        double ci;
        double want;
    };
    const Anchor anchors[] = {
        {&green, 14.50, 20.0},
        {&green, 17.00, 8.0},
        {&green, 19.01, 0.0},
        {&green, 19.50, 0.0},
        {&green, 25.00, 0.0},
        {&credit, 0.60, 20.0},
        {&credit, std::nextafter(0.60, 1.0), 0.0},
        {&credit, 0.60 + 1e-9, 0.0},
    };
    for (const auto& a : anchors) {
        const double got = decide_rate(*a.cfg, a.ci);
        if (got != a.want) {
            detail = "ci_kg " + fmt_double(a.ci) + ": rate " + fmt_double(got) + ", wanted " +
                     fmt_double(a.want);
            return false;
        }
    }
    return true;
}

// 6. Cost anchors, to the cent.
bool cost_anchors(std::string& detail) {
    const EconParams econ;
    const double at60 = cost_per_kg(60.0, econ);
    const double at0 = cost_per_kg(0.0, econ);
    if (std::abs(at60 - 5.11) >= kCentTolerance) {
        detail = "cost_per_kg(60) = " + fmt_double(at60);
        return false;
    }
    if (std::abs(at0 - 1.96) >= kCentTolerance) {
        detail = "cost_per_kg(0) = " + fmt_double(at0);
        return false;
    }
    return true;
}

// 7. Stricter scenarios never produce or emit more, and a zone that never
// clears the credit cap produces exactly nothing under it.
bool scenario_dominance(std::string& detail) {
    const EmissionsModel emissions(reference_model());
    const EconParams econ;
    const AlignedSeries day = fixture_day();

    double h2[3] = {0, 0, 0}, co2[3] = {0, 0, 0};
    const char* names[3] = {"baseline", "green-rule", "credit-threshold"};
    for (int s = 0; s < 3; ++s) {
        const auto d = run_scenario(day, *ScenarioConfig::builtin(names[s]), econ, emissions);
        for (const auto& hour : d) {
            h2[s] += hour.rate_kg_h;
            co2[s] += hour.emissions_kg;
        }
    }
    if (!(h2[0] >= h2[1] && h2[1] >= h2[2])) {
        detail = "production " + fmt_double(h2[0]) + " / " + fmt_double(h2[1]) + " / " +
                 fmt_double(h2[2]);
        return false;
    }
    if (!(co2[0] >= co2[1] && co2[1] >= co2[2])) {
        detail = "emissions " + fmt_double(co2[0]) + " / " + fmt_double(co2[1]) + " / " +
                 fmt_double(co2[2]);
        return false;
    }

    // Coal-only grid: 43.05 kg/kg never clears the 0.6 cap.
    const AlignedSeries dirty = constant_series(24, Source::Coal, 600.0, 40.0);
    const auto d = run_scenario(dirty, *ScenarioConfig::builtin("credit-threshold"), econ,
                                emissions);
    double kg = 0.0, em = 0.0;
    for (const auto& hour : d) {
        kg += hour.rate_kg_h;
        em += hour.emissions_kg;
    }
    if (kg != 0.0 || em != 0.0 || op_cost_total(d, econ) != 0.0) {
        detail = "dirty zone produced " + fmt_double(kg) + " kg, " + fmt_double(em) + " kg CO2";
        return false;
    }
    return true;
}

// 8. The fixture's matrix carries the emission factors and electrolyzer
// stoichiometry in the right cells.
bool matrix_cells(std::string& detail) {
    const IncidenceMatrix red = eliminate_zero_rows(build_incidence_matrix(reference_model()));
    const int co2 = red.row_index("co2-emissions", "substation");
    if (co2 < 0) {
        detail = "no CO2 row";
        return false;
    }
    const std::pair<const char*, double> factors[] = {
        {"coal-pp-gen", 820.0}, {"ng-pp-gen", 490.0},  {"oil-pp-gen", 650.0},
        {"bio-pp-gen", 230.0},  {"solar-pp-gen", 0.0}, {"geo-pp-gen", 0.0},
        {"wind-pp-gen", 0.0},   {"hydro-pp-gen", 0.0},
    };
    for (const auto& [cap, want] : factors) {
        const int col = red.col_index(cap);
        if (col < 0 || red.values(co2, col) != want) {
            detail = std::string(cap) + ": " +
                     (col < 0 ? "missing" : fmt_double(red.values(co2, col))) + ", wanted " +
                     fmt_double(want);
            return false;
        }
    }
    const int elz = red.col_index("elz");
    const int elec = red.row_index("electricity", "substation");
    const int h2 = red.row_index("hydrogen", "electrolyzer");
    const int oxy = red.row_index("oxygen", "electrolyzer");
    if (elz < 0 || elec < 0 || h2 < 0 || oxy < 0) {
        detail = "electrolyzer rows or column missing";
        return false;
    }
    if (red.values(elec, elz) != -52.5 || red.values(h2, elz) != 1.0 ||
        red.values(oxy, elz) != 8.0) {
        detail = "elz column " + fmt_double(red.values(elec, elz)) + " / " +
                 fmt_double(red.values(h2, elz)) + " / " + fmt_double(red.values(oxy, elz));
        return false;
    }
    return true;
}

// 9. The CLI writes byte-identical outputs on repeated runs.
bool cli_determinism(std::string& detail) {
    const char* cli = std::getenv("H2LCA_CLI");
    if (!cli || !*cli) {
        detail = "H2LCA_CLI not set";
        return false;
    }
    char tmpl_a[] = "/tmp/h2lca_accept_a_XXXXXX";
    char tmpl_b[] = "/tmp/h2lca_accept_b_XXXXXX";
    if (!mkdtemp(tmpl_a) || !mkdtemp(tmpl_b)) {
        detail = "mkdtemp failed";
        return false;
    }
    const std::string dirs[2] = {tmpl_a, tmpl_b};
    bool ok = true;
    for (const auto& dir : dirs) {
        const std::string cmd = std::string("'") + cli + "' run --model '" +
                                fixture("australia_h2.model") + "' --generation '" +
                                fixture("generation_24h.csv") + "' --prices '" +
                                fixture("prices_24h.csv") + "' --scenario green-rule --econ '" +
                                fixture("econ_default.cfg") + "' --out-dir '" + dir +
                                "' > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            detail = "run failed in " + dir;
            ok = false;
            break;
        }
    }
    if (ok) {
        for (const char* name :
             {"dispatch.csv", "monthly.csv", "ci_histogram.csv", "price_histogram.csv"}) {
            const std::string a = read_file(dirs[0] + "/" + name);
            const std::string b = read_file(dirs[1] + "/" + name);
            if (a != b) {
                detail = std::string(name) + " differs between runs";
                ok = false;
                break;
            }
            if (a.empty()) {
                detail = std::string(name) + " is empty";
                ok = false;
                break;
            }
        }
    }
    for (const auto& dir : dirs) {
        const int rc = std::system(("rm -rf '" + dir + "'").c_str());
        (void)rc; // best effort
    }
    return ok;
}

} // namespace

int main() {
    struct Criterion {
        const char* label;
        std::function<bool(std::string&)> check;
    };
    const Criterion criteria[] = {
        {"full-year production totals are exact integers", year_of_production},
        {"solver and forward routes agree on 500 random nets", random_net_routes},
        {"instantaneous firing equals composed stepped firing", firing_mode_identity},
        {"reported carbon intensity sits inside the rounding band", ci_validation_bands},
        {"production rules hit their anchor rates", rule_anchors},
        {"cost model hits its anchors to the cent", cost_anchors},
        {"stricter scenarios never produce or emit more", scenario_dominance},
        {"fixture matrix carries factors and stoichiometry", matrix_cells},
        {"repeated CLI runs are byte-identical", cli_determinism},
    };

    int failures = 0;
    int id = 0;
    for (const auto& c : criteria) {
        ++id;
        bool ok = false;
        std::string detail;
        try {
            ok = c.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, c.label,
                    detail.empty() ? "" : " - ", detail.c_str());
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
