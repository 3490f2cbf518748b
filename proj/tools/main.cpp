// Command-line front end: revenue-gap tables, extremal instance builders,
// analytic revenue evaluation, Monte Carlo simulation, and the verification
// suite.  Every subcommand emits JSON by default; --format csv switches to a
// flat csv layout.  Exit status is 0 iff the requested computation's checks
// all pass.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revgap/bernoulli.hpp"
#include "revgap/cdf.hpp"
#include "revgap/gap.hpp"
#include "revgap/instances.hpp"
#include "revgap/json_io.hpp"
#include "revgap/order_stats.hpp"
#include "revgap/revenue.hpp"
#include "revgap/simulate.hpp"
#include "revgap/verify.hpp"

namespace {

using nlohmann::json;

// Shortest decimal string that round-trips a double exactly.
std::string dts(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string scalar_to_csv(const json& v) {
    if (v.is_string()) return csv_quote(v.get<std::string>());
    if (v.is_number_float()) return dts(v.get<double>());
    return csv_quote(v.dump());
}

// Emits a flat object as a two-line csv, or an array of flat objects as a
// header plus one row each.  Nested values are embedded as quoted JSON.
void emit(const json& payload, const std::string& format) {
    if (format != "csv") {
        std::cout << payload.dump(2) << '\n';
        return;
    }
    const json rows = payload.is_array() ? payload : json::array({payload});
    if (rows.empty()) return;
    bool first = true;
    for (auto it = rows.front().begin(); it != rows.front().end(); ++it) {
        std::cout << (first ? "" : ",") << it.key();
        first = false;
    }
    std::cout << '\n';
    for (const auto& row : rows) {
        first = true;
        for (auto it = row.begin(); it != row.end(); ++it) {
            std::cout << (first ? "" : ",") << scalar_to_csv(it.value());
            first = false;
        }
        std::cout << '\n';
    }
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-unit auction revenue toolkit: gap tables, extremal instances, "
                 "analytic revenue, simulation, verification"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand name
    app.set_config("--config", "", "Read defaults from an ini/toml key-value file");

    std::uint64_t seed = 2026;
    double tol = 1e-8;
    int threads = 0;
    std::string format = "json";
    app.add_option("--seed", seed, "Base seed for every randomized computation");
    app.add_option("--tol", tol, "Quadrature / agreement tolerance");
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    app.add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));

    int rc = 0;

    // gap-table ------------------------------------------------------------
    auto* gap_cmd = app.add_subcommand(
        "gap-table", "Reserve-over-pricing revenue gap for k = 1..k-max");
    int gt_kmax = 24;
    std::string gt_out;
    gap_cmd->add_option("--k-max", gt_kmax, "Largest unit count")->required();
    gap_cmd->add_option("--out", gt_out, "Also write the csv table to this path");
    gap_cmd->callback([&] {
        const auto tab = revgap::gap_table(gt_kmax, tol, resolve_threads(threads));
        json rows = json::array();
        std::string csv = "k,gap,c_k,lb,bounds_ok,quad_error\n";
        bool all_ok = true;
        for (const auto& r : tab) {
            rows.push_back({{"k", r.k},
                            {"gap", r.gap},
                            {"c_k", r.c_k},
                            {"lb", r.lb},
                            {"bounds_ok", r.bounds_ok},
                            {"quad_error", r.quad_error}});
            csv += std::to_string(r.k) + "," + dts(r.gap) + "," + dts(r.c_k) + "," +
                   dts(r.lb) + "," + (r.bounds_ok ? "1" : "0") + "," + dts(r.quad_error) +
                   "\n";
            all_ok = all_ok && r.bounds_ok;
        }
        if (!gt_out.empty()) {
            std::ofstream f(gt_out);
            if (!f) throw std::runtime_error("gap-table: cannot open " + gt_out);
            f << csv;
        }
        if (format == "csv")
            std::cout << csv;
        else
            emit(rows, format);
        rc = all_ok ? 0 : 1;
    });

    // ear-bound ------------------------------------------------------------
    auto* ear_cmd = app.add_subcommand(
        "ear-bound", "Closed-form ex-ante-relaxation over anonymous-pricing bound (k <= 3)");
    int eb_k = 1;
    ear_cmd->add_option("--k", eb_k, "Unit count (1, 2, or 3)")->required();
    ear_cmd->callback([&] {
        emit(json{{"k", eb_k}, {"bound", revgap::ear_ap_upper_small_k(eb_k)}}, format);
    });

    // worst-case -----------------------------------------------------------
    auto* wc_cmd = app.add_subcommand(
        "worst-case", "Solve the iid instance whose anonymous-pricing revenue is 1 everywhere");
    int wc_k = 1, wc_n = 1, wc_points = 2048;
    double wc_xmax = 0.0;
    std::string wc_out;
    wc_cmd->add_option("--k", wc_k, "Unit count")->required();
    wc_cmd->add_option("--n", wc_n, "Buyer count")->required();
    wc_cmd->add_option("--points", wc_points, "Grid points");
    wc_cmd->add_option("--x-max", wc_xmax, "Grid upper end (0 = auto)");
    wc_cmd->add_option("--out", wc_out, "Write the tabulated instance to this JSON path");
    wc_cmd->callback([&] {
        revgap::GridSpec spec;
        spec.points = wc_points;
        spec.x_max = wc_xmax;
        const auto w = revgap::build_worst_case_iid(wc_k, wc_n, spec);
        const auto inst = revgap::worst_case_instance(w);
        const auto feas = revgap::check_feasibility(inst);
        if (!wc_out.empty()) revgap::save_instance(inst, wc_out);
        emit(json{{"k", wc_k},
                  {"n", wc_n},
                  {"points", wc_points},
                  {"x_min", w.grid.front()},
                  {"x_max", w.grid.back()},
                  {"ar", revgap::ar_of_worst_case(w)},
                  {"feasible", feas.ok},
                  {"worst_p", feas.worst_p},
                  {"worst_rev", feas.worst_rev}},
             format);
        rc = feas.ok ? 0 : 1;
    });

    // lower-bound ----------------------------------------------------------
    auto* lb_cmd = app.add_subcommand(
        "lower-bound", "Triangle instance family whose reserve revenue approaches the gap");
    int lb_k = 1, lb_n = 32, lb_panel = 33;
    double lb_a = 0.0, lb_b = 0.0;
    std::string lb_out;
    lb_cmd->add_option("--k", lb_k, "Unit count")->required();
    lb_cmd->add_option("--n", lb_n, "Apex group count")->required();
    lb_cmd->add_option("--a", lb_a, "Lowest apex (default 1/k + 1/32)");
    lb_cmd->add_option("--b", lb_b, "Highest apex (default 1/k + 32)");
    lb_cmd->add_option("--panel-points", lb_panel, "Trapezoid points per apex panel");
    lb_cmd->add_option("--out", lb_out, "Write the instance to this JSON path");
    lb_cmd->callback([&] {
        const double a = lb_a > 0.0 ? lb_a : 1.0 / lb_k + 1.0 / 32.0;
        const double b = lb_b > 0.0 ? lb_b : 1.0 / lb_k + 32.0;
        const auto t = revgap::build_triangle_lower_bound(lb_k, lb_n, a, b);
        if (!lb_out.empty()) revgap::save_instance(revgap::triangle_lb_instance(t), lb_out);
        double worst_ap = 0.0;
        for (int i = 0; i < 2000; ++i)
            worst_ap = std::max(worst_ap,
                                revgap::triangle_lb_ap(t, a * std::pow(b / a, i / 1999.0)));
        const bool feasible = worst_ap <= 1.0 + 1e-6;
        emit(json{{"k", lb_k},
                  {"n", lb_n},
                  {"a", a},
                  {"b", b},
                  {"ar", revgap::triangle_lb_ar(t, lb_panel)},
                  {"max_dip", revgap::triangle_lb_max_dip(t)},
                  {"worst_ap", worst_ap},
                  {"feasible", feasible}},
             format);
        rc = feasible ? 0 : 1;
    });

    // matroid-demo ----------------------------------------------------------
    auto* md_cmd = app.add_subcommand(
        "matroid-demo", "Paired-bidder instance separating unit pricing from the "
                        "welfare-maximizing auction");
    int md_k = 1, md_m = 0;
    md_cmd->add_option("--k", md_k, "Rank (units for sale)")->required();
    md_cmd->add_option("--m", md_m, "Bidder pair count (default k)");
    md_cmd->callback([&] {
        const int m = md_m > 0 ? md_m : md_k;
        const auto r = revgap::matroid_demo(m, md_k);
        double hk = 0.0;
        for (int i = 1; i <= md_k; ++i) hk += 1.0 / i;
        emit(json{{"m", m},
                  {"k", md_k},
                  {"ap_best", r.ap_best},
                  {"vcg_rev", r.vcg_rev},
                  {"ratio", r.ratio},
                  {"bids", r.bids}},
             format);
        rc = (r.ap_best <= 1.0 && r.ratio >= hk - 1e-12) ? 0 : 1;
    });

    // revenue ----------------------------------------------------------------
    auto* rev_cmd = app.add_subcommand(
        "revenue", "Analytic revenue of one mechanism on an instance file");
    std::string rv_file, rv_mech;
    double rv_price = 0.0, rv_reserve = 0.0, rv_cutoff = 0.0;
    std::vector<double> rv_alloc;
    rev_cmd->add_option("--instance", rv_file, "Instance JSON path")->required();
    rev_cmd->add_option("--mech", rv_mech, "Mechanism")
        ->required()
        ->check(CLI::IsMember({"ap", "ar", "ear"}));
    auto* rv_price_opt =
        rev_cmd->add_option("--price", rv_price, "Posted price (ap; omit to optimize)");
    auto* rv_reserve_opt =
        rev_cmd->add_option("--reserve", rv_reserve, "Reserve price (ar; omit to optimize)");
    auto* rv_alloc_opt =
        rev_cmd->add_option("--alloc", rv_alloc, "Per-buyer sale probabilities (ear)")
            ->delimiter(',');
    auto* rv_cutoff_opt =
        rev_cmd->add_option("--cutoff", rv_cutoff,
                            "Tail cutoff for the reserve integral (required for "
                            "unbounded supports)");
    rev_cmd->callback([&] {
        // An option given alongside a mechanism it cannot affect is a mistake,
        // not a no-op; silently ignoring it would report the wrong number.
        const auto reject_unless = [&](const CLI::Option* opt, bool applies,
                                       const char* name) {
            if (!applies && opt->count() > 0) {
                throw CLI::ValidationError(std::string(name) + " does not apply to --mech " +
                                           rv_mech);
            }
        };
        reject_unless(rv_price_opt, rv_mech == "ap", "--price");
        reject_unless(rv_reserve_opt, rv_mech == "ar", "--reserve");
        reject_unless(rv_alloc_opt, rv_mech == "ear", "--alloc");
        reject_unless(rv_cutoff_opt, rv_mech == "ar", "--cutoff");
        const auto inst = revgap::load_instance(rv_file);
        json argopt, diagnostics;
        double value = 0.0;
        if (rv_mech == "ap") {
            if (rv_price_opt->count() > 0) {
                value = revgap::ap_revenue(inst, rv_price);
                argopt = rv_price;
            } else {
                const auto best = revgap::ap_optimal(inst);
                value = best.value;
                argopt = best.arg;
            }
        } else if (rv_mech == "ar") {
            std::optional<double> cutoff;
            if (rv_cutoff > 0.0) cutoff = rv_cutoff;
            if (rv_reserve_opt->count() > 0) {
                value = revgap::ar_revenue(inst, rv_reserve, cutoff, tol);
                argopt = rv_reserve;
            } else {
                const auto best = revgap::ar_optimal(inst, {}, cutoff, tol);
                value = best.value;
                argopt = best.arg;
            }
        } else {
            if (rv_alloc_opt->count() > 0) {
                value = revgap::ear_revenue(inst, revgap::Allocation{rv_alloc});
                argopt = rv_alloc;
            } else {
                const auto best = revgap::ear_optimal(inst);
                value = best.value;
                argopt = best.alloc.qprime;
            }
        }
        const auto feas = revgap::check_feasibility(inst);
        diagnostics = {{"n", inst.n()},
                       {"k", inst.k},
                       {"feasible", feas.ok},
                       {"worst_p", feas.worst_p},
                       {"worst_rev", feas.worst_rev}};
        emit(json{{"value", value}, {"argopt", argopt}, {"diagnostics", diagnostics}},
             format);
    });

    // simulate ---------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Monte Carlo revenue of one mechanism on an instance file");
    std::string sm_file, sm_mech;
    double sm_price = 0.0, sm_reserve = 0.0;
    std::vector<double> sm_prices;
    std::vector<int> sm_order;
    std::uint64_t sm_trials = 100000;
    sim_cmd->add_option("--instance", sm_file, "Instance JSON path")->required();
    sim_cmd->add_option("--mech", sm_mech, "Mechanism")
        ->required()
        ->check(CLI::IsMember({"ap", "ar", "spm"}));
    auto* sm_price_opt = sim_cmd->add_option("--price", sm_price, "Posted price (ap)");
    auto* sm_reserve_opt = sim_cmd->add_option("--reserve", sm_reserve, "Reserve price (ar)");
    auto* sm_prices_opt =
        sim_cmd->add_option("--prices", sm_prices, "Per-slot prices (spm)")->delimiter(',');
    auto* sm_order_opt =
        sim_cmd->add_option("--order", sm_order,
                            "Arrival order as a permutation of 0..n-1 (spm; default identity)")
            ->delimiter(',');
    sim_cmd->add_option("--trials", sm_trials, "Trial count");
    sim_cmd->callback([&] {
        // Simulation has no optimizer fallback, so the selected mechanism's
        // parameter must be stated; an option for a different mechanism would
        // otherwise be silently ignored and the run would price at the default.
        const auto only_for = [&](const CLI::Option* opt, bool applies, const char* name,
                                  bool required) {
            if (!applies && opt->count() > 0) {
                throw CLI::ValidationError(std::string(name) + " does not apply to --mech " +
                                           sm_mech);
            }
            if (applies && required && opt->count() == 0) {
                throw CLI::ValidationError(std::string(name) + " is required for --mech " +
                                           sm_mech);
            }
        };
        only_for(sm_price_opt, sm_mech == "ap", "--price", true);
        only_for(sm_reserve_opt, sm_mech == "ar", "--reserve", true);
        only_for(sm_prices_opt, sm_mech == "spm", "--prices", true);
        only_for(sm_order_opt, sm_mech == "spm", "--order", false);
        const auto inst = revgap::load_instance(sm_file);
        revgap::SimResult res;
        const int nthreads = resolve_threads(threads);
        if (sm_mech == "ap") {
            res = revgap::simulate_ap(inst, sm_price, sm_trials, seed, nthreads);
        } else if (sm_mech == "ar") {
            res = revgap::simulate_ar(inst, sm_reserve, sm_trials, seed, nthreads);
        } else {
            auto order = sm_order;
            if (order.empty()) {
                order.resize(inst.n());
                for (std::size_t i = 0; i < order.size(); ++i)
                    order[i] = static_cast<int>(i);
            }
            res = revgap::simulate_spm(inst, sm_prices, order, sm_trials, seed, nthreads);
        }
        emit(json{{"mech", sm_mech},
                  {"mean", res.mean},
                  {"stderr", res.std_err},
                  {"trials", res.trials},
                  {"seed", res.seed}},
             format);
    });

    // verify -------------------------------------------------------------
    auto* vf_cmd = app.add_subcommand(
        "verify", "Run the full verification suite (exit 0 iff every criterion passes)");
    std::string vf_out;
    std::uint64_t vf_mc_trials = 40000;
    vf_cmd->add_option("--out", vf_out, "Also write the JSON report to this path");
    vf_cmd->add_option("--mc-trials", vf_mc_trials, "Monte Carlo trials per simulated check");
    vf_cmd->callback([&] {
        revgap::VerifyOptions opt;
        opt.seed = seed;
        opt.threads = threads;
        opt.quad_tol = tol;
        opt.mc_trials = vf_mc_trials;
        const auto rep = revgap::run_verification_suite(opt);
        json rows = json::array();
        for (const auto& c : rep.criteria) {
            std::cerr << (c.pass ? "PASS" : "FAIL") << "  " << c.id << " " << c.name << ": "
                      << c.details << '\n';
            rows.push_back({{"id", c.id},
                            {"name", c.name},
                            {"pass", c.pass},
                            {"runtime_ms", c.runtime_ms},
                            {"details", c.details}});
        }
        const json payload = {{"criteria", rows},
                              {"all_pass", rep.all_pass},
                              {"total_runtime_ms", rep.total_runtime_ms}};
        if (!vf_out.empty()) {
            std::ofstream f(vf_out);
            if (!f) throw std::runtime_error("verify: cannot open " + vf_out);
            f << payload.dump(2) << '\n';
        }
        if (format == "csv")
            emit(rows, format);
        else
            emit(payload, format);
        int failures = 0;
        for (const auto& c : rep.criteria)
            if (!c.pass) ++failures;
        rc = failures;
    });

    // verify-bernoulli ------------------------------------------------------
    auto* vb_cmd = app.add_subcommand(
        "verify-bernoulli",
        "Randomized check of the iid averaging projection and its single crossing");
    int vb_n = 8, vb_s = -1, vb_trials = 1000;
    vb_cmd->add_option("--n", vb_n, "Collection size")->required()->check(CLI::Range(1, 24));
    vb_cmd->add_option("--s", vb_s, "Preserved threshold (default: random per trial)");
    vb_cmd->add_option("--trials", vb_trials, "Random collections to test");
    vb_cmd->callback([&] {
        revgap::detail_verify::Stream st(seed);
        bool pass = true;
        double worst_proj = 0.0, worst_cross = 0.0, worst_cdf = 0.0;
        for (int trial = 0; trial < vb_trials; ++trial) {
            std::vector<double> q(static_cast<std::size_t>(vb_n));
            for (auto& x : q) x = st.u(0.02, 0.98);
            const long s = vb_s >= 0 ? vb_s : st.ui(0, vb_n - 1);
            const double direct = revgap::iid_projection_direct(q, s);
            const auto iter = revgap::iid_projection_iterative(q, s, 1e-13);
            worst_proj = std::max(worst_proj, std::fabs(iter.value - direct));
            if (std::fabs(iter.value - direct) > 1e-8) pass = false;
            const auto cross = revgap::verify_single_crossing(q, direct, s);
            worst_cross = std::max(worst_cross, std::fabs(cross.violation));
            if (!cross.ok) pass = false;
            if (vb_n <= 16) {
                const auto brute = revgap::detail_verify::enumerated_cdf(q);
                std::vector<double> succ(q.size());
                for (std::size_t j = 0; j < q.size(); ++j) succ[j] = 1.0 - q[j];
                const auto pmf = revgap::pbd_pmf(succ);
                double acc = 0.0;
                for (std::size_t t = 0; t < pmf.size(); ++t) {
                    acc += pmf[t];
                    worst_cdf = std::max(worst_cdf, std::fabs(acc - brute[t]));
                }
                if (worst_cdf > 1e-12) pass = false;
            }
        }
        emit(json{{"n", vb_n},
                  {"trials", vb_trials},
                  {"pass", pass},
                  {"worst_projection_dev", worst_proj},
                  {"worst_crossing_violation", worst_cross},
                  {"worst_cdf_dev", worst_cdf}},
             format);
        rc = pass ? 0 : 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return rc;
}
