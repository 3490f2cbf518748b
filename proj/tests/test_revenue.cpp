#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "revgap/instances.hpp"
#include "revgap/revenue.hpp"

using namespace revgap;

namespace {

struct Lcg {
    std::uint64_t state;
    explicit Lcg(std::uint64_t seed) : state(seed) {}
    double u() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return ((state >> 11) + 0.5) * 0x1.0p-53;
    }
};

Instance random_mixed(Lcg& rng, int max_n, int max_k) {
    Instance inst;
    inst.k = 1 + static_cast<int>(rng.u() * max_k);
    const int n = 1 + static_cast<int>(rng.u() * max_n);
    for (int j = 0; j < n; ++j) {
        if (rng.u() < 0.5)
            inst.cdfs.push_back(Cdf{Triangle{0.2 + 3.0 * rng.u(), 0.05 + 0.9 * rng.u()}});
        else
            inst.cdfs.push_back(Cdf{PointMass{0.2 + 3.0 * rng.u()}});
    }
    return inst;
}

// E[min(k, N)] from the full, uncapped count pmf.
double expected_min_full(const Instance& inst, double p) {
    std::vector<double> s;
    for (const auto& c : inst.cdfs) s.push_back(c.exceed(p));
    const auto pmf = pbd_pmf(s);
    double e = 0.0;
    for (std::size_t t = 0; t < pmf.size(); ++t)
        e += std::min<double>(static_cast<double>(t), inst.k) * pmf[t];
    return e;
}

}  // namespace

TEST_CASE("posted price revenue pins", "[revenue]") {
    Instance two;
    two.k = 2;
    two.cdfs = {Cdf{PointMass{1.0}}, Cdf{PointMass{1.0}}};
    REQUIRE(ap_revenue(two, 1.0) == 2.0);
    REQUIRE(ap_revenue(two, 1.5) == 0.0);
    REQUIRE(ap_revenue(two, 0.0) == 0.0);
    REQUIRE_THROWS_AS(ap_revenue(two, -1.0), std::invalid_argument);

    Instance tri;
    tri.k = 1;
    tri.cdfs = {Cdf{Triangle{2.0, 0.5}}};
    REQUIRE_THAT(ap_revenue(tri, 2.0), Catch::Matchers::WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(ap_revenue(tri, 1.0), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
}

TEST_CASE("posted price revenue matches the uncapped pmf route", "[revenue]") {
    Lcg rng(555ULL);
    for (int rep = 0; rep < 30; ++rep) {
        auto inst = random_mixed(rng, 8, 3);
        for (int t = 0; t < 3; ++t) {
            const double p = 0.1 + 3.0 * rng.u();
            REQUIRE_THAT(ap_revenue(inst, p),
                         Catch::Matchers::WithinAbs(p * expected_min_full(inst, p), 1e-12));
        }
    }
}

TEST_CASE("posted price optimization", "[revenue]") {
    Instance inst;
    inst.k = 1;
    inst.cdfs = {Cdf{Triangle{2.0, 0.5}}, Cdf{Triangle{2.0, 0.5}}};
    const auto best = ap_optimal(inst, {1.0});
    // At the shared apex both buyers bid 2 with probability 1/2:
    // revenue 2 * (1 - 1/4) = 1.5 beats the interior candidate.
    REQUIRE(best.arg == 2.0);
    REQUIRE_THAT(best.value, Catch::Matchers::WithinAbs(1.5, 1e-12));

    // The optimizer never loses to any candidate it considered.
    Lcg rng(808ULL);
    for (int rep = 0; rep < 20; ++rep) {
        auto r = random_mixed(rng, 6, 2);
        std::vector<double> grid;
        for (int t = 0; t < 15; ++t) grid.push_back(0.05 + 4.0 * rng.u());
        const auto opt = ap_optimal(r, grid);
        for (double p : grid) REQUIRE(opt.value >= ap_revenue(r, p) - 1e-12);
    }
}

TEST_CASE("reserve revenue pins and atom handling", "[revenue]") {
    Instance two;
    two.k = 1;
    two.cdfs = {Cdf{PointMass{1.0}}, Cdf{PointMass{1.0}}};
    // Reserve at the common bid: winner pays the reserve.
    REQUIRE_THAT(ar_revenue(two, 1.0), Catch::Matchers::WithinAbs(1.0, 1e-12));
    // Below it the second-highest bid sets the price instead.
    REQUIRE_THAT(ar_revenue(two, 0.5), Catch::Matchers::WithinAbs(1.0, 1e-9));

    // Deterministic bids 2 and 1: reserve 0.5 sells to the high bidder at the
    // runner-up's bid. The integrand steps at both atoms.
    Instance pair;
    pair.k = 1;
    pair.cdfs = {Cdf{PointMass{2.0}}, Cdf{PointMass{1.0}}};
    REQUIRE_THAT(ar_revenue(pair, 0.5), Catch::Matchers::WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(ar_revenue(pair, 1.5), Catch::Matchers::WithinAbs(1.5, 1e-9));

    // Unbounded support needs an explicit cutoff; a solo buyer pays exactly
    // the reserve, so the truncation point is irrelevant.
    Instance er;
    er.k = 1;
    er.cdfs = {Cdf{EqualRevenue{1.0}}};
    REQUIRE_THROWS_AS(ar_revenue(er, 1.0), std::invalid_argument);
    REQUIRE_THAT(ar_revenue(er, 2.0, 500.0), Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("reserve revenue dominates the posted price", "[revenue]") {
    Lcg rng(31337ULL);
    for (int rep = 0; rep < 15; ++rep) {
        auto inst = random_mixed(rng, 6, 3);
        for (int t = 0; t < 3; ++t) {
            const double p = 0.1 + 3.0 * rng.u();
            REQUIRE(ar_revenue(inst, p) >= ap_revenue(inst, p) - 1e-9);
        }
    }

    Instance two;
    two.k = 1;
    two.cdfs = {Cdf{PointMass{1.0}}, Cdf{PointMass{1.0}}};
    const auto best = ar_optimal(two);
    REQUIRE_THAT(best.value, Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("ex-ante revenue pins", "[revenue]") {
    Instance tri;
    tri.k = 1;
    tri.cdfs = {Cdf{Triangle{2.0, 0.5}}};
    // Service probability 1/4 is met anywhere inside the apex atom, so the
    // charged price is the apex itself: revenue 2 * 1/4.
    REQUIRE_THAT(ear_revenue(tri, {{0.25}}), Catch::Matchers::WithinAbs(0.5, 1e-15));
    // At 3/4 the price falls to the rising-branch quantile 2/3.
    REQUIRE_THAT(ear_revenue(tri, {{0.75}}), Catch::Matchers::WithinAbs(0.5, 1e-12));

    Instance pm;
    pm.k = 1;
    pm.cdfs = {Cdf{PointMass{3.0}}};
    REQUIRE_THAT(ear_revenue(pm, {{1.0}}), Catch::Matchers::WithinAbs(3.0, 1e-15));

    REQUIRE_THROWS_AS(ear_revenue(tri, {{0.25, 0.25}}), std::invalid_argument);
    REQUIRE_THROWS_AS(ear_revenue(pm, {{1.0, 0.5}}), std::invalid_argument);
    Instance both;
    both.k = 1;
    both.cdfs = {Cdf{PointMass{3.0}}, Cdf{PointMass{1.0}}};
    REQUIRE_THROWS_AS(ear_revenue(both, {{1.0, 0.5}}), std::invalid_argument);

    // Irregular instances are rejected.
    const auto w = build_worst_case_iid(1, 2);
    auto irregular = worst_case_instance(w);
    Allocation a;
    a.qprime.assign(irregular.n(), 0.1);
    REQUIRE_THROWS_AS(ear_revenue(irregular, a), std::domain_error);
}

TEST_CASE("ex-ante optimization on triangles", "[revenue]") {
    Instance inst;
    inst.k = 1;
    inst.cdfs = {Cdf{Triangle{2.0, 0.5}}, Cdf{Triangle{2.0, 0.5}}};
    const auto res = ear_optimal(inst);
    REQUIRE_THAT(res.value, Catch::Matchers::WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(res.alloc.qprime[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(res.alloc.qprime[1], Catch::Matchers::WithinAbs(0.5, 1e-12));

    // No feasible allocation beats the reported optimum.
    Instance mixed;
    mixed.k = 1;
    mixed.cdfs = {Cdf{Triangle{3.0, 0.2}}, Cdf{Triangle{1.0, 0.8}}, Cdf{PointMass{0.5}}};
    const auto opt = ear_optimal(mixed);
    REQUIRE_THAT(allocation_total(opt.alloc), Catch::Matchers::WithinAbs(1.0, 1e-9));
    Lcg rng(999ULL);
    for (int rep = 0; rep < 1000; ++rep) {
        Allocation alloc;
        double total = 0.0;
        for (std::size_t j = 0; j < mixed.n(); ++j) {
            alloc.qprime.push_back(rng.u());
            total += alloc.qprime.back();
        }
        if (total > mixed.k)
            for (auto& v : alloc.qprime) v *= mixed.k / total * rng.u();
        REQUIRE(ear_revenue(mixed, alloc) <= opt.value + 1e-9);
    }
}

TEST_CASE("revenue is monotone under stochastic dominance", "[revenue]") {
    const Cdf hi{Triangle{2.0, 0.5}};
    const Cdf lo{Triangle{2.0, 0.4}};
    std::vector<double> grid;
    for (int t = 0; t <= 100; ++t) grid.push_back(0.04 * t);
    REQUIRE(dominates(hi, lo, grid));

    Instance a, b;
    a.k = b.k = 1;
    a.cdfs = {hi, Cdf{PointMass{0.7}}};
    b.cdfs = {lo, Cdf{PointMass{0.7}}};
    for (double p : {0.3, 0.7, 1.0, 1.7, 2.0}) {
        REQUIRE(ap_revenue(a, p) >= ap_revenue(b, p) - 1e-12);
        REQUIRE(ar_revenue(a, p) >= ar_revenue(b, p) - 1e-9);
    }
    REQUIRE(ear_optimal(a).value >= ear_optimal(b).value - 1e-9);
}

TEST_CASE("feasibility check", "[revenue]") {
    // The solved unit-revenue construction passes.
    const auto w = build_worst_case_iid(1, 2);
    const auto inst = worst_case_instance(w);
    const auto rep = check_feasibility(inst);
    REQUIRE(rep.ok);
    REQUIRE(rep.worst_rev <= 1.0 + 1e-7);

    // Two sure bids of 1 with two units earn 2 at price 1.
    Instance two;
    two.k = 2;
    two.cdfs = {Cdf{PointMass{1.0}}, Cdf{PointMass{1.0}}};
    const auto bad = check_feasibility(two);
    REQUIRE_FALSE(bad.ok);
    REQUIRE(bad.worst_p == 1.0);
    REQUIRE_THAT(bad.worst_rev, Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("aggregate exceedance bound", "[revenue]") {
    Instance small;
    small.k = 8;
    for (int j = 0; j < 4; ++j) small.cdfs.push_back(Cdf{Triangle{1.0, 0.5}});
    REQUIRE(relaxed_constraint_check(small));

    // Forty sure bids at 1/m overload every price in the window.
    Instance heavy;
    heavy.k = 8;
    for (int j = 0; j < 40; ++j) heavy.cdfs.push_back(Cdf{PointMass{0.25}});
    REQUIRE_FALSE(relaxed_constraint_check(heavy));

    Instance low_k = small;
    low_k.k = 3;
    REQUIRE_THROWS_AS(relaxed_constraint_check(low_k), std::invalid_argument);
}

TEST_CASE("triangle grouping by apex and tail", "[revenue]") {
    // k = 8 gives m = 4 and threshold 1/4.
    const auto one = group_partition({Triangle{1.0, 0.5}}, 8);
    REQUIRE_THAT(one.sumA, Catch::Matchers::WithinAbs(0.5, 1e-15));
    REQUIRE(one.sumB == 0.0);
    REQUIRE(one.sumC == 0.0);
    REQUIRE(one.cardA_t.size() == 3);  // t = 2, 3, 4
    for (auto c : one.cardA_t) REQUIRE(c == 1);

    // Low apex: v < 1/m lands in C regardless of tail.
    const auto low = group_partition({Triangle{0.2, 0.5}}, 8);
    REQUIRE(low.sumA == 0.0);
    REQUIRE(low.sumB == 0.0);
    REQUIRE_THAT(low.sumC, Catch::Matchers::WithinAbs(0.1, 1e-15));
    for (auto c : low.cardA_t) REQUIRE(c == 0);

    // High apex with a light tail: v q/(1-q) < 1/m.
    const auto light = group_partition({Triangle{1.0, 0.01}}, 8);
    REQUIRE(light.sumA == 0.0);
    REQUIRE_THAT(light.sumB, Catch::Matchers::WithinAbs(0.01, 1e-15));

    const auto empty = group_partition({}, 8);
    REQUIRE(empty.sumA == 0.0);
    REQUIRE(empty.cardA_t.size() == 3);
    REQUIRE_THROWS_AS(group_partition({Triangle{1.0, 0.5}}, 3), std::invalid_argument);
}
