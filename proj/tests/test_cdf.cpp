#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "revgap/cdf.hpp"
#include "revgap/instances.hpp"
#include "revgap/json_io.hpp"

using namespace revgap;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return out;
}

}  // namespace

TEST_CASE("triangle evaluation is left-continuous with an apex atom", "[cdf]") {
    const Cdf tri{Triangle{2.0, 0.5}};
    REQUIRE(tri.eval(0.0) == 0.0);
    REQUIRE_THAT(tri.eval(1.0), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE(tri.eval(2.0) == 0.5);  // mass below the apex; the atom sits at 2
    REQUIRE(tri.eval(3.0) == 1.0);
    REQUIRE_THAT(tri.exceed(2.0), Catch::Matchers::WithinAbs(0.5, 1e-15));

    // Monotone in x, and posted revenue peaks at the apex.
    double prev = -1.0;
    for (double x : linspace(0.0, 2.5, 101)) {
        const double fx = tri.eval(x);
        REQUIRE(fx >= prev);
        prev = fx;
        if (x <= 2.0) REQUIRE(x * tri.exceed(x) <= 2.0 * 0.5 + 1e-12);
    }
    REQUIRE_THAT(2.0 * tri.exceed(2.0), Catch::Matchers::WithinAbs(1.0, 1e-15));
}

TEST_CASE("point mass and equal-revenue evaluation", "[cdf]") {
    const Cdf pm{PointMass{1.0}};
    REQUIRE(pm.eval(1.0) == 0.0);  // a bid at the price still buys
    REQUIRE(pm.eval(1.0 + 1e-9) == 1.0);
    REQUIRE(pm.exceed(1.0) == 1.0);
    REQUIRE(pm.inverse(0.3) == 1.0);
    REQUIRE(pm.sale_price(1.0) == 1.0);
    REQUIRE(pm.sale_price(0.5) == 1.0);

    const Cdf er{EqualRevenue{1.0}};
    REQUIRE(er.eval(0.5) == 0.0);
    REQUIRE_THAT(er.eval(2.0), Catch::Matchers::WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(er.exceed(4.0), Catch::Matchers::WithinAbs(0.25, 1e-15));
    REQUIRE_THAT(er.inverse(0.5), Catch::Matchers::WithinAbs(2.0, 1e-15));
    REQUIRE(er.support_max() == kInf);
}

TEST_CASE("triangle inverse and sale price round trips", "[cdf]") {
    const Cdf tri{Triangle{2.0, 0.5}};
    const double x = tri.inverse(0.25);
    REQUIRE_THAT(x, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
    REQUIRE_THAT(tri.eval(x), Catch::Matchers::WithinAbs(0.25, 1e-15));
    REQUIRE(tri.inverse(0.8) == 2.0);  // inside the apex atom

    // Sale price: the highest price at which the sale probability is still
    // met. Inside the atom that is the apex itself.
    REQUIRE(tri.sale_price(0.25) == 2.0);
    REQUIRE(tri.sale_price(0.5) == 2.0);
    const double p = tri.sale_price(0.75);
    REQUIRE_THAT(p, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
    REQUIRE_THAT(tri.exceed(p), Catch::Matchers::WithinAbs(0.75, 1e-15));
}

TEST_CASE("monopoly point by kind", "[cdf]") {
    const auto mt = monopoly_point(Cdf{Triangle{2.0, 0.5}});
    REQUIRE(mt.bounded);
    REQUIRE(mt.v == 2.0);
    REQUIRE(mt.q == 0.5);

    const auto mp = monopoly_point(Cdf{PointMass{3.0}});
    REQUIRE(mp.v == 3.0);
    REQUIRE(mp.q == 1.0);

    // The equal-revenue family approaches its revenue supremum only as the
    // price grows without bound.
    const auto me = monopoly_point(Cdf{EqualRevenue{1.0}});
    REQUIRE_FALSE(me.bounded);
    REQUIRE(me.v == kInf);
    REQUIRE(me.q == 0.0);
}

TEST_CASE("tabulated monopoly tie-break picks the smallest quantile", "[cdf]") {
    // A truncated equal-revenue curve: every knot earns revenue 1, so the
    // tie-break lands on the largest knot with positive sale probability.
    const Cdf tb{Tabulated{{1.0, 2.0, 4.0}, {0.5, 0.75, 1.0}}};
    const auto m = monopoly_point(tb);
    REQUIRE(m.bounded);
    REQUIRE(m.v == 4.0);
    REQUIRE_THAT(m.q, Catch::Matchers::WithinAbs(0.25, 1e-15));
}

TEST_CASE("tabulated clone of a triangle tracks it between knots", "[cdf]") {
    const Cdf tri{Triangle{2.0, 0.5}};
    auto knots = linspace(1e-3, 2.0, 201);
    const auto tb = tabulate_continuous([&](double x) { return tri.eval(x); }, knots);
    const Cdf clone{tb};
    // Exceedance matches exactly at interior knots (mass collapses downward).
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
        REQUIRE_THAT(clone.exceed(knots[i]),
                     Catch::Matchers::WithinAbs(tri.exceed(knots[i]), 1e-12));
    }
    // Between knots the clone deviates by at most one knot's rise.
    for (double x : linspace(0.01, 1.99, 97)) {
        REQUIRE(clone.eval(x) >= tri.eval(x) - 1e-12);
        REQUIRE(clone.eval(x) <= tri.eval(x) + 0.02);
    }
    // The clone's monopoly point matches the exact one within a grid step.
    const auto m = monopoly_point(clone);
    REQUIRE(std::fabs(m.v - 2.0) <= knots[1] - knots[0] + 1e-12);
    REQUIRE_THAT(m.q, Catch::Matchers::WithinAbs(0.5, 0.02));
}

TEST_CASE("regularity checks", "[cdf]") {
    const auto grid = linspace(0.05, 1.95, 101);
    REQUIRE(is_regular(Cdf{Triangle{2.0, 0.5}}, grid));
    REQUIRE(is_regular(Cdf{PointMass{1.0}}, grid));
    REQUIRE(is_regular(Cdf{EqualRevenue{1.0}}, grid));

    // The solved two-buyer unit-pricing construction is a known irregular
    // family: its virtual value falls from 1 toward 1/4. Using a subset of
    // the construction's own knots keeps the density estimate exact.
    const auto w = build_worst_case_iid(1, 2);
    const Cdf fstar = worst_case_instance(w).cdfs.front();
    std::vector<double> knot_grid;
    for (std::size_t i = 10; i < w.grid.size() && w.grid[i] < 50.0; i += 5)
        knot_grid.push_back(w.grid[i]);
    REQUIRE(knot_grid.size() > 30);
    REQUIRE_FALSE(is_regular(fstar, knot_grid));

    // A flat stretch strictly inside the support has no density to divide by.
    const Cdf flat{Tabulated{{1.0, 2.0, 3.0}, {0.5, 0.5, 1.0}}};
    REQUIRE_THROWS_AS(is_regular(flat, linspace(0.5, 3.0, 101)), std::domain_error);
}

TEST_CASE("stochastic dominance", "[cdf]") {
    const auto grid = linspace(0.0, 4.0, 201);
    // Raising the apex probability shifts triangle mass upward.
    REQUIRE(dominates(Cdf{Triangle{2.0, 0.6}}, Cdf{Triangle{2.0, 0.5}}, grid));
    REQUIRE_FALSE(dominates(Cdf{Triangle{2.0, 0.5}}, Cdf{Triangle{2.0, 0.6}}, grid));
    REQUIRE(dominates(Cdf{PointMass{2.0}}, Cdf{PointMass{1.0}}, grid));
    REQUIRE(dominates(Cdf{PointMass{2.0}}, Cdf{Triangle{2.0, 0.5}}, grid));
    REQUIRE(dominates(Cdf{Triangle{2.0, 0.5}}, Cdf{Triangle{2.0, 0.5}}, grid));
}

TEST_CASE("tabulated validation", "[cdf]") {
    const auto bad = [](std::vector<double> xs, std::vector<double> ps) {
        return Cdf{Tabulated{std::move(xs), std::move(ps)}};
    };
    REQUIRE_THROWS_AS(bad({1.0, 1.0}, {0.5, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(bad({2.0, 1.0}, {0.5, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(bad({1.0, 2.0}, {0.8, 0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(bad({1.0, 2.0}, {0.5, 0.7}), std::invalid_argument);
    // A final probability within rounding of 1 is snapped to 1.
    const Cdf ok = bad({1.0, 2.0}, {0.5, 1.0 - 1e-12});
    REQUIRE(ok.eval(3.0) == 1.0);
}

TEST_CASE("json round trip for every kind", "[cdf]") {
    Instance inst;
    inst.k = 2;
    inst.cdfs.push_back(Cdf{Triangle{2.0, 0.5}});
    inst.cdfs.push_back(Cdf{PointMass{1.0}});
    inst.cdfs.push_back(Cdf{EqualRevenue{1.5}});
    inst.cdfs.push_back(Cdf{Tabulated{{1.0, 2.0, 4.0}, {0.5, 0.75, 1.0}}});
    const auto j = instance_to_json(inst);
    const auto back = instance_from_json(j);
    REQUIRE(back.k == 2);
    REQUIRE(back.n() == 4);
    for (double x : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
        for (std::size_t i = 0; i < inst.cdfs.size(); ++i) {
            REQUIRE(back.cdfs[i].eval(x) == inst.cdfs[i].eval(x));
        }
    }
    REQUIRE_THROWS_AS(cdf_from_json(nlohmann::json{{"kind", "unknown"}}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(load_instance("/nonexistent/path.json"), std::runtime_error);
}
