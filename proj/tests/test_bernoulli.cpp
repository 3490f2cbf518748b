#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "revgap/bernoulli.hpp"

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

}  // namespace

TEST_CASE("pair averaging solves the quadratic", "[bernoulli]") {
    // Two variables alone (the rest-pmf is the point mass at zero), s = 1:
    //   -qbar^2 + 2 qbar = -q1 q2 + q1 + q2, root in [q1, q2] is 0.6.
    REQUIRE_THAT(average_pair({1.0}, 0.2, 0.8, 1), Catch::Matchers::WithinAbs(0.6, 1e-12));

    // When the adjacent pmf entries tie, the constraint is insensitive to the
    // pair and the mean is returned.
    REQUIRE_THAT(average_pair({0.5, 0.5}, 0.1, 0.5, 1), Catch::Matchers::WithinAbs(0.3, 1e-15));

    // Equal inputs are a fixed point.
    REQUIRE(average_pair({0.3, 0.7}, 0.4, 0.4, 2) == 0.4);

    // An inconsistent rest-pmf pushes the discriminant negative.
    REQUIRE_THROWS_AS(average_pair({0.3, -1.2}, 0.1, 0.4, 1), std::runtime_error);
    REQUIRE_THROWS_AS(average_pair({1.0}, -0.1, 0.5, 1), std::invalid_argument);
}

TEST_CASE("pair averaging preserves the tail constraint", "[bernoulli]") {
    Lcg rng(4242ULL);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 2 + static_cast<int>(rng.u() * 9.0);
        std::vector<double> q(static_cast<std::size_t>(n));
        for (auto& v : q) v = 0.02 + 0.96 * rng.u();
        const long s = static_cast<long>(rng.u() * n);  // s in [0, n-1]
        std::vector<double> rest_succ;
        for (int j = 2; j < n; ++j) rest_succ.push_back(1.0 - q[static_cast<std::size_t>(j)]);
        std::vector<double> rest = rest_succ.empty() ? std::vector<double>{1.0}
                                                     : pbd_pmf(rest_succ);
        const double qbar = average_pair(rest, q[0], q[1], s);
        REQUIRE(qbar >= std::min(q[0], q[1]));
        REQUIRE(qbar <= std::max(q[0], q[1]));
        std::vector<double> merged = q;
        merged[0] = qbar;
        merged[1] = qbar;
        REQUIRE_THAT(tail_below(merged, s), Catch::Matchers::WithinAbs(tail_below(q, s), 1e-12));
    }
}

TEST_CASE("iterative and direct projections agree", "[bernoulli]") {
    Lcg rng(90210ULL);
    for (int rep = 0; rep < 60; ++rep) {
        const int n = 2 + static_cast<int>(rng.u() * 11.0);
        std::vector<double> q(static_cast<std::size_t>(n));
        for (auto& v : q) v = 0.02 + 0.96 * rng.u();
        const long s = static_cast<long>(rng.u() * n);
        const auto it = iid_projection_iterative(q, s, 1e-13);
        const double direct = iid_projection_direct(q, s);
        REQUIRE_THAT(it.value, Catch::Matchers::WithinAbs(direct, 1e-8));
        // The common value stays inside the original bracket.
        REQUIRE(it.value >= *std::min_element(q.begin(), q.end()) - 1e-12);
        REQUIRE(it.value <= *std::max_element(q.begin(), q.end()) + 1e-12);
        // The preserved tail matches the original.
        const std::vector<double> iid(q.size(), it.value);
        REQUIRE_THAT(tail_below(iid, s), Catch::Matchers::WithinAbs(tail_below(q, s), 1e-7));
        // The collapsed cdf crosses the original cdf once, at s.
        const auto cross = verify_single_crossing(q, it.value, s, 1e-7);
        REQUIRE(cross.ok);
    }
}

TEST_CASE("direct projection pins", "[bernoulli]") {
    // Failure probabilities {0, 1}: the count is always exactly one, so the
    // preserved Pr[count <= 0] = 0 forces the common failure to zero.
    REQUIRE_THAT(iid_projection_direct({0.0, 1.0}, 0), Catch::Matchers::WithinAbs(0.0, 1e-9));
    // Already-iid input is a fixed point.
    REQUIRE_THAT(iid_projection_direct(std::vector<double>(5, 0.3), 2),
                 Catch::Matchers::WithinAbs(0.3, 1e-9));
    // Out-of-range s has a vacuous constraint; both routes return the mean.
    REQUIRE_THAT(iid_projection_direct({0.2, 0.6}, 5), Catch::Matchers::WithinAbs(0.4, 1e-15));
    REQUIRE_THROWS_AS(iid_projection_direct({}, 1), std::invalid_argument);
}

TEST_CASE("single crossing report on a worked pair", "[bernoulli]") {
    // Collapsing {0.2, 0.8} at s = 1 gives the common failure 0.6. Below the
    // crossing the iid cdf sits above: Pr[X <= 0] = 0.36 > 0.16 = Pr[Y <= 0].
    REQUIRE_THAT(pbd_pmf({0.4, 0.4})[0], Catch::Matchers::WithinAbs(0.36, 1e-15));
    const auto rep = verify_single_crossing({0.2, 0.8}, 0.6, 1);
    REQUIRE(rep.ok);
    REQUIRE(rep.crossing == 1);

    // A deliberately wrong common value breaks the t >= s side.
    const auto bad = verify_single_crossing({0.2, 0.8}, 0.95, 1);
    REQUIRE_FALSE(bad.ok);
}

TEST_CASE("projection input validation", "[bernoulli]") {
    REQUIRE_THROWS_AS(iid_projection_iterative({}, 1, 1e-10), std::invalid_argument);
    REQUIRE_THROWS_AS(iid_projection_iterative({0.5}, 1, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(iid_projection_iterative({0.5, 1.5}, 1, 1e-10), std::invalid_argument);
    const auto single = iid_projection_iterative({0.7}, 0, 1e-10);
    REQUIRE(single.value == 0.7);
    REQUIRE(single.pair_updates == 0);
}
