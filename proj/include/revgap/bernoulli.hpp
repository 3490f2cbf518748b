#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "revgap/order_stats.hpp"

namespace revgap {

namespace detail {

inline double pmf_at(const std::vector<double>& a, long i) {
    if (i < 0 || i >= static_cast<long>(a.size())) return 0.0;
    return a[static_cast<std::size_t>(i)];
}

}  // namespace detail

// Replace a pair of Bernoulli variables with failure probabilities (q1, q2) by
// an identical pair with common failure qbar, preserving Pr[sum <= s] of the
// whole collection. `a` is the count pmf of the other n-2 variables. qbar
// solves
//   (a_s - a_{s-1}) qbar^2 + 2 a_{s-1} qbar
//     = (a_s - a_{s-1}) q1 q2 + a_{s-1} (q1 + q2),
// with out-of-range pmf entries read as zero. When a_s = a_{s-1} every choice
// preserves the constraint and the pair mean is returned. Otherwise exactly
// one root lies between q1 and q2; the quadratic is solved in the
// cancellation-free form and that root is returned.
inline double average_pair(const std::vector<double>& a, double q1, double q2, long s) {
    if (!(q1 >= 0.0 && q1 <= 1.0 && q2 >= 0.0 && q2 <= 1.0))
        throw std::invalid_argument("average_pair: failure probabilities must be in [0,1]");
    const double lo = std::min(q1, q2);
    const double hi = std::max(q1, q2);
    const double as = detail::pmf_at(a, s);
    const double asm1 = detail::pmf_at(a, s - 1);
    const double A = as - asm1;
    const double B = asm1;
    if (A == 0.0 || q1 == q2) return 0.5 * (q1 + q2);
    // A qbar^2 + 2 B qbar - C = 0 with C = A q1 q2 + B (q1 + q2).
    const double C = A * q1 * q2 + B * (q1 + q2);
    const double disc = B * B + A * C;
    if (disc < 0.0) {
        if (disc < -1e-14 * std::max(1.0, B * B))
            throw std::runtime_error("average_pair: no real root (numerical inconsistency)");
        const double r = -B / A;
        if (r >= lo - 1e-12 && r <= hi + 1e-12) return std::clamp(r, lo, hi);
        throw std::runtime_error("average_pair: no root inside the input bracket");
    }
    const double sq = std::sqrt(disc);
    const double slack = 1e-12 * (1.0 + hi - lo);
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_dist = std::numeric_limits<double>::infinity();
    for (double denom : {-B - sq, -B + sq}) {
        if (denom == 0.0) continue;
        const double r = -C / denom;
        const double dist = std::max(lo - r, r - hi);
        if (dist <= slack && dist < best_dist) {
            best = r;
            best_dist = dist;
        }
    }
    if (!(best_dist < std::numeric_limits<double>::infinity()))
        throw std::runtime_error("average_pair: no root inside the input bracket");
    return std::clamp(best, lo, hi);
}

// Pr[count <= s] for the Bernoulli collection with failure probabilities q.
inline double tail_below(const std::vector<double>& q, long s) {
    if (s < 0) return 0.0;
    const long n = static_cast<long>(q.size());
    if (s >= n) return 1.0;
    std::vector<double> succ(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) succ[j] = 1.0 - q[j];
    const auto pmf = pbd_pmf_capped(succ, static_cast<int>(s) + 1);
    double acc = 0.0;
    for (long t = 0; t <= s; ++t) acc += pmf[static_cast<std::size_t>(t)];
    return acc < 1.0 ? acc : 1.0;
}

struct ProjectionTrace {
    double value = 0.0;
    long sweeps = 0;
    long pair_updates = 0;
};

// Collapse the collection to a common failure probability by repeated pair
// averaging: sort ascending, average entry 1 with each of the others in turn,
// repeat until the spread max - min falls below tol. Each pass preserves
// Pr[count <= s]. The spread is provably nonincreasing, but no rate is known,
// so the loop carries an application cap.
inline ProjectionTrace iid_projection_iterative(std::vector<double> q, long s, double tol,
                                                long max_updates = 1000000) {
    if (q.empty()) throw std::invalid_argument("iid_projection_iterative: empty input");
    if (!(tol > 0.0)) throw std::invalid_argument("iid_projection_iterative: tol must be > 0");
    const std::size_t n = q.size();
    for (double v : q)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("iid_projection_iterative: entries must be in [0,1]");
    ProjectionTrace trace;
    if (n == 1) {
        trace.value = q[0];
        return trace;
    }
    std::vector<double> succ(n);
    while (true) {
        std::sort(q.begin(), q.end());
        if (q.back() - q.front() < tol) break;
        ++trace.sweeps;
        for (std::size_t j = 1; j < n; ++j) {
            // Count pmf of everyone except entries 0 and j.
            succ.clear();
            for (std::size_t t = 0; t < n; ++t)
                if (t != 0 && t != j) succ.push_back(1.0 - q[t]);
            std::vector<double> rest;
            if (succ.empty())
                rest = {1.0};
            else
                rest = pbd_pmf(succ);
            const double qbar = average_pair(rest, q[0], q[j], s);
            q[0] = qbar;
            q[j] = qbar;
            ++trace.pair_updates;
            if (trace.pair_updates > max_updates)
                throw std::runtime_error("iid_projection_iterative: iteration cap exceeded");
        }
    }
    trace.value = q.front();
    return trace;
}

// The same common failure probability, found directly: Pr[Bin(n, 1-q*) <= s]
// is strictly increasing in q*, so bisect q* until the preserved tail matches.
inline double iid_projection_direct(const std::vector<double>& q, long s) {
    if (q.empty()) throw std::invalid_argument("iid_projection_direct: empty input");
    const long n = static_cast<long>(q.size());
    const double target = tail_below(q, s);
    if (s < 0 || s >= n) {
        // The preserved constraint is vacuous; agree with the iterative
        // projection, which collapses toward the mean.
        double m = 0.0;
        for (double v : q) m += v;
        return m / static_cast<double>(n);
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const std::vector<double> t(q.size(), mid);
        if (tail_below(t, s) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

struct CrossingReport {
    bool ok = true;
    long crossing = 0;
    long violating_t = -1;
    double violation = 0.0;
};

// With X the iid collection at failure qStar and Y the original collection,
// verifies the single-crossing of their cdfs: Pr[X <= t] >= Pr[Y <= t] for
// t < s and Pr[X <= t] <= Pr[Y <= t] for t >= s. Returns the first index
// where the iid cdf drops (weakly) below the original.
inline CrossingReport verify_single_crossing(const std::vector<double>& qY, double qStar, long s,
                                             double tol = 1e-9) {
    const long n = static_cast<long>(qY.size());
    std::vector<double> succY(qY.size());
    for (std::size_t j = 0; j < qY.size(); ++j) succY[j] = 1.0 - qY[j];
    const auto pmfY = pbd_pmf(succY);
    const std::vector<double> qX(qY.size(), qStar);
    std::vector<double> succX(qY.size(), 1.0 - qStar);
    const auto pmfX = pbd_pmf(succX);
    CrossingReport rep;
    rep.crossing = -1;
    double cdfX = 0.0, cdfY = 0.0;
    for (long t = 0; t <= n; ++t) {
        cdfX += pmfX[static_cast<std::size_t>(t)];
        cdfY += pmfY[static_cast<std::size_t>(t)];
        if (rep.crossing < 0 && cdfX <= cdfY + tol) rep.crossing = t;
        const double diff = cdfX - cdfY;
        const bool bad = t < s ? diff < -tol : diff > tol;
        if (bad) {
            rep.ok = false;
            rep.violating_t = t;
            if (std::fabs(diff) > std::fabs(rep.violation)) rep.violation = diff;
        }
    }
    if (rep.crossing < 0) rep.crossing = n;
    return rep;
}

}  // namespace revgap
