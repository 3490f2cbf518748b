#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "revgap/cdf.hpp"
#include "revgap/order_stats.hpp"
#include "revgap/revenue.hpp"

namespace revgap {

// ---------------------------------------------------------------------------
// Worst-case iid instance: n buyers share the implicit cdf F* defined by
// F*(x) = 0 on [0, 1/k] and "anonymous pricing earns exactly 1 at every
// price above 1/k".
// ---------------------------------------------------------------------------

struct GridSpec {
    int points = 2048;
    double x_max = 0.0;  // 0 = extend until 1 - F* < 1e-6
};

struct WorstCaseIID {
    int k = 1;
    int n = 1;
    std::vector<double> grid;
    std::vector<double> fvals;  // solved F*(x) at each grid point
};

namespace detail {

// E[min(k, Bin(n, s))] = k - sum_{t<k} (k - t) Pr[Bin(n,s) = t]. The pmf
// terms are evaluated in log space so any n is safe.
class BinomialSold {
  public:
    BinomialSold(int n, int k) : n_(n), k_(std::min(k, n)), lc_(static_cast<std::size_t>(k_)) {
        const double lgn = std::lgamma(n + 1.0);
        for (int t = 0; t < k_; ++t)
            lc_[static_cast<std::size_t>(t)] =
                lgn - std::lgamma(t + 1.0) - std::lgamma(n - t + 1.0);
    }

    double operator()(double s) const {
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return static_cast<double>(k_);
        const double ls = std::log(s);
        const double l1ms = std::log1p(-s);
        double acc = static_cast<double>(k_);
        for (int t = 0; t < k_; ++t) {
            const double lp = lc_[static_cast<std::size_t>(t)] + t * ls + (n_ - t) * l1ms;
            acc -= (k_ - t) * std::exp(lp);
        }
        return acc;
    }

  private:
    int n_;
    int k_;
    std::vector<double> lc_;
};

// F*(x) for x > 1/k: the failure probability q with
// x * E[min(k, Bin(n, 1-q))] = 1. The expected sale count is decreasing in q,
// so bisection on q is monotone.
inline double solve_fstar(const BinomialSold& sold, double x) {
    const double target = 1.0 / x;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sold(1.0 - mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Pr[Bin(n, s) >= k+1]. Sums whichever binomial tail is short, in log space,
// so large n and tiny tails both stay accurate.
inline double binom_upper_tail(int n, double s, int k) {
    if (n <= k) return 0.0;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double ls = std::log(s);
    const double l1ms = std::log1p(-s);
    const double lgn = std::lgamma(n + 1.0);
    const double odds = s / (1.0 - s);
    if (s > 0.5) {
        // Lower tail {0..k} is the short one.
        double term = std::exp(lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                               k * ls + (n - k) * l1ms);
        double acc = term;
        for (int t = k - 1; t >= 0; --t) {
            term *= static_cast<double>(t + 1) / (odds * static_cast<double>(n - t));
            acc += term;
            if (term < acc * 1e-17) break;
        }
        return std::max(0.0, 1.0 - acc);
    }
    double term = std::exp(lgn - std::lgamma(k + 2.0) - std::lgamma(static_cast<double>(n - k)) +
                           (k + 1) * ls + (n - k - 1) * l1ms);
    double acc = term;
    for (int t = k + 2; t <= n; ++t) {
        term *= odds * static_cast<double>(n - t + 1) / static_cast<double>(t);
        acc += term;
        if (term < acc * 1e-17) break;
    }
    return std::min(1.0, acc);
}

}  // namespace detail

inline WorstCaseIID build_worst_case_iid(int k, int n, GridSpec spec = {}) {
    if (k < 1 || n < k) throw std::invalid_argument("build_worst_case_iid: need n >= k >= 1");
    if (spec.points < 8) throw std::invalid_argument("build_worst_case_iid: too few grid points");
    const double lo = (1.0 / k) * (1.0 + 1e-6);
    const detail::BinomialSold sold(n, k);
    double x_max = spec.x_max;
    if (x_max <= 0.0) {
        x_max = std::max(2.0 / k, 2.0);
        while (1.0 - detail::solve_fstar(sold, x_max) >= 1e-6) {
            x_max *= 2.0;
            if (x_max > 1e15)
                throw std::runtime_error("build_worst_case_iid: x_max expansion failed");
        }
    }
    if (!(x_max > lo))
        throw std::invalid_argument("build_worst_case_iid: grid must lie above 1/k");
    WorstCaseIID w;
    w.k = k;
    w.n = n;
    const int pts = spec.points;
    const double ratio = std::log(x_max / lo) / (pts - 1);
    w.grid.resize(static_cast<std::size_t>(pts));
    w.fvals.resize(static_cast<std::size_t>(pts));
    for (int i = 0; i < pts; ++i) {
        const double x = lo * std::exp(ratio * i);
        w.grid[static_cast<std::size_t>(i)] = x;
        w.fvals[static_cast<std::size_t>(i)] = detail::solve_fstar(sold, x);
    }
    return w;
}

// Materialize the construction as n identical tabulated buyers. Mass between
// grid points collapses down onto the knot below, so Pr[b >= x] matches the
// solved exceedance exactly at every grid point: anonymous pricing then earns
// exactly 1 at grid points and at most 1 between them. The extra knot at 1/k
// holds the head mass F*(grid[0]); without it the first grid point would
// oversell by the grid's offset above 1/k.
inline Instance worst_case_instance(const WorstCaseIID& w) {
    Tabulated tb;
    tb.xs.reserve(w.grid.size() + 1);
    tb.xs.push_back(1.0 / w.k);
    tb.xs.insert(tb.xs.end(), w.grid.begin(), w.grid.end());
    tb.ps = w.fvals;
    tb.ps.push_back(1.0);
    for (std::size_t i = 1; i < tb.ps.size(); ++i) tb.ps[i] = std::max(tb.ps[i], tb.ps[i - 1]);
    Instance inst;
    inst.k = w.k;
    inst.cdfs.assign(static_cast<std::size_t>(w.n), Cdf(tb));
    return inst;
}

// Anonymous-reserve revenue of the worst-case instance:
//   AR = 1 + k * integral_{1/k}^{inf} (1 - D_{k+1}(x)) dx,
// trapezoid over the solved grid plus a head rectangle below the first grid
// point and a power-law tail estimate g(X) X / k beyond the last (the
// integrand decays like x^{-(k+1)}).
inline double ar_of_worst_case(const WorstCaseIID& w) {
    const int n = w.n;
    const int k = w.k;
    std::vector<double> g(w.grid.size());
    for (std::size_t i = 0; i < w.grid.size(); ++i)
        g[i] = detail::binom_upper_tail(n, 1.0 - w.fvals[i], k);
    double integral = (w.grid.front() - 1.0 / k) * 0.5 * (1.0 + g.front());
    for (std::size_t i = 0; i + 1 < w.grid.size(); ++i)
        integral += 0.5 * (g[i] + g[i + 1]) * (w.grid[i + 1] - w.grid[i]);
    integral += g.back() * w.grid.back() / k;
    return 1.0 + k * integral;
}

// ---------------------------------------------------------------------------
// Triangle lower-bound instance: one group of n buyers at apex b, then n
// groups of k buyers at apexes stepping down to a, every apex solved so that
// anonymous pricing earns exactly 1 there.
// ---------------------------------------------------------------------------

struct TriangleGroup {
    double v = 0.0;
    double q = 0.0;
    int multiplicity = 0;
};

struct TriangleLowerBound {
    int k = 1;
    int n = 1;
    double a = 0.0;
    double b = 0.0;
    std::vector<TriangleGroup> groups;
};

namespace detail {

// Pr[triangle(v, q) bid >= p] for p > 0.
inline double triangle_willing(double v, double q, double p) {
    if (p > v) return 0.0;
    if (q >= 1.0) return 1.0;
    if (q <= 0.0) return 0.0;
    return v * q / ((1.0 - q) * p + v * q);
}

// Binomial(m, w) pmf truncated at cap: entries t = 0..cap-1 exact, last entry
// aggregates "cap or more".
inline std::vector<double> binomial_capped(int m, double w, int cap) {
    std::vector<double> pmf(static_cast<std::size_t>(cap) + 1, 0.0);
    if (w <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (w >= 1.0) {
        pmf[static_cast<std::size_t>(std::min(m, cap))] = 1.0;
        return pmf;
    }
    const int top = std::min(m, cap - 1);
    double term = std::exp(m * std::log1p(-w));
    const double odds = w / (1.0 - w);
    double acc = 0.0;
    for (int t = 0; t <= top; ++t) {
        pmf[static_cast<std::size_t>(t)] = term;
        acc += term;
        term *= odds * static_cast<double>(m - t) / static_cast<double>(t + 1);
    }
    pmf[static_cast<std::size_t>(cap)] = std::max(0.0, 1.0 - acc);
    return pmf;
}

inline void convolve_capped(std::vector<double>& acc, const std::vector<double>& add) {
    const std::size_t cap = acc.size() - 1;
    std::vector<double> out(acc.size(), 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (acc[i] == 0.0) continue;
        for (std::size_t j = 0; j < add.size(); ++j) {
            const std::size_t t = std::min(cap, i + j);
            out[t] += acc[i] * add[j];
        }
    }
    acc.swap(out);
}

// Count pmf of willing buyers at price p over the given groups, capped.
inline std::vector<double> group_count_pmf(const std::vector<TriangleGroup>& groups,
                                           std::size_t limit, double p, int cap) {
    std::vector<double> acc(static_cast<std::size_t>(cap) + 1, 0.0);
    acc[0] = 1.0;
    for (std::size_t g = 0; g < limit; ++g) {
        const double w = triangle_willing(groups[g].v, groups[g].q, p);
        convolve_capped(acc, binomial_capped(groups[g].multiplicity, w, cap));
    }
    return acc;
}

inline double group_ap(const std::vector<TriangleGroup>& groups, std::size_t limit, double p,
                       int k) {
    const auto pmf = group_count_pmf(groups, limit, p, k);
    double e = 0.0;
    for (std::size_t t = 1; t < pmf.size(); ++t) e += static_cast<double>(t) * pmf[t];
    return p * e;
}

}  // namespace detail

inline TriangleLowerBound build_triangle_lower_bound(int k, int n, double a, double b) {
    if (k < 1 || n < 1) throw std::invalid_argument("build_triangle_lower_bound: k, n >= 1");
    if (!(1.0 / k < a && a <= b))
        throw std::invalid_argument("build_triangle_lower_bound: need 1/k < a <= b");
    TriangleLowerBound t;
    t.k = k;
    t.n = n;
    t.a = a;
    t.b = b;
    const double delta = (b - a) / n;
    t.groups.reserve(static_cast<std::size_t>(n) + 1);
    t.groups.push_back({b, 0.0, n});
    for (int j = 1; j <= n; ++j) t.groups.push_back({b - j * delta, 0.0, k});
    // Solve each group's quantile in decreasing price order; at each apex the
    // anonymous-pricing revenue is increasing in the new quantile, and the
    // endpoints straddle 1 whenever the apex exceeds 1/k.  Earlier groups'
    // quantiles are already fixed, so their count pmf at this apex is cached
    // across the bisection.
    for (std::size_t j = 0; j < t.groups.size(); ++j) {
        const double price = t.groups[j].v;
        const auto base = detail::group_count_pmf(t.groups, j, price, k);
        const int mult = t.groups[j].multiplicity;
        const auto ap_with = [&](double q) {
            t.groups[j].q = q;
            auto pmf = base;
            const double w = detail::triangle_willing(price, q, price);
            detail::convolve_capped(pmf, detail::binomial_capped(mult, w, k));
            double e = 0.0;
            for (std::size_t u = 1; u < pmf.size(); ++u)
                e += static_cast<double>(u) * pmf[u];
            return price * e;
        };
        if (ap_with(1.0) < 1.0 - 1e-12)
            throw std::runtime_error("build_triangle_lower_bound: bracket failure");
        double lo = 0.0, hi = 1.0;
        if (ap_with(0.0) >= 1.0) {
            t.groups[j].q = 0.0;
            continue;
        }
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (ap_with(mid) < 1.0)
                lo = mid;
            else
                hi = mid;
        }
        t.groups[j].q = 0.5 * (lo + hi);
    }
    return t;
}

inline Instance triangle_lb_instance(const TriangleLowerBound& t) {
    Instance inst;
    inst.k = t.k;
    for (const auto& g : t.groups)
        for (int c = 0; c < g.multiplicity; ++c) inst.cdfs.push_back(Cdf(Triangle{g.v, g.q}));
    return inst;
}

// Anonymous pricing revenue of the construction at one price.
inline double triangle_lb_ap(const TriangleLowerBound& t, double p) {
    return detail::group_ap(t.groups, t.groups.size(), p, t.k);
}

// AR at reserve a: the apex identity makes the reserve term equal 1, and the
// integral term k int_a^b (1 - D_{k+1}) is integrated between consecutive
// apexes (the integrand jumps at each apex atom).
inline double triangle_lb_ar(const TriangleLowerBound& t, int panel_points = 33) {
    const auto g = [&](double x) {
        return detail::group_count_pmf(t.groups, t.groups.size(), x, t.k + 1).back();
    };
    double integral = 0.0;
    // Apexes descend from b to a; integrate panel [v_{j+1}, v_j].
    for (std::size_t j = 0; j + 1 < t.groups.size(); ++j) {
        const double hi = t.groups[j].v;
        const double lo = t.groups[j + 1].v;
        if (hi <= lo) continue;
        const int m = panel_points;
        double panel = 0.0;
        double prev = g(lo + 1e-12 * (hi - lo));
        for (int i = 1; i < m; ++i) {
            const double x = lo + (hi - lo) * i / (m - 1);
            const double cur = g(x);
            panel += 0.5 * (prev + cur) * (hi - lo) / (m - 1);
            prev = cur;
        }
        integral += panel;
    }
    return 1.0 + t.k * integral;
}

// Largest shortfall of the anonymous-pricing profile below 1 over [a, b].
inline double triangle_lb_max_dip(const TriangleLowerBound& t, int points = 512) {
    double dip = 0.0;
    for (int i = 0; i <= points; ++i) {
        const double p = t.a + (t.b - t.a) * i / points;
        dip = std::max(dip, 1.0 - triangle_lb_ap(t, p));
    }
    return std::max(0.0, dip);
}

// ---------------------------------------------------------------------------
// Laminar matroid demo: m buyer pairs with identical deterministic bids
// max(1/i, 1/(k+1)); at most one buyer per pair may win and at most k total.
// ---------------------------------------------------------------------------

struct MatroidReport {
    double ap_best = 0.0;
    double vcg_rev = 0.0;
    double ratio = 0.0;
    std::vector<double> bids;
};

inline MatroidReport matroid_demo(int m, int k) {
    if (k < 1) throw std::invalid_argument("matroid_demo: rank must be >= 1");
    if (k > m) throw std::invalid_argument("matroid_demo: rank exceeds pair count");
    MatroidReport rep;
    rep.bids.resize(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i)
        rep.bids[static_cast<std::size_t>(i - 1)] = std::max(1.0 / i, 1.0 / (k + 1));
    // Anonymous pricing sells at most one unit per pair: revenue
    // p * min(#pairs willing, k), maximized over the bid levels.
    for (double p : rep.bids) {
        int willing = 0;
        for (double bid : rep.bids)
            if (bid >= p) ++willing;
        rep.ap_best = std::max(rep.ap_best, p * std::min(willing, k));
    }
    // The welfare-optimal mechanism picks one buyer from each of the top k
    // pairs; the threshold payment of each winner is its pair-mate's
    // identical bid.
    for (int i = 1; i <= k; ++i) rep.vcg_rev += rep.bids[static_cast<std::size_t>(i - 1)];
    rep.ratio = rep.vcg_rev / rep.ap_best;
    return rep;
}

}  // namespace revgap
