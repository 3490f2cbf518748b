#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "revgap/cdf.hpp"
#include "revgap/order_stats.hpp"
#include "revgap/quadrature.hpp"

namespace revgap {

// Ex-ante allocation: buyer j receives a unit with probability qprime[j].
struct Allocation {
    std::vector<double> qprime;
};

inline double allocation_total(const Allocation& alloc) {
    double s = 0.0;
    for (double v : alloc.qprime) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("Allocation: probabilities must be in [0,1]");
        s += v;
    }
    return s;
}

// Anonymous pricing: post price p for every buyer, sell at most k units.
// Revenue p * E[min(k, #{b_j >= p})] = p * sum_{i in [k]} (1 - D_i(p)).
inline double ap_revenue(const Instance& inst, double p) {
    validate_instance(inst);
    if (!(p >= 0.0)) throw std::invalid_argument("ap_revenue: price must be >= 0");
    if (p == 0.0) return 0.0;
    std::vector<double> s;
    s.reserve(inst.n());
    for (const auto& c : inst.cdfs) s.push_back(c.exceed(p));
    const int cap = std::min<int>(inst.k, static_cast<int>(inst.n()));
    return p * expected_min_capped(pbd_pmf_capped(s, cap));
}

namespace detail {

// Monopoly prices, tabulated knots, and the user grid; the revenue objective
// of posted-price mechanisms peaks only at these points for the families here.
inline std::vector<double> candidate_prices(const Instance& inst,
                                            const std::vector<double>& grid) {
    std::vector<double> cand = grid;
    for (const auto& c : inst.cdfs) {
        const auto mp = monopoly_point(c);
        if (mp.bounded && mp.v > 0.0)
            cand.push_back(mp.v);
        else if (!mp.bounded && c.is_equal_revenue())
            cand.push_back(c.as_equal_revenue().scale);
        if (c.is_tabulated())
            for (double x : c.as_tabulated().xs) cand.push_back(x);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    while (!cand.empty() && !(cand.front() > 0.0)) cand.erase(cand.begin());
    return cand;
}

}  // namespace detail

struct OptResult {
    double arg = 0.0;
    double value = 0.0;
};

// Maximize ap_revenue over the union of the supplied grid, every buyer's
// monopoly price, and every tabulated knot. Ties go to the smallest price.
inline OptResult ap_optimal(const Instance& inst, const std::vector<double>& price_grid = {}) {
    const auto cand = detail::candidate_prices(inst, price_grid);
    if (cand.empty()) throw std::invalid_argument("ap_optimal: no candidate prices");
    OptResult best{cand.front(), -1.0};
    for (double p : cand) {
        const double rev = ap_revenue(inst, p);
        if (rev > best.value * (1.0 + 1e-15)) best = {p, rev};
    }
    return best;
}

namespace detail {

inline double largest_finite_support(const Instance& inst) {
    double m = 0.0;
    for (const auto& c : inst.cdfs) {
        const double s = c.support_max();
        if (s == kInf)
            throw std::invalid_argument(
                "ar_revenue: unbounded support requires an explicit cutoff");
        m = std::max(m, s);
    }
    return m;
}

// Locations where some buyer's cdf has an atom: the order-statistic cdfs jump
// there, so integrals must not straddle them.
inline std::vector<double> atom_locations(const Instance& inst, double lo, double hi) {
    std::vector<double> cuts;
    for (const auto& c : inst.cdfs) {
        if (c.is_point_mass()) cuts.push_back(c.as_point_mass().value);
        if (c.is_triangle()) cuts.push_back(c.as_triangle().v);
        if (c.is_tabulated())
            for (double x : c.as_tabulated().xs) cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::erase_if(cuts, [&](double x) { return x <= lo || x >= hi; });
    return cuts;
}

}  // namespace detail

// Anonymous reserve: the k highest bids clearing the reserve r win, each
// winner pays max(r, (k+1)-th highest bid). Expected revenue
//   r * sum_{i in [k]} (1 - D_i(r)) + k * integral_r^cutoff (1 - D_{k+1}(x)) dx,
// the first term exact, the integral by adaptive Simpson. For unbounded
// supports the caller must supply the cutoff; the tail is then truncated.
inline double ar_revenue(const Instance& inst, double r,
                         std::optional<double> cutoff = std::nullopt,
                         double quad_tol = 1e-9) {
    validate_instance(inst);
    if (!(r >= 0.0)) throw std::invalid_argument("ar_revenue: reserve must be >= 0");
    const double hi = cutoff ? *cutoff : detail::largest_finite_support(inst);
    double first = 0.0;
    if (r > 0.0) {
        std::vector<double> s;
        s.reserve(inst.n());
        for (const auto& c : inst.cdfs) s.push_back(c.exceed(r));
        const int cap = std::min<int>(inst.k, static_cast<int>(inst.n()));
        first = r * expected_min_capped(pbd_pmf_capped(s, cap));
    }
    if (hi <= r) return first;
    const int ord = std::min<int>(inst.k + 1, static_cast<int>(inst.n()) + 1);
    const auto integrand = [&](double x) { return 1.0 - order_stat_cdf(inst, x, ord); };
    // Integrate between consecutive atoms; the integrand is left-continuous,
    // so each panel start is nudged inward to sample the branch that actually
    // holds on the panel interior.
    std::vector<double> cuts = detail::atom_locations(inst, r, hi);
    cuts.insert(cuts.begin(), r);
    cuts.push_back(hi);
    const double panel_tol = quad_tol / static_cast<double>(cuts.size());
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        const double a_in = a + 1e-12 * (b - a);
        integral += adaptive_simpson(integrand, a_in, b, panel_tol).value;
    }
    return first + inst.k * integral;
}

inline OptResult ar_optimal(const Instance& inst, const std::vector<double>& reserve_grid = {},
                            std::optional<double> cutoff = std::nullopt,
                            double quad_tol = 1e-9) {
    auto cand = detail::candidate_prices(inst, reserve_grid);
    cand.insert(cand.begin(), 0.0);
    OptResult best{0.0, -1.0};
    for (double r : cand) {
        const double rev = ar_revenue(inst, r, cutoff, quad_tol);
        if (rev > best.value * (1.0 + 1e-15) + 1e-300) best = {r, rev};
    }
    return best;
}

namespace detail {

inline void require_regular(const Instance& inst) {
    for (const auto& c : inst.cdfs) {
        if (c.is_tabulated()) {
            const auto& xs = c.as_tabulated().xs;
            if (xs.size() >= 3 && !is_regular(c, xs))
                throw std::domain_error("ear: irregular instance");
        }
        // Triangle, PointMass and EqualRevenue are regular in closed form.
    }
}

}  // namespace detail

// Ex-ante relaxation: buyer j is served with probability qprime[j] at the
// highest price with acceptance probability still qprime[j]. Revenue
// sum_j price_j(qprime[j]) * qprime[j], requiring a regular instance and
// sum qprime <= k.
inline double ear_revenue(const Instance& inst, const Allocation& alloc) {
    validate_instance(inst);
    if (alloc.qprime.size() != inst.n())
        throw std::invalid_argument("ear_revenue: allocation size mismatch");
    detail::require_regular(inst);
    if (allocation_total(alloc) > inst.k + 1e-9)
        throw std::invalid_argument("ear_revenue: allocation exceeds capacity");
    double rev = 0.0;
    for (std::size_t j = 0; j < inst.n(); ++j) {
        const double qp = alloc.qprime[j];
        if (qp > 0.0) rev += inst.cdfs[j].sale_price(qp) * qp;
    }
    return rev;
}

struct EarResult {
    Allocation alloc;
    double value = 0.0;
};

// Maximize ear_revenue under the capacity constraint. All-triangle (and
// point-mass) instances are solved exactly: each revenue-quantile curve rises
// with slope v_j up to the monopoly quantile q_j and falls beyond it, so the
// greedy that serves buyers in descending v_j, each up to q_j, is optimal.
// General regular instances discretize each concave revenue-quantile curve
// and split capacity by bisection on the shared marginal price, topping up
// buyers that are flat at the final price.
inline EarResult ear_optimal(const Instance& inst) {
    validate_instance(inst);
    detail::require_regular(inst);
    const std::size_t n = inst.n();
    EarResult res;
    res.alloc.qprime.assign(n, 0.0);

    bool analytic = true;
    for (const auto& c : inst.cdfs)
        if (!c.is_triangle() && !c.is_point_mass()) analytic = false;

    if (analytic) {
        std::vector<std::size_t> order(n);
        for (std::size_t j = 0; j < n; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto ma = monopoly_point(inst.cdfs[a]);
            const auto mb = monopoly_point(inst.cdfs[b]);
            return ma.v > mb.v;
        });
        double remaining = static_cast<double>(inst.k);
        for (std::size_t j : order) {
            if (remaining <= 0.0) break;
            const auto mp = monopoly_point(inst.cdfs[j]);
            const double take = std::min(mp.q, remaining);
            if (take <= 0.0) continue;
            res.alloc.qprime[j] = take;
            res.value += mp.v * take;
            remaining -= take;
        }
        return res;
    }

    // Discretized Lagrangian: find the marginal price lambda at which the
    // per-buyer maximizers of R_j(q) - lambda q fill the capacity.
    constexpr int kGrid = 10000;
    std::vector<std::vector<double>> curves(n);
    for (std::size_t j = 0; j < n; ++j) {
        curves[j].resize(kGrid + 1);
        curves[j][0] = 0.0;
        for (int t = 1; t <= kGrid; ++t) {
            const double qp = static_cast<double>(t) / kGrid;
            curves[j][static_cast<std::size_t>(t)] = qp * inst.cdfs[j].sale_price(qp);
        }
    }
    const auto argmax_at = [&](std::size_t j, double lambda) {
        int best_t = 0;
        double best = 0.0;
        for (int t = 0; t <= kGrid; ++t) {
            const double qp = static_cast<double>(t) / kGrid;
            const double val = curves[j][static_cast<std::size_t>(t)] - lambda * qp;
            if (val > best + 1e-15) {
                best = val;
                best_t = t;
            }
        }
        return best_t;
    };
    const auto total_at = [&](double lambda) {
        double tot = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            tot += static_cast<double>(argmax_at(j, lambda)) / kGrid;
        return tot;
    };
    const double capacity = static_cast<double>(inst.k);
    if (total_at(0.0) <= capacity + 1e-12) {
        for (std::size_t j = 0; j < n; ++j) {
            const int t = argmax_at(j, 0.0);
            res.alloc.qprime[j] = static_cast<double>(t) / kGrid;
            res.value += curves[j][static_cast<std::size_t>(t)];
        }
        return res;
    }
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (int t = 1; t <= kGrid; ++t)
            hi = std::max(hi, curves[j][static_cast<std::size_t>(t)] /
                                  (static_cast<double>(t) / kGrid));
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (total_at(mid) > capacity)
            lo = mid;
        else
            hi = mid;
    }
    // At hi the argmaxes fit; distribute what remains to buyers whose curves
    // are flat between their hi- and lo-allocations.
    std::vector<int> t_hi(n);
    double used = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        t_hi[j] = argmax_at(j, hi);
        used += static_cast<double>(t_hi[j]) / kGrid;
    }
    double remaining = capacity - used;
    for (std::size_t j = 0; j < n && remaining > 1e-12; ++j) {
        const int t_lo = argmax_at(j, lo);
        if (t_lo > t_hi[j]) {
            const double extra =
                std::min(remaining, static_cast<double>(t_lo - t_hi[j]) / kGrid);
            t_hi[j] += static_cast<int>(std::round(extra * kGrid));
            remaining -= extra;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        res.alloc.qprime[j] = static_cast<double>(t_hi[j]) / kGrid;
        res.value += curves[j][static_cast<std::size_t>(t_hi[j])];
    }
    return res;
}

struct FeasibilityReport {
    bool ok = true;
    double worst_p = 0.0;
    double worst_rev = 0.0;
};

// Checks the unit-revenue normalization AP(p) <= 1 over the candidate price
// set of ap_optimal. Constructed instances solve AP = 1 by bisection to 1e-9,
// so the tolerance is 1e-7.
inline FeasibilityReport check_feasibility(const Instance& inst,
                                           const std::vector<double>& price_grid = {},
                                           double tol = 1e-7) {
    const auto cand = detail::candidate_prices(inst, price_grid);
    FeasibilityReport rep;
    for (double p : cand) {
        const double rev = ap_revenue(inst, p);
        if (rev > rep.worst_rev) {
            rep.worst_rev = rev;
            rep.worst_p = p;
        }
    }
    rep.ok = rep.worst_rev <= 1.0 + tol;
    return rep;
}

// Necessary condition for AP(p) <= 1 when k >= 4: with m = floor(k/2), the
// aggregate exceedance satisfies sum_j Pr[b_j >= p] <= 4/p on [1/m, 1/2].
inline bool relaxed_constraint_check(const Instance& inst, int grid_points = 2048) {
    validate_instance(inst);
    if (inst.k < 4) throw std::invalid_argument("relaxed_constraint_check: requires k >= 4");
    const int m = inst.k / 2;
    const double lo = 1.0 / m;
    const double hi = 0.5;
    if (lo > hi) return true;
    for (int t = 0; t <= grid_points; ++t) {
        const double p = lo + (hi - lo) * t / grid_points;
        double lhs = 0.0;
        for (const auto& c : inst.cdfs) lhs += c.exceed(p);
        if (lhs > 4.0 / p + 1e-9) return false;
    }
    return true;
}

struct GroupReport {
    double sumA = 0.0;
    double sumB = 0.0;
    double sumC = 0.0;
    std::vector<std::size_t> cardA_t;  // |A_t| for t = 2..m
};

// Partition triangle buyers by apex location relative to 1/m, m = floor(k/2):
//   A: v >= 1/m and vq/(1-q) >= 1/m   (high apex, heavy tail)
//   B: v >= 1/m and vq/(1-q) <  1/m   (high apex, light tail)
//   C: v <  1/m                        (low apex)
// Reports each group's total apex revenue sum v_j q_j and the cardinalities
// of the nested subgroups A_t = {v >= 1/t and vq/(1-q) >= 1/t}, t in [2, m].
inline GroupReport group_partition(const std::vector<Triangle>& triangles, int k) {
    if (k < 4) throw std::invalid_argument("group_partition: requires k >= 4");
    const int m = k / 2;
    GroupReport rep;
    rep.cardA_t.assign(static_cast<std::size_t>(std::max(0, m - 1)), 0);
    const double thr = 1.0 / m;
    for (const auto& tr : triangles) {
        const double tail = tr.q >= 1.0 ? kInf : tr.v * tr.q / (1.0 - tr.q);
        const double apex = tr.v * tr.q;
        if (tr.v < thr) {
            rep.sumC += apex;
        } else if (tail >= thr) {
            rep.sumA += apex;
        } else {
            rep.sumB += apex;
        }
        for (int t = 2; t <= m; ++t)
            if (tr.v >= 1.0 / t && tail >= 1.0 / t)
                ++rep.cardA_t[static_cast<std::size_t>(t - 2)];
    }
    return rep;
}

}  // namespace revgap
