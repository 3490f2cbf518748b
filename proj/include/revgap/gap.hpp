#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "revgap/gamma.hpp"
#include "revgap/quadrature.hpp"

namespace revgap {

struct GapReport {
    int k = 0;
    double gap = 0.0;
    double c_k = 0.0;         // (gap - 1) * sqrt(k)
    double quad_error = 0.0;  // quadrature estimate + analytic tail bound
    double lb = 0.0;          // series lower bound
    bool bounds_ok = false;   // 1 + 0.1/sqrt(k) <= gap <= 1 + 2/sqrt(k), with slack
    double runtime_ms = 0.0;
};

namespace detail {

// Integrand of the worst-case revenue ratio in the exponential-cancelled
// form h(x) = A B / (x A + k B)^2 with A = Q(k, x), B = 1 - Q(k+1, x).
// The raw partial-Poisson-sum form underflows for k beyond a few dozen;
// this form stays bounded (h -> x^{k-1}/(k+1)! as x -> 0).
struct GapIntegrand {
    int k;
    double operator()(double x) const {
        if (x == 0.0) return k == 1 ? 0.5 : 0.0;
        const double A = reg_gamma_upper(k, x);
        const double B = 1.0 - (A + poisson_pmf(k, x));  // 1 - Q(k+1, x)
        const double den = x * A + k * B;
        if (den <= 0.0) return 0.0;
        return A * std::max(B, 0.0) / (den * den);
    }
};

}  // namespace detail

// Series lower bound on the revenue ratio:
//   lb(k) = 1 + (1/2k) [ sum_{m=k}^{2k-1} Pr[Bin(m,1/2) <= m-k]
//                       + sum_{m=k+1}^{2k-1} (Pr[Bin(m,1/2) <= m-k] - C(m,m-k)/2^m) ].
// Equals the defining integral 1 + (1/k) int_0^inf T_k (1 - T_{k+1}) dx
// exactly; cross-checked against quadrature of that integral in the tests.
// Binomial tails switch to log-space accumulation once 2^-m underflow is in
// reach (k above 500), starting at the largest term with compensated
// summation.
inline double ar_ap_gap_lower(int k) {
    if (k < 1) throw std::invalid_argument("ar_ap_gap_lower: k must be >= 1");
    const auto binom_tail_half = [](long m, long j) {
        if (j < 0) return 0.0;
        if (j >= m) return 1.0;
        if (m <= 1000) {
            double term = std::exp(-static_cast<double>(m) * std::numbers::ln2);
            double sum = term;
            for (long i = 1; i <= j; ++i) {
                term *= static_cast<double>(m - i + 1) / static_cast<double>(i);
                sum += term;
            }
            return sum;
        }
        double term = std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) -
                               std::lgamma(m - j + 1.0) -
                               static_cast<double>(m) * std::numbers::ln2);
        double sum = 0.0, comp = 0.0;
        for (long i = j; i >= 0; --i) {
            const double y = term - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            if (term < sum * 1e-18) break;
            term *= static_cast<double>(i) / static_cast<double>(m - i + 1);
        }
        return sum;
    };
    const auto binom_pmf_half = [](long m, long j) {
        return std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) -
                        std::lgamma(m - j + 1.0) - static_cast<double>(m) * std::numbers::ln2);
    };
    double acc = 0.0;
    for (long m = k; m <= 2L * k - 1; ++m) {
        const double tail = binom_tail_half(m, m - k);
        acc += tail;
        if (m > k) acc += tail - binom_pmf_half(m, m - k);
    }
    return 1.0 + acc / (2.0 * k);
}

// Quadrature of the defining integral behind the series bound:
//   1 + (1/k) int_0^inf Q(k, x) (1 - Q(k+1, x)) dx.
inline double ar_ap_gap_lower_integral(int k, double quad_tol = 1e-10) {
    if (k < 1) throw std::invalid_argument("ar_ap_gap_lower_integral: k must be >= 1");
    const auto f = [&](double x) {
        if (x == 0.0) return 0.0;
        const double A = reg_gamma_upper(k, x);
        const double B = 1.0 - (A + poisson_pmf(k, x));
        return A * std::max(B, 0.0);
    };
    double x_cut = k + std::max(60.0, 25.0 * std::sqrt(static_cast<double>(k)));
    // Truncation loses int_X^inf A dx = k Q(k+1, X) - X Q(k, X) at most.
    for (int tries = 0;; ++tries) {
        const double tail =
            k * reg_gamma_upper(k + 1, x_cut) - x_cut * reg_gamma_upper(k, x_cut);
        if (tail / k <= 0.5 * quad_tol) break;
        if (tries > 60) throw std::runtime_error("ar_ap_gap_lower_integral: tail not small");
        x_cut *= 1.5;
    }
    const double ktol = quad_tol * k;
    double integral = adaptive_simpson(f, 0.0, static_cast<double>(k), 0.5 * ktol).value;
    integral += adaptive_simpson(f, static_cast<double>(k), x_cut, 0.5 * ktol).value;
    return 1.0 + integral / k;
}

// Worst-case AR-over-AP revenue ratio at capacity k, by adaptive quadrature
// of h on the panels [0, k - sqrt(6k)]+, [., k], [k, X_cut]. The split points
// track where the integrand mass sits (a bump of width ~sqrt(k) around k).
inline GapReport ar_ap_gap(int k, double quad_tol = 1e-8) {
    if (k < 1) throw std::invalid_argument("ar_ap_gap: k must be >= 1");
    if (!(quad_tol > 0.0)) throw std::invalid_argument("ar_ap_gap: quad_tol must be > 0");
    const auto t0 = std::chrono::steady_clock::now();
    const detail::GapIntegrand h{k};
    const double kd = static_cast<double>(k);

    double x_cut = kd + std::max(40.0, 20.0 * std::sqrt(kd));
    double tail_bound;
    for (int tries = 0;; ++tries) {
        // For x >= k: B >= 1/2, so h <= A B / (k B)^2 <= 2 A / k^2 and the
        // gap-level tail k int h is at most 2 (k Q(k+1,X) - X Q(k,X)) / k.
        tail_bound = 2.0 *
                     (kd * reg_gamma_upper(k + 1, x_cut) - x_cut * reg_gamma_upper(k, x_cut)) /
                     kd;
        if (tail_bound <= 0.5 * quad_tol) break;
        if (tries > 60) throw std::runtime_error("ar_ap_gap: tolerance not achieved (tail)");
        x_cut *= 1.5;
    }

    const double split = std::max(0.0, kd - std::sqrt(6.0 * kd));
    const double panel_tol = quad_tol / (3.0 * kd);
    double integral = 0.0;
    double err = 0.0;
    for (auto [a, b] : {std::pair{0.0, split}, std::pair{split, kd}, std::pair{kd, x_cut}}) {
        if (b <= a) continue;
        const auto q = adaptive_simpson(h, a, b, panel_tol);
        integral += q.value;
        err += q.error_estimate;
    }

    GapReport rep;
    rep.k = k;
    rep.gap = 1.0 + kd * integral;
    rep.c_k = (rep.gap - 1.0) * std::sqrt(kd);
    rep.quad_error = kd * err + tail_bound;
    rep.lb = ar_ap_gap_lower(k);
    const double rt = std::sqrt(kd);
    rep.bounds_ok = rep.gap >= 1.0 + 0.1 / rt - rep.quad_error &&
                    rep.gap <= 1.0 + 2.0 / rt + rep.quad_error;
    rep.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return rep;
}

inline bool check_sqrt_bounds(int k, double quad_tol = 1e-8) {
    return ar_ap_gap(k, quad_tol).bounds_ok;
}

// Gap table for k = 1..k_max, optionally fanned out across threads.
inline std::vector<GapReport> gap_table(int k_max, double quad_tol = 1e-8, int threads = 1) {
    if (k_max < 1) throw std::invalid_argument("gap_table: k_max must be >= 1");
    std::vector<GapReport> out(static_cast<std::size_t>(k_max));
    if (threads <= 1) {
        for (int k = 1; k <= k_max; ++k) out[static_cast<std::size_t>(k - 1)] = ar_ap_gap(k, quad_tol);
        return out;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{1};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int k = next.fetch_add(1); k <= k_max; k = next.fetch_add(1))
                out[static_cast<std::size_t>(k - 1)] = ar_ap_gap(k, quad_tol);
        });
    for (auto& th : pool) th.join();
    return out;
}

// Closed-form bound on the EAR-over-AP ratio for k in {1,2,3}: 1 + V(p*)
// where Q(p*) = k,
//   V(p) = p ln(p^2/(p^2-1)),
//   Q(p) = ln(p^2/(p^2-1)) - (1/2) sum_{t>=1} p^{-2t}/t^2.
// Q decreases from +inf (log singularity at p -> 1+) to 0, so a bisection
// bracket always exists.
inline double ear_ap_upper_small_k(int k) {
    if (k < 1 || k > 3) throw std::invalid_argument("ear_ap_upper_small_k: k must be 1, 2, or 3");
    const auto logterm = [](double p) { return std::log(p * p / (p * p - 1.0)); };
    const auto Qfun = [&](double p) {
        double series = 0.0;
        const double r = 1.0 / (p * p);
        double pw = 1.0;
        for (int t = 1; t < 100000; ++t) {
            pw *= r;
            const double term = pw / (static_cast<double>(t) * t);
            series += term;
            if (term < 1e-15) break;
        }
        return logterm(p) - 0.5 * series;
    };
    double lo = 1.0 + 1e-9;
    double hi = 2.0;
    while (Qfun(hi) >= static_cast<double>(k)) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (Qfun(mid) >= static_cast<double>(k))
            lo = mid;
        else
            hi = mid;
    }
    const double p_star = 0.5 * (lo + hi);
    return 1.0 + p_star * logterm(p_star);
}

// Order-statistic cdfs of the infinite-buyer worst-case instance at price x:
// solves 1 = x (k - sum_{i in [k]} Dhat_i) for Dhat_1 in (0, 1), with
// Dhat_i = sum_{t < i} Dhat_1 (-ln Dhat_1)^t / t!. In terms of z = -ln Dhat_1
// the constraint reads x (z Q(k,z) + k (1 - Q(k+1,z))) = 1 and the left side
// is increasing in z. Entries are filled by the direct partial sums (t_func);
// reg_gamma_upper provides the independent cross-check.
inline std::vector<double> limit_order_stats(int k, double x) {
    if (k < 1) throw std::invalid_argument("limit_order_stats: k must be >= 1");
    if (!(x > 1.0 / k))
        throw std::domain_error("limit_order_stats: price must exceed 1/k");
    const double target = 1.0 / x;  // in (0, k)
    const auto S = [&](double z) {
        const double A = reg_gamma_upper(k, z);
        const double B = 1.0 - (A + poisson_pmf(k, z));
        return z * A + k * std::max(B, 0.0);
    };
    double lo = 0.0;
    double hi = 1.0;
    while (S(hi) < target) {
        hi *= 2.0;
        if (hi > 1e9) throw std::runtime_error("limit_order_stats: bracket expansion failed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (S(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    const double z = 0.5 * (lo + hi);
    std::vector<double> d(static_cast<std::size_t>(k) + 1);
    for (int i = 1; i <= k + 1; ++i) d[static_cast<std::size_t>(i - 1)] = t_func(i, z);
    return d;
}

}  // namespace revgap
