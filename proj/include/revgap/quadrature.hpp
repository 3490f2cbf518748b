#pragma once

#include <cmath>
#include <stdexcept>

namespace revgap {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evals = 0;
};

namespace detail {

template <class F>
void simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                  double whole, double tol, int depth, QuadResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evals += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol || depth <= 0) {
        if (depth <= 0 && std::fabs(delta) > 15.0 * tol)
            throw std::runtime_error("adaptive_simpson: tolerance not achieved within depth limit");
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::fabs(delta) / 15.0;
        return;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

// Adaptive Simpson integration of f on [a, b] to absolute tolerance tol.
template <class F>
QuadResult adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
    QuadResult out;
    if (a == b) return out;
    if (!(a < b)) throw std::invalid_argument("adaptive_simpson: requires a <= b");
    if (!(tol > 0.0)) throw std::invalid_argument("adaptive_simpson: tol must be positive");
    const double fa = f(a);
    const double fm = f(0.5 * (a + b));
    const double fb = f(b);
    out.evals = 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, out);
    return out;
}

// Scalar bisection for a continuous monotone function: finds x in [lo, hi]
// with f(x) = target, assuming f is nondecreasing. Tolerance is on x.
template <class F>
double bisect_increasing(const F& f, double lo, double hi, double target, double xtol,
                         int max_iter = 200) {
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo > 0.0 && fhi > 0.0) return lo;
    if (flo < 0.0 && fhi < 0.0) return hi;
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) - target <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace revgap
