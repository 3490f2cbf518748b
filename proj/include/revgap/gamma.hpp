#pragma once

#include <cmath>
#include <stdexcept>

namespace revgap {

// Regularized upper incomplete gamma function Q(n, x) = Γ(n, x) / Γ(n) for
// integer shape n >= 1. Uses the ascending series for P(n, x) = 1 - Q(n, x)
// when x < n + 1 (where Q stays far from 0, so the subtraction is safe) and
// the modified Lentz continued fraction for Q otherwise.
inline double reg_gamma_upper(int n, double x) {
    if (n < 1) throw std::invalid_argument("reg_gamma_upper: shape must be >= 1");
    if (!(x >= 0.0)) throw std::invalid_argument("reg_gamma_upper: x must be >= 0");
    if (x == 0.0) return 1.0;
    const double a = static_cast<double>(n);
    const double lg = std::lgamma(a);
    const double prefactor = std::exp(-x + a * std::log(x) - lg);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int i = 1; i < 100000; ++i) {
            term *= x / (a + i);
            sum += term;
            if (term < sum * 1e-17) return 1.0 - sum * prefactor;
        }
        throw std::runtime_error("reg_gamma_upper: series did not converge");
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) return h * prefactor;
    }
    throw std::runtime_error("reg_gamma_upper: continued fraction did not converge");
}

// Poisson probability e^{-x} x^n / n!, evaluated in log space.
inline double poisson_pmf(int n, double x) {
    if (n < 0) return 0.0;
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-x + n * std::log(x) - std::lgamma(n + 1.0));
}

// Partial Poisson sum T_i(x) = sum_{t < i} e^{-x} x^t / t!. Equals Q(i, x)
// but is computed by direct summation, so the two serve as independent
// cross-checks of each other. Summation starts at the largest term to keep
// the recurrence stable when e^{-x} underflows.
inline double t_func(int i, double x) {
    if (i < 1) throw std::invalid_argument("t_func: index must be >= 1");
    if (!(x >= 0.0)) throw std::invalid_argument("t_func: x must be >= 0");
    if (x == 0.0) return 1.0;
    int peak = static_cast<int>(std::floor(x));
    if (peak > i - 1) peak = i - 1;
    const double top = poisson_pmf(peak, x);
    if (top == 0.0) return x > i ? 0.0 : 1.0;
    double sum = top;
    double term = top;
    for (int t = peak - 1; t >= 0; --t) {
        term *= (t + 1) / x;
        sum += term;
        if (term < sum * 1e-18) break;
    }
    term = top;
    for (int t = peak + 1; t < i; ++t) {
        term *= x / t;
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum < 1.0 ? sum : 1.0;
}

}  // namespace revgap
