#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "revgap/cdf.hpp"

namespace revgap {

// Instance: k homogeneous units for sale to n independent buyers.
struct Instance {
    std::vector<Cdf> cdfs;
    int k = 1;

    std::size_t n() const { return cdfs.size(); }
};

inline void validate_instance(const Instance& inst) {
    if (inst.cdfs.empty()) throw std::invalid_argument("Instance: needs at least one buyer");
    if (inst.k < 1) throw std::invalid_argument("Instance: k must be >= 1");
}

// Pmf of the number of successes among independent Bernoulli trials with the
// given success probabilities. O(n^2) convolution: fold each trial into the
// running pmf, starting from the point mass at zero.
inline std::vector<double> pbd_pmf(const std::vector<double>& s) {
    if (s.empty()) throw std::invalid_argument("pbd_pmf: needs at least one probability");
    for (double v : s)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("pbd_pmf: probabilities must be in [0,1]");
    std::vector<double> pmf{1.0};
    pmf.reserve(s.size() + 1);
    for (double p : s) {
        pmf.push_back(0.0);
        for (std::size_t t = pmf.size() - 1; t > 0; --t)
            pmf[t] = pmf[t] * (1.0 - p) + pmf[t - 1] * p;
        pmf[0] *= 1.0 - p;
    }
    return pmf;
}

// Same fold with the count saturated at `cap`: the last entry aggregates
// "cap or more". O(n * cap) and exact for every entry below the cap.
inline std::vector<double> pbd_pmf_capped(const std::vector<double>& s, int cap) {
    if (cap < 1) throw std::invalid_argument("pbd_pmf_capped: cap must be >= 1");
    std::vector<double> pmf(static_cast<std::size_t>(cap) + 1, 0.0);
    pmf[0] = 1.0;
    std::size_t top = 0;
    for (double p : s) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("pbd_pmf_capped: probabilities must be in [0,1]");
        if (top < static_cast<std::size_t>(cap)) ++top;
        for (std::size_t t = top; t > 0; --t) {
            const double stay = t == static_cast<std::size_t>(cap) ? pmf[t] : pmf[t] * (1.0 - p);
            pmf[t] = stay + pmf[t - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    return pmf;
}

// Fold one extra Bernoulli(p) into a capped pmf in place.
inline void fold_capped(std::vector<double>& pmf, double p) {
    const std::size_t cap = pmf.size() - 1;
    for (std::size_t t = cap; t > 0; --t) {
        const double stay = t == cap ? pmf[t] : pmf[t] * (1.0 - p);
        pmf[t] = stay + pmf[t - 1] * p;
    }
    pmf[0] *= 1.0 - p;
}

// E[min(count, cap)] computed from a pmf whose last entry aggregates the
// event "cap or more".
inline double expected_min_capped(const std::vector<double>& pmf) {
    double e = 0.0;
    for (std::size_t t = 1; t < pmf.size(); ++t) e += static_cast<double>(t) * pmf[t];
    return e;
}

// D_i(x) = Pr[fewer than i buyers bid at least x], the cdf of the i-th highest
// bid. i ranges over [1, n+1]; D_{n+1} is identically 1.
inline double order_stat_cdf(const Instance& inst, double x, int i) {
    validate_instance(inst);
    const int n = static_cast<int>(inst.n());
    if (i < 1 || i > n + 1)
        throw std::out_of_range("order_stat_cdf: order index out of range");
    if (i == n + 1) return 1.0;
    std::vector<double> s;
    s.reserve(inst.n());
    for (const auto& c : inst.cdfs) s.push_back(c.exceed(x));
    const auto pmf = pbd_pmf_capped(s, i);
    double acc = 0.0;
    for (int t = 0; t < i; ++t) acc += pmf[static_cast<std::size_t>(t)];
    return acc < 1.0 ? acc : 1.0;
}

// Pr[Z = t]^2 >= Pr[Z = t-1] * Pr[Z = t+1] for all t, within tolerance.
// Holds for every Bernoulli-sum pmf.
inline bool check_log_concavity(const std::vector<double>& pmf, double tol = 1e-12) {
    for (std::size_t t = 1; t + 1 < pmf.size(); ++t)
        if (pmf[t] * pmf[t] < pmf[t - 1] * pmf[t + 1] - tol) return false;
    return true;
}

}  // namespace revgap
