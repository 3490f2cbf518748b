#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace revgap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One buyer's value distribution, exposed as a left-continuous cdf
// F(x) = Pr[b < x], so the willingness to pay at price p is
// exceed(p) = 1 - F(p) = Pr[b >= p], including atoms sitting exactly at p.
//
// Families:
//   PointMass(value)     all mass at `value`
//   Triangle(v, q)       F(x) = (1-q)x / ((1-q)x + vq) on [0, v], atom q at v;
//                        the optimal posted price is v with revenue v*q
//   EqualRevenue(scale)  F(x) = 1 - scale/x above scale; p * exceed(p) = scale
//                        at every p >= scale, support unbounded
//   Tabulated(xs, ps)    discrete, atoms at the knots, ps[i] = Pr[b <= xs[i]]

struct PointMass {
    double value;
};

struct Triangle {
    double v;
    double q;
};

struct EqualRevenue {
    double scale;
};

struct Tabulated {
    std::vector<double> xs;
    std::vector<double> ps;
};

struct MonopolyPoint {
    double v = 0.0;
    double q = 0.0;
    // False when the revenue supremum is not attained at any finite price
    // (equal-revenue tails: q -> 0 with v -> infinity).
    bool bounded = true;
};

class Cdf {
  public:
    Cdf(PointMass pm) : rep_(pm) {
        if (!(pm.value >= 0.0)) throw std::invalid_argument("PointMass: value must be >= 0");
    }
    Cdf(Triangle tr) : rep_(tr) {
        if (!(tr.v >= 0.0)) throw std::invalid_argument("Triangle: v must be >= 0");
        if (!(tr.q >= 0.0 && tr.q <= 1.0)) throw std::invalid_argument("Triangle: q must be in [0,1]");
    }
    Cdf(EqualRevenue er) : rep_(er) {
        if (!(er.scale > 0.0)) throw std::invalid_argument("EqualRevenue: scale must be > 0");
    }
    Cdf(Tabulated tb) : rep_(std::move(tb)) {
        const auto& t = std::get<Tabulated>(rep_);
        if (t.xs.empty() || t.xs.size() != t.ps.size())
            throw std::invalid_argument("Tabulated: xs and ps must be nonempty and equal length");
        for (std::size_t i = 0; i < t.xs.size(); ++i) {
            if (!(t.xs[i] >= 0.0)) throw std::invalid_argument("Tabulated: knots must be >= 0");
            if (i > 0 && !(t.xs[i] > t.xs[i - 1]))
                throw std::invalid_argument("Tabulated: knots must be strictly increasing");
            if (!(t.ps[i] >= 0.0 && t.ps[i] <= 1.0 + 1e-12))
                throw std::invalid_argument("Tabulated: probabilities must be in [0,1]");
            if (i > 0 && t.ps[i] < t.ps[i - 1] - 1e-15)
                throw std::invalid_argument("Tabulated: probabilities must be nondecreasing");
        }
        if (std::fabs(t.ps.back() - 1.0) > 1e-9)
            throw std::invalid_argument("Tabulated: final probability must be 1");
        std::get<Tabulated>(rep_).ps.back() = 1.0;
    }

    bool is_point_mass() const { return std::holds_alternative<PointMass>(rep_); }
    bool is_triangle() const { return std::holds_alternative<Triangle>(rep_); }
    bool is_equal_revenue() const { return std::holds_alternative<EqualRevenue>(rep_); }
    bool is_tabulated() const { return std::holds_alternative<Tabulated>(rep_); }

    const PointMass& as_point_mass() const { return std::get<PointMass>(rep_); }
    const Triangle& as_triangle() const { return std::get<Triangle>(rep_); }
    const EqualRevenue& as_equal_revenue() const { return std::get<EqualRevenue>(rep_); }
    const Tabulated& as_tabulated() const { return std::get<Tabulated>(rep_); }

    // F(x) = Pr[b < x], left-continuous.
    double eval(double x) const {
        if (!(x >= 0.0)) throw std::invalid_argument("Cdf::eval: x must be >= 0");
        if (x == 0.0) return 0.0;
        if (const auto* pm = std::get_if<PointMass>(&rep_)) return x <= pm->value ? 0.0 : 1.0;
        if (const auto* tr = std::get_if<Triangle>(&rep_)) {
            if (x > tr->v) return 1.0;
            const double num = (1.0 - tr->q) * x;
            const double den = num + tr->v * tr->q;
            return den > 0.0 ? num / den : 0.0;
        }
        if (const auto* er = std::get_if<EqualRevenue>(&rep_))
            return x <= er->scale ? 0.0 : 1.0 - er->scale / x;
        const auto& tb = std::get<Tabulated>(rep_);
        auto it = std::lower_bound(tb.xs.begin(), tb.xs.end(), x);
        // First knot >= x; the cdf value just below x is carried by the knot before it.
        if (it == tb.xs.begin()) return 0.0;
        return tb.ps[static_cast<std::size_t>(it - tb.xs.begin()) - 1];
    }

    // Pr[b >= p]; ties at b = p count as willing to pay.
    double exceed(double p) const { return 1.0 - eval(p); }

    // Generalized inverse inf{x : eval(x) >= y}, used for inverse-cdf sampling.
    double inverse(double y) const {
        if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("Cdf::inverse: y must be in [0,1]");
        if (y == 0.0) return 0.0;
        if (const auto* pm = std::get_if<PointMass>(&rep_)) return pm->value;
        if (const auto* tr = std::get_if<Triangle>(&rep_)) {
            if (y > 1.0 - tr->q) return tr->v;
            return tr->v * tr->q * y / ((1.0 - tr->q) * (1.0 - y));
        }
        if (const auto* er = std::get_if<EqualRevenue>(&rep_))
            return y < 1.0 ? er->scale / (1.0 - y) : kInf;
        const auto& tb = std::get<Tabulated>(rep_);
        auto it = std::lower_bound(tb.ps.begin(), tb.ps.end(), y);
        if (it == tb.ps.end()) return tb.xs.back();
        return tb.xs[static_cast<std::size_t>(it - tb.ps.begin())];
    }

    // Sale-price inverse sup{p : exceed(p) >= qp} for qp in (0, 1]: the highest
    // price at which the buyer still accepts with probability at least qp.
    // Coincides with inverse(1 - qp) except exactly at atom boundaries, where
    // this branch is the revenue-correct one (a point mass at b sells with
    // probability 1 at price b, not at price 0).
    double sale_price(double qp) const {
        if (!(qp > 0.0 && qp <= 1.0))
            throw std::invalid_argument("Cdf::sale_price: quantile must be in (0,1]");
        if (const auto* pm = std::get_if<PointMass>(&rep_)) return pm->value;
        if (const auto* tr = std::get_if<Triangle>(&rep_)) {
            if (qp <= tr->q) return tr->v;
            if (tr->q == 0.0) return 0.0;
            return tr->v * tr->q * (1.0 - qp) / ((1.0 - tr->q) * qp);
        }
        if (const auto* er = std::get_if<EqualRevenue>(&rep_)) return er->scale / qp;
        const auto& tb = std::get<Tabulated>(rep_);
        // exceed at knot xs[i] is 1 - ps[i-1], nonincreasing in i; find the last
        // knot whose exceedance still clears qp.
        std::size_t lo = 0, hi = tb.xs.size();
        while (hi - lo > 1) {
            std::size_t mid = lo + (hi - lo) / 2;
            if (1.0 - tb.ps[mid - 1] >= qp)
                lo = mid;
            else
                hi = mid;
        }
        return tb.xs[lo];
    }

    double support_max() const {
        if (const auto* pm = std::get_if<PointMass>(&rep_)) return pm->value;
        if (const auto* tr = std::get_if<Triangle>(&rep_)) return tr->v;
        if (std::holds_alternative<EqualRevenue>(rep_)) return kInf;
        return std::get<Tabulated>(rep_).xs.back();
    }

  private:
    std::variant<PointMass, Triangle, EqualRevenue, Tabulated> rep_;
};

inline double cdf_eval(const Cdf& cdf, double x) { return cdf.eval(x); }

// Revenue-optimal posted price and its sale probability. Ties are broken
// toward the smallest sale probability (largest price). The equal-revenue
// family attains its supremum only in the limit and is reported as unbounded.
inline MonopolyPoint monopoly_point(const Cdf& cdf) {
    if (cdf.is_point_mass()) return {cdf.as_point_mass().value, 1.0, true};
    if (cdf.is_triangle()) {
        const auto& tr = cdf.as_triangle();
        if (tr.q == 0.0) return {tr.v, 0.0, true};
        return {tr.v, tr.q, true};
    }
    if (cdf.is_equal_revenue()) return {kInf, 0.0, false};
    const auto& tb = cdf.as_tabulated();
    // The revenue p * exceed(p) is piecewise linear in p with increasing slope
    // toward each knot, so scanning knots is exact. Scan ascending and replace
    // the incumbent on any revenue within relative tolerance, so exact ties
    // resolve to the largest price (smallest sale probability).
    double best_rev = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < tb.xs.size(); ++i) {
        const double willing = 1.0 - (i == 0 ? 0.0 : tb.ps[i - 1]);
        const double rev = tb.xs[i] * willing;
        const double tol = 1e-12 * std::max(1.0, best_rev);
        if (rev > best_rev + tol) {
            best_rev = rev;
            best_i = i;
        } else if (rev >= best_rev - tol && willing > 0.0) {
            best_i = i;
        }
    }
    const double q = 1.0 - (best_i == 0 ? 0.0 : tb.ps[best_i - 1]);
    return {tb.xs[best_i], q, true};
}

// True iff the virtual value x - (1 - F(x)) / f(x) is nondecreasing along the
// grid. Triangle, PointMass and EqualRevenue are regular in closed form; the
// tabulated kind estimates the density by central differences on the grid.
// A vanishing density strictly inside the support is reported as an error
// rather than passed through as a huge virtual value.
inline bool is_regular(const Cdf& cdf, const std::vector<double>& grid) {
    if (cdf.is_triangle() || cdf.is_point_mass() || cdf.is_equal_revenue()) return true;
    if (grid.size() < 3) throw std::invalid_argument("is_regular: grid needs at least 3 points");
    std::vector<double> phi;
    phi.reserve(grid.size());
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double x = grid[i];
        const double fx = cdf.eval(x);
        if (fx <= 1e-12 || fx >= 1.0 - 1e-12) continue;
        const double dx = grid[i + 1] - grid[i - 1];
        const double dens = (cdf.eval(grid[i + 1]) - cdf.eval(grid[i - 1])) / dx;
        if (dens <= 0.0)
            throw std::domain_error("is_regular: degenerate density inside the support");
        phi.push_back(x - (1.0 - fx) / dens);
    }
    for (std::size_t i = 1; i < phi.size(); ++i)
        if (phi[i] < phi[i - 1] - 1e-9 * (1.0 + std::fabs(phi[i - 1]))) return false;
    return true;
}

// First-order stochastic dominance of f over g, checked pointwise on the grid:
// F_f(x) <= F_g(x) everywhere (f shifts mass toward higher values).
inline bool dominates(const Cdf& f, const Cdf& g, const std::vector<double>& grid) {
    for (double x : grid)
        if (f.eval(x) > g.eval(x) + 1e-12) return false;
    return true;
}

// Discretize a continuous distribution onto the given knots. `cdf_leq` must
// return Pr[b <= x] of the source. Mass in (xs[i], xs[i+1]] collapses down
// onto the knot xs[i], so the exceedance Pr[b >= xs[i]] of the result matches
// the source exactly at every knot; revenue formulas evaluated at knots are
// then grid-exact rather than biased by rounding inside the cells.
inline Tabulated tabulate_continuous(const std::function<double(double)>& cdf_leq,
                                     std::vector<double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("tabulate_continuous: need at least 2 knots");
    Tabulated tb;
    tb.xs = std::move(xs);
    tb.ps.resize(tb.xs.size());
    for (std::size_t i = 0; i + 1 < tb.xs.size(); ++i) tb.ps[i] = cdf_leq(tb.xs[i + 1]);
    tb.ps.back() = 1.0;
    for (std::size_t i = 1; i < tb.ps.size(); ++i)
        tb.ps[i] = std::max(tb.ps[i], tb.ps[i - 1]);
    return tb;
}

}  // namespace revgap
