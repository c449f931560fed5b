#ifndef LOOPSOLITON_CURVE_HPP
#define LOOPSOLITON_CURVE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "errors.hpp"
#include "poly.hpp"

namespace loopsoliton {

// Odd hyperelliptic model y^2 = f(x), deg f = 2g+1, monic, with one point
// at infinity.  Branch points are the roots of f, sorted lexicographically
// by (Re, Im) so downstream cycle constructions are deterministic.
struct HyperellipticCurve {
    std::size_t genus = 0;
    cvec lambda;        // lambda[0..2g+1], lambda[2g+1] == 1
    cvec branch_points; // b[0..2g], sorted by (Re, Im)

    cx eval_f(const cx& x) const {
        cx acc(0.0);
        for (std::size_t k = lambda.size(); k-- > 0;) acc = acc * x + lambda[k];
        return acc;
    }

    cx eval_fprime(const cx& x) const {
        cx acc(0.0);
        for (std::size_t k = lambda.size() - 1; k >= 1; --k)
            acc = acc * x + double(k) * lambda[k];
        return acc;
    }

    // Product form; significantly better conditioned near a branch point.
    cx eval_f_from_roots(const cx& x) const {
        cx acc(1.0);
        for (const cx& b : branch_points) acc *= (x - b);
        return acc;
    }

    double branch_scale() const {
        double m = 0.0;
        for (const cx& b : branch_points) m = std::max(m, std::abs(b));
        return m;
    }

    double separation_tolerance() const { return 1e-8 * (1.0 + branch_scale()); }

    double min_branch_separation() const {
        double m = 1e300;
        for (std::size_t i = 0; i < branch_points.size(); ++i)
            for (std::size_t j = i + 1; j < branch_points.size(); ++j)
                m = std::min(m, std::abs(branch_points[i] - branch_points[j]));
        return m;
    }
};

struct CurvePoint {
    cx x;
    cx y;
};

// g points with pairwise-distinct x (non-special position).
struct Divisor {
    std::vector<CurvePoint> points;
    std::size_t size() const { return points.size(); }
};

inline cx eval_f(const HyperellipticCurve& c, const cx& x) { return c.eval_f(x); }

inline bool point_on_curve(const HyperellipticCurve& c, const CurvePoint& p,
                           double tol = 1e-9) {
    cx fx = c.eval_f(p.x);
    return std::abs(p.y * p.y - fx) <= tol * (1.0 + std::abs(fx));
}

inline HyperellipticCurve make_curve(const cvec& lambda) {
    if (lambda.size() < 4 || lambda.size() % 2 != 0)
        throw Error("make_curve: need 2g+2 coefficients with g >= 1");
    const std::size_t g = lambda.size() / 2 - 1;
    if (std::abs(lambda.back() - cx(1.0)) > 1e-14)
        throw BadLeadingCoefficient("make_curve: leading coefficient must be 1");

    HyperellipticCurve c;
    c.genus = g;
    c.lambda = lambda;

    Poly f{lambda};
    c.branch_points = poly_roots(f);

    double septol = c.separation_tolerance();
    if (c.min_branch_separation() < septol)
        throw DegenerateCurve("make_curve: branch points closer than separation tolerance");

    // Re-expansion check: the root product must reproduce f at g+2 probes.
    double scale = 1.0 + c.branch_scale();
    for (std::size_t m = 0; m < g + 2; ++m) {
        cx probe = scale * cx(0.37 + 0.61 * double(m), 0.29 + 0.11 * double(m));
        cx direct = c.eval_f(probe);
        cx from_roots = c.eval_f_from_roots(probe);
        if (std::abs(direct - from_roots) > 1e-10 * (1.0 + std::abs(direct)))
            throw Error("make_curve: root re-expansion check failed");
    }
    return c;
}

// y = sheet * sqrt(f(x)) with the principal branch; a branch point gives y = 0.
inline CurvePoint lift(const HyperellipticCurve& c, const cx& x, int sheet) {
    cx y = std::sqrt(c.eval_f_from_roots(x));
    return CurvePoint{x, double(sheet) * y};
}

// F(x) = prod_i (x - x_i) over the divisor x-coordinates; monic, ascending.
inline cvec F_poly(const Divisor& d) {
    cvec roots;
    roots.reserve(d.size());
    for (const auto& p : d.points) roots.push_back(p.x);
    return Poly::from_roots(roots).c;
}

inline cx eval_F(const Divisor& d, const cx& x) {
    cx acc(1.0);
    for (const auto& p : d.points) acc *= (x - p.x);
    return acc;
}

// q_n = sum_i x_i^n for n = 1..N.
inline cvec power_sums(const Divisor& d, std::size_t n_max) {
    cvec q(n_max, cx(0.0));
    for (const auto& p : d.points) {
        cx pw(1.0);
        for (std::size_t n = 0; n < n_max; ++n) {
            pw *= p.x;
            q[n] += pw;
        }
    }
    return q;
}

// e_1..e_g with the usual signs: F(x) = x^g - e_1 x^{g-1} + e_2 x^{g-2} - ...
inline cvec elementary_symmetric(const Divisor& d) {
    cvec F = F_poly(d);
    const std::size_t g = d.size();
    cvec e(g);
    for (std::size_t i = 1; i <= g; ++i) {
        double sign = (i % 2 == 0) ? 1.0 : -1.0;
        e[i - 1] = sign * F[g - i];
    }
    return e;
}

inline void validate_divisor(const HyperellipticCurve& c, const Divisor& d,
                             double collision_tol = 1e-9) {
    if (d.size() != c.genus) throw Error("divisor: expected g points");
    for (const auto& p : d.points)
        if (!point_on_curve(c, p)) throw Error("divisor: point not on curve");
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j)
            if (std::abs(d.points[i].x - d.points[j].x) < collision_tol)
                throw SpecialDivisor("divisor: coincident x-coordinates");
}

} // namespace loopsoliton

#endif
