#ifndef LOOPSOLITON_POLY_HPP
#define LOOPSOLITON_POLY_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "errors.hpp"

namespace loopsoliton {

// Coefficients ascending: p(x) = c[0] + c[1] x + ... + c[n] x^n.
struct Poly {
    cvec c;

    std::size_t degree() const { return c.empty() ? 0 : c.size() - 1; }

    cx eval(const cx& x) const {
        cx acc(0.0);
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
        return acc;
    }

    Poly derivative() const {
        Poly d;
        if (c.size() <= 1) {
            d.c = {cx(0.0)};
            return d;
        }
        d.c.resize(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k) d.c[k - 1] = double(k) * c[k];
        return d;
    }

    static Poly from_roots(const cvec& roots) {
        Poly p;
        p.c = {cx(1.0)};
        for (const cx& r : roots) {
            p.c.insert(p.c.begin(), cx(0.0));
            for (std::size_t k = 0; k + 1 < p.c.size(); ++k) p.c[k] -= r * p.c[k + 1];
        }
        return p;
    }
};

inline bool lex_less(const cx& a, const cx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

// Aberth-Ehrlich simultaneous iteration with a fixed deterministic start
// (points on a circle sized by the Cauchy coefficient bound), followed by
// a few Newton steps per root.  Deterministic output order comes from the
// lexicographic sort done by the caller.
inline cvec poly_roots(const Poly& p, int max_iter = 160) {
    const std::size_t n = p.degree();
    if (n == 0) return {};
    cx lead = p.c[n];
    if (std::abs(lead) == 0.0) throw Error("poly_roots: zero leading coefficient");

    double bound = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        bound = std::max(bound, std::abs(p.c[k] / lead));
    double radius = 1.0 + bound;

    cvec z(n);
    for (std::size_t k = 0; k < n; ++k) {
        double ang = 2.0 * pi * (double(k) + 0.354) / double(n) + 0.5;
        z[k] = radius * cx(std::cos(ang), std::sin(ang));
    }

    Poly dp = p.derivative();
    for (int it = 0; it < max_iter; ++it) {
        double moved = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            cx pv = p.eval(z[k]);
            cx dv = dp.eval(z[k]);
            cx ratio = (dv == cx(0.0)) ? cx(0.0) : pv / dv;
            cx sum(0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            cx denom = 1.0 - ratio * sum;
            cx step = (std::abs(denom) < 1e-300) ? ratio : ratio / denom;
            z[k] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14 * radius) break;
    }

    // Newton polish.
    for (std::size_t k = 0; k < n; ++k) {
        for (int it = 0; it < 8; ++it) {
            cx pv = p.eval(z[k]);
            cx dv = dp.eval(z[k]);
            if (std::abs(dv) < 1e-300) break;
            cx step = pv / dv;
            z[k] -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(z[k]))) break;
        }
    }

    std::sort(z.begin(), z.end(), lex_less);
    return z;
}

// Newton's identities: reconstruct power sums p_1..p_n from elementary
// symmetric functions e_1..e_g.  Test oracle for the curve module.
inline cvec power_sums_from_elementary(const cvec& e, std::size_t n) {
    cvec p(n);
    for (std::size_t k = 1; k <= n; ++k) {
        // p_k = e_1 p_{k-1} - e_2 p_{k-2} + ... + (-1)^{k-1} k e_k
        cx s(0.0);
        double sgn = 1.0;
        for (std::size_t j = 1; j < k; ++j) {
            cx ej = (j <= e.size()) ? e[j - 1] : cx(0.0);
            s += sgn * ej * p[k - j - 1];
            sgn = -sgn;
        }
        cx ek = (k <= e.size()) ? e[k - 1] : cx(0.0);
        s += sgn * double(k) * ek;
        p[k - 1] = s;
    }
    return p;
}

} // namespace loopsoliton

#endif
