#ifndef LOOPSOLITON_ELASTICA_HPP
#define LOOPSOLITON_ELASTICA_HPP

#include <cmath>
#include <vector>

#include "common.hpp"
#include "curve.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace loopsoliton {

// Complete elliptic integrals by the arithmetic-geometric mean.
inline double agm_mean(double a, double b) {
    for (int i = 0; i < 80 && std::abs(a - b) > 1e-17 * (std::abs(a) + 1e-300); ++i) {
        double a2 = 0.5 * (a + b), b2 = std::sqrt(a * b);
        a = a2;
        b = b2;
    }
    return a;
}

inline double elliptic_K(double k) {
    return pi / (2.0 * agm_mean(1.0, std::sqrt(1.0 - k * k)));
}

inline double elliptic_E(double k) {
    double a = 1.0, b = std::sqrt(1.0 - k * k), c = k;
    double sum = 0.5 * c * c;
    double pw = 0.5; // 2^{i-1} with i starting at 1
    for (int i = 0; i < 80 && std::abs(c) > 1e-17; ++i) {
        double a2 = 0.5 * (a + b), b2 = std::sqrt(a * b);
        c = c * c / (4.0 * a2); // = (a-b)/2 without the cancellation
        a = a2;
        b = b2;
        pw *= 2.0;
        sum += pw * c * c;
    }
    return (pi / (2.0 * a)) * (1.0 - sum);
}

// Jacobi sn, cn, dn for real arguments via the descending Landen chain.
struct JacobiSCD {
    double sn, cn, dn;
};

inline JacobiSCD jacobi_scd(double u, double k) {
    if (k < 1e-12) return {std::sin(u), std::cos(u), 1.0};
    std::vector<double> a_seq{1.0}, c_seq{k};
    double a = 1.0, b = std::sqrt(1.0 - k * k), c = k;
    int n = 0;
    while (std::abs(c) > 1e-16 && n < 60) {
        double a2 = 0.5 * (a + b), b2 = std::sqrt(a * b);
        c = 0.5 * (a - b);
        a = a2;
        b = b2;
        ++n;
        a_seq.push_back(a);
        c_seq.push_back(c);
    }
    double phi = std::ldexp(a * u, n); // 2^n a_n u
    for (int i = n; i >= 1; --i) {
        double ratio = c_seq[std::size_t(i)] / a_seq[std::size_t(i)] * std::sin(phi);
        ratio = std::max(-1.0, std::min(1.0, ratio));
        phi = 0.5 * (std::asin(ratio) + phi);
    }
    JacobiSCD out;
    out.sn = std::sin(phi);
    out.cn = std::cos(phi);
    out.dn = std::sqrt(std::max(0.0, 1.0 - k * k * out.sn * out.sn));
    return out;
}

// Closed figure-eight elastica: curvature kappa(s) = A cn(alpha s, k) with
// alpha = 4K(k) on the period-1 parameter, A = 8 k K(k), and k fixed by the
// closure condition 2E(k) = K(k).  The tangent angle has the closed form
// theta(s) = 2 asin(k sn(4K s, k)), so the loop closes with zero total
// turning; closure of Z itself is re-verified by quadrature.
struct FigureEight {
    double k = 0.0;
    double A = 0.0;     // curvature amplitude (period-1 units)
    double alpha = 0.0; // 4K(k)
};

inline FigureEight solve_figure_eight() {
    double lo = 0.8, hi = 0.99;
    auto h = [](double k) { return 2.0 * elliptic_E(k) - elliptic_K(k); };
    double flo = h(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = h(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-16) break;
    }
    FigureEight fe;
    fe.k = 0.5 * (lo + hi);
    fe.alpha = 4.0 * elliptic_K(fe.k);
    fe.A = 8.0 * fe.k * elliptic_K(fe.k);
    return fe;
}

inline double figure_eight_theta(const FigureEight& fe, double s) {
    JacobiSCD j = jacobi_scd(fe.alpha * s, fe.k);
    return 2.0 * std::asin(fe.k * j.sn);
}

// Samples the figure-eight as a closed unit-speed LoopSample on s in [0,1]
// with a duplicated endpoint row.  Z by composite Gauss-Legendre of
// exp(i theta).
inline LoopSample figure_eight_loop(const FigureEight& fe, std::size_t n_samples) {
    const GLRule& rule = gl_rule(16);
    LoopSample out;
    out.s.resize(n_samples + 1);
    out.Z.resize(n_samples + 1);
    out.q.resize(n_samples + 1);
    out.dZ.resize(n_samples + 1);
    cx z(0.0);
    for (std::size_t j = 0; j <= n_samples; ++j) {
        double s0 = double(j == 0 ? 0 : j - 1) / double(n_samples);
        double s1 = double(j) / double(n_samples);
        if (j > 0) {
            cx acc(0.0);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                double t = s0 + (s1 - s0) * rule.nodes[q];
                double th = figure_eight_theta(fe, t);
                acc += rule.weights[q] * cx(std::cos(th), std::sin(th));
            }
            z += acc * (s1 - s0);
        }
        double th = figure_eight_theta(fe, s1);
        double kap = fe.A * jacobi_scd(fe.alpha * s1, fe.k).cn;
        out.s[j] = s1;
        out.Z[j] = z;
        out.dZ[j] = cx(std::cos(th), std::sin(th));
        out.q[j] = 0.5 * kap;
    }
    return out;
}

// The genus-1 curve traced by a cn-type soliton in the natural u_g units:
// kappa(s) = 4 k cn(2 s, k), divisor x(s) = -exp(i theta(s)) on
//   y^2 = x (x^2 + (2 - 4 k^2) x + 1),
// so |x - b_r| = 1 with b_r = 0 and the u_g flow preserves |F(b_r)| = 1.
struct CnCurveData {
    HyperellipticCurve curve;
    std::size_t r = 1; // branch point 0 is lexicographically first
    double k = 0.0;
};

inline CnCurveData cn_soliton_curve(double k) {
    CnCurveData out;
    out.k = k;
    out.curve = make_curve({cx(0.0), cx(1.0), cx(2.0 - 4.0 * k * k), cx(1.0)});
    // sorted branch points: 0 first iff Re of the conjugate pair is positive
    // (2k^2 - 1 > 0); keep k > 1/sqrt(2) for that regime.
    std::size_t idx = 0;
    for (std::size_t j = 0; j < 3; ++j)
        if (std::abs(out.curve.branch_points[j]) < 1e-12) idx = j + 1;
    out.r = idx;
    return out;
}

// Divisor of the cn soliton at parameter s.
inline Divisor cn_soliton_divisor(const CnCurveData& cd, double s) {
    JacobiSCD j = jacobi_scd(2.0 * s, cd.k);
    double theta = 2.0 * std::asin(cd.k * j.sn);
    cx eith(std::cos(theta), std::sin(theta));
    cx x = -eith;
    cx y = -2.0 * iu * cd.k * j.cn * eith;
    return Divisor{{CurvePoint{x, y}}};
}

// Half curvature of the cn soliton: q(s) = 2 k cn(2 s, k).
inline double cn_soliton_q(const CnCurveData& cd, double s) {
    return 2.0 * cd.k * jacobi_scd(2.0 * s, cd.k).cn;
}

} // namespace loopsoliton

#endif
