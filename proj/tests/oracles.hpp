#ifndef LOOPSOLITON_TESTS_ORACLES_HPP
#define LOOPSOLITON_TESTS_ORACLES_HPP

// Independent oracles for the test suite.  These deliberately use naive
// methods (dense trapezoid sums, plain finite differences) so they share no
// code with the adaptive engines they check.

#include <cmath>
#include <complex>
#include <vector>

#include "loopsoliton/common.hpp"
#include "loopsoliton/curve.hpp"

namespace oracles {

using loopsoliton::cx;
using loopsoliton::HyperellipticCurve;

// Complete elliptic integral K via the arithmetic-geometric mean; written
// out locally so the period tests do not borrow library code.
inline double agm_K(double k) {
    double a = 1.0, b = std::sqrt(1.0 - k * k);
    for (int i = 0; i < 60 && std::abs(a - b) > 1e-17 * a; ++i) {
        double a2 = 0.5 * (a + b), b2 = std::sqrt(a * b);
        a = a2;
        b = b2;
    }
    return loopsoliton::pi / (2.0 * a);
}

// Dense-trapezoid contour integral of numerator(x)/(2y) dx around a stadium
// enclosing the two branch points p and q, with naive nearest-root sheet
// continuation on a very fine grid.
inline cx stadium_contour_integral(const HyperellipticCurve& c, const cx& p,
                                   const cx& q,
                                   const std::vector<cx>& numerator_coeffs,
                                   double radius_factor = 0.35,
                                   std::size_t n_steps = 400000) {
    cx mid = 0.5 * (p + q);
    cx half = 0.5 * (q - p);
    double L = std::abs(half);
    double rho = radius_factor * L;

    auto point = [&](double t) {
        // stadium: two straight edges + two semicircular caps, parameter in [0,1)
        double edge = 2.0 * L, cap = loopsoliton::pi * rho;
        double total = 2.0 * edge + 2.0 * cap;
        double u = t * total;
        cx dir = half / L;
        cx n = cx(0, 1) * dir;
        if (u < edge) return mid - dir * L + n * rho + dir * u;
        u -= edge;
        if (u < cap) {
            double a = u / rho;
            return mid + dir * L + n * rho * std::cos(a) + dir * rho * std::sin(a);
        }
        u -= cap;
        if (u < edge) return mid + dir * L - n * rho - dir * u;
        u -= edge;
        double a = u / rho;
        return mid - dir * L - n * rho * std::cos(a) - dir * rho * std::sin(a);
    };
    auto eval_num = [&](const cx& x) {
        cx acc(0.0);
        for (std::size_t k = numerator_coeffs.size(); k-- > 0;)
            acc = acc * x + numerator_coeffs[k];
        return acc;
    };

    cx x_prev = point(0.0);
    cx y_prev = std::sqrt(c.eval_f_from_roots(x_prev));
    cx first_y = y_prev;
    cx total(0.0);
    for (std::size_t j = 1; j <= n_steps; ++j) {
        double t = double(j) / double(n_steps);
        cx x = point(t >= 1.0 ? 0.0 : t);
        cx y = std::sqrt(c.eval_f_from_roots(x));
        if (std::norm(y - y_prev) > std::norm(y + y_prev)) y = -y;
        cx favg = 0.5 * (eval_num(x_prev) / (2.0 * y_prev) + eval_num(x) / (2.0 * y));
        total += favg * (x - x_prev);
        x_prev = x;
        y_prev = y;
    }
    // closure sanity: even number of enclosed branch points
    if (std::abs(y_prev - first_y) > 1e-6 * (std::abs(first_y) + 1e-300))
        throw std::runtime_error("stadium oracle: contour did not close");
    return total;
}

// Centered finite differences on a complex-valued function of one real
// variable.
template <typename F>
cx fd1(F&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <typename F>
cx fd2(F&& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

} // namespace oracles

#endif
