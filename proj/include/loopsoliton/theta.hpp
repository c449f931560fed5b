#ifndef LOOPSOLITON_THETA_HPP
#define LOOPSOLITON_THETA_HPP

#include <atomic>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "errors.hpp"
#include "linalg.hpp"

namespace loopsoliton {

// The lattice-sum cost grows like cutoff^g, so genus is capped by default;
// callers that accept the cost can lift the cap explicitly.
inline constexpr std::size_t kDefaultGenusCap = 4;

inline std::atomic<bool>& allow_high_genus_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

inline void set_allow_high_genus(bool allow) { allow_high_genus_flag() = allow; }

// Half-integer characteristics; stored as plain doubles (exact halves).
struct ThetaChar {
    std::vector<double> a; // top row
    std::vector<double> b; // bottom row
};

// Canonical odd characteristic used by the sigma function:
// top delta'' = (1/2, ..., 1/2), bottom delta' = (g/2, (g-1)/2, ..., 1/2).
inline ThetaChar canonical_char(std::size_t g) {
    ThetaChar ch;
    ch.a.assign(g, 0.5);
    ch.b.resize(g);
    for (std::size_t k = 0; k < g; ++k) ch.b[k] = 0.5 * double(g - k);
    return ch;
}

// theta[a;b](z; tau) = sum_{n in Z^g} exp(2 pi i (1/2 (n+a)^T tau (n+a)
//                                             + (n+a)^T (z+b))),
// evaluated with an ellipsoidal cutoff sized from the smallest eigenvalue
// of Im tau so the Gaussian tail (with a polynomial factor for the
// requested derivative order) stays below `tol` relative to the leading
// scale.  Values are returned with an explicit exponential scale split off
// so that quotients of sums (zeta, wp) never overflow.
struct ThetaResult {
    double log_scale = 0.0;
    cx value{0.0};
    cvec grad;          // d/dz_j, divided by the same scale
    std::vector<cx> hess; // g*g row-major, same scale
    double radius = 0.0;  // cutoff actually used (for truncation tests)

    cx full_value() const { return std::exp(log_scale) * value; }
};

namespace theta_detail {

struct Workspace {
    std::size_t g;
    const CMat* tau;
    cvec zb;                  // z + b
    std::vector<double> a;    // top characteristic
    std::vector<double> center; // ellipsoid center in n-space
    std::vector<double> yinv_diag;
    std::vector<double> y;    // Im tau, row-major
    double r2 = 0.0;
    int order = 0;
    std::vector<double> n;    // current lattice point (as doubles)
    // accumulation
    std::vector<double> exps;
    std::vector<double> args;
    std::vector<std::vector<double>> ms; // m = n + a per accepted point
};

inline void enumerate(Workspace& ws, std::size_t dim) {
    if (dim == ws.g) {
        // quadratic form (m - m0)^T Y (m - m0) with m0 = center + a
        double q = 0.0;
        for (std::size_t i = 0; i < ws.g; ++i)
            for (std::size_t j = 0; j < ws.g; ++j)
                q += (ws.n[i] - ws.center[i]) * ws.y[i * ws.g + j] *
                     (ws.n[j] - ws.center[j]);
        if (q > ws.r2) return;
        // exponent 2 pi i (1/2 m^T tau m + m^T zb)
        cx e(0.0);
        std::vector<double> m(ws.g);
        for (std::size_t i = 0; i < ws.g; ++i) m[i] = ws.n[i] + ws.a[i];
        for (std::size_t i = 0; i < ws.g; ++i) {
            cx row(0.0);
            for (std::size_t j = 0; j < ws.g; ++j) row += (*ws.tau)(i, j) * m[j];
            e += 0.5 * m[i] * row + m[i] * ws.zb[i];
        }
        e *= 2.0 * pi * iu;
        ws.exps.push_back(e.real());
        ws.args.push_back(e.imag());
        ws.ms.push_back(std::move(m));
        return;
    }
    double half_width = ws.r2 > 0.0
        ? std::sqrt(ws.r2 * ws.yinv_diag[dim]) : 0.0;
    long lo = long(std::floor(ws.center[dim] - half_width - 1.0));
    long hi = long(std::ceil(ws.center[dim] + half_width + 1.0));
    for (long v = lo; v <= hi; ++v) {
        ws.n[dim] = double(v);
        enumerate(ws, dim + 1);
    }
}

} // namespace theta_detail

inline ThetaResult theta_full(const cvec& z, const CMat& tau, const ThetaChar& ch,
                              double tol = 1e-13, int order = 0,
                              double extra_radius = 0.0) {
    const std::size_t g = z.size();
    if (tau.rows() != g || tau.cols() != g) throw Error("theta: shape mismatch");
    if (g > kDefaultGenusCap && !allow_high_genus_flag())
        throw Error("theta: genus above the default cap; set_allow_high_genus(true) "
                    "to evaluate anyway");

    std::vector<double> y(g * g);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            y[i * g + j] = 0.5 * (tau(i, j).imag() + tau(j, i).imag());
    auto eigs = sym_eigenvalues(y, g);
    if (eigs.front() <= 0.0)
        throw NonPositiveImTau("theta: Im tau not positive definite");
    const double lam_min = eigs.front();

    // Y^{-1} via the complex solver (tiny matrices).
    CMat ym(g, g);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j) ym(i, j) = y[i * g + j];
    CMat yinv = inverse(ym);

    theta_detail::Workspace ws;
    ws.g = g;
    ws.tau = &tau;
    ws.a = ch.a;
    ws.zb.resize(g);
    for (std::size_t k = 0; k < g; ++k) ws.zb[k] = z[k] + ch.b[k];
    ws.order = order;
    ws.y = y;

    // Ellipsoid center: m0 = -Y^{-1} Im(z+b), n-center = m0 - a.
    std::vector<double> v(g);
    for (std::size_t k = 0; k < g; ++k) v[k] = ws.zb[k].imag();
    cvec vc(g);
    for (std::size_t k = 0; k < g; ++k) vc[k] = v[k];
    cvec m0c = yinv * vc;
    ws.center.resize(g);
    for (std::size_t k = 0; k < g; ++k) ws.center[k] = -m0c[k].real() - ch.a[k];
    ws.yinv_diag.resize(g);
    for (std::size_t k = 0; k < g; ++k) ws.yinv_diag[k] = yinv(k, k).real();

    // Radius: gaussian tail with polynomial margin for derivatives.
    double logtol = std::log(std::max(tol, 1e-300));
    double r = std::sqrt(std::max(4.0, -logtol / (pi * lam_min)));
    for (int it = 0; it < 3; ++it) {
        double poly = order > 0 ? double(order) * std::log1p(2.0 * pi * (r + 1.0)) : 0.0;
        double gauss = -logtol + poly + double(g) * std::log1p(r);
        r = std::sqrt(std::max(4.0, gauss / (pi * lam_min)));
    }
    r += 1.5 + extra_radius;
    ws.r2 = r * r;

    ws.n.assign(g, 0.0);
    theta_detail::enumerate(ws, 0);
    if (ws.exps.empty()) throw Error("theta: empty summation region");

    double emax = ws.exps[0];
    for (double e : ws.exps) emax = std::max(emax, e);

    ThetaResult res;
    res.log_scale = emax;
    res.radius = r;
    res.grad.assign(order >= 1 ? g : 0, cx(0.0));
    res.hess.assign(order >= 2 ? g * g : 0, cx(0.0));
    const cx two_pi_i = 2.0 * pi * iu;
    for (std::size_t t = 0; t < ws.exps.size(); ++t) {
        cx term = std::exp(cx(ws.exps[t] - emax, 0.0)) *
                  cx(std::cos(ws.args[t]), std::sin(ws.args[t]));
        res.value += term;
        if (order >= 1) {
            const auto& m = ws.ms[t];
            for (std::size_t j = 0; j < g; ++j) res.grad[j] += term * two_pi_i * m[j];
            if (order >= 2)
                for (std::size_t j = 0; j < g; ++j)
                    for (std::size_t k = 0; k < g; ++k)
                        res.hess[j * g + k] +=
                            term * two_pi_i * two_pi_i * m[j] * m[k];
        }
    }
    return res;
}

inline cx theta(const cvec& z, const CMat& tau, const ThetaChar& ch,
                double tol = 1e-13) {
    return theta_full(z, tau, ch, tol, 0).full_value();
}

} // namespace loopsoliton

#endif
