#ifndef LOOPSOLITON_DYNAMICS_HPP
#define LOOPSOLITON_DYNAMICS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "periods.hpp"
#include "quadrature.hpp"

namespace loopsoliton {

struct JacobianPoint {
    cvec u;
};

// ---------------------------------------------------------------------------
// Abel map: u_k(D) = sum_i int_inf^{P_i} du_k along the canonical leg from
// infinity plus a routed polyline.  Well defined modulo the period lattice;
// all paths share the engine's global branch anchor.
// ---------------------------------------------------------------------------

inline cvec abel_point(const PathEngine& eng, const HyperellipticCurve& c,
                       const CurvePoint& p, double* sheet_flip = nullptr) {
    eng.reset_budget();
    auto nums = first_kind_numerators(c);
    cvec total = eng.integrate_infinity_first_kind();
    TrackState st = eng.anchor();

    bool target_is_branch = false;
    for (const cx& b : c.branch_points)
        if (std::abs(p.x - b) < 1e-12 * (1.0 + std::abs(b))) target_is_branch = true;

    auto way = eng.route(st.x, p.x);
    if (target_is_branch) {
        for (std::size_t k = 1; k + 1 < way.size(); ++k) {
            cvec seg = eng.integrate_regular(st, way[k], nums);
            for (std::size_t m = 0; m < nums.size(); ++m) total[m] += seg[m];
        }
        cvec last = eng.integrate_into_branch(st, way.back(), nums);
        for (std::size_t m = 0; m < nums.size(); ++m) total[m] += last[m];
        if (sheet_flip) *sheet_flip = 1.0;
        return total;
    }

    for (std::size_t k = 1; k < way.size(); ++k) {
        cvec seg = eng.integrate_regular(st, way[k], nums);
        for (std::size_t m = 0; m < nums.size(); ++m) total[m] += seg[m];
    }
    // Arrived on one sheet; the hyperelliptic involution negates the
    // integral from infinity, so a mismatched sheet flips the sign.
    double flip = 1.0;
    if (std::norm(st.y - p.y) > std::norm(st.y + p.y)) flip = -1.0;
    for (auto& v : total) v *= flip;
    if (sheet_flip) *sheet_flip = flip;
    return total;
}

inline JacobianPoint abel_map(const HyperellipticCurve& c, const Divisor& d,
                              double tol = 1e-12) {
    PathEngine eng(c, tol);
    cvec u(c.genus, cx(0.0));
    for (const auto& p : d.points) {
        cvec part = abel_point(eng, c, p);
        for (std::size_t k = 0; k < u.size(); ++k) u[k] += part[k];
    }
    return JacobianPoint{u};
}

// Half-period vector of a branch point: int_inf^{(b_r, 0)} du.
inline cvec half_period(const HyperellipticCurve& c, std::size_t r,
                        double tol = 1e-12) {
    if (r < 1 || r > c.branch_points.size()) throw Error("half_period: bad index");
    PathEngine eng(c, tol);
    return abel_point(eng, c, CurvePoint{c.branch_points[r - 1], cx(0.0)});
}

// ---------------------------------------------------------------------------
// Divisor flows: du = M dx with M_{k,i} = x_i^{k-1} / (2 y_i), so moving the
// divisor along a fixed Jacobian direction w solves dx/dt = M^{-1} w.
// ---------------------------------------------------------------------------

inline CMat abel_jacobian(const Divisor& d) {
    const std::size_t g = d.size();
    CMat m(g, g);
    for (std::size_t i = 0; i < g; ++i) {
        cx xp(1.0);
        for (std::size_t k = 0; k < g; ++k) {
            m(k, i) = xp / (2.0 * d.points[i].y);
            xp *= d.points[i].x;
        }
    }
    return m;
}

// dx_i/du_k as the k-th column of M^{-1}.
inline cvec flow_field(const HyperellipticCurve& c, const Divisor& d,
                       std::size_t k) {
    if (k < 1 || k > c.genus) throw Error("flow_field: bad direction index");
    for (const auto& p : d.points)
        if (std::abs(p.y) == 0.0)
            throw SpecialDivisor("flow_field: divisor point with y = 0");
    CMat m = abel_jacobian(d);
    if (cond_inf(m) > 1e10)
        throw SpecialDivisor("flow_field: Abel differential matrix ill-conditioned");
    cvec w(c.genus, cx(0.0));
    w[k - 1] = 1.0;
    return solve(m, w);
}

// Closed form for the u_g direction: dx_i/du_g = 2 y_i / F'(x_i).
inline cvec flow_field_last_closed_form(const Divisor& d) {
    const std::size_t g = d.size();
    cvec v(g);
    for (std::size_t i = 0; i < g; ++i) {
        cx fp(1.0);
        for (std::size_t j = 0; j < g; ++j)
            if (j != i) fp *= (d.points[i].x - d.points[j].x);
        v[i] = 2.0 * d.points[i].y / fp;
    }
    return v;
}

struct FlowState {
    Divisor divisor;
    cvec u_displacement;        // accumulated Jacobian displacement
    cx Z{0.0};                  // accumulated soliton coordinate
    std::vector<double> y_phase; // accumulated winding of arg(y_i)
    double parameter = 0.0;      // flow parameter theta in [0, 1]
};

struct FlowOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 1e-2;
    std::size_t max_steps = 400000;
    cx trace_branch_value{0.0}; // b_r when accumulating Z
    bool trace_Z = false;
};

namespace flow_detail {

// State layout: x_1..x_g, y_1..y_g, [Z].
inline cvec derivative(const HyperellipticCurve& c, const cvec& s, const cvec& w,
                       bool trace_Z, const cx& br) {
    const std::size_t g = c.genus;
    CMat m(g, g);
    for (std::size_t i = 0; i < g; ++i) {
        cx xp(1.0);
        for (std::size_t k = 0; k < g; ++k) {
            m(k, i) = xp / (2.0 * s[g + i]);
            xp *= s[i];
        }
    }
    cvec v = solve(m, w);
    cvec ds(s.size());
    for (std::size_t i = 0; i < g; ++i) {
        ds[i] = v[i];
        ds[g + i] = c.eval_fprime(s[i]) / (2.0 * s[g + i]) * v[i];
    }
    if (trace_Z) {
        // dZ/dtheta = F(b_r) du_g/dtheta; Z accumulation is defined for
        // flows whose only Z-driving component is the u_g one.
        cx F(1.0);
        for (std::size_t i = 0; i < g; ++i) F *= (br - s[i]);
        ds[2 * g] = F * w[g - 1];
    }
    return ds;
}

inline cvec rk4_step(const HyperellipticCurve& c, const cvec& s, const cvec& w,
                     double h, bool trace_Z, const cx& br) {
    auto f = [&](const cvec& state) { return derivative(c, state, w, trace_Z, br); };
    cvec k1 = f(s);
    cvec t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = s[i] + 0.5 * h * k1[i];
    cvec k2 = f(t);
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = s[i] + 0.5 * h * k2[i];
    cvec k3 = f(t);
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = s[i] + h * k3[i];
    cvec k4 = f(t);
    cvec out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        out[i] = s[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

} // namespace flow_detail

// Flows the divisor along the fixed Jacobian direction w (theta: 0 -> 1,
// du = w dtheta).  Classical RK4 with step doubling; y is re-lifted onto
// the curve after every accepted step with sheet continuity.
inline FlowState flow_direction(const HyperellipticCurve& c, const Divisor& d0,
                                const cvec& w, const FlowOptions& opt = {},
                                std::vector<FlowState>* trajectory = nullptr) {
    const std::size_t g = c.genus;
    validate_divisor(c, d0);
    cvec s(2 * g + (opt.trace_Z ? 1 : 0));
    for (std::size_t i = 0; i < g; ++i) {
        s[i] = d0.points[i].x;
        s[g + i] = d0.points[i].y;
    }

    FlowState fs;
    fs.divisor = d0;
    fs.u_displacement.assign(g, cx(0.0));
    fs.y_phase.assign(g, 0.0);

    auto emit = [&](double theta, const cvec& state) {
        fs.parameter = theta;
        for (std::size_t i = 0; i < g; ++i) {
            fs.divisor.points[i].x = state[i];
            fs.divisor.points[i].y = state[g + i];
            fs.u_displacement[i] = w[i] * theta;
        }
        if (opt.trace_Z) fs.Z = state[2 * g];
        if (trajectory) trajectory->push_back(fs);
    };
    emit(0.0, s);

    double theta = 0.0;
    double h = std::min(opt.initial_step, 1.0);
    std::size_t steps = 0;
    while (theta < 1.0) {
        if (++steps > opt.max_steps) throw StepCollapse("flow: too many steps");
        if (h < 1e-14) throw StepCollapse("flow: step size underflow");
        double hh = std::min(h, 1.0 - theta);

        cvec full, half2;
        try {
            full = flow_detail::rk4_step(c, s, w, hh, opt.trace_Z, opt.trace_branch_value);
            cvec half1 = flow_detail::rk4_step(c, s, w, 0.5 * hh, opt.trace_Z,
                                               opt.trace_branch_value);
            half2 = flow_detail::rk4_step(c, half1, w, 0.5 * hh, opt.trace_Z,
                                          opt.trace_branch_value);
        } catch (const Error&) {
            h = 0.5 * hh;
            continue;
        }

        // per-component error control so slow components (e.g. the traced Z)
        // stay accurate when some x_i is large
        bool too_big = false;
        double err_ratio = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            double err = std::abs(full[i] - half2[i]);
            double scale = std::max(std::abs(s[i]), std::abs(half2[i]));
            double allowed = opt.rel_tol * scale + opt.abs_tol;
            err_ratio = std::max(err_ratio, err / allowed);
            if (err > allowed) too_big = true;
        }
        if (too_big) {
            h = 0.5 * hh;
            continue;
        }

        // Re-lift y onto the curve with sheet continuity; a large relative
        // correction or a fast phase swing means the step straddled a
        // branch point, so retry with a smaller step.
        bool reject = false;
        cvec lifted = half2;
        for (std::size_t i = 0; i < g && !reject; ++i) {
            cx y_pred = half2[g + i];
            cx y_new = continue_sqrt(y_pred, c.eval_f_from_roots(half2[i]));
            if (std::abs(y_new - y_pred) > 0.2 * (std::abs(y_pred) + opt.abs_tol))
                reject = true;
            cx ratio = y_new / s[g + i];
            if (std::abs(std::arg(ratio)) > 0.5 * pi) reject = true;
            lifted[g + i] = y_new;
        }
        if (reject) {
            h = 0.5 * hh;
            continue;
        }

        for (std::size_t i = 0; i < g; ++i)
            fs.y_phase[i] += std::arg(lifted[g + i] / s[g + i]);
        s = lifted;
        theta += hh;
        emit(theta, s);
        h = (err_ratio < 0.1) ? hh * 1.7 : hh;
    }
    return fs;
}

// Flows to u + delta for a fixed Jacobian displacement, detouring into the
// complex direction when a straight path drives a divisor point into a
// branch point.  The endpoint divisor only depends on delta (Jacobi
// inversion is single valued), so any surviving detour is equivalent.
inline Divisor flow_shift(const HyperellipticCurve& c, const Divisor& d0,
                          const cvec& delta, const FlowOptions& opt = {}) {
    try {
        return flow_direction(c, d0, delta, opt).divisor;
    } catch (const Error&) {
    }
    for (double beta : {0.35, -0.35, 0.8, -0.8, 1.5, -1.5}) {
        try {
            cvec leg1(delta.size()), leg2(delta.size());
            for (std::size_t k = 0; k < delta.size(); ++k) {
                cx bump = iu * beta * delta[k];
                leg1[k] = 0.5 * delta[k] + bump;
                leg2[k] = 0.5 * delta[k] - bump;
            }
            Divisor mid = flow_direction(c, d0, leg1, opt).divisor;
            return flow_direction(c, mid, leg2, opt).divisor;
        } catch (const Error&) {
        }
    }
    throw StepCollapse("flow_shift: all detours collapsed");
}

// u_k-direction flow by delta_u.
inline FlowState flow(const HyperellipticCurve& c, const Divisor& d0, std::size_t k,
                      const cx& delta_u, const FlowOptions& opt = {},
                      std::vector<FlowState>* trajectory = nullptr) {
    if (k < 1 || k > c.genus) throw Error("flow: bad direction index");
    cvec w(c.genus, cx(0.0));
    w[k - 1] = delta_u;
    return flow_direction(c, d0, w, opt, trajectory);
}

// t-direction of the soliton hierarchy: e_{g-1} + (lambda_{2g-1} + b_r) e_g.
inline cvec t_direction(const HyperellipticCurve& c, std::size_t r) {
    if (c.genus < 2) throw Error("t_direction: needs genus >= 2");
    cvec w(c.genus, cx(0.0));
    w[c.genus - 2] = 1.0;
    w[c.genus - 1] = c.lambda[2 * c.genus - 1] + c.branch_points[r - 1];
    return w;
}

// Direction in which the half curvature obeys dq/dtheta = (1/4)(6 q^2 q_s
// + q_sss) with s = u_g: the transport term of the u_{g-1} flow is
// cancelled by -(3/2 b_r + 1/2 lambda_{2g}) e_g.  The MKdV time of
// Definition-1.1 form is t = -theta/4.
inline cvec mkdv_direction(const HyperellipticCurve& c, std::size_t r) {
    if (c.genus < 2) throw Error("mkdv_direction: needs genus >= 2");
    cvec w(c.genus, cx(0.0));
    w[c.genus - 2] = 1.0;
    w[c.genus - 1] = -(1.5 * c.branch_points[r - 1] + 0.5 * c.lambda[2 * c.genus]);
    return w;
}

inline FlowState t_flow(const HyperellipticCurve& c, const Divisor& d0, std::size_t r,
                        const cx& delta_t, const FlowOptions& opt = {},
                        std::vector<FlowState>* trajectory = nullptr) {
    cvec w = t_direction(c, r);
    for (auto& v : w) v *= delta_t;
    return flow_direction(c, d0, w, opt, trajectory);
}

// ---------------------------------------------------------------------------
// Loop-soliton traces: s = u_g, dZ/ds = F(b_r), q = half curvature.
// ---------------------------------------------------------------------------

struct LoopSample {
    std::vector<double> s;
    cvec Z;
    cvec q;   // (1/(2i)) d log(dZ)/ds
    cvec dZ;  // F(b_r) along the flow
    std::size_t r = 0;
    cx b_r{0.0};
};

inline cx q_at(const HyperellipticCurve&, const Divisor& d, const cx& br) {
    cvec v = flow_field_last_closed_form(d);
    cx acc(0.0);
    for (std::size_t i = 0; i < d.size(); ++i) acc += v[i] / (d.points[i].x - br);
    return acc / (2.0 * iu);
}

inline LoopSample trace_soliton(const HyperellipticCurve& c, std::size_t r,
                                const Divisor& d0, double s_lo, double s_hi,
                                std::size_t n_samples, const FlowOptions& base = {}) {
    if (r < 1 || r > c.branch_points.size()) throw Error("trace_soliton: bad r");
    const cx br = c.branch_points[r - 1];
    LoopSample out;
    out.r = r;
    out.b_r = br;
    out.s.resize(n_samples);
    out.Z.resize(n_samples);
    out.q.resize(n_samples);
    out.dZ.resize(n_samples);

    FlowOptions opt = base;
    opt.trace_Z = true;
    opt.trace_branch_value = br;

    // March sample to sample so every point is a flow endpoint.
    Divisor d = d0;
    cx Z_acc(0.0);
    double s_prev = 0.0;
    for (std::size_t j = 0; j < n_samples; ++j) {
        double sj = (n_samples == 1)
            ? s_lo
            : s_lo + (s_hi - s_lo) * double(j) / double(n_samples - 1);
        double ds = sj - s_prev;
        if (j == 0) ds = sj; // from the base divisor at s = 0
        if (ds != 0.0) {
            FlowState st = flow(c, d, c.genus, cx(ds, 0.0), opt);
            d = st.divisor;
            Z_acc += st.Z;
        }
        s_prev = sj;
        out.s[j] = sj;
        out.Z[j] = Z_acc;
        cx F(1.0);
        for (const auto& p : d.points) F *= (br - p.x);
        out.dZ[j] = F;
        out.q[j] = q_at(c, d, br);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analytic flow derivatives of log F(b_r) along the u_g direction; these
// feed the functional-relation checks.
// ---------------------------------------------------------------------------

struct LogFDerivatives {
    cx L1; // d/du_g log F(b_r)
    cx L2; // d^2/du_g^2 log F(b_r)
};

inline LogFDerivatives dlogF(const HyperellipticCurve& c, const Divisor& d,
                             const cx& br) {
    const std::size_t g = d.size();
    cvec v = flow_field_last_closed_form(d);
    cvec vdot(g);
    for (std::size_t i = 0; i < g; ++i) {
        cx xi = d.points[i].x, yi = d.points[i].y;
        cx sum(0.0);
        for (std::size_t j = 0; j < g; ++j)
            if (j != i) sum += (v[i] - v[j]) / (xi - d.points[j].x);
        vdot[i] = c.eval_fprime(xi) * v[i] * v[i] / (2.0 * yi * yi) - v[i] * sum;
    }
    LogFDerivatives out{cx(0.0), cx(0.0)};
    for (std::size_t i = 0; i < g; ++i) {
        cx dx = d.points[i].x - br;
        out.L1 += v[i] / dx;
        out.L2 += vdot[i] / dx - v[i] * v[i] / (dx * dx);
    }
    return out;
}

// Schwarz derivative of the trace coordinate { Z, u_g } at a divisor,
// computed analytically: Z' = F(b_r), so {Z, s} = L2 - L1^2 / 2.
inline cx schwarz_at_divisor(const HyperellipticCurve& c, const Divisor& d,
                             const cx& br) {
    auto l = dlogF(c, d, br);
    return l.L2 - 0.5 * l.L1 * l.L1;
}

// d/du_g of the power sums: q_{n,g} = n sum_i x_i^{n-1} v_i.
inline cvec power_sum_flow_derivatives(const HyperellipticCurve&, const Divisor& d,
                                       std::size_t n_max) {
    cvec v = flow_field_last_closed_form(d);
    cvec out(n_max, cx(0.0));
    for (std::size_t i = 0; i < d.size(); ++i) {
        cx xp(1.0);
        for (std::size_t n = 1; n <= n_max; ++n) {
            out[n - 1] += double(n) * xp * v[i];
            xp *= d.points[i].x;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// MKdV residual: dq/dt + 6 q^2 dq/ds + d^3q/ds^3 on a (s, t) stencil, all
// q values produced by exact flows, derivatives by centered differences.
// ---------------------------------------------------------------------------

// Centered-difference MKdV residual on three time slices of q; shared by
// the flow-driven check and synthetic-grid tests.
inline double mkdv_fd_residual(const std::vector<cvec>& q, double ds, double dt) {
    const std::size_t n_s = q[1].size();
    double worst = 0.0;
    for (std::size_t j = 2; j + 2 < n_s; ++j) {
        cx qt = (q[2][j] - q[0][j]) / (2.0 * dt);
        cx qs = (q[1][j + 1] - q[1][j - 1]) / (2.0 * ds);
        cx qsss = (q[1][j + 2] - 2.0 * q[1][j + 1] + 2.0 * q[1][j - 1] - q[1][j - 2]) /
                  (2.0 * ds * ds * ds);
        cx res = qt + 6.0 * q[1][j] * q[1][j] * qs + qsss;
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

inline double mkdv_residual(const HyperellipticCurve& c, std::size_t r,
                            const Divisor& d0, std::size_t n_s, double ds,
                            double dt, const FlowOptions& base = {}) {
    if (c.genus < 2) throw Error("mkdv_residual: needs genus >= 2");
    if (n_s < 5) throw Error("mkdv_residual: need at least 5 s-samples");
    const cx br = c.branch_points[r - 1];

    cvec w_t = mkdv_direction(c, r);
    std::vector<cvec> q(3, cvec(n_s));
    for (int slice = -1; slice <= 1; ++slice) {
        Divisor d = d0;
        if (slice != 0) {
            // MKdV time dt corresponds to flow parameter -4 dt.
            cvec w = w_t;
            for (auto& v : w) v *= cx(-4.0 * double(slice) * dt, 0.0);
            d = flow_direction(c, d0, w, base).divisor;
        }
        // march along s
        Divisor cur = d;
        double s_prev = 0.0;
        for (std::size_t j = 0; j < n_s; ++j) {
            double sj = (double(j) - 0.5 * double(n_s - 1)) * ds;
            double step = sj - s_prev;
            if (j == 0) step = sj;
            if (step != 0.0) cur = flow(c, cur, c.genus, cx(step, 0.0), base).divisor;
            s_prev = sj;
            q[std::size_t(slice + 1)][j] = q_at(c, cur, br);
        }
    }
    return mkdv_fd_residual(q, ds, dt);
}

} // namespace loopsoliton

#endif
