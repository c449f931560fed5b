#ifndef LOOPSOLITON_RELATIONS_HPP
#define LOOPSOLITON_RELATIONS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "curve.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "kleinian.hpp"
#include "rng.hpp"

namespace loopsoliton {

struct IdentityReport {
    std::string id;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<std::pair<std::string, std::string>> metadata;

    void bump(double r) { max_residual = std::max(max_residual, r); }
    void finalize() { pass = max_residual <= tolerance; }
    void note(const std::string& key, const std::string& value) {
        metadata.emplace_back(key, value);
    }

    std::string line() const {
        std::string s = id;
        s += ", " + std::to_string(n_samples);
        s += ", " + fmt_real(max_residual);
        s += ", " + fmt_real(tolerance);
        s += pass ? ", PASS" : ", FAIL";
        return s;
    }
};

// ---------------------------------------------------------------------------
// Sampling helpers (seeded, deterministic).
// ---------------------------------------------------------------------------

inline Divisor random_divisor(const HyperellipticCurve& c, Rng& rng, double rad_lo,
                              double rad_hi, double min_branch_dist,
                              double min_mutual_dist) {
    const std::size_t g = c.genus;
    for (int attempt = 0; attempt < 4000; ++attempt) {
        Divisor d;
        bool ok = true;
        for (std::size_t i = 0; i < g && ok; ++i) {
            double rad = rng.uniform(rad_lo, rad_hi);
            double phi = rng.uniform(0.0, 2.0 * pi);
            cx x(rad * std::cos(phi), rad * std::sin(phi));
            for (const cx& b : c.branch_points)
                if (std::abs(x - b) < min_branch_dist) ok = false;
            for (const auto& p : d.points)
                if (std::abs(x - p.x) < min_mutual_dist) ok = false;
            if (ok) d.points.push_back(lift(c, x, rng.uniform() < 0.5 ? +1 : -1));
        }
        if (ok) return d;
    }
    throw Error("random_divisor: sampling failed");
}

// Divisor + Abel image, retried until safely off the theta divisor (both at
// u and at u + omega_r when a shift is requested).
inline std::pair<Divisor, cvec> sample_off_divisor(const SigmaContext& ctx, Rng& rng,
                                                   double rad_lo, double rad_hi,
                                                   std::size_t r_shift = 0) {
    const HyperellipticCurve& c = ctx.curve();
    double mbd = 0.25 * std::min(1.0, c.min_branch_separation());
    for (int attempt = 0; attempt < 200; ++attempt) {
        Divisor d = random_divisor(c, rng, rad_lo, rad_hi, mbd, mbd);
        cvec u = abel_map(c, d).u;
        if (ctx.near_theta_divisor(u)) continue;
        if (r_shift > 0) {
            cvec us = u;
            const cvec& wr = ctx.omega_r(r_shift);
            for (std::size_t k = 0; k < us.size(); ++k) us[k] += wr[k];
            if (ctx.near_theta_divisor(us)) continue;
        }
        return {d, u};
    }
    throw Error("sample_off_divisor: no admissible sample");
}

// ---------------------------------------------------------------------------
// Schwarz derivative of sampled trace data; the analytic form lives in
// dynamics.hpp (schwarz_at_divisor).  Values are produced on the interior
// indices [2, n-3]; the two boundary slots on each side are zero-filled.
// ---------------------------------------------------------------------------

inline cvec schwarz_of_trace(const std::vector<double>& s, const cvec& Z,
                             const cvec& dZ_opt = {}) {
    const std::size_t n = s.size();
    if (n < 19) throw Error("schwarz_of_trace: need at least 19 samples");
    double h = s[1] - s[0];
    for (std::size_t j = 1; j + 1 < n; ++j)
        if (std::abs((s[j + 1] - s[j]) - h) > 1e-9 * (std::abs(h) + 1e-12))
            throw Error("schwarz_of_trace: non-uniform grid");

    // 6th-order centered first derivative, applied in cascade; the grid
    // spacing should not be pushed far below ~1e-2 or the 1/h^3 roundoff
    // of the third derivative dominates.
    auto d6 = [&](const cvec& v, cvec& out) {
        for (std::size_t j = 3; j + 3 < n; ++j)
            out[j] = (v[j + 3] - v[j - 3] + 9.0 * (v[j - 2] - v[j + 2]) +
                      45.0 * (v[j + 1] - v[j - 1])) /
                     (60.0 * h);
    };
    cvec d1(n, cx(0.0));
    if (!dZ_opt.empty()) d1 = dZ_opt;
    else d6(Z, d1);
    cvec d2(n, cx(0.0)), d3(n, cx(0.0));
    d6(d1, d2);
    d6(d2, d3);

    cvec out(n, cx(0.0));
    for (std::size_t j = 9; j + 9 < n; ++j) {
        if (std::abs(d1[j]) < 1e-12) throw ZeroSpeed("schwarz_of_trace: dZ ~ 0");
        cx t = d2[j] / d1[j];
        out[j] = d3[j] / d1[j] - 1.5 * t * t;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Identity checks.  The Schwarz/wp relation is verified in the calibrated
// form {Z(u), u_g}_SD + 4 wp_gg(u + omega_r) + 2 lambda_{2g} + 2 b_r = 0
// (equivalently {Z(u + omega_r)} = -(4 wp_gg(u) + ...)); the half-period
// argument shift and the overall sign are pinned numerically at genus 1
// and 2 and recorded in the report metadata.
// ---------------------------------------------------------------------------

inline IdentityReport verify_schwarz_wp(const SigmaContext& ctx, std::size_t r,
                                        std::size_t n_samples, std::uint64_t seed,
                                        double tol = 1e-6, cx br_perturbation = cx(0.0)) {
    const HyperellipticCurve& c = ctx.curve();
    const cx br = c.branch_points[r - 1] + br_perturbation;
    Rng rng(seed);
    IdentityReport rep;
    rep.id = std::abs(br_perturbation) > 0 ? "schwarz_wp_negative_control" : "schwarz_wp";
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.tolerance = tol;
    double scale = 0.5 + 0.75 * c.branch_scale();
    for (std::size_t t = 0; t < n_samples; ++t) {
        auto [d, u] = sample_off_divisor(ctx, rng, 0.3 * scale, 1.6 * scale, r);
        cx lhs = schwarz_at_divisor(c, d, br);
        cvec ush = u;
        const cvec& wr = ctx.omega_r(r);
        for (std::size_t k = 0; k < ush.size(); ++k) ush[k] += wr[k];
        cx rhs = -(4.0 * ctx.wp_gg(ush) + 2.0 * c.lambda[2 * c.genus] + 2.0 * br);
        rep.bump(std::abs(lhs - rhs));
    }
    rep.note("form", "schwarz(u) = -(4 wp_gg(u+omega_r) + 2 lambda_2g + 2 b_r)");
    rep.finalize();
    return rep;
}

inline IdentityReport verify_log_series(const HyperellipticCurve& c, const Divisor& d,
                                        std::size_t r, std::size_t n_terms,
                                        double tol = 1e-10) {
    const cx br = c.branch_points[r - 1];
    double rho = 0.0;
    for (const auto& p : d.points) rho = std::max(rho, std::abs(p.x) / std::abs(br));
    IdentityReport rep;
    rep.id = "log_series_3_1_3";
    rep.n_samples = 1;
    rep.tolerance = tol;
    if (rho >= 1.0)
        throw SeriesDiverges("verify_log_series: max |x_i / b_r| >= 1");

    cvec q = power_sums(d, n_terms);
    cx series(0.0);
    cx bpow = br;
    for (std::size_t n = 1; n <= n_terms; ++n) {
        series += q[n - 1] / (double(n) * bpow);
        bpow *= br;
    }
    cx rhs = std::pow(br, double(c.genus)) * std::exp(-series);
    cx lhs = eval_F(d, br);
    double resid = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    rep.bump(resid);
    double tail = double(c.genus) * std::pow(rho, double(n_terms + 1)) /
                  (double(n_terms + 1) * (1.0 - rho));
    rep.note("rho", fmt_real(rho));
    rep.note("N", std::to_string(n_terms));
    rep.note("tail_bound", fmt_real(tail));
    rep.finalize();
    return rep;
}

inline IdentityReport verify_sum_identity(const SigmaContext& ctx, std::size_t r,
                                          std::size_t n_samples, std::uint64_t seed,
                                          std::size_t n_terms, double rho_max = 0.3,
                                          double tol = 1e-6) {
    const HyperellipticCurve& c = ctx.curve();
    const cx br = c.branch_points[r - 1];
    if (std::abs(br) < 1e-9) throw Error("verify_sum_identity: b_r must be nonzero");
    Rng rng(seed);
    IdentityReport rep;
    rep.id = "sum_identity_3_2";
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.tolerance = tol;
    double miura_worst = 0.0, direct_worst = 0.0, rho_worst = 0.0;
    for (std::size_t t = 0; t < n_samples; ++t) {
        auto [d, u] = sample_off_divisor(ctx, rng, 0.1 * std::abs(br),
                                         rho_max * std::abs(br), r);
        double rho = 0.0;
        for (const auto& p : d.points) rho = std::max(rho, std::abs(p.x) / std::abs(br));
        rho_worst = std::max(rho_worst, rho);

        // RHS: -(sum q_{n,g} b^{-n} / n)^2 with flow derivatives of the
        // power sums; the series equals -d/du_g log F(b_r).
        cvec qng = power_sum_flow_derivatives(c, d, n_terms);
        cx series(0.0);
        cx bpow = br;
        for (std::size_t n = 1; n <= n_terms; ++n) {
            series += qng[n - 1] / (double(n) * bpow);
            bpow *= br;
        }
        cx rhs = -series * series;

        auto l = dlogF(c, d, br);
        miura_worst = std::max(miura_worst, std::abs(series + l.L1));

        // LHS via the sigma route of the Schwarz relation at u and u+w_r.
        cvec ush = u;
        const cvec& wr = ctx.omega_r(r);
        for (std::size_t k = 0; k < ush.size(); ++k) ush[k] += wr[k];
        cx lhs = -4.0 * (ctx.wp_gg(u) + ctx.wp_gg(ush)) -
                 4.0 * c.lambda[2 * c.genus] - 4.0 * br;
        rep.bump(std::abs(lhs - rhs));

        // Direct route: analytic Schwarz at D and at the shifted divisor.
        Divisor dsh = flow_shift(c, d, wr);
        cx lhs_direct = schwarz_at_divisor(c, d, br) + schwarz_at_divisor(c, dsh, br);
        direct_worst = std::max(direct_worst, std::abs(lhs_direct - rhs));
    }
    rep.note("N", std::to_string(n_terms));
    rep.note("rho_max_seen", fmt_real(rho_worst));
    rep.note("miura_step_residual", fmt_real(miura_worst));
    rep.note("series_sign", "sum q_{n,g} b^{-n}/n = -d_{u_g} log F(b_r)");
    rep.note("direct_route_residual", fmt_real(direct_worst));
    rep.finalize();
    return rep;
}

inline IdentityReport verify_diff_identity(const SigmaContext& ctx, std::size_t r,
                                           std::size_t n_samples, std::uint64_t seed,
                                           double tol = 1e-6) {
    const HyperellipticCurve& c = ctx.curve();
    const cx br = c.branch_points[r - 1];
    Rng rng(seed);
    IdentityReport rep;
    rep.id = "diff_identity_3_3";
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.tolerance = tol;
    double route_gap = 0.0;
    double scale = 0.5 + 0.6 * c.branch_scale();
    for (std::size_t t = 0; t < n_samples; ++t) {
        auto [d, u] = sample_off_divisor(ctx, rng, 0.3 * scale, 1.4 * scale, r);
        const cvec& wr = ctx.omega_r(r);
        Divisor dsh = flow_shift(c, d, wr);
        cx lhs = 0.5 * (schwarz_at_divisor(c, dsh, br) - schwarz_at_divisor(c, d, br));
        cx rhs = -dlogF(c, d, br).L2;
        rep.bump(std::abs(lhs - rhs));

        cvec ush = u;
        for (std::size_t k = 0; k < ush.size(); ++k) ush[k] += wr[k];
        cx sigma_route = 2.0 * (ctx.wp_gg(ush) - ctx.wp_gg(u));
        route_gap = std::max(route_gap, std::abs(lhs - sigma_route));
    }
    rep.note("schwarz_vs_wp_route_gap", fmt_real(route_gap));
    rep.finalize();
    return rep;
}

// Full-period invariance of dZ/du_g = F(b_r) through the sigma-quotient
// route al^2 (the undetermined constant cancels in the ratio).
inline IdentityReport verify_periodicity(const SigmaContext& ctx, std::size_t r,
                                         std::size_t n_samples, std::uint64_t seed,
                                         double tol = 1e-7) {
    const HyperellipticCurve& c = ctx.curve();
    const std::size_t g = c.genus;
    const PeriodData& pd = ctx.periods();
    Rng rng(seed);
    IdentityReport rep;
    rep.id = "periodicity_3_1_1";
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.tolerance = tol;
    double control_min = 1e300, full_wr_worst = 0.0;
    double scale = 0.5 + 0.6 * c.branch_scale();
    for (std::size_t t = 0; t < n_samples; ++t) {
        auto [d, u] = sample_off_divisor(ctx, rng, 0.3 * scale, 1.4 * scale, r);
        (void)d;
        cx base = al_sigma(ctx, u, r);
        cx base2 = base * base;
        for (std::size_t i = 0; i < g; ++i) {
            for (int which = 0; which < 2; ++which) {
                cvec us = u;
                for (std::size_t k = 0; k < g; ++k)
                    us[k] += 2.0 * (which == 0 ? pd.omega1(k, i) : pd.omega2(k, i));
                cx shifted = al_sigma(ctx, us, r);
                rep.bump(std::abs(shifted * shifted / base2 - 1.0));
            }
        }
        // negative control: a bare half period changes the value...
        cvec uw = u;
        const cvec& wr = ctx.omega_r(r);
        for (std::size_t k = 0; k < g; ++k) uw[k] += wr[k];
        cx half = al_sigma(ctx, uw, r);
        control_min = std::min(control_min, std::abs(half * half / base2 - 1.0));
        // ...while the doubled half period is a full lattice vector.
        cvec uw2 = u;
        for (std::size_t k = 0; k < g; ++k) uw2[k] += 2.0 * wr[k];
        cx full = al_sigma(ctx, uw2, r);
        full_wr_worst = std::max(full_wr_worst, std::abs(full * full / base2 - 1.0));
    }
    rep.note("half_period_control_min", fmt_real(control_min));
    rep.note("doubled_half_period_residual", fmt_real(full_wr_worst));
    rep.finalize();
    return rep;
}

// Conjugation identity on divisors constrained to prod |x_i - b_r| = 1:
// conj(F(b_r)) equals the product re-evaluated at the inverted offsets,
// which collapses to conj(F) = 1/F.
inline IdentityReport verify_conjugation(const HyperellipticCurve& c, std::size_t r,
                                         std::size_t n_samples, std::uint64_t seed,
                                         double tol = 1e-12, bool constrained = true) {
    const cx br = c.branch_points[r - 1];
    Rng rng(seed);
    IdentityReport rep;
    rep.id = constrained ? "conjugation_3_1_2" : "conjugation_negative_control";
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.tolerance = tol;
    const std::size_t g = c.genus;
    for (std::size_t t = 0; t < n_samples; ++t) {
        // g-1 free offsets, the last radial distance rescaled so the product
        // of moduli is exactly 1.
        std::vector<cx> offsets(g);
        double prod = 1.0;
        for (std::size_t i = 0; i < g; ++i) {
            double rad = rng.uniform(0.4, 1.8);
            double phi = rng.uniform(0.0, 2.0 * pi);
            offsets[i] = cx(rad * std::cos(phi), rad * std::sin(phi));
            if (i + 1 < g) prod *= rad;
            else if (constrained)
                offsets[i] *= 1.0 / (prod * rad); // total modulus product -> 1
        }
        cx F(1.0);
        for (const cx& o : offsets) F *= -o; // b_r - x_i = -(x_i - b_r)
        cx inverted(1.0);
        for (const cx& o : offsets) inverted *= -1.0 / o;
        rep.bump(std::abs(std::conj(F) - inverted));
        (void)br;
    }
    rep.finalize();
    return rep;
}

// ---------------------------------------------------------------------------
// Euler-Bernoulli energy of a closed unit-speed loop, reported in the
// 2 pi total-length convention (circle -> pi).  Quadrature of the Schwarz
// derivative over a period, cross-checked against the curvature form.
// ---------------------------------------------------------------------------

struct EnergyResult {
    double E = 0.0;          // Schwarz-derivative quadrature route
    double E_curvature = 0.0; // (1/4pi) integral of kappa^2
    double closure = 0.0;
    double speed_residual = 0.0;
};

inline EnergyResult energy(const LoopSample& loop, double closed_tol = 1e-6,
                           double speed_tol = 1e-6) {
    const std::size_t n = loop.s.size();
    if (n < 16) throw Error("energy: too few samples");
    double span = loop.s.back() - loop.s.front();
    double scaleZ = 0.0;
    for (const cx& z : loop.Z) scaleZ = std::max(scaleZ, std::abs(z));
    EnergyResult out;
    out.closure = std::abs(loop.Z.back() - loop.Z.front());
    if (out.closure > closed_tol * (1.0 + scaleZ))
        throw NotClosed("energy: endpoint gap too large");

    // Normalize to period 1 (drop the duplicated endpoint).
    const std::size_t m = n - 1;
    double h = span / double(m);
    // dZ in original parametrization; 4th-order periodic differences.
    cvec dz(m);
    bool have_dz = loop.dZ.size() == n;
    for (std::size_t j = 0; j < m; ++j) {
        if (have_dz) {
            dz[j] = loop.dZ[j];
        } else {
            auto at = [&](long idx) {
                long mm = long(m);
                long w = ((idx % mm) + mm) % mm;
                return loop.Z[std::size_t(w)];
            };
            dz[j] = (-at(long(j) + 2) + 8.0 * at(long(j) + 1) - 8.0 * at(long(j) - 1) +
                     at(long(j) - 2)) /
                    (12.0 * h);
        }
        out.speed_residual = std::max(out.speed_residual,
                                      std::abs(std::abs(dz[j]) - 1.0));
    }
    if (out.speed_residual > speed_tol)
        throw NotUnitSpeed("energy: |dZ/ds| deviates from 1");

    // Half curvature q(s) on the unit-speed loop.
    cvec q(m);
    if (loop.q.size() == n) {
        for (std::size_t j = 0; j < m; ++j) q[j] = loop.q[j];
    } else {
        for (std::size_t j = 0; j < m; ++j) {
            auto at = [&](long idx) {
                long mm = long(m);
                long w = ((idx % mm) + mm) % mm;
                return dz[std::size_t(w)];
            };
            cx d2 = (-at(long(j) + 2) + 8.0 * at(long(j) + 1) - 8.0 * at(long(j) - 1) +
                     at(long(j) - 2)) /
                    (12.0 * h);
            q[j] = d2 / dz[j] / (2.0 * iu);
        }
    }
    // {Z,s} = 2 i q' + 2 q^2; the q' term integrates to zero over a period,
    // so both routes use periodic trapezoid sums (spectrally accurate).
    cvec dq(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto at = [&](long idx) {
            long mm = long(m);
            long w = ((idx % mm) + mm) % mm;
            return q[std::size_t(w)];
        };
        dq[j] = (-at(long(j) + 2) + 8.0 * at(long(j) + 1) - 8.0 * at(long(j) - 1) +
                 at(long(j) - 2)) /
                (12.0 * h);
    }
    cx sd_sum(0.0);
    double q2_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        cx sd = 2.0 * iu * dq[j] + 2.0 * q[j] * q[j];
        sd_sum += sd * h;
        q2_sum += std::norm(q[j]) * h;
    }
    // Report in the 2 pi length convention: s-period span rescales to 2 pi.
    // E = (1/(2 pi)) * (span) * <{Z,s}> with parameter units absorbed.
    double unit = span / (2.0 * pi);
    out.E = (sd_sum.real() / span) * span * unit; // = unit * integral
    out.E_curvature = 2.0 * q2_sum * unit;
    return out;
}

// ---------------------------------------------------------------------------
// Probes for the reality condition |F(b_r)| = 1 with real u_g direction.
// ---------------------------------------------------------------------------

struct RealityResidual {
    double f_modulus = 0.0; // | |F(b_r)| - 1 |
    double im_rate = 0.0;   // normalized Im of sum 1/(2 y_i)
};

inline RealityResidual reality_residual(const HyperellipticCurve& c, const Divisor& d,
                                        std::size_t r) {
    const cx br = c.branch_points[r - 1];
    RealityResidual out;
    cx F(1.0);
    for (const auto& p : d.points) F *= (br - p.x);
    out.f_modulus = std::abs(std::abs(F) - 1.0);
    cx rate(0.0);
    double norm = 0.0;
    for (const auto& p : d.points) {
        rate += 1.0 / (2.0 * p.y);
        norm += std::abs(1.0 / (2.0 * p.y));
    }
    out.im_rate = std::abs(rate.imag()) / (norm > 0 ? norm : 1.0);
    return out;
}

// Rescales the divisor offsets from b_r radially (bisection on the scale)
// until prod |b_r - x_i| = 1.
inline Divisor reality_sweep(const HyperellipticCurve& c, const Divisor& d,
                             std::size_t r) {
    const cx br = c.branch_points[r - 1];
    auto modulus_at = [&](double rho) {
        double prod = 1.0;
        for (const auto& p : d.points) prod *= std::abs(rho * (p.x - br));
        return prod;
    };
    double lo = 1e-3, hi = 1e3;
    if (modulus_at(lo) > 1.0 || modulus_at(hi) < 1.0)
        throw Error("reality_sweep: bracket failed");
    for (int it = 0; it < 200; ++it) {
        double mid = std::sqrt(lo * hi);
        if (modulus_at(mid) < 1.0) lo = mid;
        else hi = mid;
        if (hi / lo < 1.0 + 1e-15) break;
    }
    double rho = std::sqrt(lo * hi);
    Divisor out;
    for (const auto& p : d.points)
        out.points.push_back(lift(c, br + rho * (p.x - br), +1));
    return out;
}

// ---------------------------------------------------------------------------
// Shape-form comparison: b_r^g u_g + sum_i b_r^{i-1} zeta_i(u) against the
// traced Z, up to one fitted complex affine map (the normalization constant
// and integration constant are undetermined).
// ---------------------------------------------------------------------------

inline IdentityReport verify_shape_form(const SigmaContext& ctx, const LoopSample& trace,
                                        const Divisor& d0, double tol = 1e-6) {
    const HyperellipticCurve& c = ctx.curve();
    const std::size_t g = c.genus;
    const cx br = trace.b_r;
    cvec u0 = abel_map(c, d0).u;

    IdentityReport rep;
    rep.id = "shape_form_3_9";
    rep.n_samples = trace.s.size();
    rep.tolerance = tol;

    cvec zform(trace.s.size());
    for (std::size_t j = 0; j < trace.s.size(); ++j) {
        cvec u = u0;
        u[g - 1] += trace.s[j];
        cvec zeta = ctx.zeta(u);
        cx acc = std::pow(br, double(g)) * u[g - 1];
        cx bp(1.0);
        for (std::size_t i = 0; i < g; ++i) {
            acc += bp * zeta[i];
            bp *= br;
        }
        zform[j] = acc;
    }
    // Fit Z_traced ~ a * zform + b using the endpoints.
    std::size_t j0 = 0, j1 = trace.s.size() - 1;
    cx a = (trace.Z[j1] - trace.Z[j0]) / (zform[j1] - zform[j0]);
    cx b = trace.Z[j0] - a * zform[j0];
    double scale = 0.0;
    for (std::size_t j = 0; j < trace.s.size(); ++j)
        scale = std::max(scale, std::abs(trace.Z[j]));
    for (std::size_t j = 0; j < trace.s.size(); ++j)
        rep.bump(std::abs(a * zform[j] + b - trace.Z[j]) / (1.0 + scale));
    rep.note("affine_scale", fmt_cx(a));
    rep.note("affine_offset", fmt_cx(b));
    rep.finalize();
    return rep;
}

} // namespace loopsoliton

#endif
