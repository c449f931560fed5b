#ifndef LOOPSOLITON_QUADRATURE_HPP
#define LOOPSOLITON_QUADRATURE_HPP

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "common.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "poly.hpp"

namespace loopsoliton {

struct GLRule {
    std::vector<double> nodes;   // on [0, 1]
    std::vector<double> weights; // sum to 1
};

inline const GLRule& gl_rule(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GLRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[n - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

// Analytic-continuation state of y = sqrt(f(x)) along a path.
struct TrackState {
    cx x;
    cx y;
};

// Pick the square root of `squared` closest to `prev`.
inline cx continue_sqrt(const cx& prev, const cx& squared) {
    cx r = std::sqrt(squared);
    if (std::norm(r - prev) > std::norm(r + prev)) r = -r;
    return r;
}

// Path quadrature over a hyperelliptic curve: integrates numerator(x)/(2y) dx
// along straight legs with continuous sheet tracking, with substitutions that
// remove the square-root endpoint singularity on legs that terminate at a
// branch point, and the 1/sqrt(x) parameter on the leg from infinity.
class PathEngine {
public:
    explicit PathEngine(const HyperellipticCurve& curve, double tol = 1e-12,
                        long budget = (1L << 16))
        : curve_(&curve), tol_(tol), budget_(budget) {
        cx c(0.0);
        for (const cx& b : curve.branch_points) c += b;
        c /= double(curve.branch_points.size());
        center_ = c;
        double spread = 1.0;
        for (const cx& b : curve.branch_points)
            spread = std::max(spread, std::abs(b - c));
        spread_ = spread;
        // |d| > max|b_j - c| keeps the infinity-leg radicand away from zero
        // for every t in [0, 1].
        dir_ = cx(3.0 * (spread + 1.0), 0.0);
    }

    const HyperellipticCurve& curve() const { return *curve_; }
    cx anchor_x() const { return center_ + dir_; }
    double spread() const { return spread_; }
    cx center() const { return center_; }

    void reset_budget() const { used_ = 0; }
    long nodes_used() const { return used_; }

    // Tracks y along the straight segment to `to` (no integration).  Along a
    // straight x-leg every factor (x - b_j) traverses a straight segment in
    // its own value plane, so its argument change is the principal angle of
    // the endpoint ratio; the leg is split until the total possible winding
    // of arg f is below 1 radian, which makes the nearest-root continuation
    // rigorous (y rotates by less than pi/2).
    TrackState track_line(TrackState st, const cx& to, int depth = 0) const {
        double winding = 0.0;
        for (const cx& b : curve_->branch_points) {
            cx num = to - b, den = st.x - b;
            if (std::abs(num) == 0.0 || std::abs(den) == 0.0)
                throw PathThroughBranchPoint("track_line: hit branch point");
            winding += std::abs(std::arg(num / den));
        }
        if (winding > 1.0) {
            if (depth > 60) throw Error("track_line: continuation did not converge");
            TrackState mid = track_line(st, 0.5 * (st.x + to), depth + 1);
            return track_line(mid, to, depth + 1);
        }
        cx y = continue_sqrt(st.y, curve_->eval_f_from_roots(to));
        return TrackState{to, y};
    }

    TrackState track_polyline(TrackState st, const std::vector<cx>& pts) const {
        for (const cx& p : pts) st = track_line(st, p);
        return st;
    }

    // Global anchor (x_A, y_A): endpoint of the canonical leg from infinity,
    // where the branch is pinned by W(0) = principal sqrt(d^{2g+1}).
    TrackState anchor() const {
        if (!anchor_cached_) {
            const std::size_t n = curve_->branch_points.size();
            cx w = std::exp(0.5 * double(n) * std::log(dir_));
            w = track_W(0.0, w, 1.0);
            anchor_state_ = TrackState{center_ + dir_, w};
            anchor_cached_ = true;
        }
        return anchor_state_;
    }

    // Integral of numerator_m(x)/(2y) dx over the straight leg st.x -> to.
    // Advances the track state.
    cvec integrate_regular(TrackState& st, const cx& to,
                           const std::vector<Poly>& nums) const {
        cvec total(nums.size(), cx(0.0));
        regular_panel(st, to, nums, total, 0);
        st = track_line(st, to);
        return total;
    }

    // Integral over the leg from the regular point st.x into the branch
    // point bp, via x(t) = bp + (a-bp) t^2.  st is consumed (the track
    // state at a branch point is not useful afterwards).
    cvec integrate_into_branch(const TrackState& st, const cx& bp,
                               const std::vector<Poly>& nums) const {
        const cx a = st.x;
        const cx D = a - bp;
        const cx w = std::sqrt(D);
        // y(t) = s * t * w * S(t) with S^2 = f(x)/(x - bp).
        cx S1 = std::sqrt(reduced_f(bp, a));
        double sgn = 1.0;
        {
            cx cand = w * S1;
            if (std::norm(cand - st.y) > std::norm(cand + st.y)) sgn = -1.0;
            cx err = sgn * cand - st.y;
            if (std::abs(err) > 1e-6 * (std::abs(st.y) + 1e-300))
                throw Error("integrate_into_branch: branch anchor mismatch");
        }
        // phi(x) dx / (2y) = (D / (s w)) * phi(x(t)) / S(t) dt,  t: 1 -> 0.
        cx pref = D / (sgn * w);
        cvec total(nums.size(), cx(0.0));
        SqrtLegCtx ctx{bp, D, pref, S1};
        sqrt_panel(ctx, 1.0, 0.0, S1, nums, total, 0);
        return total;
    }

    // du_k over the canonical infinity leg (t: 0 -> 1), for k = 1..g.
    // Numerators must be the first-kind ones x^{k-1}; the substitution is
    // specific to poly degree <= g-1.
    cvec integrate_infinity_first_kind() const {
        const std::size_t g = curve_->genus;
        cvec total(g, cx(0.0));
        cx w0 = std::exp(0.5 * double(2 * g + 1) * std::log(dir_));
        infinity_panel(0.0, 1.0, w0, total, 0);
        return total;
    }

    // Routes a polyline from -> to that stays `margin` away from all branch
    // points; detours deterministically around offenders.
    std::vector<cx> route(const cx& from, const cx& to) const {
        double margin = 0.05 * std::max(1.0, curve_->min_branch_separation());
        std::vector<cx> pts{from, to};
        for (int pass = 0; pass < 24; ++pass) {
            bool moved = false;
            for (std::size_t s = 0; s + 1 < pts.size() && !moved; ++s) {
                for (const cx& b : curve_->branch_points) {
                    if (std::abs(b - pts[s]) < 1e-14 || std::abs(b - pts[s + 1]) < 1e-14)
                        continue; // endpoint is allowed to be the branch point itself
                    double d = dist_point_segment(b, pts[s], pts[s + 1]);
                    if (d < margin) {
                        cx dir = pts[s + 1] - pts[s];
                        cx n = iu * dir / std::abs(dir);
                        cx foot = project_on_segment(b, pts[s], pts[s + 1]);
                        cx side = foot - b;
                        if (std::abs(side) < 1e-12 * (1.0 + std::abs(b)))
                            side = n;
                        side /= std::abs(side);
                        pts.insert(pts.begin() + s + 1, b + side * (2.5 * margin));
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) return pts;
        }
        throw PathThroughBranchPoint("route: could not avoid branch points");
    }

private:
    struct SqrtLegCtx {
        cx bp;
        cx D;
        cx pref;
        cx S_anchor;
    };

    cx reduced_f(const cx& bp, const cx& x) const {
        cx acc(1.0);
        bool removed = false;
        for (const cx& b : curve_->branch_points) {
            if (!removed && std::abs(b - bp) < 1e-14 * (1.0 + std::abs(bp))) {
                removed = true;
                continue;
            }
            acc *= (x - b);
        }
        if (!removed) throw Error("reduced_f: not a branch point");
        return acc;
    }

    void consume(long n) const {
        used_ += n;
        if (used_ > budget_)
            throw QuadratureFailure("quadrature budget exceeded");
    }

    static double dist_point_segment(const cx& p, const cx& a, const cx& b) {
        cx ab = b - a;
        double den = std::norm(ab);
        if (den == 0.0) return std::abs(p - a);
        double t = ((p - a) * std::conj(ab)).real() / den;
        t = std::min(1.0, std::max(0.0, t));
        return std::abs(p - (a + t * ab));
    }

    static cx project_on_segment(const cx& p, const cx& a, const cx& b) {
        cx ab = b - a;
        double den = std::norm(ab);
        if (den == 0.0) return a;
        double t = ((p - a) * std::conj(ab)).real() / den;
        t = std::min(1.0, std::max(0.0, t));
        return a + t * ab;
    }

    // One Gauss-Legendre panel along a straight x-leg; tracked sequentially.
    cvec regular_panel_eval(const TrackState& entry, const cx& x0, const cx& x1,
                            const std::vector<Poly>& nums, int n) const {
        consume(n);
        const GLRule& rule = gl_rule(n);
        cvec acc(nums.size(), cx(0.0));
        TrackState st = entry;
        cx span = x1 - x0;
        for (int i = 0; i < n; ++i) {
            cx x = x0 + span * rule.nodes[i];
            st = track_line(st, x);
            cx inv2y = 1.0 / (2.0 * st.y);
            for (std::size_t m = 0; m < nums.size(); ++m)
                acc[m] += rule.weights[i] * nums[m].eval(x) * inv2y;
        }
        for (auto& v : acc) v *= span;
        return acc;
    }

    void regular_panel(const TrackState& entry, const cx& x1,
                       const std::vector<Poly>& nums, cvec& total, int depth) const {
        cvec lo = regular_panel_eval(entry, entry.x, x1, nums, 16);
        cvec hi = regular_panel_eval(entry, entry.x, x1, nums, 32);
        double err = 0.0, scale = 0.0;
        for (std::size_t m = 0; m < nums.size(); ++m) {
            err = std::max(err, std::abs(lo[m] - hi[m]));
            scale = std::max(scale, std::abs(hi[m]));
        }
        if (err <= tol_ * (1.0 + scale) || depth > 24) {
            if (depth > 24 && err > 100 * tol_ * (1.0 + scale))
                throw QuadratureFailure("regular leg did not converge");
            for (std::size_t m = 0; m < nums.size(); ++m) total[m] += hi[m];
            return;
        }
        cx mid = 0.5 * (entry.x + x1);
        regular_panel(entry, mid, nums, total, depth + 1);
        TrackState st_mid = track_line(entry, mid);
        regular_panel(st_mid, x1, nums, total, depth + 1);
    }

    // Guarded continuation of S = sqrt(f(x)/(x-bp)) along the t-parameter.
    // Each remaining factor (x(t) - b_j) = (bp - b_j) + D t^2 moves along a
    // straight segment in its value plane as t^2 grows, so the same
    // subtended-angle bound applies.
    cx track_reduced(const SqrtLegCtx& ctx, double t_from, cx S_from, double t_to,
                     int depth = 0) const {
        cx x_from = ctx.bp + ctx.D * t_from * t_from;
        cx x_to = ctx.bp + ctx.D * t_to * t_to;
        double winding = 0.0;
        for (const cx& b : curve_->branch_points) {
            if (std::abs(b - ctx.bp) < 1e-14 * (1.0 + std::abs(ctx.bp))) continue;
            cx num = x_to - b, den = x_from - b;
            if (std::abs(num) == 0.0 || std::abs(den) == 0.0)
                throw PathThroughBranchPoint("track_reduced: hit branch point");
            winding += std::abs(std::arg(num / den));
        }
        if (winding > 1.0) {
            if (depth > 60) throw Error("track_reduced: continuation did not converge");
            double tm = 0.5 * (t_from + t_to);
            cx Sm = track_reduced(ctx, t_from, S_from, tm, depth + 1);
            return track_reduced(ctx, tm, Sm, t_to, depth + 1);
        }
        return continue_sqrt(S_from, reduced_f(ctx.bp, x_to));
    }

    // Panel in the substitution parameter t over [t0, t1] (t1 < t0 allowed);
    // S is tracked from the t0 end whose value is supplied.
    cvec sqrt_panel_eval(const SqrtLegCtx& ctx, double t0, double t1, cx S_at_t0,
                         const std::vector<Poly>& nums, int n, cx* S_exit) const {
        consume(n);
        const GLRule& rule = gl_rule(n);
        cvec acc(nums.size(), cx(0.0));
        cx S = S_at_t0;
        double t_prev = t0;
        for (int i = 0; i < n; ++i) {
            double t = t0 + (t1 - t0) * rule.nodes[i];
            cx x = ctx.bp + ctx.D * t * t;
            S = track_reduced(ctx, t_prev, S, t);
            t_prev = t;
            for (std::size_t m = 0; m < nums.size(); ++m)
                acc[m] += rule.weights[i] * nums[m].eval(x) / S;
        }
        for (auto& v : acc) v *= ctx.pref * (t1 - t0);
        if (S_exit) *S_exit = track_reduced(ctx, t_prev, S, t1);
        return acc;
    }

    void sqrt_panel(const SqrtLegCtx& ctx, double t0, double t1, cx S_at_t0,
                    const std::vector<Poly>& nums, cvec& total, int depth) const {
        cvec lo = sqrt_panel_eval(ctx, t0, t1, S_at_t0, nums, 16, nullptr);
        cvec hi = sqrt_panel_eval(ctx, t0, t1, S_at_t0, nums, 32, nullptr);
        double err = 0.0, scale = 0.0;
        for (std::size_t m = 0; m < nums.size(); ++m) {
            err = std::max(err, std::abs(lo[m] - hi[m]));
            scale = std::max(scale, std::abs(hi[m]));
        }
        if (err <= tol_ * (1.0 + scale) || depth > 24) {
            if (depth > 24 && err > 100 * tol_ * (1.0 + scale))
                throw QuadratureFailure("sqrt leg did not converge");
            for (std::size_t m = 0; m < nums.size(); ++m) total[m] += hi[m];
            return;
        }
        double tm = 0.5 * (t0 + t1);
        sqrt_panel(ctx, t0, tm, S_at_t0, nums, total, depth + 1);
        cx S_mid = track_reduced(ctx, t0, S_at_t0, tm);
        sqrt_panel(ctx, tm, t1, S_mid, nums, total, depth + 1);
    }

    cx infinity_radicand(double t) const {
        cx prod(1.0);
        for (const cx& b : curve_->branch_points)
            prod *= dir_ + (center_ - b) * t * t;
        return prod;
    }

    // Factors d + (c - b_j) t^2 move along straight rays as t^2 grows; same
    // subtended-angle subdivision rule.
    cx track_W(double t_from, cx W_from, double t_to, int depth = 0) const {
        double winding = 0.0;
        for (const cx& b : curve_->branch_points) {
            cx num = dir_ + (center_ - b) * t_to * t_to;
            cx den = dir_ + (center_ - b) * t_from * t_from;
            if (std::abs(num) == 0.0 || std::abs(den) == 0.0)
                throw PathThroughBranchPoint("track_W: radicand vanished");
            winding += std::abs(std::arg(num / den));
        }
        if (winding > 1.0) {
            if (depth > 60) throw Error("track_W: continuation did not converge");
            double tm = 0.5 * (t_from + t_to);
            cx Wm = track_W(t_from, W_from, tm, depth + 1);
            return track_W(tm, Wm, t_to, depth + 1);
        }
        return continue_sqrt(W_from, infinity_radicand(t_to));
    }

    // du_k/dt = -d (c t^2 + d)^{k-1} t^{2(g-k)} / W(t) on the leg from
    // infinity, W(t)^2 = prod_j (d + (c - b_j) t^2).
    cvec infinity_panel_eval(double t0, double t1, cx W_at_t0, int n) const {
        consume(n);
        const GLRule& rule = gl_rule(n);
        const std::size_t g = curve_->genus;
        cvec acc(g, cx(0.0));
        cx W = W_at_t0;
        double t_prev = t0;
        for (int i = 0; i < n; ++i) {
            double t = t0 + (t1 - t0) * rule.nodes[i];
            W = track_W(t_prev, W, t);
            t_prev = t;
            cx base = center_ * t * t + dir_;
            cx pw(1.0);
            for (std::size_t k = 1; k <= g; ++k) {
                double tpow = std::pow(t, 2.0 * double(g - k));
                acc[k - 1] += rule.weights[i] * (-dir_) * pw * tpow / W;
                pw *= base;
            }
        }
        for (auto& v : acc) v *= (t1 - t0);
        return acc;
    }

    void infinity_panel(double t0, double t1, cx W_at_t0, cvec& total,
                        int depth) const {
        cvec lo = infinity_panel_eval(t0, t1, W_at_t0, 16);
        cvec hi = infinity_panel_eval(t0, t1, W_at_t0, 32);
        double err = 0.0, scale = 0.0;
        for (std::size_t m = 0; m < lo.size(); ++m) {
            err = std::max(err, std::abs(lo[m] - hi[m]));
            scale = std::max(scale, std::abs(hi[m]));
        }
        if (err <= tol_ * (1.0 + scale) || depth > 24) {
            if (depth > 24 && err > 100 * tol_ * (1.0 + scale))
                throw QuadratureFailure("infinity leg did not converge");
            for (std::size_t m = 0; m < lo.size(); ++m) total[m] += hi[m];
            return;
        }
        double tm = 0.5 * (t0 + t1);
        infinity_panel(t0, tm, W_at_t0, total, depth + 1);
        cx W_mid = track_W(t0, W_at_t0, tm);
        infinity_panel(tm, t1, W_mid, total, depth + 1);
    }

    const HyperellipticCurve* curve_;
    double tol_;
    long budget_;
    mutable long used_ = 0;
    cx center_;
    double spread_;
    cx dir_;
    mutable bool anchor_cached_ = false;
    mutable TrackState anchor_state_{};
};

} // namespace loopsoliton

#endif
