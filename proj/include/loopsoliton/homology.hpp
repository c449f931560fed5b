#ifndef LOOPSOLITON_HOMOLOGY_HPP
#define LOOPSOLITON_HOMOLOGY_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace loopsoliton {

// Branch cuts pair consecutive lexicographically sorted branch points:
// (b1 b2)(b3 b4)...(b_{2g+1} inf).  Every cycle is realized as a sum of
// doubled open paths between branch points (traversed once on each sheet),
// tracked from one global anchor so all cycles share a branch convention:
//
//   alpha_i : the cut segment [b_{2i-1}, b_{2i}], entered through a short
//             leg perpendicular to the cut at its midpoint;
//   chain_k : b_{2k} -> (ascent) -> (above the gap) -> b_{2k+1}; it crosses
//             exactly cuts k and k+1, with opposite orientations (the last
//             chain reaches b_{2g+1} and crosses the cut to infinity).
//   beta_i  : chain_i + chain_{i+1} + ... + chain_g, which telescopes to the
//             cycle dual to alpha_i.  Distinct chains share no endpoints, so
//             the betas have zero mutual intersection.
//
// The homology class of a doubled path is its homotopy class relative to
// the branch points, so chain legs must not cross any cut segment away
// from their own endpoints; leg placement searches deterministic tilts
// until every leg is crossing-free (connector paths that only transport
// the branch choice are exempt - they can at worst flip a cycle's sign,
// which the period repair absorbs).
struct CycleSpec {
    enum class Kind { Alpha, Beta };

    struct Component {
        cx end_a, end_b;      // branch points joined by the doubled path
        cx entry;             // tracker entry point (regular)
        std::vector<cx> via;  // interior waypoints, entry first (empty for alpha)
        double weight = 1.0;
    };

    Kind kind;
    int index = 0; // 1..g
    std::vector<Component> comps;
    int orientation = 1; // flipped by the period repair step
};

namespace detail {

inline double dist_point_segment(const cx& p, const cx& a, const cx& b) {
    cx ab = b - a;
    double den = std::norm(ab);
    if (den == 0.0) return std::abs(p - a);
    double t = ((p - a) * std::conj(ab)).real() / den;
    t = std::min(1.0, std::max(0.0, t));
    return std::abs(p - (a + t * ab));
}

inline double cross2(const cx& a, const cx& b) {
    return a.real() * b.imag() - a.imag() * b.real();
}

// Strict interior crossing of two segments; shared endpoints do not count.
inline bool segments_cross(const cx& a1, const cx& a2, const cx& b1, const cx& b2) {
    const double eps = 1e-12 * (std::abs(a1) + std::abs(a2) + std::abs(b1) +
                                std::abs(b2) + 1.0);
    auto near = [&](const cx& u, const cx& v) { return std::abs(u - v) < eps; };
    if (near(a1, b1) || near(a1, b2) || near(a2, b1) || near(a2, b2)) {
        // shared endpoint: only flag overlap beyond the common point
        cx da = a2 - a1, db = b2 - b1;
        if (std::abs(cross2(da, db)) > eps * (std::abs(da) + std::abs(db)))
            return false;
        // collinear with a shared endpoint: cross iff they overlap
        double la = std::abs(da);
        cx dir = da / la;
        double t1 = ((b1 - a1) * std::conj(dir)).real();
        double t2 = ((b2 - a1) * std::conj(dir)).real();
        double lo = std::min(t1, t2), hi = std::max(t1, t2);
        return hi > eps && lo < la - eps && (hi - lo) > eps;
    }
    double d1 = cross2(a2 - a1, b1 - a1);
    double d2 = cross2(a2 - a1, b2 - a1);
    double d3 = cross2(b2 - b1, a1 - b1);
    double d4 = cross2(b2 - b1, a2 - b1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

struct CutSet {
    std::vector<std::pair<cx, cx>> cuts; // finite cuts only
};

inline bool leg_ok(const cx& from, const cx& to, const cvec& branch_points,
                   const CutSet& cuts, double margin) {
    for (const cx& bp : branch_points) {
        if (std::abs(bp - from) < 1e-13 * (1.0 + std::abs(bp))) continue;
        if (std::abs(bp - to) < 1e-13 * (1.0 + std::abs(bp))) continue;
        if (dist_point_segment(bp, from, to) < margin) return false;
    }
    for (const auto& [p, q] : cuts.cuts)
        if (segments_cross(from, to, p, q)) return false;
    return true;
}

// Deterministic horizontal tilt search so a slanted leg clears all other
// branch points and crosses no cut segment.
inline cx clear_top_point(const cx& from, double target_re, double height,
                          const cvec& branch_points, const CutSet& cuts,
                          double margin) {
    for (int k = 0; k < 60; ++k) {
        double shift = (k % 2 == 0 ? 1.0 : -1.0) * margin * 1.5 * double((k + 1) / 2);
        cx top(target_re + shift, height);
        if (leg_ok(from, top, branch_points, cuts, margin)) return top;
    }
    throw PathThroughBranchPoint("homology: could not clear a vertical leg");
}

inline CycleSpec::Component chain_component(const HyperellipticCurve& c,
                                            std::size_t k, double height,
                                            const CutSet& cuts, double margin) {
    const cvec& b = c.branch_points;
    CycleSpec::Component comp;
    comp.end_a = b[2 * k - 1]; // b_{2k}
    comp.end_b = b[2 * k];     // b_{2k+1}
    for (int attempt = 0; attempt < 8; ++attempt) {
        double h = height * (1.0 + 0.35 * attempt);
        try {
            cx top_a = clear_top_point(comp.end_a, comp.end_a.real(), h, b, cuts, margin);
            cx top_b = clear_top_point(comp.end_b, comp.end_b.real(), h, b, cuts, margin);
            if (!leg_ok(top_a, top_b, b, cuts, margin)) continue;
            comp.entry = top_a;
            comp.via = {top_a, top_b};
            return comp;
        } catch (const PathThroughBranchPoint&) {
            continue;
        }
    }
    throw PathThroughBranchPoint("homology: chain placement failed");
}

} // namespace detail

inline std::vector<CycleSpec> homology_basis(const HyperellipticCurve& c) {
    const std::size_t g = c.genus;
    const cvec& b = c.branch_points; // sorted by (Re, Im)

    double im_top = b[0].imag();
    for (const cx& p : b) im_top = std::max(im_top, p.imag());
    double spread = 1.0;
    cx center(0.0);
    for (const cx& p : b) center += p;
    center /= double(b.size());
    for (const cx& p : b) spread = std::max(spread, std::abs(p - center));
    double margin = 0.15 * std::min(c.min_branch_separation(), spread);

    detail::CutSet cuts;
    for (std::size_t i = 0; i + 1 < b.size(); i += 2)
        cuts.cuts.emplace_back(b[i], b[i + 1]);

    std::vector<CycleSpec> basis;
    for (std::size_t i = 1; i <= g; ++i) {
        CycleSpec a;
        a.kind = CycleSpec::Kind::Alpha;
        a.index = int(i);
        CycleSpec::Component comp;
        comp.end_a = b[2 * i - 2];
        comp.end_b = b[2 * i - 1];
        // entry point: short leg perpendicular to the cut at its midpoint,
        // which meets the cut only at the midpoint itself
        cx mid = 0.5 * (comp.end_a + comp.end_b);
        cx dir = (comp.end_b - comp.end_a) / std::abs(comp.end_b - comp.end_a);
        comp.entry = mid + iu * dir * (0.75 * margin);
        a.comps.push_back(comp);
        basis.push_back(a);
    }
    for (std::size_t i = 1; i <= g; ++i) {
        CycleSpec bt;
        bt.kind = CycleSpec::Kind::Beta;
        bt.index = int(i);
        for (std::size_t k = i; k <= g; ++k) {
            double h = im_top + spread * (0.55 + 0.12 * double(k));
            bt.comps.push_back(detail::chain_component(c, k, h, cuts, margin));
        }
        basis.push_back(bt);
    }
    return basis;
}

// Combinatorial intersection numbers from the cut structure.  A chain
// component crosses the cut attached to each of its branch-point ends with
// opposite orientations, so a component over the gap (b_{2k}, b_{2k+1})
// meets alpha_j with signed count delta_{jk} - delta_{j,k+1}; summing the
// chains in beta_i telescopes these to delta_{ij}.  Alphas are mutually
// disjoint, and chains share no endpoints, so all other pairings vanish.
inline std::vector<std::vector<int>> intersection_matrix(
    const HyperellipticCurve& c, const std::vector<CycleSpec>& basis) {
    auto cut_of = [&](const cx& bp) -> std::size_t {
        for (std::size_t j = 0; j < c.branch_points.size(); ++j)
            if (std::abs(c.branch_points[j] - bp) < 1e-13 * (1.0 + std::abs(bp)))
                return j / 2; // 0-based cut index; the last point maps to cut g
        throw Error("intersection_matrix: unknown branch point");
    };
    const std::size_t n = basis.size();
    std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
            const CycleSpec& A = basis[r];
            const CycleSpec& B = basis[s];
            if (A.kind == B.kind) continue;
            const CycleSpec& al = (A.kind == CycleSpec::Kind::Alpha) ? A : B;
            const CycleSpec& be = (A.kind == CycleSpec::Kind::Alpha) ? B : A;
            std::size_t aj = std::size_t(al.index) - 1; // alpha_j hugs cut j (0-based)
            int count = 0;
            for (const auto& comp : be.comps) {
                int w = comp.weight > 0 ? 1 : -1;
                if (cut_of(comp.end_a) == aj) count += w;
                if (cut_of(comp.end_b) == aj) count -= w;
            }
            int v = (A.kind == CycleSpec::Kind::Alpha) ? 1 : -1;
            m[r][s] = v * count * A.orientation * B.orientation;
        }
    return m;
}

} // namespace loopsoliton

#endif
