#ifndef LOOPSOLITON_PERIODS_HPP
#define LOOPSOLITON_PERIODS_HPP

#include <cmath>
#include <vector>

#include "common.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "homology.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"

namespace loopsoliton {

// Sign convention applied to the second-kind period matrices so that
// zeta(u + 2 omega'_k) - zeta(u) = +2 eta'_{.k} and the wp/divisor
// anchor hold; calibrated once at genus 1 and asserted by the tests.
inline constexpr double kEtaSign = -1.0;

// Sign of the generalized Legendre constant in
// omega1^T eta2 - eta1^T omega2 = kLegendreSign * (pi i / 2) I.
inline constexpr double kLegendreSign = -1.0;

inline std::vector<Poly> first_kind_numerators(const HyperellipticCurve& c) {
    std::vector<Poly> nums(c.genus);
    for (std::size_t k = 1; k <= c.genus; ++k) {
        nums[k - 1].c.assign(k, cx(0.0));
        nums[k - 1].c[k - 1] = 1.0; // x^{k-1}
    }
    return nums;
}

// dr_j numerator: sum_{k=j}^{2g-j} (k+1-j) lambda_{k+1+j} x^k.
inline std::vector<Poly> second_kind_numerators(const HyperellipticCurve& c) {
    const std::size_t g = c.genus;
    std::vector<Poly> nums(g);
    for (std::size_t j = 1; j <= g; ++j) {
        nums[j - 1].c.assign(2 * g - j + 1, cx(0.0));
        for (std::size_t k = j; k <= 2 * g - j; ++k)
            nums[j - 1].c[k] = double(k + 1 - j) * c.lambda[k + 1 + j];
    }
    return nums;
}

namespace detail {

inline std::vector<cx> connector_waypoints(const PathEngine& eng,
                                           const HyperellipticCurve& c,
                                           const cx& target) {
    double im_top = c.branch_points[0].imag();
    for (const cx& b : c.branch_points) im_top = std::max(im_top, b.imag());
    double h = im_top + eng.spread() * (0.6 + 0.15 * double(c.genus + 2) + 0.25);
    cx xa = eng.anchor_x();
    std::vector<cx> corners{xa, cx(xa.real(), h), cx(target.real(), h), target};
    std::vector<cx> out{xa};
    for (std::size_t s = 0; s + 1 < corners.size(); ++s) {
        auto leg = eng.route(corners[s], corners[s + 1]);
        out.insert(out.end(), leg.begin() + 1, leg.end());
    }
    return out;
}

} // namespace detail

// Open-path integral of one doubled component, tracked from the global
// anchor through a high connector.
inline cvec component_integrals(const PathEngine& eng, const HyperellipticCurve& c,
                                const CycleSpec::Component& comp,
                                const std::vector<Poly>& nums) {
    auto way = detail::connector_waypoints(eng, c, comp.entry);
    TrackState st = eng.anchor();
    for (std::size_t k = 1; k < way.size(); ++k) st = eng.track_line(st, way[k]);

    cvec open(nums.size(), cx(0.0));
    if (comp.via.empty()) {
        // Cut segment: approach the midpoint through the perpendicular
        // entry, then integral over [end_a -> end_b] =
        // (mid -> end_b) - (mid -> end_a).
        cx mid = 0.5 * (comp.end_a + comp.end_b);
        st = eng.track_line(st, mid);
        cvec to_b = eng.integrate_into_branch(st, comp.end_b, nums);
        cvec to_a = eng.integrate_into_branch(st, comp.end_a, nums);
        for (std::size_t m = 0; m < nums.size(); ++m) open[m] = to_b[m] - to_a[m];
    } else {
        // Path: end_a <- via[0] -> ... -> via.back() -> end_b.
        cvec i1 = eng.integrate_into_branch(st, comp.end_a, nums);
        TrackState st2 = st;
        cvec mid(nums.size(), cx(0.0));
        for (std::size_t k = 1; k < comp.via.size(); ++k) {
            cvec seg = eng.integrate_regular(st2, comp.via[k], nums);
            for (std::size_t m = 0; m < nums.size(); ++m) mid[m] += seg[m];
        }
        cvec i3 = eng.integrate_into_branch(st2, comp.end_b, nums);
        for (std::size_t m = 0; m < nums.size(); ++m)
            open[m] = -i1[m] + mid[m] + i3[m];
    }
    for (auto& v : open) v *= comp.weight;
    return open;
}

// Full cycle integral of each numerator/(2y) dx over the realized cycle:
// twice the weighted sum of its doubled components.
inline cvec cycle_integrals(const PathEngine& eng, const HyperellipticCurve& c,
                            const CycleSpec& cyc, const std::vector<Poly>& nums) {
    eng.reset_budget();
    cvec total(nums.size(), cx(0.0));
    for (const auto& comp : cyc.comps) {
        cvec vals = component_integrals(eng, c, comp, nums);
        for (std::size_t m = 0; m < nums.size(); ++m) total[m] += vals[m];
    }
    for (auto& v : total) v *= 2.0 * double(cyc.orientation);
    return total;
}

enum class DifferentialKind { First, Second };

inline cx integrate_differential(const HyperellipticCurve& c, const CycleSpec& cyc,
                                 DifferentialKind kind, std::size_t index,
                                 double tol = 1e-12) {
    if (index < 1 || index > c.genus) throw Error("integrate_differential: bad index");
    PathEngine eng(c, tol);
    std::vector<Poly> nums;
    if (kind == DifferentialKind::First)
        nums.push_back(first_kind_numerators(c)[index - 1]);
    else
        nums.push_back(second_kind_numerators(c)[index - 1]);
    return cycle_integrals(eng, c, cyc, nums)[0];
}

struct PeriodData {
    std::size_t genus = 0;
    CMat omega1, omega2, eta1, eta2; // one-half cycle integrals
    CMat tau;                        // omega1^{-1} omega2
    std::vector<CycleSpec> basis;    // with repaired orientations
    double tau_asymmetry = 0.0;
    double legendre_residual = 0.0;      // asserted form, see kLegendreSign
    double legendre_residual_alt = 0.0;  // eta1^T omega2 - eta2^T omega1 form
    double min_im_tau_eig = 0.0;
    std::vector<double> lattice;     // 2g x 2g row-major: columns Re/Im of 2w', 2w''
};

namespace detail {

inline double tau_asym(const CMat& t) {
    return (t - t.transposed()).max_abs();
}

inline std::vector<double> im_tau_eigs(const CMat& t) {
    const std::size_t g = t.rows();
    std::vector<double> m(g * g);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            m[i * g + j] = 0.5 * (t(i, j).imag() + t(j, i).imag());
    return sym_eigenvalues(m, g);
}

} // namespace detail

// Computes all four half-period matrices over the constructed basis, then
// repairs cycle orientations (column sign flips) until tau is symmetric
// with positive definite imaginary part.
inline PeriodData compute_periods_on_basis(const HyperellipticCurve& c,
                                           std::vector<CycleSpec> basis,
                                           double tol = 1e-12) {
    const std::size_t g = c.genus;
    PathEngine eng(c, tol);
    std::vector<Poly> nums = first_kind_numerators(c);
    {
        auto second = second_kind_numerators(c);
        nums.insert(nums.end(), second.begin(), second.end());
    }

    CMat w1(g, g), w2(g, g), e1(g, g), e2(g, g);
    for (const CycleSpec& cyc : basis) {
        cvec vals = cycle_integrals(eng, c, cyc, nums);
        std::size_t j = std::size_t(cyc.index) - 1;
        for (std::size_t k = 0; k < g; ++k) {
            if (cyc.kind == CycleSpec::Kind::Alpha) {
                w1(k, j) = 0.5 * vals[k];
                e1(k, j) = 0.5 * kEtaSign * vals[g + k];
            } else {
                w2(k, j) = 0.5 * vals[k];
                e2(k, j) = 0.5 * kEtaSign * vals[g + k];
            }
        }
    }

    CMat tau0 = solve(w1, w2);

    // Repair the constructed basis within the transformations it can be off
    // by: per-cycle orientation flips (diagonal +-1 on the alpha and beta
    // columns) plus an integer shear beta_j -> beta_j + sum_k A_{kj} alpha_k.
    // A shear shifts tau by the integer matrix A, so a candidate is valid
    // exactly when the asymmetry of the sign-adjusted tau is an integer real
    // matrix; Im tau must come out positive definite.
    double best_score = 1e300;
    std::size_t best_pattern = 0;
    std::vector<long> best_shear(g * g, 0);
    bool found = false;
    const std::size_t n_patterns = std::size_t(1) << (2 * g);
    for (std::size_t pat = 0; pat < n_patterns; ++pat) {
        CMat t = tau0;
        for (std::size_t i = 0; i < g; ++i) {
            double dai = ((pat >> i) & 1) ? -1.0 : 1.0;
            double dbi = ((pat >> (g + i)) & 1) ? -1.0 : 1.0;
            for (std::size_t j = 0; j < g; ++j) {
                t(i, j) *= dai;
                t(j, i) *= dbi;
            }
        }
        // integer-shear test on the asymmetry
        bool ok = true;
        std::vector<long> shear(g * g, 0);
        double resid = 0.0;
        double shear_size = 0.0;
        for (std::size_t i = 0; i < g && ok; ++i)
            for (std::size_t j = i + 1; j < g && ok; ++j) {
                cx s = t(i, j) - t(j, i);
                long a = std::lround(s.real());
                if (std::abs(s.real() - double(a)) > 1e-6 || std::abs(s.imag()) > 1e-6 ||
                    std::labs(a) > 16) {
                    ok = false;
                    break;
                }
                shear[j * g + i] = a; // A_{ji} = tau_{ij} - tau_{ji}
                resid = std::max(resid, std::abs(s - cx(double(a))));
                shear_size += std::abs(double(a));
            }
        if (!ok) continue;
        // positivity after the (real) shear: Im tau unchanged by it
        auto eigs = detail::im_tau_eigs(t);
        if (eigs.front() <= 0.0) continue;
        double score = shear_size * 10.0 + resid;
        if (score < best_score) {
            best_score = score;
            best_pattern = pat;
            best_shear = shear;
            found = true;
        }
    }
    if (!found)
        throw NonPositiveImTau("compute_periods: no symplectic repair found");

    std::vector<double> da(g, 1.0), db(g, 1.0);
    for (std::size_t i = 0; i < g; ++i) {
        if ((best_pattern >> i) & 1) da[i] = -1.0;
        if ((best_pattern >> (g + i)) & 1) db[i] = -1.0;
    }
    auto apply_signs = [&](CMat& m, const std::vector<double>& d) {
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t k = 0; k < g; ++k) m(k, j) *= d[j];
    };
    apply_signs(w1, da);
    apply_signs(e1, da);
    apply_signs(w2, db);
    apply_signs(e2, db);
    if (best_score > 0.0) {
        CMat A(g, g);
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t j = 0; j < g; ++j)
                A(i, j) = double(best_shear[i * g + j]);
        w2 = w2 + w1 * A;
        e2 = e2 + e1 * A;
    }

    CMat tau = solve(w1, w2);
    auto eigs = detail::im_tau_eigs(tau);
    if (eigs.front() <= 0.0)
        throw NonPositiveImTau("compute_periods: Im tau not positive definite");
    if (detail::tau_asym(tau) > 1e-6)
        throw NonPositiveImTau("compute_periods: tau could not be symmetrized");

    for (CycleSpec& cyc : basis) {
        std::size_t j = std::size_t(cyc.index) - 1;
        double s = (cyc.kind == CycleSpec::Kind::Alpha) ? da[j] : db[j];
        cyc.orientation = int(s);
    }

    PeriodData pd;
    pd.genus = g;
    pd.omega1 = w1;
    pd.omega2 = w2;
    pd.eta1 = e1;
    pd.eta2 = e2;
    pd.tau = tau;
    pd.basis = std::move(basis);
    pd.tau_asymmetry = detail::tau_asym(tau);
    pd.min_im_tau_eig = eigs.front();

    const cx legc = kLegendreSign * cx(0.0, 0.5 * pi);
    CMat L = w1.transposed() * e2 - e1.transposed() * w2;
    CMat Lalt = e1.transposed() * w2 - e2.transposed() * w1;
    pd.legendre_residual = (L - CMat::identity(g) * legc).max_abs();
    pd.legendre_residual_alt = (Lalt - CMat::identity(g) * legc).max_abs();

    pd.lattice.assign(4 * g * g, 0.0);
    const std::size_t n = 2 * g;
    for (std::size_t k = 0; k < g; ++k)
        for (std::size_t j = 0; j < g; ++j) {
            cx a = 2.0 * w1(k, j), bb = 2.0 * w2(k, j);
            pd.lattice[k * n + j] = a.real();
            pd.lattice[(k + g) * n + j] = a.imag();
            pd.lattice[k * n + (j + g)] = bb.real();
            pd.lattice[(k + g) * n + (j + g)] = bb.imag();
        }
    return pd;
}

inline PeriodData compute_periods(const HyperellipticCurve& c, double tol = 1e-12) {
    return compute_periods_on_basis(c, homology_basis(c), tol);
}

// Real coordinates of u in the lattice basis (2w' | 2w'').
inline std::vector<double> lattice_coords(const PeriodData& pd, const cvec& u) {
    const std::size_t g = pd.genus, n = 2 * g;
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < g; ++k) {
        rhs[k] = u[k].real();
        rhs[k + g] = u[k].imag();
    }
    return solve_real(pd.lattice, rhs, n);
}

// Distance from u to the nearest lattice point of Lambda = 2w Z^{2g}.
inline double lattice_membership_residual(const PeriodData& pd, const cvec& u) {
    auto coords = lattice_coords(pd, u);
    const std::size_t g = pd.genus, n = 2 * g;
    std::vector<double> frac(n);
    for (std::size_t k = 0; k < n; ++k) frac[k] = coords[k] - std::round(coords[k]);
    double r = 0.0;
    for (std::size_t k = 0; k < g; ++k) {
        cx acc(0.0);
        for (std::size_t j = 0; j < n; ++j)
            acc += cx(pd.lattice[k * n + j], pd.lattice[(k + g) * n + j]) * frac[j];
        r = std::max(r, std::abs(acc));
    }
    return r;
}

// Maps u into the fundamental cell (coordinates in [-1/2, 1/2)).
inline cvec lattice_reduce(const PeriodData& pd, const cvec& u) {
    auto coords = lattice_coords(pd, u);
    const std::size_t g = pd.genus, n = 2 * g;
    cvec out(g);
    for (std::size_t k = 0; k < g; ++k) {
        cx acc(0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double f = coords[j] - std::round(coords[j]);
            acc += cx(pd.lattice[k * n + j], pd.lattice[(k + g) * n + j]) * f;
        }
        out[k] = acc;
    }
    return out;
}

// Integer combination test: every column of B's lattice basis must be an
// integer combination of A's and vice versa.
inline double lattice_equality_residual(const PeriodData& a, const PeriodData& b) {
    const std::size_t g = a.genus, n = 2 * g;
    double worst = 0.0;
    auto check = [&](const PeriodData& base, const PeriodData& other) {
        for (std::size_t col = 0; col < n; ++col) {
            cvec u(g);
            for (std::size_t k = 0; k < g; ++k)
                u[k] = cx(other.lattice[k * n + col], other.lattice[(k + g) * n + col]);
            worst = std::max(worst, lattice_membership_residual(base, u));
        }
    };
    check(a, b);
    check(b, a);
    return worst;
}

} // namespace loopsoliton

#endif
