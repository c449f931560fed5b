#ifndef LOOPSOLITON_KLEINIAN_HPP
#define LOOPSOLITON_KLEINIAN_HPP

#include <cmath>
#include <vector>

#include "common.hpp"
#include "curve.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "periods.hpp"
#include "theta.hpp"

namespace loopsoliton {

// Context for the sigma function built on theta:
//   sigma(u) = exp(+1/2 u^T kappa u) theta[delta'', delta'](1/2 w'^{-1} u; tau)
// with kappa = eta' w'^{-1} and the overall constant fixed to 1.  The
// exponent sign pairs with the eta-sign convention of the period module so
// that zeta(u + 2w' e_k) - zeta(u) = +2 eta'_{.k} and wp_gg(u(D)) = sum x_i
// hold (the classical normalization).  All sigma values are handled in log
// form so quotients and log-derivatives never overflow.
// The context also carries every branch-point half period
//   omega_r = int_inf^{b_r} du = w' m_r + w'' n_r   (integer m_r, n_r)
// together with eta(omega_r) = eta' m_r + eta'' n_r, which is the exact
// exponential prefactor of the al-function quotient.
class SigmaContext {
public:
    SigmaContext(const HyperellipticCurve& curve, const PeriodData& periods,
                 double theta_tol = 1e-13)
        : curve_(curve), pd_(periods), tol_(theta_tol) {
        const std::size_t g = curve.genus;
        w1_inv_ = inverse(pd_.omega1);
        half_w1_inv_ = w1_inv_ * cx(0.5);
        kappa_ = pd_.eta1 * w1_inv_;
        // Symmetrize: kappa is symmetric up to quadrature error.
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t j = i + 1; j < g; ++j) {
                cx s = 0.5 * (kappa_(i, j) + kappa_(j, i));
                kappa_(i, j) = s;
                kappa_(j, i) = s;
            }
        chr_ = canonical_char(g);

        const std::size_t nb = curve.branch_points.size();
        omega_r_.resize(nb);
        eta_r_.resize(nb);
        m_r_.resize(nb);
        n_r_.resize(nb);
        for (std::size_t r = 1; r <= nb; ++r) {
            cvec wr = half_period(curve, r);
            omega_r_[r - 1] = wr;
            auto coords = lattice_coords(pd_, wr); // in the (2w', 2w'') basis
            std::vector<long> m(g), n(g);
            for (std::size_t k = 0; k < g; ++k) {
                double mc = 2.0 * coords[k];
                double nc = 2.0 * coords[k + g];
                m[k] = std::lround(mc);
                n[k] = std::lround(nc);
                if (std::abs(mc - double(m[k])) > 1e-6 ||
                    std::abs(nc - double(n[k])) > 1e-6)
                    throw Error("SigmaContext: half period has non-integer coordinates");
            }
            m_r_[r - 1] = m;
            n_r_[r - 1] = n;
            cvec h(g, cx(0.0));
            for (std::size_t k = 0; k < g; ++k)
                for (std::size_t i = 0; i < g; ++i)
                    h[i] += pd_.eta1(i, k) * double(m[k]) + pd_.eta2(i, k) * double(n[k]);
            eta_r_[r - 1] = h;
        }
    }

    const HyperellipticCurve& curve() const { return curve_; }
    const PeriodData& periods() const { return pd_; }
    const CMat& kappa() const { return kappa_; }
    const ThetaChar& characteristic() const { return chr_; }
    const cvec& omega_r(std::size_t r) const { return omega_r_.at(r - 1); }
    const cvec& eta_omega_r(std::size_t r) const { return eta_r_.at(r - 1); }
    const std::vector<long>& half_period_m(std::size_t r) const { return m_r_.at(r - 1); }
    const std::vector<long>& half_period_n(std::size_t r) const { return n_r_.at(r - 1); }

    cvec theta_argument(const cvec& u) const { return half_w1_inv_ * u; }

    cx quadratic_form(const cvec& u) const {
        cx q(0.0);
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < u.size(); ++j)
                q += u[i] * kappa_(i, j) * u[j];
        return q;
    }

    // log sigma(u) up to an irrelevant multiple of 2 pi i.
    cx sigma_log(const cvec& u) const {
        ThetaResult th = theta_full(theta_argument(u), pd_.tau, chr_, tol_, 0);
        guard_divisor(th);
        return 0.5 * quadratic_form(u) + th.log_scale + std::log(th.value);
    }

    cx sigma(const cvec& u) const { return std::exp(sigma_log(u)); }

    bool near_theta_divisor(const cvec& u) const {
        ThetaResult th = theta_full(theta_argument(u), pd_.tau, chr_, tol_, 0);
        return std::abs(th.value) < kDivisorThreshold;
    }

    // zeta_mu = d/du_mu log sigma.
    cvec zeta(const cvec& u) const {
        const std::size_t g = u.size();
        ThetaResult th = theta_full(theta_argument(u), pd_.tau, chr_, tol_, 1);
        guard_divisor(th);
        cvec out(g, cx(0.0));
        cvec ku = kappa_ * u;
        for (std::size_t mu = 0; mu < g; ++mu) {
            cx grad(0.0);
            for (std::size_t a = 0; a < g; ++a)
                grad += half_w1_inv_(a, mu) * th.grad[a] / th.value;
            out[mu] = ku[mu] + grad;
        }
        return out;
    }

    // wp_{mu nu} = -d^2/du_mu du_nu log sigma; symmetric by construction.
    CMat wp_matrix(const cvec& u) const {
        const std::size_t g = u.size();
        ThetaResult th = theta_full(theta_argument(u), pd_.tau, chr_, tol_, 2);
        guard_divisor(th);
        CMat hess_log(g, g);
        for (std::size_t a = 0; a < g; ++a)
            for (std::size_t b = 0; b < g; ++b)
                hess_log(a, b) = th.hess[a * g + b] / th.value -
                                 (th.grad[a] / th.value) * (th.grad[b] / th.value);
        CMat out(g, g);
        for (std::size_t mu = 0; mu < g; ++mu)
            for (std::size_t nu = 0; nu < g; ++nu) {
                cx acc(0.0);
                for (std::size_t a = 0; a < g; ++a)
                    for (std::size_t b = 0; b < g; ++b)
                        acc += half_w1_inv_(a, mu) * half_w1_inv_(b, nu) * hess_log(a, b);
                out(mu, nu) = -kappa_(mu, nu) - acc;
            }
        return out;
    }

    cx wp(const cvec& u, std::size_t mu, std::size_t nu) const {
        return wp_matrix(u)(mu - 1, nu - 1);
    }

    cx wp_gg(const cvec& u) const { return wp(u, curve_.genus, curve_.genus); }

private:
    void guard_divisor(const ThetaResult& th) const {
        if (std::abs(th.value) < kDivisorThreshold)
            throw OnThetaDivisor("sigma: argument on the theta divisor");
    }

    static constexpr double kDivisorThreshold = 1e-12;

    HyperellipticCurve curve_;
    PeriodData pd_;
    double tol_;
    CMat w1_inv_, half_w1_inv_, kappa_;
    ThetaChar chr_;
    std::vector<cvec> omega_r_, eta_r_;
    std::vector<std::vector<long>> m_r_, n_r_;
};

// ---------------------------------------------------------------------------
// al functions.
// ---------------------------------------------------------------------------

// Which polynomial derivative feeds gamma_r = sqrt(-1/P'(b_r)); the curve
// polynomial f is the Baker reading, the divisor polynomial F is kept as a
// comparison option.
enum class AlGamma { CurvePoly, DivisorPoly };

inline cx al_divisor(const HyperellipticCurve& c, const Divisor& d, std::size_t r,
                     AlGamma conv = AlGamma::CurvePoly) {
    if (r < 1 || r > c.branch_points.size()) throw Error("al_divisor: bad index");
    const cx br = c.branch_points[r - 1];
    for (const auto& p : d.points)
        if (std::abs(p.x - br) < 1e-10 * (1.0 + std::abs(br)))
            throw BranchPointCollision("al_divisor: divisor point at b_r");
    cx F(1.0);
    for (const auto& p : d.points) F *= (br - p.x);
    cx pprime;
    if (conv == AlGamma::CurvePoly) {
        pprime = c.eval_fprime(br);
    } else {
        cx acc(0.0);
        for (std::size_t i = 0; i < d.size(); ++i) {
            cx term(1.0);
            for (std::size_t j = 0; j < d.size(); ++j)
                if (j != i) term *= (br - d.points[j].x);
            acc += term;
        }
        pprime = acc;
    }
    return std::sqrt(-1.0 / pprime) * std::sqrt(F);
}

// Exponential prefactor convention for the sigma-quotient form of al_r.
// Exact uses eta(omega_r) = eta' m_r + eta'' n_r, which keeps the quotient
// an honest function of u for every r; Abbreviated uses eta' w'^{-1} omega_r,
// which agrees with Exact exactly when omega_r has no beta component
// (n_r = 0, e.g. the branch point adjacent to infinity).
enum class AlPrefactor { Exact, Abbreviated };

// al_r(u) up to the undetermined constant gamma_r'':
//   exp(-u^T eta(omega_r)) sigma(u + omega_r) / sigma(u).
inline cx al_sigma(const SigmaContext& ctx, const cvec& u, std::size_t r,
                   AlPrefactor pre = AlPrefactor::Exact) {
    const cvec& wr = ctx.omega_r(r);
    cvec shifted(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) shifted[k] = u[k] + wr[k];
    cvec h;
    if (pre == AlPrefactor::Exact) {
        h = ctx.eta_omega_r(r);
    } else {
        CMat kw = ctx.kappa();
        h = kw * wr;
    }
    cx lin(0.0);
    for (std::size_t k = 0; k < u.size(); ++k) lin += u[k] * h[k];
    return std::exp(-lin + ctx.sigma_log(shifted) - ctx.sigma_log(u));
}

// ---------------------------------------------------------------------------
// Index convention of wp_{g,nu} against the elementary symmetric functions:
// F(x) = x^g - sum_nu wp_{g,nu}(u) x^{nu - 1}, anchored by wp_gg = sum x_i.
// The alternative direct-index reading is kept for the resolution report.
// ---------------------------------------------------------------------------

struct WpIndexResolution {
    double residual_adopted = 0.0; // wp_{g,nu} = coefficient of x^{nu-1}
    double residual_direct = 0.0;  // wp_{g,i} = coefficient of x^{g-i}
    bool adopted_reversed = true;
};

inline WpIndexResolution resolve_wp_index(const SigmaContext& ctx, const Divisor& d) {
    const std::size_t g = ctx.curve().genus;
    cvec u = abel_map(ctx.curve(), d).u;
    CMat wpm = ctx.wp_matrix(u);
    cvec F = F_poly(d); // ascending, monic

    double res_rev = 0.0, res_dir = 0.0;
    for (std::size_t nu = 1; nu <= g; ++nu) {
        // reversed (adopted): -wp_{g,nu} is the coefficient of x^{nu-1}
        res_rev = std::max(res_rev, std::abs(wpm(g - 1, nu - 1) + F[nu - 1]));
        // direct: -wp_{g,i} is the coefficient of x^{g-i}
        res_dir = std::max(res_dir, std::abs(wpm(g - 1, nu - 1) + F[g - nu]));
    }
    WpIndexResolution out;
    out.residual_adopted = res_rev;
    out.residual_direct = res_dir;
    out.adopted_reversed = res_rev <= res_dir;
    return out;
}

} // namespace loopsoliton

#endif
