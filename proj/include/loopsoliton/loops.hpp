#ifndef LOOPSOLITON_LOOPS_HPP
#define LOOPSOLITON_LOOPS_HPP

#include <cmath>
#include <vector>

#include "common.hpp"
#include "dynamics.hpp"
#include "errors.hpp"

namespace loopsoliton {

// Closed loop in frequency space with the convention
//   Z(s) = sum_n a_n exp(2 pi i n s) / sqrt(2 pi),  s-period 1.
struct FourierLoop {
    std::vector<cx> coeffs; // a_n for n = -N..N, index n + N
    int N = 0;

    cx a(int n) const {
        int idx = n + N;
        if (idx < 0 || idx >= int(coeffs.size())) return cx(0.0);
        return coeffs[std::size_t(idx)];
    }
    cx& a_ref(int n) { return coeffs[std::size_t(n + N)]; }

    cx eval(double s) const {
        cx acc(0.0);
        for (int n = -N; n <= N; ++n) {
            double ph = 2.0 * pi * n * s;
            acc += a(n) * cx(std::cos(ph), std::sin(ph));
        }
        return acc / std::sqrt(2.0 * pi);
    }

    cx eval_derivative(double s) const {
        cx acc(0.0);
        for (int n = -N; n <= N; ++n) {
            double ph = 2.0 * pi * n * s;
            acc += a(n) * (2.0 * pi * iu * double(n)) * cx(std::cos(ph), std::sin(ph));
        }
        return acc / std::sqrt(2.0 * pi);
    }
};

// DFT of a closed LoopSample (duplicated endpoint row required); s is
// rescaled to period 1.
inline FourierLoop fourier_coeffs(const LoopSample& loop, int N,
                                  double closed_tol = 1e-6) {
    const std::size_t n = loop.s.size();
    if (n < 8) throw Error("fourier_coeffs: too few samples");
    const std::size_t m = n - 1;
    if (2 * std::size_t(N) >= m) throw Error("fourier_coeffs: N too large for grid");
    double span = loop.s.back() - loop.s.front();
    double h = span / double(m);
    for (std::size_t j = 0; j + 1 < n; ++j)
        if (std::abs((loop.s[j + 1] - loop.s[j]) - h) > 1e-9 * std::abs(h))
            throw Error("fourier_coeffs: non-uniform grid");
    double scale = 0.0;
    for (const cx& z : loop.Z) scale = std::max(scale, std::abs(z));
    if (std::abs(loop.Z.back() - loop.Z.front()) > closed_tol * (1.0 + scale))
        throw NotClosed("fourier_coeffs: loop endpoints disagree");

    FourierLoop out;
    out.N = N;
    out.coeffs.assign(2 * std::size_t(N) + 1, cx(0.0));
    for (int k = -N; k <= N; ++k) {
        cx acc(0.0);
        for (std::size_t j = 0; j < m; ++j) {
            double ph = -2.0 * pi * double(k) * double(j) / double(m);
            acc += loop.Z[j] * cx(std::cos(ph), std::sin(ph));
        }
        out.a_ref(k) = std::sqrt(2.0 * pi) * acc / double(m);
    }
    return out;
}

struct EuclideanNormalization {
    cx a0{0.0};     // removed translation
    cx c{1.0};      // fitted unimodular conjugation factor
    double s_shift = 0.0;
    double fit_residual = 0.0;
};

// Removes the translation a_0 and the global phase: finds unimodular c with
// conj(a_n) = c a_n for all n != 0 (least squares), multiplies by sqrt(c).
// If no consistent phase exists the parametrization origin is also
// optimized over (coarse scan plus golden-section refinement).
inline FourierLoop normalize_euclidean(const FourierLoop& in,
                                       EuclideanNormalization* info = nullptr,
                                       double fit_tol = 1e-6) {
    auto fit = [&](const FourierLoop& f, cx& c_out) {
        cx S(0.0);
        double total = 0.0;
        for (int n = -f.N; n <= f.N; ++n) {
            if (n == 0) continue;
            S += f.a(n) * f.a(n);
            total += std::norm(f.a(n));
        }
        if (std::abs(S) == 0.0) {
            c_out = cx(1.0);
            return 1e300;
        }
        c_out = std::conj(S) / std::abs(S);
        double res2 = std::max(0.0, 2.0 * total - 2.0 * std::abs(S));
        return std::sqrt(res2 / (total > 0 ? total : 1.0));
    };
    auto shifted = [&](double delta) {
        FourierLoop f = in;
        for (int n = -f.N; n <= f.N; ++n) {
            double ph = 2.0 * pi * n * delta;
            f.a_ref(n) = in.a(n) * cx(std::cos(ph), std::sin(ph));
        }
        return f;
    };

    FourierLoop work = in;
    cx c;
    double resid = fit(work, c);
    double s_shift = 0.0;
    if (resid > fit_tol) {
        // scan the parametrization origin
        double best = resid, best_delta = 0.0;
        for (int k = 0; k < 512; ++k) {
            double delta = double(k) / 512.0;
            cx ctmp;
            double r = fit(shifted(delta), ctmp);
            if (r < best) {
                best = r;
                best_delta = delta;
            }
        }
        double lo = best_delta - 1.0 / 512.0, hi = best_delta + 1.0 / 512.0;
        for (int it = 0; it < 80; ++it) {
            double m1 = lo + 0.381966 * (hi - lo), m2 = hi - 0.381966 * (hi - lo);
            cx ctmp;
            if (fit(shifted(m1), ctmp) < fit(shifted(m2), ctmp)) hi = m2;
            else lo = m1;
        }
        s_shift = 0.5 * (lo + hi);
        work = shifted(s_shift);
        resid = fit(work, c);
        if (resid > fit_tol)
            throw NoConsistentPhase("normalize_euclidean: phase fit failed");
    }

    FourierLoop out = work;
    cx a0 = out.a(0);
    out.a_ref(0) = 0.0;
    cx root = std::sqrt(c);
    for (int n = -out.N; n <= out.N; ++n) out.a_ref(n) *= root;
    if (info) {
        info->a0 = a0;
        info->c = c;
        info->s_shift = s_shift;
        info->fit_residual = resid;
    }
    return out;
}

// Reality condition max_n |2 pi sum_m m (n+m) a_m a_{n+m} - delta_{n0}|.
inline double reality_check(const FourierLoop& f) {
    double worst = 0.0;
    for (int n = -f.N; n <= f.N; ++n) {
        cx acc(0.0);
        for (int m = -f.N; m <= f.N; ++m) {
            int nm = n + m;
            if (nm < -f.N || nm > f.N) continue;
            acc += double(m) * double(nm) * f.a(m) * f.a(nm);
        }
        acc *= 2.0 * pi;
        if (n == 0) acc -= 1.0;
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

struct CurvatureComparison {
    std::vector<cx> bilinear; // 4 pi^2 sum_m (n+m)^2 m a_m a_{n+m}, n = -N..N
    std::vector<cx> direct;   // spectral coefficients of (1/i) d_s log d_s Z
    double max_discrepancy = 0.0; // over the well-resolved range |n| <= N/2
};

// Curvature coefficients both ways.  The sign of the bilinear form is the
// one fixed by the circle calibration: direct = +bilinear (no overall
// minus), recorded here rather than silently absorbed.
inline CurvatureComparison curvature_coeffs(const FourierLoop& f,
                                            std::size_t grid = 0) {
    CurvatureComparison out;
    const int N = f.N;
    out.bilinear.assign(2 * std::size_t(N) + 1, cx(0.0));
    for (int n = -N; n <= N; ++n) {
        cx acc(0.0);
        for (int m = -N; m <= N; ++m) {
            int nm = n + m;
            if (nm < -N || nm > N) continue;
            acc += double(nm) * double(nm) * double(m) * f.a(m) * f.a(nm);
        }
        out.bilinear[std::size_t(n + N)] = 4.0 * pi * pi * acc;
    }

    if (grid == 0) grid = 8 * std::size_t(N) + 8;
    std::vector<cx> kappa(grid);
    for (std::size_t j = 0; j < grid; ++j) {
        double s = double(j) / double(grid);
        cx d1 = f.eval_derivative(s);
        if (std::abs(d1) < 1e-12) throw ZeroSpeed("curvature_coeffs: dZ ~ 0");
        cx d2(0.0);
        for (int n = -N; n <= N; ++n) {
            double ph = 2.0 * pi * n * s;
            cx w(std::cos(ph), std::sin(ph));
            d2 += f.a(n) * sq(2.0 * pi * iu * double(n)) * w;
        }
        d2 /= std::sqrt(2.0 * pi);
        kappa[j] = d2 / d1 / iu;
    }
    out.direct.assign(2 * std::size_t(N) + 1, cx(0.0));
    for (int n = -N; n <= N; ++n) {
        cx acc(0.0);
        for (std::size_t j = 0; j < grid; ++j) {
            double ph = -2.0 * pi * double(n) * double(j) / double(grid);
            acc += kappa[j] * cx(std::cos(ph), std::sin(ph));
        }
        out.direct[std::size_t(n + N)] = acc / double(grid);
    }
    for (int n = -N / 2; n <= N / 2; ++n)
        out.max_discrepancy =
            std::max(out.max_discrepancy,
                     std::abs(out.direct[std::size_t(n + N)] -
                              out.bilinear[std::size_t(n + N)]));
    return out;
}

// Winding map Z -> (1/n) Z(n s): coefficient a_k moves to harmonic n k with
// amplitude a_k / n.
inline FourierLoop wind(const FourierLoop& f, int n) {
    if (n < 1) throw Error("wind: n must be >= 1");
    FourierLoop out;
    out.N = f.N * n;
    out.coeffs.assign(2 * std::size_t(out.N) + 1, cx(0.0));
    for (int k = -f.N; k <= f.N; ++k) out.a_ref(k * n) = f.a(k) / double(n);
    return out;
}

inline LoopSample wind(const LoopSample& loop, int n) {
    if (n < 1) throw Error("wind: n must be >= 1");
    const std::size_t m = loop.s.size() - 1;
    LoopSample out = loop;
    for (std::size_t j = 0; j <= m; ++j) {
        std::size_t src = (j * std::size_t(n)) % m;
        out.Z[j] = loop.Z[src] / double(n);
        if (!loop.q.empty()) out.q[j] = loop.q[src] * double(n);
        if (!loop.dZ.empty()) out.dZ[j] = loop.dZ[src];
    }
    return out;
}

inline bool is_prime(unsigned long p) {
    if (p < 2) return false;
    for (unsigned long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

struct DecimationResult {
    double sum_residual = 0.0;     // sum_j Z^{(pn)}((s+j)/p) vs Z^{(n)}(s)
    double scaling_residual = 0.0; // p Z^{(pn)}(s) vs Z^{(n)}(p s)
};

inline DecimationResult decimation_check(const FourierLoop& base, unsigned long p,
                                         int n, std::size_t grid = 64) {
    if (!is_prime(p)) throw NotPrime("decimation_check: p is not prime");
    FourierLoop zn = wind(base, n);
    FourierLoop zpn = wind(base, int(p) * n);
    DecimationResult out;
    for (std::size_t j = 0; j < grid; ++j) {
        double s = double(j) / double(grid);
        cx acc(0.0);
        for (unsigned long t = 0; t < p; ++t)
            acc += zpn.eval((s + double(t)) / double(p));
        out.sum_residual = std::max(out.sum_residual, std::abs(acc - zn.eval(s)));
        cx lhs = double(p) * zpn.eval(s);
        out.scaling_residual =
            std::max(out.scaling_residual, std::abs(lhs - zn.eval(double(p) * s)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partition sums over winding numbers: Z^{(a)}[beta] = sum_{n>=1}
// exp(-beta n^2 E_a), its elliptic-theta form, and the exact Poisson
// resummation sqrt(pi/t) sum exp(-pi^2 k^2 / t) (the display without the
// pi factors does not reproduce the sum; the exact transform is used).
// ---------------------------------------------------------------------------

struct PartitionResult {
    cx beta{0.0};
    double E_a = 0.0;
    cx value_direct{0.0};
    cx value_theta{0.0};
    cx value_poisson{0.0};
};

inline cx elliptic_theta_null(const cx& z, double tol = 1e-16) {
    // theta(z) = sum_n exp(i pi z n^2), Im z > 0
    if (z.imag() <= 0.0) throw DivergentSum("elliptic_theta_null: Im z <= 0");
    cx acc(1.0);
    for (int n = 1; n < 100000; ++n) {
        cx term = std::exp(iu * pi * z * double(n) * double(n));
        acc += 2.0 * term;
        if (std::abs(term) < tol && n > 3) break;
    }
    return acc;
}

inline PartitionResult partition_sum(double E_a, const cx& beta) {
    cx t = beta * E_a;
    if (t.real() <= 0.0) throw DivergentSum("partition_sum: Re(beta E) <= 0");
    PartitionResult out;
    out.beta = beta;
    out.E_a = E_a;

    cx direct(0.0);
    for (int n = 1; n < 100000; ++n) {
        cx term = std::exp(-t * double(n) * double(n));
        direct += term;
        if (std::abs(term) < 1e-18 && n > 3) break;
    }
    out.value_direct = direct;

    out.value_theta = 0.5 * (elliptic_theta_null(iu * t / pi) - 1.0);

    cx pref = std::sqrt(pi / t);
    cx poisson_tail(0.0);
    for (int k = 1; k < 100000; ++k) {
        cx term = std::exp(-pi * pi * double(k) * double(k) / t);
        poisson_tail += term;
        if (std::abs(term) < 1e-18 && k > 3) break;
    }
    out.value_poisson = pref * poisson_tail + 0.5 * (pref - 1.0);
    return out;
}

} // namespace loopsoliton

#endif
