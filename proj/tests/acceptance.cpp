// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion.  Exit status is nonzero when any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <string>

#include "loopsoliton/cli_app.hpp"
#include "loopsoliton/curve.hpp"
#include "loopsoliton/dynamics.hpp"
#include "loopsoliton/elastica.hpp"
#include "loopsoliton/kleinian.hpp"
#include "loopsoliton/loops.hpp"
#include "loopsoliton/periods.hpp"
#include "loopsoliton/poly.hpp"
#include "loopsoliton/relations.hpp"
#include "loopsoliton/rng.hpp"

using namespace loopsoliton;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void report(int id, bool pass, const std::string& detail) {
    std::printf("CRITERION %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++g_failures;
}

double agm_K(double k) {
    double a = 1.0, b = std::sqrt(1.0 - k * k);
    for (int i = 0; i < 60 && std::abs(a - b) > 1e-17 * a; ++i) {
        double a2 = 0.5 * (a + b), b2 = std::sqrt(a * b);
        a = a2;
        b = b2;
    }
    return pi / (2.0 * a);
}

HyperellipticCurve g1_curve() { return make_curve({cx(0), cx(-1), cx(0), cx(1)}); }
HyperellipticCurve g2_curve() {
    return make_curve({cx(0), cx(4), cx(0), cx(-5), cx(0), cx(1)});
}

void criterion_1() {
    Timer t;
    auto c = g1_curve();
    auto pd = compute_periods(c);
    double K = agm_K(std::sqrt(0.5));
    double lem = std::sqrt(2.0) * K;
    double r1 = std::abs(std::abs(2.0 * pd.omega1(0, 0)) - lem) / lem;
    double r2 = std::abs(std::abs(2.0 * pd.omega2(0, 0)) - lem) / lem;
    auto basis = homology_basis(c);
    cx alpha_int = integrate_differential(c, basis[0], DifferentialKind::First, 1);
    double r3 = std::abs(std::abs(alpha_int) - 2.6220575542921198);
    bool pass = r1 < 1e-10 && r2 < 1e-10 && r3 < 1e-9 && t.seconds() < 5.0;
    report(1, pass,
           "periods vs AGM rel " + fmt_real(std::max(r1, r2)) + ", lemniscate " +
               fmt_real(r3) + ", " + fmt_real(t.seconds()) + " s");
}

void criterion_2() {
    Timer t;
    Rng rng(90210);
    double worst_asym = 0.0, worst_leg = 0.0, worst_eig = 1e300;
    int done = 0;
    while (done < 5) {
        cvec roots;
        bool ok = true;
        for (int i = 0; i < 5; ++i) {
            cx r = rng.complex_in_box(-2.5, 2.5, -1.0, 1.0);
            for (const cx& o : roots)
                if (std::abs(r - o) < 0.7) ok = false;
            roots.push_back(r);
        }
        if (!ok) continue;
        auto c = make_curve(Poly::from_roots(roots).c);
        auto pd = compute_periods(c);
        worst_asym = std::max(worst_asym, pd.tau_asymmetry);
        worst_leg = std::max(worst_leg, pd.legendre_residual);
        worst_eig = std::min(worst_eig, pd.min_im_tau_eig);
        ++done;
    }
    bool pass = worst_asym <= 1e-8 && worst_eig > 0.0 && worst_leg <= 1e-8 &&
                t.seconds() < 60.0;
    report(2, pass,
           "5 random genus-2 curves: tau asym " + fmt_real(worst_asym) +
               ", legendre " + fmt_real(worst_leg) + ", min Im-tau eig " +
               fmt_real(worst_eig) + ", " + fmt_real(t.seconds()) + " s");
}

void criterion_3() {
    auto pd = compute_periods(g2_curve());
    Rng rng(333);
    auto chr = canonical_char(2);
    ThetaChar zero{{0.0, 0.0}, {0.0, 0.0}};
    double worst_trunc = 0.0, worst_sym = 0.0;
    for (int t = 0; t < 100; ++t) {
        cvec z{cx(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4)),
               cx(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4))};
        if (t < 10) {
            ThetaResult a = theta_full(z, pd.tau, chr, 1e-13, 0);
            ThetaResult b = theta_full(z, pd.tau, chr, 1e-13, 0, a.radius);
            double scale = std::exp(a.log_scale) * (1.0 + std::abs(a.value));
            worst_trunc =
                std::max(worst_trunc, std::abs(a.full_value() - b.full_value()) / scale);
        }
        cx v = theta(z, pd.tau, zero);
        cvec mz{-z[0], -z[1]};
        worst_sym = std::max(worst_sym,
                             std::abs(theta(mz, pd.tau, zero) - v) / (1.0 + std::abs(v)));
        cvec zs{z[0] + pd.tau(0, 0), z[1] + pd.tau(1, 0)};
        cx factor = std::exp(-pi * iu * pd.tau(0, 0) - 2.0 * pi * iu * z[0]);
        worst_sym = std::max(worst_sym, std::abs(theta(zs, pd.tau, zero) - factor * v) /
                                            (1.0 + std::abs(factor * v)));
    }
    bool pass = worst_trunc <= 1e-13 && worst_sym <= 1e-12;
    report(3, pass,
           "theta truncation-doubling " + fmt_real(worst_trunc) +
               ", evenness/quasi-periodicity " + fmt_real(worst_sym));
}

void criterion_4() {
    double worst = 0.0;
    for (const auto& c : {g1_curve(), g2_curve()}) {
        auto pd = compute_periods(c);
        SigmaContext ctx(c, pd);
        Rng rng(444);
        double scale = 0.5 + 0.6 * c.branch_scale();
        for (std::size_t r = 1; r <= c.branch_points.size(); ++r) {
            std::vector<cx> ratios;
            for (int t = 0; t < 8; ++t) {
                auto [d, u] = sample_off_divisor(ctx, rng, 0.3 * scale, 1.5 * scale, r);
                cx v = al_sigma(ctx, u, r) / al_divisor(c, d, r);
                if (!ratios.empty() &&
                    std::abs(v + ratios[0]) < std::abs(v - ratios[0]))
                    v = -v;
                ratios.push_back(v);
            }
            cx mean(0.0);
            for (const cx& v : ratios) mean += v;
            mean /= double(ratios.size());
            for (const cx& v : ratios)
                worst = std::max(worst, std::abs(v - mean) / std::abs(mean));
        }
    }
    report(4, worst <= 1e-6,
           "al sigma-quotient vs divisor form, constancy spread " + fmt_real(worst));
}

void criterion_5() {
    double worst = 0.0, control = 1e300;
    for (const auto& c : {g1_curve(), g2_curve()}) {
        auto pd = compute_periods(c);
        SigmaContext ctx(c, pd);
        std::size_t r = c.branch_points.size();
        auto rep = verify_schwarz_wp(ctx, r, 16, 555, 1e-6);
        worst = std::max(worst, rep.max_residual);
        auto neg = verify_schwarz_wp(ctx, r, 4, 556, 1e-6, cx(0.05, 0.0));
        control = std::min(control, neg.max_residual);
    }
    bool pass = worst <= 1e-6 && control >= 1e-3;
    report(5, pass,
           "Schwarz-vs-wp residual " + fmt_real(worst) + ", negative control " +
               fmt_real(control));
}

void criterion_6() {
    auto c = g2_curve();
    auto pd = compute_periods(c);
    SigmaContext ctx(c, pd);
    // (3-1-3) at rho <= 0.3, N = 40
    Rng rng(66);
    const cx br = c.branch_points[4];
    Divisor ds = random_divisor(c, rng, 0.05 * std::abs(br), 0.3 * std::abs(br),
                                0.04, 0.04);
    auto series = verify_log_series(c, ds, 5, 40, 1e-10);
    auto sum = verify_sum_identity(ctx, 5, 8, 667, 40, 0.3, 1e-6);
    auto diff = verify_diff_identity(ctx, 5, 8, 668, 1e-6);
    double miura = 1e300;
    for (auto& [k, v] : sum.metadata)
        if (k == "miura_step_residual") miura = std::strtod(v.c_str(), nullptr);
    bool pass = series.pass && sum.pass && diff.pass && miura <= 1e-9;
    report(6, pass,
           "(3-1-3) " + fmt_real(series.max_residual) + ", (3-2) " +
               fmt_real(sum.max_residual) + ", (3-3) " + fmt_real(diff.max_residual) +
               ", Miura step " + fmt_real(miura));
}

void criterion_7() {
    double worst_per = 0.0, control = 1e300, worst_conj = 0.0, neg_conj = 1e300;
    for (const auto& c : {g1_curve(), g2_curve()}) {
        auto pd = compute_periods(c);
        SigmaContext ctx(c, pd);
        std::size_t r = c.branch_points.size();
        auto rep = verify_periodicity(ctx, r, 6, 777, 1e-7);
        worst_per = std::max(worst_per, rep.max_residual);
        for (auto& [k, v] : rep.metadata)
            if (k == "half_period_control_min")
                control = std::min(control, std::strtod(v.c_str(), nullptr));
        auto conj = verify_conjugation(c, r, 10, 778, 1e-12, true);
        worst_conj = std::max(worst_conj, conj.max_residual);
        auto neg = verify_conjugation(c, r, 4, 779, 1e-12, false);
        neg_conj = std::min(neg_conj, neg.max_residual);
    }
    bool pass = worst_per <= 1e-7 && control >= 1e-3 && worst_conj <= 1e-12 &&
                neg_conj >= 1e-3;
    report(7, pass,
           "full-period invariance " + fmt_real(worst_per) + " (control " +
               fmt_real(control) + "), conjugation " + fmt_real(worst_conj) +
               " (control " + fmt_real(neg_conj) + ")");
}

void criterion_8() {
    Timer t;
    auto c = g2_curve();
    Divisor d{{lift(c, cx(2.5, 0.1), +1), lift(c, cx(-1.6, 0.12), -1)}};
    FlowOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-13;
    double r1 = mkdv_residual(c, 3, d, 9, 1e-3, 1e-4, opt);
    double r2 = mkdv_residual(c, 3, d, 9, 5e-4, 1e-4, opt);
    double ratio = r1 / r2;
    bool pass = r1 <= 1e-4 && ratio > 2.5 && ratio < 7.0 && t.seconds() < 120.0;
    report(8, pass,
           "MKdV residual " + fmt_real(r1) + " at ds=1e-3, refinement ratio " +
               fmt_real(ratio) + ", " + fmt_real(t.seconds()) + " s");
}

void criterion_9() {
    auto circle = [](std::size_t m) {
        LoopSample out;
        out.s.resize(m + 1);
        out.Z.resize(m + 1);
        out.q.resize(m + 1);
        out.dZ.resize(m + 1);
        for (std::size_t j = 0; j <= m; ++j) {
            double s = double(j) / double(m);
            double ph = 2.0 * pi * s;
            out.s[j] = s;
            out.Z[j] = cx(std::sin(ph), -std::cos(ph)) / (2.0 * pi);
            out.dZ[j] = cx(std::cos(ph), std::sin(ph));
            out.q[j] = pi;
        }
        return out;
    };
    LoopSample c1 = circle(2048);
    FourierLoop fc = normalize_euclidean(fourier_coeffs(c1, 16));
    double circle_reality = reality_check(fc);
    double e0_res = std::abs(energy(c1).E - pi);

    LoopSample eight = figure_eight_loop(solve_figure_eight(), 4096);
    FourierLoop f8 = normalize_euclidean(fourier_coeffs(eight, 64));
    double eight_reality = reality_check(f8);

    double dec_worst = 0.0;
    for (unsigned long p : {2ul, 3ul, 5ul}) {
        auto dd = decimation_check(f8, p, 1);
        dec_worst = std::max(dec_worst, std::max(dd.sum_residual, dd.scaling_residual));
    }
    double e1 = energy(eight).E;
    double wind_worst = 0.0;
    for (int n : {2, 3}) {
        double en = energy(wind(eight, n)).E;
        wind_worst = std::max(wind_worst, std::abs(en - n * n * e1) / (n * n * e1));
    }
    bool pass = circle_reality <= 1e-12 && eight_reality <= 1e-6 &&
                dec_worst <= 1e-8 && wind_worst <= 1e-9 && e0_res <= 1e-10;
    report(9, pass,
           "reality circle " + fmt_real(circle_reality) + " / eight " +
               fmt_real(eight_reality) + ", decimation " + fmt_real(dec_worst) +
               ", wind scaling " + fmt_real(wind_worst) + ", E0-pi " +
               fmt_real(e0_res));
}

void criterion_10() {
    LoopSample eight = figure_eight_loop(solve_figure_eight(), 4096);
    double E1 = energy(eight).E;
    double worst = 0.0;
    for (double Ea : {pi, E1}) {
        for (double bE : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) {
            auto p = partition_sum(Ea, cx(bE / Ea, 0.0));
            double scale = std::abs(p.value_direct) + 1e-6;
            worst = std::max(worst, std::abs(p.value_theta - p.value_direct) / scale);
            worst = std::max(worst, std::abs(p.value_poisson - p.value_direct) / scale);
        }
    }
    double modular = 0.0;
    for (double bE : {0.3, 1.0, 3.0}) {
        auto a = partition_sum(E1, cx(bE / E1, 0.0));
        auto b = partition_sum(E1, cx(bE / E1, 2.0 * pi / E1));
        modular = std::max(modular, std::abs(a.value_direct - b.value_direct));
    }
    bool pass = worst <= 1e-12 && modular <= 1e-14;
    report(10, pass,
           "three-route agreement " + fmt_real(worst) + ", modular periodicity " +
               fmt_real(modular));
}

void criterion_11() {
    namespace fs = std::filesystem;
    std::string dir1 = (fs::temp_directory_path() / "loopsoliton_acc_det1").string();
    std::string dir2 = (fs::temp_directory_path() / "loopsoliton_acc_det2").string();
    std::ostringstream o1, o2, e1, e2;
    int r1 = cli::run({"verify", "--suite", "all", "--seed", "7", "--out", dir1}, o1, e1);
    int r2 = cli::run({"verify", "--suite", "all", "--seed", "7", "--out", dir2}, o2, e2);
    auto read = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    std::string rep1 = read(dir1 + "/verify.report");
    std::string rep2 = read(dir2 + "/verify.report");
    bool identical = !rep1.empty() && rep1 == rep2 && o1.str() == o2.str();
    bool all_pass = r1 == 0 && r2 == 0;
    report(11, identical && all_pass,
           std::string("verify --suite all twice: ") +
               (identical ? "byte-identical reports" : "reports differ") +
               (all_pass ? ", all suites PASS" : ", suite failures present"));
}

} // namespace

int main() {
    std::printf("loopsoliton acceptance suite (%s)\n", kVersion);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (g_failures == 0) std::printf("ALL CRITERIA PASS\n");
    else std::printf("%d CRITERIA FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
