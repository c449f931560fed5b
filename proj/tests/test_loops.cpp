#include "doctest.h"

#include "loopsoliton/elastica.hpp"
#include "loopsoliton/loops.hpp"
#include "loopsoliton/relations.hpp"
#include "loopsoliton/rng.hpp"

using namespace loopsoliton;

namespace {

LoopSample unit_circle(std::size_t m) {
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
}

LoopSample& eight_loop() {
    static LoopSample ls = figure_eight_loop(solve_figure_eight(), 4096);
    return ls;
}

} // namespace

TEST_CASE("circle fourier coefficients: single harmonic at 1/sqrt(2 pi)") {
    auto f = fourier_coeffs(unit_circle(1024), 8);
    CHECK(std::abs(std::abs(f.a(1)) - 1.0 / std::sqrt(2.0 * pi)) < 1e-12);
    for (int n = -8; n <= 8; ++n)
        if (n != 1) CHECK(std::abs(f.a(n)) < 1e-12);
}

TEST_CASE("two-harmonic synthetic loop round-trips exactly") {
    FourierLoop ref;
    ref.N = 4;
    ref.coeffs.assign(9, cx(0.0));
    ref.a_ref(1) = cx(0.31, -0.12);
    ref.a_ref(-2) = cx(-0.05, 0.22);
    const std::size_t m = 256;
    LoopSample ls;
    ls.s.resize(m + 1);
    ls.Z.resize(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        ls.s[j] = double(j) / double(m);
        ls.Z[j] = ref.eval(ls.s[j]);
    }
    auto back = fourier_coeffs(ls, 4);
    for (int n = -4; n <= 4; ++n) CHECK(std::abs(back.a(n) - ref.a(n)) < 1e-13);
}

TEST_CASE("figure-eight reconstruction error is spectral") {
    auto f = fourier_coeffs(eight_loop(), 64);
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < eight_loop().s.size(); j += 7)
        worst = std::max(worst, std::abs(f.eval(eight_loop().s[j]) - eight_loop().Z[j]));
    CHECK(worst < 1e-8);
}

TEST_CASE("fourier_coeffs rejects open loops") {
    LoopSample open = unit_circle(256);
    open.Z.back() += cx(0.3, 0.0);
    CHECK_THROWS_AS(fourier_coeffs(open, 8), NotClosed);
}

TEST_CASE("euclidean normalization removes rotations and translations") {
    auto base = normalize_euclidean(fourier_coeffs(eight_loop(), 48));
    LoopSample moved = eight_loop();
    cx rot = std::exp(iu * 1.1);
    for (auto& z : moved.Z) z = rot * z + cx(0.4, -0.9);
    for (auto& dz : moved.dZ) dz *= rot;
    for (auto& q : moved.q) (void)q;
    auto norm2 = normalize_euclidean(fourier_coeffs(moved, 48));
    for (int n = -48; n <= 48; ++n) {
        // normalized loops agree up to a residual overall sign in sqrt(c)
        CHECK(std::min(std::abs(norm2.a(n) - base.a(n)),
                       std::abs(norm2.a(n) + base.a(n))) < 1e-9);
    }
}

TEST_CASE("normalize_euclidean rejects loops without a mirror origin") {
    FourierLoop f;
    f.N = 3;
    f.coeffs.assign(7, cx(0.0));
    f.a_ref(1) = std::exp(iu * 0.00);
    f.a_ref(2) = 0.6 * std::exp(iu * 0.70);
    f.a_ref(3) = 0.3 * std::exp(iu * 0.41);
    CHECK_THROWS_AS(normalize_euclidean(f), NoConsistentPhase);
}

TEST_CASE("reality condition residuals") {
    auto fc = normalize_euclidean(fourier_coeffs(unit_circle(1024), 16));
    CHECK(reality_check(fc) < 1e-12);
    auto f8 = normalize_euclidean(fourier_coeffs(eight_loop(), 64));
    CHECK(reality_check(f8) < 1e-6);

    // negative control: a smooth but non-unit-speed closed loop
    FourierLoop bad;
    bad.N = 4;
    bad.coeffs.assign(9, cx(0.0));
    bad.a_ref(1) = cx(0.4, 0.0);
    bad.a_ref(2) = cx(0.2, 0.0);
    CHECK(reality_check(bad) > 0.1);
}

TEST_CASE("curvature coefficients: two routes agree with the resolved sign") {
    auto fc = normalize_euclidean(fourier_coeffs(unit_circle(1024), 16));
    auto cc = curvature_coeffs(fc);
    CHECK(std::abs(cc.direct[16] - cx(2.0 * pi)) < 1e-10);
    CHECK(std::abs(cc.bilinear[16] - cx(2.0 * pi)) < 1e-10);
    CHECK(cc.max_discrepancy < 1e-10);

    auto f8 = normalize_euclidean(fourier_coeffs(eight_loop(), 64));
    CHECK(curvature_coeffs(f8).max_discrepancy < 1e-6);
}

TEST_CASE("single-harmonic bilinear sum: hand-expanded value") {
    // a_1 the only coefficient: bilinear n=0 term is 4 pi^2 * 1 * a_1^2
    FourierLoop f;
    f.N = 2;
    f.coeffs.assign(5, cx(0.0));
    f.a_ref(1) = cx(1.0 / std::sqrt(2.0 * pi), 0.0);
    auto cc = curvature_coeffs(f);
    CHECK(std::abs(cc.bilinear[2] - cx(2.0 * pi)) < 1e-12);
    for (int n = 1; n <= 2; ++n) {
        CHECK(std::abs(cc.bilinear[std::size_t(2 + n)]) < 1e-12);
        CHECK(std::abs(cc.bilinear[std::size_t(2 - n)]) < 1e-12);
    }
}

TEST_CASE("wind: coefficient map, composition, energy scaling") {
    auto fc = normalize_euclidean(fourier_coeffs(unit_circle(1024), 4));
    auto w2 = wind(fc, 2);
    CHECK(std::abs(std::abs(w2.a(2)) - 0.5 / std::sqrt(2.0 * pi)) < 1e-12);
    for (int n = -8; n <= 8; ++n)
        if (n != 2) CHECK(std::abs(w2.a(n)) < 1e-13);

    auto w6a = wind(wind(fc, 2), 3);
    auto w6b = wind(fc, 6);
    CHECK(w6a.N == w6b.N);
    for (int n = -w6a.N; n <= w6a.N; ++n)
        CHECK(std::abs(w6a.a(n) - w6b.a(n)) < 1e-15);

    double e1 = energy(eight_loop()).E;
    for (int n : {2, 3}) {
        double en = energy(wind(eight_loop(), n)).E;
        CHECK(std::abs(en - n * n * e1) <= 1e-9 * n * n * e1);
    }
}

TEST_CASE("decimation identity for p in {2,3,5} and primality guard") {
    auto fc = normalize_euclidean(fourier_coeffs(unit_circle(512), 8));
    auto d2 = decimation_check(fc, 2, 1);
    CHECK(d2.sum_residual < 1e-12);

    auto f8 = normalize_euclidean(fourier_coeffs(eight_loop(), 64));
    for (unsigned long p : {2ul, 3ul, 5ul}) {
        auto dd = decimation_check(f8, p, 1);
        CHECK(dd.sum_residual < 1e-8);
        CHECK(dd.scaling_residual < 1e-8);
    }
    auto multi = decimation_check(f8, 5, 2);
    CHECK(multi.sum_residual < 1e-10);
    CHECK_THROWS_AS(decimation_check(fc, 6, 1), NotPrime);
}

TEST_CASE("parseval: unit-speed loops have 2 pi sum n^2 |a_n|^2 = 1") {
    for (const FourierLoop& f : {normalize_euclidean(fourier_coeffs(unit_circle(1024), 16)),
                                 normalize_euclidean(fourier_coeffs(eight_loop(), 64))}) {
        double acc = 0.0;
        for (int n = -f.N; n <= f.N; ++n) acc += double(n) * double(n) * std::norm(f.a(n));
        CHECK(std::abs(2.0 * pi * acc - 1.0) < 1e-8);
    }
}

TEST_CASE("partition sums: direct value, route agreement, modular periodicity") {
    auto pr = partition_sum(1.0, cx(1.0, 0.0));
    CHECK(std::abs(pr.value_direct - cx(0.38631860241332596)) < 1e-12);
    for (double bE : {0.1, 0.5, 1.0, 4.0, 10.0}) {
        auto p = partition_sum(2.0, cx(bE / 2.0, 0.0));
        double scale = std::abs(p.value_direct) + 1e-6;
        CHECK(std::abs(p.value_theta - p.value_direct) / scale < 1e-12);
        CHECK(std::abs(p.value_poisson - p.value_direct) / scale < 1e-12);
    }
    double E = 3.3;
    auto a = partition_sum(E, cx(0.8, 0.0));
    auto b = partition_sum(E, cx(0.8, 2.0 * pi / E));
    CHECK(std::abs(a.value_direct - b.value_direct) < 1e-14);

    CHECK_THROWS_AS(partition_sum(1.0, cx(-0.2, 0.0)), DivergentSum);
}
