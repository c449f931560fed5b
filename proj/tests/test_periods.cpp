#include "doctest.h"

#include "loopsoliton/curve.hpp"
#include "loopsoliton/homology.hpp"
#include "loopsoliton/periods.hpp"
#include "loopsoliton/poly.hpp"
#include "loopsoliton/rng.hpp"
#include "loopsoliton/theta.hpp"
#include "oracles.hpp"

using namespace loopsoliton;

static HyperellipticCurve g1_curve() { return make_curve({cx(0), cx(-1), cx(0), cx(1)}); }
static HyperellipticCurve g2_curve() {
    return make_curve({cx(0), cx(4), cx(0), cx(-5), cx(0), cx(1)});
}

TEST_CASE("homology basis has the standard symplectic intersection matrix") {
    for (const auto& c : {g1_curve(), g2_curve()}) {
        auto basis = homology_basis(c);
        auto m = intersection_matrix(c, basis);
        const std::size_t g = c.genus;
        REQUIRE(m.size() == 2 * g);
        for (std::size_t i = 0; i < 2 * g; ++i)
            for (std::size_t j = 0; j < 2 * g; ++j) {
                int expect = 0;
                if (j == i + g) expect = 1;
                if (i == j + g) expect = -1;
                CHECK(m[i][j] == expect);
            }
    }
}

TEST_CASE("genus-1 periods match the AGM oracle and the lemniscate constant") {
    auto c = g1_curve();
    auto pd = compute_periods(c);
    double K = oracles::agm_K(std::sqrt(0.5));
    double lem = std::sqrt(2.0) * K; // 2.6220575542...
    CHECK(std::abs(std::abs(2.0 * pd.omega1(0, 0)) - lem) / lem < 1e-10);
    CHECK(std::abs(std::abs(2.0 * pd.omega2(0, 0)) - lem) / lem < 1e-10);
    CHECK(std::abs(lem - 2.6220575) < 1e-6);
    // all-real branch points give a rectangular lattice: tau purely imaginary
    CHECK(std::abs(pd.tau(0, 0).real()) < 1e-12);
    CHECK(pd.tau(0, 0).imag() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pd.legendre_residual < 1e-10);
}

TEST_CASE("first-kind cycle integral reproduces the lemniscate constant") {
    auto c = g1_curve();
    auto basis = homology_basis(c);
    cx val = integrate_differential(c, basis[0], DifferentialKind::First, 1);
    CHECK(std::abs(std::abs(val) - 2.6220575542921198) < 1e-9);

    // reversed orientation negates the value
    CycleSpec rev = basis[0];
    rev.orientation = -rev.orientation;
    cx neg = integrate_differential(c, rev, DifferentialKind::First, 1);
    CHECK(std::abs(val + neg) < 1e-12);
}

TEST_CASE("second-kind cycle integral matches the dense trapezoid oracle") {
    auto c = g1_curve();
    auto basis = homology_basis(c);
    cx val = integrate_differential(c, basis[0], DifferentialKind::Second, 1);
    // dr_1 numerator for genus 1 is lambda_3 x = x
    cx oracle = oracles::stadium_contour_integral(c, cx(-1), cx(0), {cx(0), cx(1)});
    CAPTURE(val);
    CAPTURE(oracle);
    bool match = std::abs(val - oracle) < 1e-9 * (1.0 + std::abs(oracle)) ||
                 std::abs(val + oracle) < 1e-9 * (1.0 + std::abs(oracle));
    CHECK(match);
}

TEST_CASE("genus-2 period invariants") {
    auto pd = compute_periods(g2_curve());
    CHECK(pd.tau_asymmetry < 1e-8);
    CHECK(pd.min_im_tau_eig > 0.0);
    CHECK(pd.legendre_residual < 1e-8);
}

TEST_CASE("random genus-2 curves satisfy the period invariants") {
    Rng rng(2024);
    int done = 0;
    while (done < 3) {
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
        CHECK(pd.tau_asymmetry < 1e-8);
        CHECK(pd.min_im_tau_eig > 0.0);
        CHECK(pd.legendre_residual < 1e-8);
        ++done;
    }
}

TEST_CASE("cut-pairing permutation leaves the period lattice unchanged") {
    // generic complex positions so several pairings are geometrically clean
    cvec roots{cx(-1.9, 0.3), cx(-0.7, -0.8), cx(0.1, 0.9), cx(1.2, -0.4), cx(2.1, 0.2)};
    auto c = make_curve(Poly::from_roots(roots).c);
    auto pd = compute_periods(c);

    HyperellipticCurve permuted = c;
    std::swap(permuted.branch_points[0], permuted.branch_points[2]);
    std::swap(permuted.branch_points[1], permuted.branch_points[3]);
    auto pd2 = compute_periods_on_basis(permuted, homology_basis(permuted));
    CHECK(lattice_equality_residual(pd, pd2) < 1e-6);
}

TEST_CASE("theta reference value, evenness and quasi-periodicity") {
    CMat tau(1, 1);
    tau(0, 0) = cx(0, 1);
    ThetaChar zero{{0.0}, {0.0}};
    cx v = theta({cx(0)}, tau, zero);
    CHECK(std::abs(v - cx(1.0864348112133080)) < 1e-12);

    Rng rng(5);
    auto pd = compute_periods(g2_curve());
    ThetaChar z2{{0.0, 0.0}, {0.0, 0.0}};
    for (int t = 0; t < 30; ++t) {
        cvec z{cx(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4)),
               cx(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4))};
        cx a = theta(z, pd.tau, z2);
        cvec mz{-z[0], -z[1]};
        CHECK(std::abs(theta(mz, pd.tau, z2) - a) <= 1e-12 * (1.0 + std::abs(a)));

        // z -> z + tau e_0
        cvec zs{z[0] + pd.tau(0, 0), z[1] + pd.tau(1, 0)};
        cx factor = std::exp(-pi * iu * pd.tau(0, 0) - 2.0 * pi * iu * z[0]);
        cx lhs = theta(zs, pd.tau, z2);
        CHECK(std::abs(lhs - factor * a) <= 1e-12 * (1.0 + std::abs(factor * a)));
    }
}

TEST_CASE("theta truncation doubling changes nothing above tolerance") {
    auto pd = compute_periods(g2_curve());
    auto chr = canonical_char(2);
    Rng rng(17);
    for (int t = 0; t < 10; ++t) {
        cvec z{cx(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)),
               cx(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))};
        ThetaResult a = theta_full(z, pd.tau, chr, 1e-13, 0);
        ThetaResult b = theta_full(z, pd.tau, chr, 1e-13, 0, a.radius); // doubled
        double scale = std::exp(a.log_scale) * (1.0 + std::abs(a.value));
        CHECK(std::abs(a.full_value() - b.full_value()) <= 1e-13 * scale);
    }
}

TEST_CASE("theta rejects tau with non-positive imaginary part") {
    CMat tau(1, 1);
    tau(0, 0) = cx(0.3, -0.2);
    ThetaChar zero{{0.0}, {0.0}};
    CHECK_THROWS_AS(theta({cx(0)}, tau, zero), NonPositiveImTau);
}

TEST_CASE("theta genus cap guards the lattice-sum cost") {
    const std::size_t g = 5;
    CMat tau(g, g);
    for (std::size_t k = 0; k < g; ++k) tau(k, k) = cx(0, 1);
    ThetaChar zero{std::vector<double>(g, 0.0), std::vector<double>(g, 0.0)};
    cvec z(g, cx(0.0));
    CHECK_THROWS_AS(theta(z, tau, zero), Error);
    set_allow_high_genus(true);
    CHECK(std::abs(theta(z, tau, zero) -
                   std::pow(cx(1.0864348112133080), 5.0)) < 1e-10);
    set_allow_high_genus(false);
}

TEST_CASE("lattice membership and reduction") {
    auto pd = compute_periods(g1_curve());
    cvec v{2.0 * pd.omega1(0, 0) + 4.0 * pd.omega2(0, 0)};
    CHECK(lattice_membership_residual(pd, v) < 1e-12);
    cvec w{cx(0.123, 0.321)};
    cvec red = lattice_reduce(pd, w);
    cvec diff{w[0] - red[0]};
    CHECK(lattice_membership_residual(pd, diff) < 1e-12);
}
