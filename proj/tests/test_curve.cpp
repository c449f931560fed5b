#include "doctest.h"

#include "loopsoliton/curve.hpp"
#include "loopsoliton/poly.hpp"
#include "loopsoliton/rng.hpp"

using namespace loopsoliton;

TEST_CASE("make_curve factors x^3 - x") {
    auto c = make_curve({cx(0), cx(-1), cx(0), cx(1)});
    CHECK(c.genus == 1);
    REQUIRE(c.branch_points.size() == 3);
    CHECK(std::abs(c.branch_points[0] - cx(-1)) < 1e-12);
    CHECK(std::abs(c.branch_points[1] - cx(0)) < 1e-12);
    CHECK(std::abs(c.branch_points[2] - cx(1)) < 1e-12);
}

TEST_CASE("make_curve factors the symmetric quintic") {
    auto c = make_curve({cx(0), cx(4), cx(0), cx(-5), cx(0), cx(1)});
    CHECK(c.genus == 2);
    REQUIRE(c.branch_points.size() == 5);
    for (int k = 0; k < 5; ++k)
        CHECK(std::abs(c.branch_points[std::size_t(k)] - cx(double(k - 2))) < 1e-11);
}

TEST_CASE("make_curve rejects degenerate and non-monic input") {
    CHECK_THROWS_AS(make_curve({cx(0), cx(0), cx(0), cx(1)}), DegenerateCurve);
    CHECK_THROWS_AS(make_curve({cx(0), cx(-1), cx(0), cx(2)}), BadLeadingCoefficient);
    CHECK_THROWS_AS(make_curve({cx(0), cx(1)}), Error);
}

TEST_CASE("eval_f values") {
    auto c1 = make_curve({cx(0), cx(-1), cx(0), cx(1)});
    CHECK(std::abs(eval_f(c1, cx(2.0)) - cx(6.0)) < 1e-14);
    CHECK(std::abs(eval_f(c1, cx(0.0))) < 1e-14);
    auto c2 = make_curve({cx(0), cx(4), cx(0), cx(-5), cx(0), cx(1)});
    CHECK(std::abs(eval_f(c2, cx(3.0)) - cx(120.0)) < 1e-12);
}

TEST_CASE("lift chooses the sheet and lands on the curve") {
    auto c = make_curve({cx(0), cx(-1), cx(0), cx(1)});
    CurvePoint p = lift(c, cx(2.0), +1);
    CHECK(p.y.real() == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
    CurvePoint m = lift(c, cx(2.0), -1);
    CHECK(m.y.real() == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-12));
    CurvePoint b = lift(c, cx(1.0), +1);
    CHECK(std::abs(b.y) < 1e-12);

    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        cx x = rng.complex_in_box(-3, 3, -3, 3);
        CurvePoint q = lift(c, x, rng.uniform() < 0.5 ? 1 : -1);
        cx f = eval_f(c, x);
        CHECK(std::abs(q.y * q.y - f) <= 1e-12 * (1.0 + std::abs(f)));
    }
}

TEST_CASE("F_poly, power sums, elementary symmetric functions") {
    auto c = make_curve({cx(0), cx(4), cx(0), cx(-5), cx(0), cx(1)});
    Divisor d{{lift(c, cx(2.0) + cx(0, 1e-3), +1), lift(c, cx(3.0), +1)}};
    // x-coordinates approximately {2, 3}
    Divisor d23{{CurvePoint{cx(2), cx(0)}, CurvePoint{cx(3), cx(0)}}};
    cvec F = F_poly(d23);
    REQUIRE(F.size() == 3);
    CHECK(std::abs(F[0] - cx(6)) < 1e-14);
    CHECK(std::abs(F[1] - cx(-5)) < 1e-14);
    CHECK(std::abs(F[2] - cx(1)) < 1e-14);

    cvec q = power_sums(d23, 3);
    CHECK(std::abs(q[0] - cx(5)) < 1e-14);
    CHECK(std::abs(q[1] - cx(13)) < 1e-14);
    CHECK(std::abs(q[2] - cx(35)) < 1e-14);

    cvec e = elementary_symmetric(d23);
    CHECK(std::abs(e[0] - cx(5)) < 1e-14);
    CHECK(std::abs(e[1] - cx(6)) < 1e-14);

    Divisor d3{{CurvePoint{cx(1), cx(0)}, CurvePoint{cx(-1), cx(0)},
                CurvePoint{cx(2), cx(0)}}};
    cvec F3 = F_poly(d3);
    CHECK(std::abs(F3[0] - cx(2)) < 1e-14);
    CHECK(std::abs(F3[1] - cx(-1)) < 1e-14);
    CHECK(std::abs(F3[2] - cx(-2)) < 1e-14);
    CHECK(std::abs(F3[3] - cx(1)) < 1e-14);
    cvec e3 = elementary_symmetric(d3);
    CHECK(std::abs(e3[0] - cx(2)) < 1e-14);
    CHECK(std::abs(e3[1] - cx(-1)) < 1e-14);
    CHECK(std::abs(e3[2] - cx(-2)) < 1e-14);
}

TEST_CASE("Newton identities tie power sums to elementary symmetric functions") {
    Rng rng(7);
    for (int t = 0; t < 40; ++t) {
        std::size_t g = 1 + rng.next_u64() % 4;
        Divisor d;
        for (std::size_t i = 0; i < g; ++i) {
            cx x = rng.complex_in_box(-10, 10, -10, 10);
            d.points.push_back(CurvePoint{x, cx(0)});
        }
        cvec q = power_sums(d, g);
        cvec e = elementary_symmetric(d);
        cvec q2 = power_sums_from_elementary(e, g);
        double scale = 0.0;
        for (std::size_t k = 0; k < g; ++k) scale = std::max(scale, std::abs(q[k]));
        for (std::size_t k = 0; k < g; ++k)
            CHECK(std::abs(q[k] - q2[k]) <= 1e-12 * (1.0 + scale));
    }
}

TEST_CASE("F_poly roots recover the divisor") {
    Rng rng(13);
    for (int t = 0; t < 20; ++t) {
        std::size_t g = 1 + rng.next_u64() % 3;
        cvec xs;
        Divisor d;
        for (std::size_t i = 0; i < g; ++i) {
            cx x = rng.complex_in_box(-5, 5, -5, 5);
            xs.push_back(x);
            d.points.push_back(CurvePoint{x, cx(0)});
        }
        std::sort(xs.begin(), xs.end(), lex_less);
        cvec roots = poly_roots(Poly{F_poly(d)});
        REQUIRE(roots.size() == g);
        for (std::size_t i = 0; i < g; ++i)
            CHECK(std::abs(roots[i] - xs[i]) < 1e-9 * (1.0 + std::abs(xs[i])));
    }
}

TEST_CASE("divisor validation flags collisions and off-curve points") {
    auto c = make_curve({cx(0), cx(-1), cx(0), cx(1)});
    Divisor good{{lift(c, cx(2.0), +1)}};
    CHECK_NOTHROW(validate_divisor(c, good));
    Divisor off{{CurvePoint{cx(2.0), cx(1.0)}}};
    CHECK_THROWS_AS(validate_divisor(c, off), Error);

    auto c2 = make_curve({cx(0), cx(4), cx(0), cx(-5), cx(0), cx(1)});
    Divisor clash{{lift(c2, cx(3.0), +1), lift(c2, cx(3.0), -1)}};
    CHECK_THROWS_AS(validate_divisor(c2, clash), SpecialDivisor);
}
