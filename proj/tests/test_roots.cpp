#include <doctest.h>

#include "tower/roots.hpp"

using namespace tower;

TEST_CASE("real root isolation") {
    SUBCASE("(x^2 - 2)(x^2 - 3): four real roots") {
        RatPoly f = RatPoly::from_int_coeffs({-2, 0, 1}) * RatPoly::from_int_coeffs({-3, 0, 1});
        auto roots = real_roots_isolated(f, 64);
        REQUIRE(roots.size() == 4);
        // sorted: -sqrt3, -sqrt2, sqrt2, sqrt3; check via squares
        for (auto& r : roots) CHECK(r.rad_d() < 1e-15);
        CHECK(ball_sqr(roots[0]).contains(Rat(3)));
        CHECK(ball_sqr(roots[1]).contains(Rat(2)));
        CHECK(ball_sqr(roots[2]).contains(Rat(2)));
        CHECK(ball_sqr(roots[3]).contains(Rat(3)));
        CHECK(!roots[0].certainly_positive());
        CHECK(roots[3].certainly_positive());
    }
    SUBCASE("rational roots are found exactly") {
        // (x - 1/2)(x + 3)(x - 5)
        RatPoly f = RatPoly({Rat(-1, 2), Rat(1)}) * RatPoly::from_int_coeffs({3, 1}) *
                    RatPoly::from_int_coeffs({-5, 1});
        auto roots = real_roots_isolated(f, 64);
        REQUIRE(roots.size() == 3);
        CHECK(roots[0].contains(Rat(-3)));
        CHECK(roots[1].contains(Rat(1, 2)));
        CHECK(roots[2].contains(Rat(5)));
    }
    SUBCASE("no real roots") {
        CHECK(real_roots_isolated(RatPoly::from_int_coeffs({1, -1, 1}), 64).empty());
    }
}

TEST_CASE("certified complex roots") {
    SUBCASE("x^2 - x + 1: one conjugate pair") {
        RatPoly f = RatPoly::from_int_coeffs({1, -1, 1});
        auto roots = all_roots_certified(f, 128);
        REQUIRE(roots.size() == 1);
        CHECK(!roots[0].is_real);
        CHECK(roots[0].ball.re().contains(Rat(1, 2)));
        CHECK(ball_sqr(roots[0].ball.im()).contains(Rat(3, 4)));
        CHECK(roots[0].ball.im().certainly_positive());
    }
    SUBCASE("x^3 - 2: one real, one pair") {
        RatPoly f = RatPoly::from_int_coeffs({-2, 0, 0, 1});
        auto roots = all_roots_certified(f, 128);
        REQUIRE(roots.size() == 2);
        int reals = 0, pairs = 0;
        for (auto& r : roots) {
            if (r.is_real) {
                ++reals;
                BallReal cube = r.ball.re() * r.ball.re() * r.ball.re();
                CHECK(cube.contains(Rat(2)));
            } else {
                ++pairs;
                // |root| = 2^(1/3): |z|^6 = 4
                BallReal a2 = r.ball.abs2();
                CHECK((a2 * a2 * a2).contains(Rat(4)));
            }
        }
        CHECK(reals == 1);
        CHECK(pairs == 1);
    }
    SUBCASE("degree-5 with mixed roots") {
        // (x^2 - x + 1)(x^2 + 1)(x - 7)
        RatPoly f = RatPoly::from_int_coeffs({1, -1, 1}) * RatPoly::from_int_coeffs({1, 0, 1}) *
                    RatPoly::from_int_coeffs({-7, 1});
        auto roots = all_roots_certified(f, 128);
        REQUIRE(roots.size() == 3);
        int reals = 0;
        for (auto& r : roots)
            if (r.is_real) {
                ++reals;
                CHECK(r.ball.re().contains(Rat(7)));
            }
        CHECK(reals == 1);
    }
    SUBCASE("rejects non-squarefree input") {
        RatPoly f = RatPoly::from_int_coeffs({1, -1, 1});
        CHECK_THROWS_AS(all_roots_certified(f * f, 128), DomainError);
    }
}

TEST_CASE("roots actually annihilate the polynomial (enclosure check)") {
    RatPoly f = RatPoly::from_int_coeffs({3, 0, -4, 0, 1}); // x^4 - 4x^2 + 3
    for (auto& r : all_roots_certified(f, 128)) {
        BallComplex v = f.evaluate(r.ball);
        CHECK(v.contains_zero());
    }
}
