#include <doctest.h>

#include <set>

#include "tower/poly.hpp"

using namespace tower;

TEST_CASE("rational polynomial arithmetic") {
    RatPoly f = RatPoly::from_int_coeffs({1, -1, 1}); // x^2 - x + 1
    CHECK(f.degree() == 2);
    CHECK(f.is_monic());
    CHECK(f.has_integer_coeffs());
    CHECK(f.evaluate(Rat(3)) == Rat(7));

    auto [q, r] = RatPoly::divmod(f * f, f);
    CHECK(q == f);
    CHECK(r.is_zero());

    RatPoly d = f.derivative();
    CHECK(d == RatPoly::from_int_coeffs({-1, 2}));
}

TEST_CASE("gcd and squarefree detection") {
    RatPoly f = RatPoly::from_int_coeffs({1, -1, 1});
    RatPoly g = RatPoly::from_int_coeffs({-2, 0, 1}); // x^2 - 2
    CHECK(poly_gcd(f, g).degree() == 0);
    CHECK(poly_is_squarefree(f));
    CHECK(poly_is_squarefree(g));
    CHECK(!poly_is_squarefree(f * f));
    CHECK(poly_gcd(f * g, f) == f.monic());
}

TEST_CASE("resultant and discriminant") {
    RatPoly f = RatPoly::from_int_coeffs({1, -1, 1});
    CHECK(poly_discriminant(f) == Rat(-3));
    RatPoly g = RatPoly::from_int_coeffs({-2, 0, 1});
    CHECK(poly_discriminant(g) == Rat(8));
    // Res(f, x - a) = f(a)
    RatPoly lin = RatPoly::from_int_coeffs({-5, 1});
    CHECK(resultant(f, lin) == f.evaluate(Rat(5)));
}

TEST_CASE("factorization mod p of x^2 - x + 1") {
    RatPoly f = RatPoly::from_int_coeffs({1, -1, 1});

    SUBCASE("p = 7: splits into two distinct linear factors") {
        auto fs = factor_mod_p(f, Int(7));
        REQUIRE(fs.size() == 2);
        for (auto& fac : fs) {
            CHECK(fac.factor.degree() == 1);
            CHECK(fac.multiplicity == 1);
        }
        // roots are 3 and 5
        std::set<Int> roots;
        for (auto& fac : fs) roots.insert(mod_reduce(-fac.factor.coeff(0), Int(7)));
        CHECK(roots == std::set<Int>{Int(3), Int(5)});
    }
    SUBCASE("p = 5: irreducible") {
        auto fs = factor_mod_p(f, Int(5));
        REQUIRE(fs.size() == 1);
        CHECK(fs[0].factor.degree() == 2);
        CHECK(fs[0].multiplicity == 1);
    }
    SUBCASE("p = 3: ramified, (x + 1)^2") {
        auto fs = factor_mod_p(f, Int(3));
        REQUIRE(fs.size() == 1);
        CHECK(fs[0].factor.degree() == 1);
        CHECK(fs[0].multiplicity == 2);
        CHECK(mod_reduce(-fs[0].factor.coeff(0), Int(3)) == Int(2)); // root -1
    }
}

TEST_CASE("factorization reconstructs the input and is deterministic") {
    SplitRng rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        Int p = (trial % 3 == 0) ? Int(2) : (trial % 3 == 1) ? Int(5) : Int(13);
        std::vector<long> cs;
        int deg = 2 + (int)(rng.next() % 4);
        for (int i = 0; i < deg; ++i) cs.push_back((long)(rng.next() % 50) - 25);
        cs.push_back(1); // monic
        RatPoly f(RatPoly::from_int_coeffs(cs));
        auto fs1 = factor_mod_p(f, p, 1);
        auto fs2 = factor_mod_p(f, p, 1);
        REQUIRE(fs1.size() == fs2.size());
        ModPoly prod = ModPoly::constant(Int(1), p);
        for (size_t i = 0; i < fs1.size(); ++i) {
            CHECK(fs1[i].factor.lift() == fs2[i].factor.lift());
            for (int k = 0; k < fs1[i].multiplicity; ++k) prod = prod * fs1[i].factor;
        }
        CHECK(prod.lift() == ModPoly::from_rat(f, p).monic().lift());
    }
}

TEST_CASE("modular inverse and reduction") {
    CHECK(mod_inverse(Int(3), Int(7)) == Int(5));
    CHECK(mod_reduce(Int(-1), Int(7)) == Int(6));
    CHECK_THROWS_AS(mod_inverse(Int(2), Int(4)), DomainError);
}
