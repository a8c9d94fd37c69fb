#ifndef TOWER_HEIGHTS_HPP
#define TOWER_HEIGHTS_HPP

// Weil heights H(x) = prod_v max(1, |x|_v) of field elements and 2x2
// matrices, with the exact finite part split from the archimedean ball part.
// Only primes dividing a denominator can contribute to the finite part.

#include <gmpxx.h>

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tower/ball.hpp"
#include "tower/errors.hpp"
#include "tower/number_field.hpp"

namespace tower {

struct HeightValue {
    Rat finite_part;   // exact, >= 1
    BallReal arch_part;
    BallReal total;    // finite_part * arch_part
    // The full height as an exact rational, available when every archimedean
    // place is exactly computable (imaginary quadratic: |x|_v = Nm(x)).
    std::optional<Rat> exact;
};

inline std::vector<std::pair<Int, int>> factor_int(Int n) {
    if (n < 0) n = -n;
    std::vector<std::pair<Int, int>> out;
    if (n <= 1) return out;
    Int p = 2;
    while (p * p <= n) {
        if (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
            int e = 0;
            while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
        mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
        if (p > 1000000 && n > 1)
            throw DomainError("factor_int: denominator has a prime factor beyond desk scale");
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

namespace detail {

inline Rat nr_pow(const PrimeIdealData& P, int k) {
    Rat nr(P.norm());
    Rat r(1);
    for (int i = 0; i < k; ++i) r *= nr;
    return r;
}

// Imaginary quadratic fields have one complex place where the normalized
// absolute value |x|_v = |sigma(x)|^2 equals the (nonnegative) rational norm,
// so the archimedean part of the height is an exact rational.
inline bool arch_exact_available(const FieldPtr& K) {
    return K->degree() == 2 && K->num_arch_places() == 1 &&
           K->arch_places()[0].degree == 2;
}

} // namespace detail

inline HeightValue height_element(const FieldElement& x, mpfr_prec_t prec = kDefaultPrec) {
    const FieldPtr& K = x.field();
    HeightValue h{Rat(1), BallReal::from_si(1, prec), BallReal::from_si(1, prec)};
    if (x.is_zero()) return h; // H(0) := 1 by convention

    for (auto& [q, e] : factor_int(x.denominator())) {
        (void)e;
        for (auto& P : split_prime(K, q)) {
            int v = valuation(x, P);
            if (v < 0) h.finite_part *= detail::nr_pow(P, -v);
        }
    }
    for (const auto& place : K->arch_places_at(prec))
        h.arch_part = h.arch_part * ball_max1(abs_value_arch(x, place));
    h.total = BallReal::from_rational(h.finite_part, prec) * h.arch_part;
    if (detail::arch_exact_available(K)) h.exact = h.finite_part * std::max(Rat(1), x.norm());
    return h;
}

// H of a matrix: at each place take the max over the four entries, then
// multiply over places.  H(M) >= H(m_ij) for every entry.
template <typename Matrix>
HeightValue height_matrix(const Matrix& M, mpfr_prec_t prec = kDefaultPrec) {
    const std::vector<const FieldElement*> entries{&M.a(), &M.b(), &M.c(), &M.d()};
    const FieldPtr& K = M.a().field();
    HeightValue h{Rat(1), BallReal::from_si(1, prec), BallReal::from_si(1, prec)};

    Int den(1);
    for (auto* e : entries) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), e->denominator().get_mpz_t());
    for (auto& [q, qe] : factor_int(den)) {
        (void)qe;
        for (auto& P : split_prime(K, q)) {
            int minv = 0;
            for (auto* e : entries) {
                if (e->is_zero()) continue;
                int v = valuation(*e, P);
                if (v < minv) minv = v;
            }
            if (minv < 0) h.finite_part *= detail::nr_pow(P, -minv);
        }
    }
    for (const auto& place : K->arch_places_at(prec)) {
        BallReal m = BallReal::from_si(1, prec);
        for (auto* e : entries) m = ball_max(m, abs_value_arch(*e, place));
        h.arch_part = h.arch_part * m;
    }
    h.total = BallReal::from_rational(h.finite_part, prec) * h.arch_part;
    if (detail::arch_exact_available(K)) {
        Rat m(1);
        for (auto* e : entries) m = std::max(m, e->norm());
        h.exact = h.finite_part * m;
    }
    return h;
}

struct InequalityWitness {
    BallReal lhs;      // enclosure of the smaller side
    BallReal rhs;      // enclosure of the larger side
    bool verified;     // true only when the ball bounds prove lhs <= rhs
    mpfr_prec_t precision;
};

namespace detail {

// 4^{#S_inf} as an exact rational
inline Rat four_pow_s_inf(const FieldPtr& K) {
    Rat r(1);
    for (size_t i = 0; i < K->num_arch_places(); ++i) r *= 4;
    return r;
}

template <typename LhsFn, typename RhsFn>
InequalityWitness verify_inequality(LhsFn lhs_at, RhsFn rhs_at, mpfr_prec_t prec,
                                    mpfr_prec_t cap) {
    for (mpfr_prec_t p = prec; p <= cap; p *= 2) {
        BallReal lhs = lhs_at(p);
        BallReal rhs = rhs_at(p);
        if (lhs.certainly_le(rhs)) return {lhs, rhs, true, p};
    }
    BallReal lhs = lhs_at(cap);
    BallReal rhs = rhs_at(cap);
    return {lhs, rhs, false, cap};
}

// Exact comparison when all heights are exact rationals; this also decides
// the equality cases that interval refinement can never certify.
inline InequalityWitness exact_inequality(const Rat& lhs, const Rat& rhs, mpfr_prec_t prec) {
    return {BallReal::from_rational(lhs, prec), BallReal::from_rational(rhs, prec), lhs <= rhs,
            prec};
}

} // namespace detail

// H(x+y) <= 4^{#S_inf} H(x) H(y), verified one-sided rigorously.
inline InequalityWitness check_sum_rule(const FieldElement& x, const FieldElement& y,
                                        mpfr_prec_t prec = kDefaultPrec,
                                        mpfr_prec_t cap = kPrecCap) {
    Rat c = detail::four_pow_s_inf(x.field());
    if (detail::arch_exact_available(x.field()))
        return detail::exact_inequality(*height_element(x + y, prec).exact,
                                        c * *height_element(x, prec).exact *
                                            *height_element(y, prec).exact,
                                        prec);
    return detail::verify_inequality(
        [&](mpfr_prec_t p) { return height_element(x + y, p).total; },
        [&](mpfr_prec_t p) {
            return BallReal::from_rational(c, p) * height_element(x, p).total *
                   height_element(y, p).total;
        },
        prec, cap);
}

// H(MN) <= 4^{#S_inf} H(M) H(N)
template <typename Matrix>
InequalityWitness check_submultiplicative(const Matrix& M, const Matrix& N,
                                          mpfr_prec_t prec = kDefaultPrec,
                                          mpfr_prec_t cap = kPrecCap) {
    Rat c = detail::four_pow_s_inf(M.a().field());
    if (detail::arch_exact_available(M.a().field()))
        return detail::exact_inequality(*height_matrix(M * N, prec).exact,
                                        c * *height_matrix(M, prec).exact *
                                            *height_matrix(N, prec).exact,
                                        prec);
    return detail::verify_inequality(
        [&](mpfr_prec_t p) { return height_matrix(M * N, p).total; },
        [&](mpfr_prec_t p) {
            return BallReal::from_rational(c, p) * height_matrix(M, p).total *
                   height_matrix(N, p).total;
        },
        prec, cap);
}

} // namespace tower

#endif
