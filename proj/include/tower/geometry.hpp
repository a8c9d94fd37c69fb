#ifndef TOWER_GEOMETRY_HPP
#define TOWER_GEOMETRY_HPP

// Hyperbolic 3-space numerics: isometry classification by exact trace,
// translation length 2 log|lambda| through the geometric place, ball volume
// pi(sinh 2r - 2r), and the volume--systole / systolic-genus inequalities.

#include <optional>
#include <string>

#include "tower/ball.hpp"
#include "tower/congruence.hpp"
#include "tower/errors.hpp"
#include "tower/group.hpp"

namespace tower {

enum class IsometryKind { identity, elliptic, parabolic, loxodromic };

inline const char* to_string(IsometryKind k) {
    switch (k) {
        case IsometryKind::identity: return "identity";
        case IsometryKind::elliptic: return "elliptic";
        case IsometryKind::parabolic: return "parabolic";
        case IsometryKind::loxodromic: return "loxodromic";
    }
    return "?";
}

struct IsometryClass {
    IsometryKind kind;
    BallComplex trace;            // image of tr(gamma) at the geometric place
    BallReal real_length;         // 0 unless loxodromic
    mpfr_prec_t precision;
};

namespace detail {

inline const ArchPlace& geometric_place_at(const GroupSpec& G, mpfr_prec_t prec) {
    if (!G.geometric_place)
        throw DomainError("no geometric place designated and none auto-selectable");
    return G.field->arch_places_at(prec)[*G.geometric_place];
}

// lambda with |lambda| >= 1 among (t +- sqrt(t^2-4))/2; undecidable ties
// force a precision bump (they only occur when the enclosures still overlap).
inline std::optional<BallReal> loxodromic_length(const BallComplex& t, mpfr_prec_t prec) {
    BallComplex four(BallReal::from_si(4, prec), BallReal::from_si(0, prec));
    BallComplex disc = t * t - four;
    BallComplex w;
    try {
        w = ball_sqrt_branch(disc);
    } catch (const DomainError&) {
        return std::nullopt; // discriminant rectangle still meets zero
    }
    BallComplex two(BallReal::from_si(2, prec), BallReal::from_si(0, prec));
    BallComplex l1 = (t + w) / two;
    BallComplex l2 = (t - w) / two;
    Rat one(1);
    BallReal a1 = l1.abs();
    BallReal a2 = l2.abs();
    if (a1.certainly_gt(one)) return ball_log(a1) + ball_log(a1);
    if (a2.certainly_gt(one)) return ball_log(a2) + ball_log(a2);
    return std::nullopt; // |lambda| too close to 1 at this precision
}

} // namespace detail

// Classification by the exact trace; parabolic means t = +-2 exactly (a field
// identity, never a numerical call).  Elliptic vs loxodromic for nonrational
// real traces is decided by the embedding ball with precision doubling: the
// boundary |t| = 2 is only attained at the rational traces already handled.
inline IsometryClass classify(const GroupMatrix& gamma, const GroupSpec& G,
                              mpfr_prec_t prec = kDefaultPrec, mpfr_prec_t cap = kPrecCap) {
    FieldElement t = gamma.trace();
    const FieldPtr& K = G.field;

    auto trace_ball = [&](mpfr_prec_t p) { return t.embed(detail::geometric_place_at(G, p)); };

    if (gamma.is_identity() || gamma.is_neg_identity())
        return {IsometryKind::identity, trace_ball(prec), BallReal::from_si(0, prec), prec};

    if (t.is_rational()) {
        Rat q = t.rational_value();
        if (q == 2 || q == -2)
            return {IsometryKind::parabolic, trace_ball(prec), BallReal::from_si(0, prec), prec};
        if (abs(q) < 2)
            return {IsometryKind::elliptic, trace_ball(prec), BallReal::from_si(0, prec), prec};
        for (mpfr_prec_t p = prec; p <= cap; p *= 2) {
            auto len = detail::loxodromic_length(trace_ball(p), p);
            if (len) return {IsometryKind::loxodromic, trace_ball(p), *len, p};
        }
        throw PrecisionCapExceeded("classify: translation length undecided at the cap");
    }

    for (mpfr_prec_t p = prec; p <= cap; p *= 2) {
        BallComplex tb = trace_ball(p);
        if (!tb.im().contains_zero()) {
            auto len = detail::loxodromic_length(tb, p);
            if (len) return {IsometryKind::loxodromic, tb, *len, p};
            continue;
        }
        // real-algebraic irrational trace: |t| = 2 would force rationality
        Rat two(2);
        if (ball_abs(tb.re()).certainly_lt(two) && tb.im().contains_zero() &&
            (K->arch_places_at(p)[*G.geometric_place].degree == 1)) {
            return {IsometryKind::elliptic, tb, BallReal::from_si(0, p), p};
        }
        if (ball_abs(tb.re()).certainly_gt(two)) {
            auto len = detail::loxodromic_length(tb, p);
            if (len) return {IsometryKind::loxodromic, tb, *len, p};
        }
    }
    throw PrecisionCapExceeded("classify: elliptic/loxodromic boundary undecided at the cap");
}

struct GeodesicSystoleResult {
    bool found = false;
    BallReal length;        // upper bound on sys_1(M_i) when found
    Word witness;
    size_t word_length = 0;
    size_t r_max = 0;
};

// Minimum translation length over the loxodromic members of Gamma_i found in
// the radius-R ball; always an UPPER bound on the geodesic systole.
inline GeodesicSystoleResult geodesic_systole_upper(const GroupSpec& G, const CongruenceLevel& L,
                                                    size_t r_max, bool psl_mode = true,
                                                    mpfr_prec_t prec = kDefaultPrec,
                                                    const BallEnumeration* precomputed = nullptr) {
    GeodesicSystoleResult res;
    res.r_max = r_max;
    BallEnumeration local;
    const BallEnumeration* ball = precomputed;
    if (!ball) {
        local = bfs_ball(G, r_max, psl_mode);
        ball = &local;
    }
    for (auto& [key, entry] : ball->elements) {
        (void)key;
        if (entry.length == 0) continue;
        if (!membership(entry.matrix, L, psl_mode)) continue;
        IsometryClass cls = classify(entry.matrix, G, prec);
        if (cls.kind != IsometryKind::loxodromic) continue;
        if (!res.found || cls.real_length.certainly_lt(res.length)) {
            res.found = true;
            res.length = cls.real_length;
            res.witness = entry.witness;
            res.word_length = entry.length;
        }
    }
    return res;
}

// vol B(r) = pi (sinh 2r - 2r)
inline BallReal ball_volume(const BallReal& r) {
    BallReal two_r = r + r;
    return BallReal::pi(r.precision()) * (ball_sinh(two_r) - two_r);
}

enum class CheckVerdict { pass, fail, inconclusive };

inline const char* to_string(CheckVerdict v) {
    switch (v) {
        case CheckVerdict::pass: return "pass";
        case CheckVerdict::fail: return "fail";
        case CheckVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct VolumeSystoleRecord {
    CheckVerdict verdict;
    BallReal lhs;    // vol
    BallReal rhs;    // the mode's lower bound on vol in terms of sys
    bool asymptotic; // cusped mode only holds for sys large; flagged
    std::string note;
};

// closed: vol >= pi (sinh sys - sys); cusped: vol >= e^{(3/4 - delta) sys}
// (asymptotic, no explicit threshold available).
inline VolumeSystoleRecord volume_systole_check(const BallReal& vol, const BallReal& sys,
                                                bool cusped, double delta = 0.1) {
    if (delta <= 0 || delta >= 0.75)
        throw DomainError("volume_systole_check: delta out of (0, 3/4)");
    mpfr_prec_t prec = vol.precision();
    VolumeSystoleRecord rec{CheckVerdict::inconclusive, vol, BallReal(prec), cusped, ""};
    if (cusped) {
        BallReal c = BallReal::from_rational(Rat(3, 4), prec) -
                     BallReal::from_endpoints_d(delta, delta, prec);
        rec.rhs = ball_exp(c * sys);
        rec.note = "asymptotic - valid only for sys sufficiently large";
    } else {
        rec.rhs = BallReal::pi(prec) * (ball_sinh(sys) - sys);
    }
    if (rec.rhs.certainly_le(vol)) rec.verdict = CheckVerdict::pass;
    else if (vol.certainly_lt(rec.rhs)) rec.verdict = CheckVerdict::fail;
    return rec;
}

// e^{(1/2 - delta) sys}, the systolic-genus lower bound; asymptotic.
inline BallReal sysg_lower_bound(const BallReal& sys, double delta = 0.1) {
    if (delta <= 0 || delta >= 0.5) throw DomainError("sysg_lower_bound: delta out of (0, 1/2)");
    mpfr_prec_t prec = sys.precision();
    BallReal c = BallReal::from_rational(Rat(1, 2), prec) -
                 BallReal::from_endpoints_d(delta, delta, prec);
    return ball_exp(c * sys);
}

} // namespace tower

#endif
