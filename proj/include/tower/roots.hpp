#ifndef TOWER_ROOTS_HPP
#define TOWER_ROOTS_HPP

// Certified root isolation for squarefree rational polynomials.
//
// Real roots: Sturm-sequence isolation with rational endpoints, refined by
// bisection.  Complex roots: Durand--Kerner approximation followed by the
// classical certificate that the disk |w - z| <= n |f(z)/f'(z)| contains a
// root; n pairwise disjoint disks for a degree-n polynomial therefore contain
// exactly one root each.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tower/ball.hpp"
#include "tower/poly.hpp"

namespace tower {

struct RootBall {
    BallComplex ball;
    bool is_real;
};

namespace detail {

inline int sign_changes(const std::vector<RatPoly>& sturm, const Rat& x) {
    int changes = 0, last = 0;
    for (const auto& s : sturm) {
        Rat v = s.evaluate(x);
        int sg = sgn(v);
        if (sg == 0) continue;
        if (last != 0 && sg != last) ++changes;
        last = sg;
    }
    return changes;
}

inline std::vector<RatPoly> sturm_sequence(const RatPoly& f) {
    std::vector<RatPoly> seq{f, f.derivative()};
    while (!seq.back().is_zero()) {
        RatPoly r = RatPoly::divmod(seq[seq.size() - 2], seq.back()).second;
        seq.push_back(-r);
    }
    seq.pop_back();
    return seq;
}

// 1 + max |c_i / c_n|, a bound on the modulus of every root
inline Rat cauchy_bound(const RatPoly& f) {
    Rat b(0);
    for (int i = 0; i < f.degree(); ++i) {
        Rat a = abs(f.coeff(i) / f.leading());
        if (a > b) b = a;
    }
    return b + 1;
}

struct Complexd {
    double re, im;
};

} // namespace detail

// Isolate all real roots of a squarefree f; returns disjoint BallReal
// enclosures of width <= 2^-prec each containing exactly one real root.
inline std::vector<BallReal> real_roots_isolated(const RatPoly& f, mpfr_prec_t prec) {
    auto sturm = detail::sturm_sequence(f);
    Rat bound = detail::cauchy_bound(f);
    auto count = [&](const Rat& a, const Rat& b) {
        return detail::sign_changes(sturm, a) - detail::sign_changes(sturm, b);
    };
    std::vector<std::pair<Rat, Rat>> work{{-bound, bound}}, isolated;
    while (!work.empty()) {
        auto [a, b] = work.back();
        work.pop_back();
        int c = count(a, b);
        if (c == 0) continue;
        if (c == 1) {
            isolated.emplace_back(a, b);
            continue;
        }
        Rat m = (a + b) / 2;
        if (f.evaluate(m) == 0) {
            // exact rational root at the midpoint: isolate it in a tight interval
            Rat h = (b - a) / 4;
            while (count(m - h, m + h) != 1) h /= 2;
            isolated.emplace_back(m - h, m + h);
            if (count(a, m - h) > 0) work.emplace_back(a, m - h);
            if (count(m + h, b) > 0) work.emplace_back(m + h, b);
        } else {
            work.emplace_back(a, m);
            work.emplace_back(m, b);
        }
    }
    std::sort(isolated.begin(), isolated.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    // refine by bisection down to 2^-prec width
    std::vector<BallReal> out;
    for (auto& [a, b] : isolated) {
        mpq_class two_prec(1);
        mpz_ui_pow_ui(two_prec.get_den_mpz_t(), 2, (unsigned long)prec);
        two_prec.canonicalize();
        int sa = sgn(f.evaluate(a));
        if (sa == 0) {
            // f vanishes at the left endpoint (which is itself excluded from
            // the half-open Sturm count); move inward until the sign is clean
            Rat step = (b - a) / 1024;
            while (true) {
                Rat a2 = a + step;
                if (sgn(f.evaluate(a2)) != 0 &&
                    detail::sign_changes(sturm, a2) - detail::sign_changes(sturm, b) == 1) {
                    a = a2;
                    break;
                }
                step /= 2;
            }
            sa = sgn(f.evaluate(a));
        }
        while (b - a > two_prec) {
            Rat m = (a + b) / 2;
            int sm = sgn(f.evaluate(m));
            if (sm == 0) {
                a = m - two_prec / 4;
                b = m + two_prec / 4;
                break;
            }
            if (sm == sa) a = m;
            else b = m;
        }
        BallReal lo = BallReal::from_rational(a, prec);
        BallReal hi = BallReal::from_rational(b, prec);
        BallReal r(prec);
        mpfr_set(r.lo(), lo.lo(), MPFR_RNDD);
        mpfr_set(r.hi(), hi.hi(), MPFR_RNDU);
        out.push_back(r);
    }
    return out;
}

namespace detail {

// Durand--Kerner in double precision is plenty as a *starting point*; the
// certificate below does the rigorous work and drives precision doubling.
inline std::vector<Complexd> durand_kerner(const RatPoly& f) {
    int n = f.degree();
    std::vector<double> c(n + 1);
    double lead = f.leading().get_d();
    for (int i = 0; i <= n; ++i) c[i] = f.coeff(i).get_d() / lead;
    double bound = cauchy_bound(f).get_d();
    std::vector<Complexd> z(n);
    double angle0 = 0.4;
    for (int k = 0; k < n; ++k) {
        double th = angle0 + 2 * 3.14159265358979323846 * k / n;
        z[k] = {bound * 0.7 * std::cos(th), bound * 0.7 * std::sin(th)};
    }
    auto cmul = [](Complexd a, Complexd b) {
        return Complexd{a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    };
    auto csub = [](Complexd a, Complexd b) { return Complexd{a.re - b.re, a.im - b.im}; };
    auto cdiv = [](Complexd a, Complexd b) {
        double d = b.re * b.re + b.im * b.im;
        return Complexd{(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    };
    auto feval = [&](Complexd x) {
        Complexd r{0, 0};
        for (int i = n; i >= 0; --i) r = Complexd{cmul(r, x).re + c[i], cmul(r, x).im};
        return r;
    };
    for (int iter = 0; iter < 500; ++iter) {
        double moved = 0;
        for (int k = 0; k < n; ++k) {
            Complexd denom{1, 0};
            for (int j = 0; j < n; ++j)
                if (j != k) denom = cmul(denom, csub(z[k], z[j]));
            Complexd delta = cdiv(feval(z[k]), denom);
            z[k] = csub(z[k], delta);
            moved += std::abs(delta.re) + std::abs(delta.im);
        }
        if (moved < 1e-14) break;
    }
    return z;
}

} // namespace detail

// All roots of a squarefree polynomial as certified balls, conjugate pairs
// identified.  Doubles precision internally until the disks are pairwise
// disjoint and the real/complex split matches the exact Sturm count.
inline std::vector<RootBall> all_roots_certified(const RatPoly& f, mpfr_prec_t prec,
                                                 mpfr_prec_t cap = kPrecCap) {
    if (!poly_is_squarefree(f)) throw DomainError("all_roots_certified: input not squarefree");
    int n = f.degree();
    std::vector<BallReal> reals = real_roots_isolated(f, prec);
    int n_real = (int)reals.size();
    int n_pairs = (n - n_real) / 2;

    std::vector<RootBall> out;
    for (auto& r : reals)
        out.push_back({BallComplex(r, BallReal::from_si(0, prec)), true});
    if (n_pairs == 0) return out;

    RatPoly df = f.derivative();
    auto starts = detail::durand_kerner(f);
    // keep strictly-upper-half-plane approximations
    std::vector<detail::Complexd> upper;
    for (auto& z : starts)
        if (z.im > 1e-9) upper.push_back(z);

    for (mpfr_prec_t p = prec; p <= cap; p *= 2) {
        if ((int)upper.size() != n_pairs) break; // fall through to failure
        std::vector<BallComplex> disks;
        bool ok = true;
        for (auto& z0 : upper) {
            // Newton-polish at precision p using midpoint arithmetic via balls
            BallComplex z(BallReal::from_endpoints_d(z0.re, z0.re, p),
                          BallReal::from_endpoints_d(z0.im, z0.im, p));
            for (int it = 0; it < (int)p; ++it) {
                BallComplex fv = f.evaluate(z);
                BallComplex dv = df.evaluate(z);
                if (dv.contains_zero()) { ok = false; break; }
                BallComplex step = fv / dv;
                // midpoint step (point interval in, point interval out)
                z = z - step;
                mpq_class thresh(1);
                mpz_ui_pow_ui(thresh.get_den_mpz_t(), 2, (unsigned long)(p / 2 + 4));
                thresh.canonicalize();
                if (step.abs().certainly_lt(thresh)) break;
            }
            if (!ok) break;
            BallComplex fv = f.evaluate(z);
            BallComplex dv = df.evaluate(z);
            if (dv.contains_zero()) { ok = false; break; }
            BallReal rad = BallReal::from_si(n, p) * (fv.abs() / dv.abs());
            // inflate the rectangle by rad (upper bound)
            BallReal re(p), im(p);
            mpfr_sub(re.lo(), z.re().lo(), rad.hi(), MPFR_RNDD);
            mpfr_add(re.hi(), z.re().hi(), rad.hi(), MPFR_RNDU);
            mpfr_sub(im.lo(), z.im().lo(), rad.hi(), MPFR_RNDD);
            mpfr_add(im.hi(), z.im().hi(), rad.hi(), MPFR_RNDU);
            disks.emplace_back(re, im);
        }
        if (ok) {
            // disjointness: pairwise, from conjugates, and from the real line
            auto disjoint = [](const BallComplex& a, const BallComplex& b) {
                return mpfr_cmp(a.re().hi(), b.re().lo()) < 0 ||
                       mpfr_cmp(b.re().hi(), a.re().lo()) < 0 ||
                       mpfr_cmp(a.im().hi(), b.im().lo()) < 0 ||
                       mpfr_cmp(b.im().hi(), a.im().lo()) < 0;
            };
            for (size_t i = 0; i < disks.size() && ok; ++i) {
                if (!disks[i].im().certainly_positive()) ok = false;
                for (size_t j = i + 1; j < disks.size() && ok; ++j)
                    if (!disjoint(disks[i], disks[j]) ||
                        !disjoint(disks[i], disks[j].conj()))
                        ok = false;
                if (ok && !disjoint(disks[i], disks[i].conj())) ok = false;
            }
            if (ok) {
                // each upper disk + its conjugate + the real balls account for
                // all n roots; disjointness makes every disk hold exactly one
                for (auto& d : disks) out.push_back({d, false});
                return out;
            }
        }
        // retry with better starting points at higher precision
        upper.clear();
        starts = detail::durand_kerner(f);
        for (auto& z : starts)
            if (z.im > 1e-12) upper.push_back(z);
    }
    throw PrecisionCapExceeded("all_roots_certified: could not separate complex roots");
}

} // namespace tower

#endif
