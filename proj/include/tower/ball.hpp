#ifndef TOWER_BALL_HPP
#define TOWER_BALL_HPP

// Rigorous real and complex interval arithmetic on top of MPFR.
// Every operation rounds the lower endpoint down and the upper endpoint up,
// so the returned interval always contains the exact value.  The public
// surface speaks the midpoint/radius language; internally we keep endpoints
// because directed rounding makes the enclosure proofs one-liners.

#include <mpfr.h>
#include <gmpxx.h>

#include <algorithm>
#include <string>
#include <utility>

#include "tower/errors.hpp"

namespace tower {

using Int = mpz_class;
using Rat = mpq_class;

inline constexpr mpfr_prec_t kDefaultPrec = 128;
inline constexpr mpfr_prec_t kPrecCap = 4096;

namespace detail {

// Minimal RAII wrapper for mpfr_t.
class Mpf {
  public:
    explicit Mpf(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    Mpf(const Mpf& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Mpf(Mpf&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    Mpf& operator=(Mpf o) noexcept { mpfr_swap(v_, o.v_); return *this; }
    ~Mpf() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

  private:
    mpfr_t v_;
};

} // namespace detail

class BallReal {
  public:
    explicit BallReal(mpfr_prec_t prec = kDefaultPrec) : lo_(prec), hi_(prec), prec_(prec) {}

    static BallReal from_rational(const mpq_class& q, mpfr_prec_t prec = kDefaultPrec) {
        BallReal b(prec);
        mpfr_set_q(b.lo_.get(), q.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(b.hi_.get(), q.get_mpq_t(), MPFR_RNDU);
        return b;
    }
    static BallReal from_si(long n, mpfr_prec_t prec = kDefaultPrec) {
        BallReal b(prec);
        mpfr_set_si(b.lo_.get(), n, MPFR_RNDD);
        mpfr_set_si(b.hi_.get(), n, MPFR_RNDU);
        return b;
    }
    static BallReal from_endpoints_d(double lo, double hi, mpfr_prec_t prec = kDefaultPrec) {
        BallReal b(prec);
        mpfr_set_d(b.lo_.get(), lo, MPFR_RNDD);
        mpfr_set_d(b.hi_.get(), hi, MPFR_RNDU);
        return b;
    }
    static BallReal pi(mpfr_prec_t prec = kDefaultPrec) {
        BallReal b(prec);
        mpfr_const_pi(b.lo_.get(), MPFR_RNDD);
        mpfr_const_pi(b.hi_.get(), MPFR_RNDU);
        return b;
    }

    mpfr_prec_t precision() const { return prec_; }
    mpfr_srcptr lo() const { return lo_.get(); }
    mpfr_srcptr hi() const { return hi_.get(); }
    mpfr_ptr lo() { return lo_.get(); }
    mpfr_ptr hi() { return hi_.get(); }

    double mid_d() const {
        detail::Mpf m(prec_);
        mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
        mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
        return mpfr_get_d(m.get(), MPFR_RNDN);
    }
    double rad_d() const {
        detail::Mpf r(prec_);
        mpfr_sub(r.get(), hi_.get(), lo_.get(), MPFR_RNDU);
        mpfr_div_2ui(r.get(), r.get(), 1, MPFR_RNDU);
        return mpfr_get_d(r.get(), MPFR_RNDU);
    }
    double lo_d() const { return mpfr_get_d(lo_.get(), MPFR_RNDD); }
    double hi_d() const { return mpfr_get_d(hi_.get(), MPFR_RNDU); }

    bool contains(const mpq_class& q) const {
        return mpfr_cmp_q(lo_.get(), q.get_mpq_t()) <= 0 &&
               mpfr_cmp_q(hi_.get(), q.get_mpq_t()) >= 0;
    }
    bool contains(const BallReal& o) const {
        return mpfr_cmp(lo_.get(), o.lo_.get()) <= 0 &&
               mpfr_cmp(hi_.get(), o.hi_.get()) >= 0;
    }
    bool contains_zero() const {
        return mpfr_sgn(lo_.get()) <= 0 && mpfr_sgn(hi_.get()) >= 0;
    }
    bool certainly_positive() const { return mpfr_sgn(lo_.get()) > 0; }
    bool certainly_lt(const BallReal& o) const { return mpfr_cmp(hi_.get(), o.lo_.get()) < 0; }
    bool certainly_le(const BallReal& o) const { return mpfr_cmp(hi_.get(), o.lo_.get()) <= 0; }
    bool certainly_gt(const mpq_class& q) const { return mpfr_cmp_q(lo_.get(), q.get_mpq_t()) > 0; }
    bool certainly_lt(const mpq_class& q) const { return mpfr_cmp_q(hi_.get(), q.get_mpq_t()) < 0; }
    bool certainly_ge(const mpq_class& q) const { return mpfr_cmp_q(lo_.get(), q.get_mpq_t()) >= 0; }

    // Relative width <= 2^-bits, with exact points counting as width 0.
    bool relative_width_below(unsigned bits) const {
        detail::Mpf w(prec_), m(prec_);
        mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
        if (mpfr_zero_p(w.get())) return true;
        mpfr_min(m.get(), lo_.get(), hi_.get(), MPFR_RNDD);
        mpfr_abs(m.get(), m.get(), MPFR_RNDD);
        if (mpfr_zero_p(m.get())) return false;
        mpfr_div(w.get(), w.get(), m.get(), MPFR_RNDU);
        mpfr_mul_2ui(w.get(), w.get(), bits, MPFR_RNDU);
        return mpfr_cmp_ui(w.get(), 1) <= 0;
    }

    BallReal operator-() const {
        BallReal r(prec_);
        mpfr_neg(r.lo_.get(), hi_.get(), MPFR_RNDD);
        mpfr_neg(r.hi_.get(), lo_.get(), MPFR_RNDU);
        return r;
    }

    friend BallReal operator+(const BallReal& a, const BallReal& b) {
        BallReal r(std::max(a.prec_, b.prec_));
        mpfr_add(r.lo_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
        mpfr_add(r.hi_.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
        return r;
    }
    friend BallReal operator-(const BallReal& a, const BallReal& b) {
        BallReal r(std::max(a.prec_, b.prec_));
        mpfr_sub(r.lo_.get(), a.lo_.get(), b.hi_.get(), MPFR_RNDD);
        mpfr_sub(r.hi_.get(), a.hi_.get(), b.lo_.get(), MPFR_RNDU);
        return r;
    }
    friend BallReal operator*(const BallReal& a, const BallReal& b) {
        mpfr_prec_t p = std::max(a.prec_, b.prec_);
        BallReal r(p);
        detail::Mpf t(p);
        // lo = min of the four products rounded down
        mpfr_mul(r.lo_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
        mpfr_mul(t.get(), a.lo_.get(), b.hi_.get(), MPFR_RNDD);
        mpfr_min(r.lo_.get(), r.lo_.get(), t.get(), MPFR_RNDD);
        mpfr_mul(t.get(), a.hi_.get(), b.lo_.get(), MPFR_RNDD);
        mpfr_min(r.lo_.get(), r.lo_.get(), t.get(), MPFR_RNDD);
        mpfr_mul(t.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDD);
        mpfr_min(r.lo_.get(), r.lo_.get(), t.get(), MPFR_RNDD);
        // hi = max of the four products rounded up
        mpfr_mul(r.hi_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDU);
        mpfr_mul(t.get(), a.lo_.get(), b.hi_.get(), MPFR_RNDU);
        mpfr_max(r.hi_.get(), r.hi_.get(), t.get(), MPFR_RNDU);
        mpfr_mul(t.get(), a.hi_.get(), b.lo_.get(), MPFR_RNDU);
        mpfr_max(r.hi_.get(), r.hi_.get(), t.get(), MPFR_RNDU);
        mpfr_mul(t.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
        mpfr_max(r.hi_.get(), r.hi_.get(), t.get(), MPFR_RNDU);
        return r;
    }
    friend BallReal operator/(const BallReal& a, const BallReal& b) {
        if (b.contains_zero())
            throw DomainError("BallReal division: divisor interval contains zero");
        mpfr_prec_t p = std::max(a.prec_, b.prec_);
        BallReal r(p);
        detail::Mpf t(p);
        mpfr_div(r.lo_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
        mpfr_div(t.get(), a.lo_.get(), b.hi_.get(), MPFR_RNDD);
        mpfr_min(r.lo_.get(), r.lo_.get(), t.get(), MPFR_RNDD);
        mpfr_div(t.get(), a.hi_.get(), b.lo_.get(), MPFR_RNDD);
        mpfr_min(r.lo_.get(), r.lo_.get(), t.get(), MPFR_RNDD);
        mpfr_div(t.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDD);
        mpfr_min(r.lo_.get(), r.lo_.get(), t.get(), MPFR_RNDD);
        mpfr_div(r.hi_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDU);
        mpfr_div(t.get(), a.lo_.get(), b.hi_.get(), MPFR_RNDU);
        mpfr_max(r.hi_.get(), r.hi_.get(), t.get(), MPFR_RNDU);
        mpfr_div(t.get(), a.hi_.get(), b.lo_.get(), MPFR_RNDU);
        mpfr_max(r.hi_.get(), r.hi_.get(), t.get(), MPFR_RNDU);
        mpfr_div(t.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
        mpfr_max(r.hi_.get(), r.hi_.get(), t.get(), MPFR_RNDU);
        return r;
    }

    std::string to_string(size_t digits = 20) const {
        char* ls = nullptr;
        char* hs = nullptr;
        mpfr_asprintf(&ls, "%.*Rg", (int)digits, lo_.get());
        mpfr_asprintf(&hs, "%.*Rg", (int)digits, hi_.get());
        std::string s = std::string("[") + ls + ", " + hs + "]";
        mpfr_free_str(ls);
        mpfr_free_str(hs);
        return s;
    }

  private:
    detail::Mpf lo_, hi_;
    mpfr_prec_t prec_;
};

inline BallReal ball_abs(const BallReal& a) {
    BallReal r(a.precision());
    if (a.contains_zero()) {
        detail::Mpf t(a.precision());
        mpfr_neg(t.get(), a.lo(), MPFR_RNDU);
        mpfr_max(r.hi(), t.get(), a.hi(), MPFR_RNDU);
        mpfr_set_zero(r.lo(), 1);
    } else if (mpfr_sgn(a.lo()) > 0) {
        r = a;
    } else {
        r = -a;
    }
    return r;
}

// x^2 as an interval; never dips below zero, unlike the generic product
inline BallReal ball_sqr(const BallReal& a) {
    BallReal r = ball_abs(a);
    mpfr_mul(r.lo(), r.lo(), r.lo(), MPFR_RNDD);
    mpfr_mul(r.hi(), r.hi(), r.hi(), MPFR_RNDU);
    return r;
}

inline BallReal ball_max(const BallReal& a, const BallReal& b) {
    BallReal r(std::max(a.precision(), b.precision()));
    mpfr_max(r.lo(), a.lo(), b.lo(), MPFR_RNDD);
    mpfr_max(r.hi(), a.hi(), b.hi(), MPFR_RNDU);
    return r;
}

inline BallReal ball_min(const BallReal& a, const BallReal& b) {
    BallReal r(std::max(a.precision(), b.precision()));
    mpfr_min(r.lo(), a.lo(), b.lo(), MPFR_RNDD);
    mpfr_min(r.hi(), a.hi(), b.hi(), MPFR_RNDU);
    return r;
}

// max(1, x) -- monotone, so no comparison decision is ever needed.
inline BallReal ball_max1(const BallReal& a) {
    return ball_max(a, BallReal::from_si(1, a.precision()));
}

namespace detail {

// Apply a monotone increasing mpfr function endpoint-wise.
template <typename F>
BallReal monotone(const BallReal& a, F f) {
    BallReal r(a.precision());
    f(r.lo(), a.lo(), MPFR_RNDD);
    f(r.hi(), a.hi(), MPFR_RNDU);
    return r;
}

} // namespace detail

inline BallReal ball_sqrt(const BallReal& a) {
    if (mpfr_sgn(a.lo()) < 0) throw DomainError("ball_sqrt: negative interval");
    return detail::monotone(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t m) { mpfr_sqrt(r, x, m); });
}

inline BallReal ball_log(const BallReal& a) {
    if (mpfr_sgn(a.lo()) <= 0) throw DomainError("ball_log: interval not strictly positive");
    return detail::monotone(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t m) { mpfr_log(r, x, m); });
}

inline BallReal ball_exp(const BallReal& a) {
    return detail::monotone(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t m) { mpfr_exp(r, x, m); });
}

inline BallReal ball_sinh(const BallReal& a) {
    return detail::monotone(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t m) { mpfr_sinh(r, x, m); });
}

inline BallReal ball_acosh(const BallReal& a) {
    if (mpfr_cmp_ui(a.lo(), 1) < 0) throw DomainError("ball_acosh: interval below 1");
    return detail::monotone(a, [](mpfr_ptr r, mpfr_srcptr x, mpfr_rnd_t m) { mpfr_acosh(r, x, m); });
}

inline BallReal ball_pow_ui(const BallReal& a, unsigned long k) {
    BallReal r = BallReal::from_si(1, a.precision());
    BallReal base = a;
    // exact for k = 0; plain binary powering otherwise
    while (k) {
        if (k & 1) r = r * base;
        base = base * base;
        k >>= 1;
    }
    return r;
}

// --- complex rectangles -----------------------------------------------------

class BallComplex {
  public:
    BallComplex(BallReal re, BallReal im) : re_(std::move(re)), im_(std::move(im)) {}
    explicit BallComplex(mpfr_prec_t prec = kDefaultPrec) : re_(prec), im_(prec) {}

    const BallReal& re() const { return re_; }
    const BallReal& im() const { return im_; }
    BallReal& re() { return re_; }
    BallReal& im() { return im_; }

    friend BallComplex operator+(const BallComplex& a, const BallComplex& b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend BallComplex operator-(const BallComplex& a, const BallComplex& b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    friend BallComplex operator*(const BallComplex& a, const BallComplex& b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    BallComplex operator-() const { return {-re_, -im_}; }

    BallComplex conj() const { return {re_, -im_}; }

    BallReal abs2() const { return ball_sqr(re_) + ball_sqr(im_); }
    BallReal abs() const { return ball_sqrt(abs2()); }

    friend BallComplex operator/(const BallComplex& a, const BallComplex& b) {
        BallReal n = b.abs2();
        BallComplex num = a * b.conj();
        return {num.re_ / n, num.im_ / n};
    }

    bool contains_zero() const { return re_.contains_zero() && im_.contains_zero(); }

    std::string to_string(size_t digits = 20) const {
        return re_.to_string(digits) + " + " + im_.to_string(digits) + "*i";
    }

  private:
    BallReal re_, im_;
};

// Enclosure of a square root of z.  The rectangle must exclude zero; on the
// disk |w - z0| < |z0| the branch through sqrt(z0) is analytic with
// |d sqrt/dw| <= 1 / (2 sqrt(|z0| - r)), which gives the radius bound.
// The other square root is the negative of the returned one.
inline BallComplex ball_sqrt_branch(const BallComplex& z) {
    mpfr_prec_t prec = std::max(z.re().precision(), z.im().precision());
    // midpoint
    detail::Mpf x(prec), y(prec), m(prec), t(prec), s(prec);
    mpfr_add(x.get(), z.re().lo(), z.re().hi(), MPFR_RNDN);
    mpfr_div_2ui(x.get(), x.get(), 1, MPFR_RNDN);
    mpfr_add(y.get(), z.im().lo(), z.im().hi(), MPFR_RNDN);
    mpfr_div_2ui(y.get(), y.get(), 1, MPFR_RNDN);
    // |z0|
    mpfr_hypot(m.get(), x.get(), y.get(), MPFR_RNDD);
    // rectangle radius (half-diagonal, rounded up)
    detail::Mpf r(prec);
    mpfr_sub(r.get(), z.re().hi(), z.re().lo(), MPFR_RNDU);
    mpfr_sub(t.get(), z.im().hi(), z.im().lo(), MPFR_RNDU);
    mpfr_hypot(r.get(), r.get(), t.get(), MPFR_RNDU);
    mpfr_div_2ui(r.get(), r.get(), 1, MPFR_RNDU);
    if (mpfr_cmp(r.get(), m.get()) >= 0)
        throw DomainError("ball_sqrt_branch: rectangle not separated from zero");
    // principal sqrt of midpoint: u = sqrt((|z0|+x)/2), v = y/(2u)  (u > 0 since z0 != -|z0| handled below)
    detail::Mpf az(prec), u(prec), v(prec);
    mpfr_hypot(az.get(), x.get(), y.get(), MPFR_RNDN);
    mpfr_add(u.get(), az.get(), x.get(), MPFR_RNDN);
    mpfr_div_2ui(u.get(), u.get(), 1, MPFR_RNDN);
    mpfr_sqrt(u.get(), u.get(), MPFR_RNDN);
    if (mpfr_zero_p(u.get())) {
        // z0 on the negative real axis: sqrt(z0) = i sqrt(|z0|)
        mpfr_sqrt(v.get(), az.get(), MPFR_RNDN);
    } else {
        mpfr_div(v.get(), y.get(), u.get(), MPFR_RNDN);
        mpfr_div_2ui(v.get(), v.get(), 1, MPFR_RNDN);
    }
    // error radius: r / (2 sqrt(|z0| - r)) plus slack for the midpoint rounding
    mpfr_sub(s.get(), m.get(), r.get(), MPFR_RNDD);
    mpfr_sqrt(s.get(), s.get(), MPFR_RNDD);
    mpfr_mul_2ui(s.get(), s.get(), 1, MPFR_RNDD);
    mpfr_div(s.get(), r.get(), s.get(), MPFR_RNDU);
    // a couple of ulps of slack for computing sqrt(z0) in rounded arithmetic
    detail::Mpf slack(prec);
    mpfr_set_ui_2exp(slack.get(), 16, -(mpfr_exp_t)prec, MPFR_RNDU);
    detail::Mpf az1(prec);
    mpfr_add_ui(az1.get(), az.get(), 1, MPFR_RNDU); // dominates |sqrt(z0)| for all magnitudes
    mpfr_mul(slack.get(), slack.get(), az1.get(), MPFR_RNDU);
    mpfr_add(s.get(), s.get(), slack.get(), MPFR_RNDU);

    BallReal re(prec), im(prec);
    mpfr_sub(re.lo(), u.get(), s.get(), MPFR_RNDD);
    mpfr_add(re.hi(), u.get(), s.get(), MPFR_RNDU);
    mpfr_sub(im.lo(), v.get(), s.get(), MPFR_RNDD);
    mpfr_add(im.hi(), v.get(), s.get(), MPFR_RNDU);
    return {re, im};
}

} // namespace tower

#endif
