#ifndef TOWER_POLY_HPP
#define TOWER_POLY_HPP

// Univariate polynomials over Q and over Z/m, plus the handful of exact
// algorithms the arithmetic layer needs: gcd, resultants, squarefree tests,
// and factorization mod p (distinct-degree then Cantor--Zassenhaus).

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tower/ball.hpp"
#include "tower/errors.hpp"

namespace tower {

using Int = mpz_class;
using Rat = mpq_class;

class RatPoly {
  public:
    RatPoly() = default;
    explicit RatPoly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { normalize(); }
    static RatPoly zero() { return RatPoly(); }
    static RatPoly constant(const Rat& a) { return RatPoly({a}); }
    static RatPoly x() { return RatPoly({Rat(0), Rat(1)}); }
    static RatPoly from_int_coeffs(const std::vector<long>& v) {
        std::vector<Rat> c;
        c.reserve(v.size());
        for (long a : v) c.emplace_back(a);
        return RatPoly(std::move(c));
    }

    bool is_zero() const { return c_.empty(); }
    // degree of the zero polynomial is -1 by convention
    int degree() const { return (int)c_.size() - 1; }
    const std::vector<Rat>& coeffs() const { return c_; }
    const Rat& operator[](size_t i) const { return c_[i]; }
    Rat coeff(size_t i) const { return i < c_.size() ? c_[i] : Rat(0); }
    const Rat& leading() const { return c_.back(); }

    bool is_monic() const { return !c_.empty() && c_.back() == 1; }
    bool has_integer_coeffs() const {
        for (const auto& a : c_)
            if (a.get_den() != 1) return false;
        return true;
    }

    friend bool operator==(const RatPoly& a, const RatPoly& b) { return a.c_ == b.c_; }

    friend RatPoly operator+(const RatPoly& a, const RatPoly& b) {
        std::vector<Rat> c(std::max(a.c_.size(), b.c_.size()), Rat(0));
        for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return RatPoly(std::move(c));
    }
    friend RatPoly operator-(const RatPoly& a, const RatPoly& b) {
        std::vector<Rat> c(std::max(a.c_.size(), b.c_.size()), Rat(0));
        for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
        return RatPoly(std::move(c));
    }
    friend RatPoly operator*(const RatPoly& a, const RatPoly& b) {
        if (a.is_zero() || b.is_zero()) return RatPoly();
        std::vector<Rat> c(a.c_.size() + b.c_.size() - 1, Rat(0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return RatPoly(std::move(c));
    }
    friend RatPoly operator*(const Rat& s, const RatPoly& a) {
        std::vector<Rat> c = a.c_;
        for (auto& x : c) x *= s;
        return RatPoly(std::move(c));
    }
    RatPoly operator-() const { return Rat(-1) * *this; }

    // Euclidean division; divisor must be nonzero.
    static std::pair<RatPoly, RatPoly> divmod(const RatPoly& a, const RatPoly& b) {
        if (b.is_zero()) throw DomainError("RatPoly::divmod by zero");
        std::vector<Rat> r = a.c_;
        std::vector<Rat> q;
        int db = b.degree();
        if ((int)r.size() - 1 >= db) q.assign(r.size() - db, Rat(0));
        while ((int)r.size() - 1 >= db && !r.empty()) {
            Rat f = r.back() / b.leading();
            size_t shift = r.size() - 1 - db;
            q[shift] = f;
            for (int i = 0; i <= db; ++i) r[shift + i] -= f * b.c_[i];
            while (!r.empty() && r.back() == 0) r.pop_back();
        }
        return {RatPoly(std::move(q)), RatPoly(std::move(r))};
    }

    RatPoly derivative() const {
        if (c_.size() <= 1) return RatPoly();
        std::vector<Rat> d(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = Rat((long)i) * c_[i];
        return RatPoly(std::move(d));
    }

    RatPoly monic() const {
        if (is_zero()) return *this;
        return Rat(1) / leading() * *this;
    }

    Rat evaluate(const Rat& x) const {
        Rat r(0);
        for (size_t i = c_.size(); i-- > 0;) r = r * x + c_[i];
        return r;
    }
    BallReal evaluate(const BallReal& x) const {
        BallReal r = BallReal::from_si(0, x.precision());
        for (size_t i = c_.size(); i-- > 0;)
            r = r * x + BallReal::from_rational(c_[i], x.precision());
        return r;
    }
    BallComplex evaluate(const BallComplex& x) const {
        mpfr_prec_t p = x.re().precision();
        BallComplex r(p);
        for (size_t i = c_.size(); i-- > 0;) {
            r = r * x;
            r.re() = r.re() + BallReal::from_rational(c_[i], p);
        }
        return r;
    }

    std::string to_string(const std::string& var = "x") const {
        if (is_zero()) return "0";
        std::string s;
        for (size_t i = c_.size(); i-- > 0;) {
            if (c_[i] == 0) continue;
            if (!s.empty()) s += c_[i] > 0 ? " + " : " - ";
            else if (c_[i] < 0) s += "-";
            Rat a = abs(c_[i]);
            if (i == 0 || a != 1) s += a.get_str();
            if (i > 0) {
                if (a != 1) s += "*";
                s += var;
                if (i > 1) s += "^" + std::to_string(i);
            }
        }
        return s;
    }

  private:
    void normalize() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rat> c_; // lowest degree first
};

// Monic gcd; gcd(a, 0) = monic(a).
inline RatPoly poly_gcd(RatPoly a, RatPoly b) {
    while (!b.is_zero()) {
        RatPoly r = RatPoly::divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

inline bool poly_is_squarefree(const RatPoly& f) {
    if (f.degree() <= 0) return !f.is_zero();
    return poly_gcd(f, f.derivative()).degree() == 0;
}

// Res(f, g), exact, via the Euclidean remainder sequence over Q.
inline Rat resultant(RatPoly f, RatPoly g) {
    if (f.is_zero() || g.is_zero()) return Rat(0);
    Rat res(1);
    while (g.degree() > 0) {
        RatPoly r = RatPoly::divmod(f, g).second;
        int df = f.degree(), dg = g.degree(), dr = r.degree();
        if (r.is_zero()) return Rat(0);
        Rat lg = g.leading();
        // res(f,g) = (-1)^(df dg) res(g,f); res(g, r) relation with lc(g)^(df - dr)
        Rat sign = ((df % 2) && (dg % 2)) ? Rat(-1) : Rat(1);
        Rat p;
        mpz_pow_ui(p.get_num_mpz_t(), lg.get_num().get_mpz_t(), (unsigned long)(df - dr));
        mpz_pow_ui(p.get_den_mpz_t(), lg.get_den().get_mpz_t(), (unsigned long)(df - dr));
        p.canonicalize();
        res *= sign * p;
        f = std::move(g);
        g = std::move(r);
    }
    // g is a nonzero constant
    Rat lg = g.leading();
    Rat p;
    mpz_pow_ui(p.get_num_mpz_t(), lg.get_num().get_mpz_t(), (unsigned long)f.degree());
    mpz_pow_ui(p.get_den_mpz_t(), lg.get_den().get_mpz_t(), (unsigned long)f.degree());
    p.canonicalize();
    return res * p;
}

// disc(f) = (-1)^(n(n-1)/2) Res(f, f') / lc(f)
inline Rat poly_discriminant(const RatPoly& f) {
    int n = f.degree();
    if (n < 1) throw DomainError("discriminant of a constant");
    Rat r = resultant(f, f.derivative()) / f.leading();
    if ((n * (n - 1) / 2) % 2) r = -r;
    return r;
}

// --- polynomials over Z/m ----------------------------------------------------

inline Int mod_reduce(const Int& a, const Int& m) {
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline Int mod_inverse(const Int& a, const Int& m) {
    Int r;
    if (!mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()))
        throw DomainError("mod_inverse: not invertible");
    return r;
}

class ModPoly {
  public:
    ModPoly() : m_(0) {}
    explicit ModPoly(Int m) : m_(std::move(m)) {}
    ModPoly(std::vector<Int> coeffs, Int m) : c_(std::move(coeffs)), m_(std::move(m)) {
        for (auto& a : c_) a = mod_reduce(a, m_);
        normalize();
    }
    static ModPoly from_rat(const RatPoly& f, const Int& m) {
        std::vector<Int> c;
        c.reserve(f.coeffs().size());
        for (const auto& a : f.coeffs()) {
            Int num = mod_reduce(a.get_num(), m);
            if (a.get_den() != 1) num = mod_reduce(num * mod_inverse(a.get_den(), m), m);
            c.push_back(num);
        }
        return ModPoly(std::move(c), m);
    }
    static ModPoly x(const Int& m) { return ModPoly({Int(0), Int(1)}, m); }
    static ModPoly constant(const Int& a, const Int& m) { return ModPoly({a}, m); }

    const Int& modulus() const { return m_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return (int)c_.size() - 1; }
    const std::vector<Int>& coeffs() const { return c_; }
    Int coeff(size_t i) const { return i < c_.size() ? c_[i] : Int(0); }
    const Int& leading() const { return c_.back(); }
    bool is_monic() const { return !c_.empty() && c_.back() == 1; }
    bool is_one() const { return c_.size() == 1 && c_[0] == 1; }

    friend bool operator==(const ModPoly& a, const ModPoly& b) { return a.c_ == b.c_; }
    friend bool operator<(const ModPoly& a, const ModPoly& b) {
        if (a.degree() != b.degree()) return a.degree() < b.degree();
        for (size_t i = a.c_.size(); i-- > 0;)
            if (a.c_[i] != b.c_[i]) return a.c_[i] < b.c_[i];
        return false;
    }

    friend ModPoly operator+(const ModPoly& a, const ModPoly& b) {
        std::vector<Int> c(std::max(a.c_.size(), b.c_.size()), Int(0));
        for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return ModPoly(std::move(c), a.m_);
    }
    friend ModPoly operator-(const ModPoly& a, const ModPoly& b) {
        std::vector<Int> c(std::max(a.c_.size(), b.c_.size()), Int(0));
        for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
        return ModPoly(std::move(c), a.m_);
    }
    friend ModPoly operator*(const ModPoly& a, const ModPoly& b) {
        if (a.is_zero() || b.is_zero()) return ModPoly(a.m_);
        std::vector<Int> c(a.c_.size() + b.c_.size() - 1, Int(0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return ModPoly(std::move(c), a.m_);
    }

    // division by a polynomial with invertible leading coefficient
    static std::pair<ModPoly, ModPoly> divmod(const ModPoly& a, const ModPoly& b) {
        if (b.is_zero()) throw DomainError("ModPoly::divmod by zero");
        Int linv = mod_inverse(b.leading(), a.m_);
        std::vector<Int> r = a.c_;
        std::vector<Int> q;
        int db = b.degree();
        if ((int)r.size() - 1 >= db) q.assign(r.size() - db, Int(0));
        while ((int)r.size() - 1 >= db && !r.empty()) {
            Int f = mod_reduce(r.back() * linv, a.m_);
            size_t shift = r.size() - 1 - db;
            q[shift] = f;
            for (int i = 0; i <= db; ++i)
                r[shift + i] = mod_reduce(r[shift + i] - f * b.c_[i], a.m_);
            while (!r.empty() && r.back() == 0) r.pop_back();
        }
        return {ModPoly(std::move(q), a.m_), ModPoly(std::move(r), a.m_)};
    }

    ModPoly monic() const {
        if (is_zero() || is_monic()) return *this;
        Int linv = mod_inverse(leading(), m_);
        std::vector<Int> c = c_;
        for (auto& a : c) a = mod_reduce(a * linv, m_);
        return ModPoly(std::move(c), m_);
    }

    ModPoly derivative() const {
        if (c_.size() <= 1) return ModPoly(m_);
        std::vector<Int> d(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = mod_reduce(Int((long)i) * c_[i], m_);
        return ModPoly(std::move(d), m_);
    }

    RatPoly lift() const {
        std::vector<Rat> c;
        c.reserve(c_.size());
        for (const auto& a : c_) c.emplace_back(a);
        return RatPoly(std::move(c));
    }

    std::string to_string(const std::string& var = "x") const { return lift().to_string(var); }

  private:
    void normalize() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Int> c_;
    Int m_;
};

inline ModPoly mod_poly_gcd(ModPoly a, ModPoly b) {
    // prime modulus assumed
    while (!b.is_zero()) {
        ModPoly r = ModPoly::divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.is_zero() ? a : a.monic();
}

inline ModPoly mod_poly_powmod(ModPoly base, Int e, const ModPoly& f) {
    ModPoly r = ModPoly::constant(Int(1), base.modulus());
    base = ModPoly::divmod(base, f).second;
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) r = ModPoly::divmod(r * base, f).second;
        base = ModPoly::divmod(base * base, f).second;
        e >>= 1;
    }
    return r;
}

// --- factorization over F_p ---------------------------------------------------

struct ModFactor {
    ModPoly factor;
    int multiplicity;
};

// tiny xorshift for the randomized equal-degree splitting; seeded from config
class SplitRng {
  public:
    explicit SplitRng(unsigned long seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    unsigned long next() {
        s_ ^= s_ << 13;
        s_ ^= s_ >> 7;
        s_ ^= s_ << 17;
        return s_;
    }

  private:
    unsigned long s_;
};

namespace detail {

// Squarefree decomposition over F_p (monic f), with the x^p descent.
inline void squarefree_decompose(const ModPoly& f, int mult, const Int& p,
                                 std::vector<std::pair<ModPoly, int>>& out) {
    if (f.degree() <= 0) return;
    ModPoly c = mod_poly_gcd(f, f.derivative()); // = monic f when f' == 0
    ModPoly w = ModPoly::divmod(f, c).first;
    int i = 1;
    while (w.degree() > 0) {
        ModPoly y = mod_poly_gcd(w, c);
        ModPoly fac = ModPoly::divmod(w, y).first;
        if (fac.degree() > 0) out.emplace_back(fac.monic(), mult * i);
        c = ModPoly::divmod(c, y).first;
        w = std::move(y);
        ++i;
    }
    if (c.degree() > 0) {
        // c = g(x^p); coefficient p-th root is the identity over F_p
        unsigned long pp = mpz_get_ui(p.get_mpz_t());
        std::vector<Int> g;
        for (size_t j = 0; j <= (size_t)c.degree(); j += pp) g.push_back(c.coeff(j));
        squarefree_decompose(ModPoly(std::move(g), p), mult * (int)pp, p, out);
    }
}

inline ModPoly random_mod_poly(int max_deg, const Int& p, SplitRng& rng) {
    std::vector<Int> c(max_deg + 1);
    for (auto& a : c) {
        Int r;
        mpz_set_ui(r.get_mpz_t(), (unsigned long)rng.next());
        a = mod_reduce(r, p);
    }
    return ModPoly(std::move(c), p);
}

// Cantor--Zassenhaus split of a monic product g of distinct irreducibles of
// degree d over F_p.
inline void equal_degree_split(const ModPoly& g, int d, const Int& p, SplitRng& rng,
                               std::vector<ModPoly>& out) {
    if (g.degree() == d) {
        out.push_back(g.monic());
        return;
    }
    const ModPoly one = ModPoly::constant(Int(1), p);
    while (true) {
        ModPoly r = random_mod_poly(g.degree() - 1, p, rng);
        if (r.degree() < 1) continue;
        ModPoly s(p);
        if (p == 2) {
            // trace map r + r^2 + ... + r^(2^(d-1))
            ModPoly t = ModPoly::divmod(r, g).second;
            s = t;
            for (int j = 1; j < d; ++j) {
                t = ModPoly::divmod(t * t, g).second;
                s = s + t;
            }
        } else {
            Int e;
            mpz_pow_ui(e.get_mpz_t(), p.get_mpz_t(), (unsigned long)d);
            e = (e - 1) / 2;
            s = mod_poly_powmod(r, e, g) - one;
        }
        ModPoly h = mod_poly_gcd(s, g);
        if (h.degree() > 0 && h.degree() < g.degree()) {
            equal_degree_split(h, d, p, rng, out);
            equal_degree_split(ModPoly::divmod(g, h).first, d, p, rng, out);
            return;
        }
    }
}

} // namespace detail

// Full factorization of a monic integer polynomial mod p: squarefree
// decomposition, then distinct-degree, then randomized equal-degree splitting.
// Output is deterministic: sorted by degree, then lexicographically.
inline std::vector<ModFactor> factor_mod_p(const RatPoly& f, const Int& p,
                                           unsigned long seed = 1) {
    if (mpz_probab_prime_p(p.get_mpz_t(), 32) == 0)
        throw DomainError("factor_mod_p: modulus is not prime");
    if (!f.is_monic() || !f.has_integer_coeffs())
        throw DomainError("factor_mod_p: polynomial must be monic with integer coefficients");
    SplitRng rng(seed);
    ModPoly fbar = ModPoly::from_rat(f, p);
    if (fbar.degree() != f.degree())
        throw DomainError("factor_mod_p: leading coefficient vanishes mod p");

    std::vector<std::pair<ModPoly, int>> sqf;
    detail::squarefree_decompose(fbar, 1, p, sqf);

    std::vector<ModFactor> out;
    for (auto& [part, mult] : sqf) {
        // distinct-degree on the squarefree part
        ModPoly g = part;
        ModPoly h = mod_poly_powmod(ModPoly::x(p), p, g); // x^p mod g
        ModPoly xp = h;
        int d = 0;
        while (g.degree() >= 2 * (d + 1)) {
            ++d;
            if (d > 1) xp = mod_poly_powmod(xp, p, g);
            ModPoly gd = mod_poly_gcd(xp - ModPoly::x(p), g);
            if (gd.degree() > 0) {
                std::vector<ModPoly> irr;
                detail::equal_degree_split(gd, d, p, rng, irr);
                for (auto& q : irr) out.push_back({q, mult});
                g = ModPoly::divmod(g, gd).first;
                xp = ModPoly::divmod(xp, g.degree() > 0 ? g : ModPoly::constant(Int(1), p)).second;
                if (g.degree() == 0) break;
            }
        }
        if (g.degree() > 0) out.push_back({g.monic(), mult});
    }
    std::sort(out.begin(), out.end(), [](const ModFactor& a, const ModFactor& b) {
        return a.factor < b.factor;
    });
    return out;
}

} // namespace tower

#endif
