#ifndef TOWER_NUMBER_FIELD_HPP
#define TOWER_NUMBER_FIELD_HPP

// The field E = Q(theta) presented by a monic integer minimal polynomial,
// its elements in the power basis, archimedean places, prime splitting via
// Dedekind's criterion, and prime-ideal valuations.
//
// We work throughout in the order Z[theta] and only accept primes at which
// Dedekind's criterion certifies that Z[theta] is maximal.

#include <gmpxx.h>

#include <climits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "tower/ball.hpp"
#include "tower/errors.hpp"
#include "tower/lattice.hpp"
#include "tower/poly.hpp"
#include "tower/roots.hpp"

namespace tower {

struct ArchPlace {
    BallComplex root;  // one root per place; conjugates share a place
    int degree;        // 1 for real, 2 for complex
};

enum class IrreducibilityStatus { verified, assumed };

class NumberField;
using FieldPtr = std::shared_ptr<const NumberField>;

class NumberField : public std::enable_shared_from_this<NumberField> {
  public:
    // Use nf_create; constructor is internal.
    struct Private {};
    NumberField(Private, RatPoly f, Rat disc, std::vector<ArchPlace> places,
                IrreducibilityStatus status, std::string warning)
        : f_(std::move(f)),
          disc_(std::move(disc)),
          places_(std::move(places)),
          status_(status),
          warning_(std::move(warning)) {}

    const RatPoly& min_poly() const { return f_; }
    int degree() const { return f_.degree(); }
    const Rat& discriminant() const { return disc_; }
    const std::vector<ArchPlace>& arch_places() const { return places_; }
    IrreducibilityStatus irreducibility_status() const { return status_; }
    const std::string& warning() const { return warning_; }

    size_t num_arch_places() const { return places_.size(); }

    // Root balls recomputed at a higher working precision, memoized.
    const std::vector<ArchPlace>& arch_places_at(mpfr_prec_t prec) const {
        if (prec <= kDefaultPrec) return places_;
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = place_cache_.find(prec);
        if (it != place_cache_.end()) return it->second;
        return place_cache_.emplace(prec, compute_places(f_, prec)).first->second;
    }

    static std::vector<ArchPlace> compute_places(const RatPoly& f, mpfr_prec_t prec) {
        std::vector<ArchPlace> places;
        for (auto& rb : all_roots_certified(f, prec)) {
            places.push_back({rb.ball, rb.is_real ? 1 : 2});
        }
        return places;
    }

  private:
    RatPoly f_;
    Rat disc_;
    std::vector<ArchPlace> places_;
    IrreducibilityStatus status_;
    std::string warning_;
    mutable std::mutex cache_mutex_;
    mutable std::map<mpfr_prec_t, std::vector<ArchPlace>> place_cache_;
};

// f monic with integer coefficients, squarefree (checked exactly).
// Irreducibility is certified by exhibiting a prime p <= 1000, p coprime to
// disc(f), with f irreducible mod p; when no such prime exists the field is
// created with status `assumed` and a warning.
inline FieldPtr nf_create(const RatPoly& f, mpfr_prec_t prec = kDefaultPrec) {
    if (f.degree() < 1) throw DomainError("nf_create: degree must be >= 1");
    if (!f.is_monic()) throw DomainError("nf_create: minimal polynomial must be monic");
    if (!f.has_integer_coeffs())
        throw DomainError("nf_create: minimal polynomial must have integer coefficients");
    if (!poly_is_squarefree(f)) throw DomainError("nf_create: minimal polynomial not squarefree");
    Rat disc = poly_discriminant(f);

    IrreducibilityStatus status = IrreducibilityStatus::assumed;
    std::string warning;
    if (f.degree() == 1) {
        status = IrreducibilityStatus::verified;
    } else {
        Int p = 2;
        while (p <= 1000) {
            if (mpz_divisible_p(disc.get_num().get_mpz_t(), p.get_mpz_t()) == 0) {
                auto factors = factor_mod_p(f, p);
                if (factors.size() == 1 && factors[0].multiplicity == 1) {
                    status = IrreducibilityStatus::verified;
                    break;
                }
            }
            mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
        }
        if (status == IrreducibilityStatus::assumed)
            warning = "irreducibility not certified by any prime <= 1000; status assumed";
    }

    auto places = NumberField::compute_places(f, prec);
    int n_from_places = 0;
    for (auto& pl : places) n_from_places += pl.degree;
    if (n_from_places != f.degree())
        throw DomainError("nf_create: place degrees do not sum to the field degree");
    return std::make_shared<NumberField>(NumberField::Private{}, f, disc, std::move(places),
                                         status, std::move(warning));
}

// Element of E in the power basis 1, theta, ..., theta^(n-1).
class FieldElement {
  public:
    FieldElement() = default;
    FieldElement(FieldPtr field, RatPoly rep)
        : field_(std::move(field)), rep_(std::move(rep)) {
        if (rep_.degree() >= field_->degree())
            rep_ = RatPoly::divmod(rep_, field_->min_poly()).second;
    }
    static FieldElement from_rational(FieldPtr field, const Rat& q) {
        return {std::move(field), RatPoly::constant(q)};
    }
    static FieldElement generator(FieldPtr field) {
        if (field->degree() == 1) {
            // theta is rational: theta = -f(0)
            Rat t = -field->min_poly().coeff(0);
            return from_rational(std::move(field), t);
        }
        return {std::move(field), RatPoly::x()};
    }

    const FieldPtr& field() const { return field_; }
    const RatPoly& rep() const { return rep_; }
    bool is_zero() const { return rep_.is_zero(); }
    bool is_rational() const { return rep_.degree() <= 0; }
    Rat rational_value() const {
        if (!is_rational()) throw DomainError("rational_value of a non-rational element");
        return rep_.coeff(0);
    }
    Rat coeff(size_t i) const { return rep_.coeff(i); }

    friend bool operator==(const FieldElement& a, const FieldElement& b) {
        return a.rep_ == b.rep_;
    }
    friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
        return {a.field_, a.rep_ + b.rep_};
    }
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
        return {a.field_, a.rep_ - b.rep_};
    }
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
        return {a.field_, RatPoly::divmod(a.rep_ * b.rep_, a.field_->min_poly()).second};
    }
    FieldElement operator-() const { return {field_, -rep_}; }

    FieldElement inverse() const {
        if (is_zero()) throw DomainError("inverse of zero");
        // extended Euclid in Q[x]: u*rep + v*f = gcd = const
        RatPoly r0 = field_->min_poly(), r1 = rep_;
        RatPoly s0 = RatPoly::zero(), s1 = RatPoly::constant(Rat(1));
        while (r1.degree() > 0) {
            auto [q, r2] = RatPoly::divmod(r0, r1);
            RatPoly s2 = s0 - q * s1;
            r0 = std::move(r1);
            r1 = std::move(r2);
            s0 = std::move(s1);
            s1 = std::move(s2);
        }
        if (r1.is_zero())
            throw DomainError("inverse: element shares a factor with the minimal polynomial");
        return {field_, Rat(1) / r1.coeff(0) * s1};
    }

    FieldElement pow(unsigned long k) const {
        FieldElement r = from_rational(field_, Rat(1));
        FieldElement base = *this;
        while (k) {
            if (k & 1) r = r * base;
            base = base * base;
            k >>= 1;
        }
        return r;
    }

    // Nm_{E/Q}(x) = Res(f, rep), exact (f monic).
    Rat norm() const {
        if (is_zero()) return Rat(0);
        if (is_rational()) {
            Rat q = rep_.coeff(0);
            Rat r(1);
            for (int i = 0; i < field_->degree(); ++i) r *= q;
            return r;
        }
        return resultant(field_->min_poly(), rep_);
    }

    // lcm of coefficient denominators: x = y / den with y in Z[theta]
    Int denominator() const {
        Int d(1);
        for (const auto& c : rep_.coeffs()) mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), c.get_den().get_mpz_t());
        return d;
    }

    // integer coefficient vector of den * x
    IntVec scaled_integer_coeffs(const Int& den) const {
        IntVec v((size_t)field_->degree(), Int(0));
        for (size_t i = 0; i < v.size(); ++i) {
            Rat c = rep_.coeff(i) * Rat(den);
            v[i] = c.get_num();
        }
        return v;
    }

    // image under the embedding attached to an archimedean place
    BallComplex embed(const ArchPlace& place) const {
        return rep_.evaluate(place.root);
    }

    std::string to_string() const { return rep_.to_string("t"); }

  private:
    FieldPtr field_;
    RatPoly rep_; // degree < n, reduced mod f
};

// A prime ideal (p, g(theta)) above a rational prime passing Dedekind's test.
class PrimeIdealData {
  public:
    PrimeIdealData(FieldPtr field, Int p, RatPoly g, int e, int f_deg)
        : field_(std::move(field)),
          p_(std::move(p)),
          g_(std::move(g)),
          e_(e),
          f_deg_(f_deg),
          cache_(std::make_shared<Cache>()) {}

    const FieldPtr& field() const { return field_; }
    const Int& p() const { return p_; }
    const RatPoly& local_generator() const { return g_; }
    int ramification() const { return e_; }
    int residue_degree() const { return f_deg_; }

    // Nr(P) = p^f
    Int norm() const {
        Int r;
        mpz_pow_ui(r.get_mpz_t(), p_.get_mpz_t(), (unsigned long)f_deg_);
        return r;
    }

    // HNF basis of P^k as a sublattice of Z[theta], memoized.
    const IntMat& power_lattice(int k) const {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        while ((int)cache_->powers.size() < k) {
            if (cache_->powers.empty())
                cache_->powers.push_back(first_power());
            else
                cache_->powers.push_back(next_power(cache_->powers.back()));
        }
        return cache_->powers[(size_t)k - 1];
    }

  private:
    IntMat first_power() const {
        size_t n = (size_t)field_->degree();
        IntMat rows;
        // generators p*theta^j and g(theta)*theta^j
        for (size_t j = 0; j < n; ++j) {
            IntVec row(n, Int(0));
            row[j] = p_;
            rows.push_back(std::move(row));
        }
        FieldElement g(field_, g_);
        FieldElement t = FieldElement::generator(field_);
        FieldElement cur = g;
        for (size_t j = 0; j < n; ++j) {
            rows.push_back(cur.scaled_integer_coeffs(Int(1)));
            cur = cur * t;
        }
        return hnf(std::move(rows), n);
    }

    IntMat next_power(const IntMat& prev) const {
        size_t n = (size_t)field_->degree();
        const IntMat& base = cache_->powers.front();
        IntMat rows;
        for (const auto& a : prev) {
            FieldElement ea(field_, lift_vec(a));
            for (const auto& b : base) {
                FieldElement eb(field_, lift_vec(b));
                rows.push_back((ea * eb).scaled_integer_coeffs(Int(1)));
            }
        }
        return hnf(std::move(rows), n);
    }

    RatPoly lift_vec(const IntVec& v) const {
        std::vector<Rat> c;
        c.reserve(v.size());
        for (const auto& a : v) c.emplace_back(a);
        return RatPoly(std::move(c));
    }

    struct Cache {
        std::mutex mutex;
        std::vector<IntMat> powers;
    };

    FieldPtr field_;
    Int p_;
    RatPoly g_;
    int e_;
    int f_deg_;
    std::shared_ptr<Cache> cache_;
};

// Dedekind's criterion at p for Z[theta]; returns the splitting data or
// throws GoodPrimeRequired.
inline std::vector<PrimeIdealData> split_prime(const FieldPtr& field, const Int& p,
                                               unsigned long seed = 1) {
    const RatPoly& f = field->min_poly();
    auto factors = factor_mod_p(f, p, seed);

    // Dedekind test: with fbar = prod gbar_i^{e_i}, gbar = prod gbar_i,
    // hbar = fbar / gbar, and T = (g*h - f)/p for monic lifts g, h, the prime
    // is good iff gcd(Tbar, gbar, hbar) = 1 in F_p[x].
    ModPoly gbar = ModPoly::constant(Int(1), p);
    for (auto& fac : factors) gbar = gbar * fac.factor;
    ModPoly fbar = ModPoly::from_rat(f, p);
    ModPoly hbar = ModPoly::divmod(fbar, gbar).first;
    RatPoly g_lift = gbar.lift();
    RatPoly h_lift = hbar.lift();
    RatPoly T_num = g_lift * h_lift - f;
    std::vector<Rat> tc;
    for (const auto& c : T_num.coeffs()) tc.push_back(c / Rat(p));
    RatPoly T(std::move(tc));
    if (!T.has_integer_coeffs())
        throw DomainError("split_prime: internal Dedekind lift error");
    ModPoly Tbar = ModPoly::from_rat(T, p);
    ModPoly d = mod_poly_gcd(mod_poly_gcd(Tbar, gbar), hbar);
    if (d.degree() != 0)
        throw GoodPrimeRequired("prime " + p.get_str() +
                                " divides the index [O_E : Z[theta]]; choose another prime");

    std::vector<PrimeIdealData> out;
    int n_check = 0;
    for (auto& fac : factors) {
        out.emplace_back(field, p, fac.factor.lift(), fac.multiplicity, fac.factor.degree());
        n_check += fac.multiplicity * fac.factor.degree();
    }
    if (n_check != field->degree())
        throw DomainError("split_prime: sum e_l f_l != n");
    return out;
}

inline constexpr int kValuationInfinity = INT_MAX;

// v_P(x), exact; +infinity (kValuationInfinity) for x = 0.
// Denominators are handled via v(x) = v(num) - v(den) with den in Z.
inline int valuation(const FieldElement& x, const PrimeIdealData& P) {
    if (x.is_zero()) return kValuationInfinity;
    Int den = x.denominator();
    IntVec num = x.scaled_integer_coeffs(den);

    // v_p(den), then v(den) = e * v_p(den)
    int vden = 0;
    Int d = den;
    while (mpz_divisible_p(d.get_mpz_t(), P.p().get_mpz_t())) {
        d /= P.p();
        ++vden;
    }

    // v of the integral part by successive lattice membership; bounded by
    // e * v_p(Nm(num))
    FieldElement y(x.field(), [&] {
        std::vector<Rat> c;
        for (const auto& a : num) c.emplace_back(a);
        return RatPoly(std::move(c));
    }());
    Rat nm = y.norm();
    Int nm_int = abs(nm.get_num());
    int bound = 0;
    while (mpz_divisible_p(nm_int.get_mpz_t(), P.p().get_mpz_t())) {
        nm_int /= P.p();
        ++bound;
    }
    bound *= P.ramification();

    int v = 0;
    while (v < bound && lattice_contains(P.power_lattice(v + 1), num)) ++v;
    return v - P.ramification() * vden;
}

// |x|_v for a finite place: Nr(P)^(-v_P(x)) as an exact rational.
inline Rat abs_value_finite(const FieldElement& x, const PrimeIdealData& P) {
    if (x.is_zero()) throw DomainError("abs_value_finite of zero");
    int v = valuation(x, P);
    Rat nr(P.norm());
    Rat r(1);
    for (int i = 0; i < (v < 0 ? -v : v); ++i) r *= nr;
    return v < 0 ? r : Rat(1) / r;
}

// |x|_v for an archimedean place: |sigma_v(x)|^{d_v} as a rigorous ball.
inline BallReal abs_value_arch(const FieldElement& x, const ArchPlace& place) {
    BallReal a = x.embed(place).abs();
    return place.degree == 2 ? a * a : a;
}

} // namespace tower

#endif
