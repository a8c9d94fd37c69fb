#ifndef TOWER_CONGRUENCE_HPP
#define TOWER_CONGRUENCE_HPP

// The congruence filtration Gamma_i: valuation-based membership, the finite
// quotients Q_i = Gamma/Gamma_i over the residue ring Z[x]/(p^i, f), the
// height certificate for members, and word-systole bounds.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tower/errors.hpp"
#include "tower/group.hpp"
#include "tower/heights.hpp"
#include "tower/number_field.hpp"

namespace tower {

struct CongruenceLevel {
    Int p;
    int i = 1;
    std::vector<PrimeIdealData> primes_above_p;
    const GroupSpec* group = nullptr;

    Int modulus() const {
        Int m;
        mpz_pow_ui(m.get_mpz_t(), p.get_mpz_t(), (unsigned long)i);
        return m;
    }
};

// Builds the level, checking the invariants: p prime and good (Dedekind),
// p not among the group's denominator primes, and the torsion-free regime
// p odd or (p = 2 and i >= 2).
inline CongruenceLevel make_level(const GroupSpec& G, const Int& p, int i,
                                  unsigned long seed = 1) {
    if (i < 1) throw DomainError("congruence level must have i >= 1");
    if (mpz_probab_prime_p(p.get_mpz_t(), 32) == 0)
        throw DomainError("congruence level: p = " + p.get_str() + " is not prime");
    if (G.denominator_primes.count(p))
        throw DomainError("congruence level: p = " + p.get_str() +
                          " divides a generator denominator (p must avoid S)");
    if (p == 2 && i < 2)
        throw DomainError("torsion-free regime requires p odd or (p = 2, i >= 2)");
    CongruenceLevel L;
    L.p = p;
    L.i = i;
    L.primes_above_p = split_prime(G.field, p, seed); // throws GoodPrimeRequired if bad
    L.group = &G;
    return L;
}

// gamma in Gamma_i iff at every prime P_l above p:
//   v(a-1) >= i e_l,  v(b) >= i e_l,  v(c) >= i e_l,  v(d-1) >= i e_l.
// With psl_reading the -identity coset is accepted as well.
inline bool membership(const GroupMatrix& gamma, const CongruenceLevel& L,
                       bool psl_reading = false) {
    const FieldPtr& K = gamma.a().field();
    auto check = [&](int sign) {
        FieldElement s = FieldElement::from_rational(K, Rat(sign));
        const FieldElement entries[4] = {gamma.a() - s, gamma.b(), gamma.c(), gamma.d() - s};
        for (const auto& P : L.primes_above_p) {
            int need = L.i * P.ramification();
            for (const auto& e : entries) {
                if (e.is_zero()) continue;
                if (mpz_divisible_p(e.denominator().get_mpz_t(), L.p.get_mpz_t()))
                    throw DomainError("membership: entry has a denominator at p");
                if (valuation(e, P) < need) return false;
            }
        }
        return true;
    };
    if (check(1)) return true;
    return psl_reading && check(-1);
}

// |SL2(O/p^i O)| = prod over primes above p of |SL2(R_l)| where R_l is local
// with residue field F_q, q = p^{f_l}, and |R_l| = q^m, m = i*e_l:
// |SL2(R_l)| = q^{3(m-1)} * q (q^2 - 1).
inline Int ambient_sl2_order(const CongruenceLevel& L) {
    Int total(1);
    for (const auto& P : L.primes_above_p) {
        Int q = P.norm();
        unsigned long m = (unsigned long)(L.i * P.ramification());
        Int qm1;
        mpz_pow_ui(qm1.get_mpz_t(), q.get_mpz_t(), 3 * (m - 1));
        total *= qm1 * q * (q * q - 1);
    }
    return total;
}

// --- the finite quotient ------------------------------------------------------

namespace detail {

// Residue ring Z[x]/(m, f mod m) with m = p^i small enough for uint64 ops.
struct ResidueRing {
    uint64_t m = 0;
    std::vector<uint64_t> f; // monic, coefficients mod m, length n+1
    size_t n = 0;

    static ResidueRing make(const FieldPtr& K, const Int& modulus) {
        if (!modulus.fits_ulong_p() || modulus.get_ui() > (1ULL << 20))
            throw BudgetExceeded("residue ring modulus " + modulus.get_str() +
                                 " beyond the desk-scale limit 2^20");
        ResidueRing R;
        R.m = modulus.get_ui();
        R.n = (size_t)K->degree();
        R.f.resize(R.n + 1);
        for (size_t j = 0; j <= R.n; ++j) {
            Int c = mod_reduce(K->min_poly().coeff(j).get_num(), modulus);
            R.f[j] = c.get_ui();
        }
        return R;
    }

    using Elem = std::vector<uint64_t>; // length n, coefficients mod m

    void mul(const uint64_t* a, const uint64_t* b, uint64_t* out) const {
        std::vector<uint64_t> t(2 * n - 1, 0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) t[i + j] = (t[i + j] + a[i] * b[j]) % m;
        // reduce by the monic minimal polynomial
        for (size_t k = 2 * n - 2; k + 1 > n; --k) {
            uint64_t c = t[k];
            if (c == 0) continue;
            t[k] = 0;
            for (size_t j = 0; j < n; ++j) {
                size_t idx = k - n + j;
                t[idx] = (t[idx] + c * (m - f[j] % m)) % m;
            }
        }
        for (size_t j = 0; j < n; ++j) out[j] = t[j];
    }
    void addmul_into(uint64_t* acc, const uint64_t* a, const uint64_t* b) const {
        std::vector<uint64_t> t(n);
        mul(a, b, t.data());
        for (size_t j = 0; j < n; ++j) acc[j] = (acc[j] + t[j]) % m;
    }
};

struct MatHash {
    size_t operator()(const std::vector<uint64_t>& v) const {
        size_t h = 1469598103934665603ULL;
        for (uint64_t x : v) {
            h ^= (size_t)x;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

} // namespace detail

class FiniteQuotient {
  public:
    using Mat = std::vector<uint64_t>; // 4 ring elements flattened, length 4n

    const CongruenceLevel& level() const { return level_; }
    const detail::ResidueRing& ring() const { return ring_; }
    Int order() const { return Int((unsigned long)elements_.size()); }
    size_t size() const { return elements_.size(); }
    const std::vector<Mat>& elements() const { return elements_; }
    const std::vector<Mat>& letter_images() const { return letter_images_; }
    size_t num_letters() const { return letter_images_.size(); }

    size_t index_of(const Mat& m) const { return index_.at(m); }

    Mat identity_mat() const {
        Mat id(4 * ring_.n, 0);
        id[0] = 1;
        id[3 * ring_.n] = 1;
        return id;
    }

    Mat mat_mul(const Mat& x, const Mat& y) const {
        size_t n = ring_.n;
        Mat r(4 * n, 0);
        // blocks: 0 = a, 1 = b, 2 = c, 3 = d
        ring_.addmul_into(&r[0], &x[0], &y[0]);
        ring_.addmul_into(&r[0], &x[n], &y[2 * n]);
        ring_.addmul_into(&r[n], &x[0], &y[n]);
        ring_.addmul_into(&r[n], &x[n], &y[3 * n]);
        ring_.addmul_into(&r[2 * n], &x[2 * n], &y[0]);
        ring_.addmul_into(&r[2 * n], &x[3 * n], &y[2 * n]);
        ring_.addmul_into(&r[3 * n], &x[2 * n], &y[n]);
        ring_.addmul_into(&r[3 * n], &x[3 * n], &y[3 * n]);
        return r;
    }

    // adjugate; valid because all our matrices have determinant 1 in the ring
    Mat mat_inv(const Mat& x) const {
        size_t n = ring_.n;
        Mat r(4 * n, 0);
        uint64_t m = ring_.m;
        for (size_t j = 0; j < n; ++j) {
            r[j] = x[3 * n + j];
            r[n + j] = (m - x[n + j]) % m;
            r[2 * n + j] = (m - x[2 * n + j]) % m;
            r[3 * n + j] = x[j];
        }
        return r;
    }

    // reduction of a group matrix into the residue ring
    Mat reduce(const GroupMatrix& g) const {
        Int modulus = level_.modulus();
        Mat r(4 * ring_.n, 0);
        const FieldElement* entries[4] = {&g.a(), &g.b(), &g.c(), &g.d()};
        for (size_t blk = 0; blk < 4; ++blk) {
            const FieldElement& e = *entries[blk];
            Int den = e.denominator();
            if (mpz_divisible_p(den.get_mpz_t(), level_.p.get_mpz_t()))
                throw DomainError("reduce: entry has a denominator at p");
            Int dinv = mod_inverse(den, modulus);
            IntVec v = e.scaled_integer_coeffs(den);
            for (size_t j = 0; j < ring_.n; ++j)
                r[blk * ring_.n + j] = mod_reduce(v[j] * dinv, modulus).get_ui();
        }
        return r;
    }

    bool reduces_to_identity(const GroupMatrix& g) const { return reduce(g) == identity_mat(); }

    // act on a coset (= element index) by a letter of X
    size_t act(size_t coset, size_t letter) const {
        return index_.at(mat_mul(elements_[coset], letter_images_[letter]));
    }

    // Closure of the generator images under right multiplication.  Raises
    // BudgetExceeded (with the partial count in the message) rather than
    // reporting a wrong order.
    static FiniteQuotient compute(const GroupSpec& G, CongruenceLevel level,
                                  size_t budget = 2'000'000) {
        FiniteQuotient Q(std::move(level));
        Q.ring_ = detail::ResidueRing::make(G.field, Q.level_.modulus());
        for (auto& l : G.symmetric_letters())
            Q.letter_images_.push_back(Q.reduce(G.letter_matrix(l)));

        Mat id = Q.identity_mat();
        Q.index_.emplace(id, 0);
        Q.elements_.push_back(std::move(id));
        for (size_t head = 0; head < Q.elements_.size(); ++head) {
            for (const Mat& img : Q.letter_images_) {
                Mat next = Q.mat_mul(Q.elements_[head], img);
                if (Q.index_.count(next)) continue;
                if (Q.elements_.size() >= budget)
                    throw BudgetExceeded("finite_quotient budget exceeded; partial count " +
                                         std::to_string(Q.elements_.size()));
                Q.index_.emplace(next, Q.elements_.size());
                Q.elements_.push_back(std::move(next));
            }
        }
        return Q;
    }

  private:
    explicit FiniteQuotient(CongruenceLevel level) : level_(std::move(level)) {}

    CongruenceLevel level_;
    detail::ResidueRing ring_;
    std::vector<Mat> letter_images_;
    std::vector<Mat> elements_;
    std::unordered_map<Mat, size_t, detail::MatHash> index_;
};

// --- order of the next level without enumerating it ---------------------------

// ker(Q_{i+1} -> Q_i) is elementary abelian: (I + p^i A)(I + p^i B) =
// I + p^i (A + B) mod p^{i+1}.  It equals the image of Gamma_i, which is
// generated by the Schreier generators of Gamma_i, so its order is p^rank of
// the F_p-span of their Lie vectors (s - I)/p^i.  This yields the exact
// n_{i+1} = n_i * p^rank at a cost linear in n_i.
struct LiftedOrder {
    Int order;     // n_{i+1}
    int kernel_dim; // rank of the kernel as an F_p vector space
};

inline LiftedOrder quotient_order_lifted(const GroupSpec& G, const FiniteQuotient& Qi) {
    const CongruenceLevel& L = Qi.level();
    CongruenceLevel L_next = make_level(G, L.p, L.i + 1);
    auto ring_next = detail::ResidueRing::make(G.field, L_next.modulus());
    uint64_t pi = 1, p_ui = L.p.get_ui();
    for (int k = 0; k < L.i; ++k) pi *= p_ui;

    // quotient-like scratch structure over p^{i+1} just for matrix ops
    struct Ops {
        const detail::ResidueRing& R;
        using Mat = FiniteQuotient::Mat;
        Mat mul(const Mat& x, const Mat& y) const {
            size_t n = R.n;
            Mat r(4 * n, 0);
            R.addmul_into(&r[0], &x[0], &y[0]);
            R.addmul_into(&r[0], &x[n], &y[2 * n]);
            R.addmul_into(&r[n], &x[0], &y[n]);
            R.addmul_into(&r[n], &x[n], &y[3 * n]);
            R.addmul_into(&r[2 * n], &x[2 * n], &y[0]);
            R.addmul_into(&r[2 * n], &x[3 * n], &y[2 * n]);
            R.addmul_into(&r[3 * n], &x[2 * n], &y[n]);
            R.addmul_into(&r[3 * n], &x[3 * n], &y[3 * n]);
            return r;
        }
        Mat inv(const Mat& x) const {
            size_t n = R.n;
            Mat r(4 * n, 0);
            for (size_t j = 0; j < n; ++j) {
                r[j] = x[3 * n + j];
                r[n + j] = (R.m - x[n + j]) % R.m;
                r[2 * n + j] = (R.m - x[2 * n + j]) % R.m;
                r[3 * n + j] = x[j];
            }
            return r;
        }
    } ops{ring_next};

    // lifted letter images mod p^{i+1}
    std::vector<FiniteQuotient::Mat> letter_lifts;
    {
        // reuse the reduction logic via a throwaway ring: entries of the
        // generators reduced mod p^{i+1}
        Int modulus = L_next.modulus();
        auto letters = G.symmetric_letters();
        for (auto& l : letters) {
            GroupMatrix g = G.letter_matrix(l);
            FiniteQuotient::Mat r(4 * ring_next.n, 0);
            const FieldElement* entries[4] = {&g.a(), &g.b(), &g.c(), &g.d()};
            for (size_t blk = 0; blk < 4; ++blk) {
                Int den = entries[blk]->denominator();
                Int dinv = mod_inverse(den, modulus);
                IntVec v = entries[blk]->scaled_integer_coeffs(den);
                for (size_t j = 0; j < ring_next.n; ++j)
                    r[blk * ring_next.n + j] = mod_reduce(v[j] * dinv, modulus).get_ui();
            }
            letter_lifts.push_back(std::move(r));
        }
    }

    // transversal lifts, one per coset, following the discovery order of Qi
    size_t n_cosets = Qi.size();
    size_t dim4n = 4 * ring_next.n;
    std::vector<FiniteQuotient::Mat> lifts(n_cosets);
    {
        FiniteQuotient::Mat id(dim4n, 0);
        id[0] = 1;
        id[3 * ring_next.n] = 1;
        lifts[0] = std::move(id);
        std::vector<bool> have(n_cosets, false);
        have[0] = true;
        std::deque<size_t> queue{0};
        while (!queue.empty()) {
            size_t c = queue.front();
            queue.pop_front();
            for (size_t li = 0; li < Qi.num_letters(); ++li) {
                size_t d = Qi.act(c, li);
                if (have[d]) continue;
                have[d] = true;
                lifts[d] = ops.mul(lifts[c], letter_lifts[li]);
                queue.push_back(d);
            }
        }
    }

    // F_p-span of the Lie vectors of the Schreier generators (positive
    // letters suffice: even indices in the symmetric letter order)
    std::vector<std::vector<uint64_t>> pivots; // reduced rows over F_p
    auto add_to_span = [&](std::vector<uint64_t> v) {
        // rows are kept in insertion order with a leading 1 at their pivot;
        // each row was reduced against all earlier ones, so one pass suffices
        for (auto& row : pivots) {
            size_t pivot_col = 0;
            while (pivot_col < row.size() && row[pivot_col] == 0) ++pivot_col;
            if (pivot_col < v.size() && v[pivot_col] != 0) {
                uint64_t f = v[pivot_col];
                for (size_t j = 0; j < v.size(); ++j)
                    v[j] = (v[j] + (p_ui - f) * row[j]) % p_ui;
            }
        }
        size_t lead = 0;
        while (lead < v.size() && v[lead] == 0) ++lead;
        if (lead == v.size()) return;
        uint64_t inv = 1;
        // inverse of v[lead] mod p by Fermat
        {
            uint64_t b = v[lead], e = p_ui - 2, r = 1;
            while (e) {
                if (e & 1) r = r * b % p_ui;
                b = b * b % p_ui;
                e >>= 1;
            }
            inv = r;
        }
        for (auto& x : v) x = x * inv % p_ui;
        pivots.push_back(std::move(v));
    };

    int max_dim = 3 * (int)ring_next.n; // dim of sl2 over O/p
    for (size_t c = 0; c < n_cosets && (int)pivots.size() < max_dim; ++c) {
        for (size_t li = 0; li < Qi.num_letters(); li += 2) { // positive letters
            size_t d = Qi.act(c, li);
            FiniteQuotient::Mat s = ops.mul(ops.mul(lifts[c], letter_lifts[li]), ops.inv(lifts[d]));
            // Lie vector: (s - I)/p^i mod p
            std::vector<uint64_t> v(dim4n);
            FiniteQuotient::Mat id(dim4n, 0);
            id[0] = 1;
            id[3 * ring_next.n] = 1;
            bool nonzero = false;
            for (size_t j = 0; j < dim4n; ++j) {
                uint64_t diff = (s[j] + ring_next.m - id[j]) % ring_next.m;
                if (diff % pi != 0)
                    throw DomainError("quotient_order_lifted: Schreier generator not in the kernel");
                v[j] = (diff / pi) % p_ui;
                if (v[j]) nonzero = true;
            }
            if (nonzero) add_to_span(std::move(v));
            if ((int)pivots.size() >= max_dim) break;
        }
    }

    LiftedOrder out;
    out.kernel_dim = (int)pivots.size();
    Int pk;
    mpz_pow_ui(pk.get_mpz_t(), L.p.get_mpz_t(), (unsigned long)out.kernel_dim);
    out.order = Qi.order() * pk;
    return out;
}

// --- certificates and systoles -------------------------------------------------

// Lower bound ceil((n i log p + log C3) / log C4) on sys(Gamma_i, X), with
// C3 = 4^{-#S_inf} and C4 = 4^{#S_inf} max_{g in X} H(g).  Rounding uses the
// interval lower bound, so the result is a true certificate.
inline long certified_word_bound(const GroupSpec& G, const CongruenceLevel& L,
                                 mpfr_prec_t prec = kDefaultPrec) {
    size_t s_inf = G.field->num_arch_places();
    int n = G.field->degree();

    BallReal max_h = BallReal::from_si(1, prec);
    for (auto& [name, M] : G.generators) {
        (void)name;
        max_h = ball_max(max_h, height_matrix(M, prec).total);
        max_h = ball_max(max_h, height_matrix(M.inverse(), prec).total);
    }
    BallReal four = BallReal::from_si(4, prec);
    BallReal c4 = ball_pow_ui(four, (unsigned long)s_inf) * max_h;
    BallReal log_c4 = ball_log(c4);
    BallReal log_c3 = -(BallReal::from_si((long)s_inf, prec) * ball_log(four));
    BallReal log_p = ball_log(BallReal::from_rational(Rat(L.p), prec));
    BallReal numer = BallReal::from_si((long)n * L.i, prec) * log_p + log_c3;
    BallReal bound = numer / log_c4;

    detail::Mpf c(prec);
    mpfr_ceil(c.get(), bound.lo());
    long v = mpfr_get_si(c.get(), MPFR_RNDD);
    return v < 0 ? 0 : v;
}

struct WordSystoleResult {
    bool found = false;
    size_t value = 0;        // min d_X(1, gamma) over nontrivial members in the ball
    Word witness;
    GroupMatrix witness_matrix;
    bool psl_coset = false;  // witness reduces to -identity rather than +identity
    size_t r_max = 0;
};

// Exact minimum of d_X(1, gamma) over nontrivial gamma in Gamma_i within the
// radius-R ball; "not found" means the systole exceeds R.
inline WordSystoleResult word_systole(const GroupSpec& G, const CongruenceLevel& L,
                                      size_t r_max, bool psl_mode = true,
                                      const BallEnumeration* precomputed = nullptr) {
    WordSystoleResult res;
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
        if (res.found && entry.length >= res.value) continue;
        bool plus = membership(entry.matrix, L, false);
        bool member = plus || (psl_mode && membership(entry.matrix, L, true));
        if (!member) continue;
        // in psl_mode the ball may store -gamma; either lift witnesses the coset
        res.found = true;
        res.value = entry.length;
        res.witness = entry.witness;
        res.witness_matrix = entry.matrix;
        res.psl_coset = !plus;
    }
    return res;
}

struct Claim3Certificate {
    BallReal height;   // enclosure of H(gamma)
    Rat threshold;     // 4^{-#S_inf} p^{n i}, exact
    bool verified;
    mpfr_prec_t precision;
};

// H(gamma) >= 4^{-#S_inf} p^{n i} for nontrivial gamma in Gamma_i.
// Throws FalsifiedInvariant if the inequality is disproved (which would
// contradict the underlying theory) and PrecisionCapExceeded if undecidable.
inline Claim3Certificate claim3_certificate(const GroupMatrix& gamma, const CongruenceLevel& L,
                                            mpfr_prec_t prec = kDefaultPrec,
                                            mpfr_prec_t cap = kPrecCap) {
    if (gamma.is_identity())
        throw DomainError("claim3_certificate: gamma must be nontrivial");
    const GroupSpec& G = *L.group;
    size_t s_inf = G.field->num_arch_places();
    int n = G.field->degree();

    Rat threshold(1);
    Rat pq(L.p);
    for (int k = 0; k < n * L.i; ++k) threshold *= pq;
    for (size_t k = 0; k < s_inf; ++k) threshold /= 4;

    // exact path: decides boundary cases H(gamma) = threshold outright
    if (auto exact = height_matrix(gamma, prec).exact) {
        if (*exact >= threshold)
            return {BallReal::from_rational(*exact, prec), threshold, true, prec};
        throw FalsifiedInvariant("height certificate failed: H(gamma) < threshold for " +
                                 gamma.to_string());
    }

    for (mpfr_prec_t p = prec; p <= cap; p *= 2) {
        BallReal h = height_matrix(gamma, p).total;
        if (h.certainly_ge(threshold)) return {h, threshold, true, p};
        if (h.certainly_lt(threshold))
            throw FalsifiedInvariant("height certificate failed: H(gamma) < threshold for " +
                                     gamma.to_string());
    }
    throw PrecisionCapExceeded("claim3_certificate: undecided at the precision cap");
}

struct DimGrowthEstimate {
    std::vector<double> per_step;        // log_p(n_{i+1}/n_i)
    std::optional<double> stabilized;    // last value if the final two agree
    bool degenerate = false;             // constant orders
};

// Empirical estimate of dim(G) from consecutive quotient orders; never a
// certificate.
inline DimGrowthEstimate estimate_dim_growth(const std::vector<Int>& orders, const Int& p) {
    if (orders.size() < 2)
        throw DomainError("estimate_dim_growth needs at least two levels");
    DimGrowthEstimate est;
    double logp = std::log(mpz_get_d(p.get_mpz_t()));
    for (size_t k = 0; k + 1 < orders.size(); ++k) {
        Rat ratio = Rat(orders[k + 1]) / Rat(orders[k]);
        double d = std::log(ratio.get_d()) / logp;
        est.per_step.push_back(d);
    }
    bool all_one = true;
    for (size_t k = 0; k + 1 < orders.size(); ++k)
        if (orders[k + 1] != orders[k]) all_one = false;
    if (all_one) est.degenerate = true;
    if (est.per_step.size() >= 2 &&
        std::abs(est.per_step.back() - est.per_step[est.per_step.size() - 2]) < 1e-9)
        est.stabilized = est.per_step.back();
    if (est.per_step.size() == 1) est.stabilized = est.per_step.back();
    return est;
}

} // namespace tower

#endif
