#ifndef TOWER_REPORT_HPP
#define TOWER_REPORT_HPP

// Per-level tower reports, the conditional free-rank certificates, and the
// end-to-end driver assembling both into deterministic JSON + text output.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tower/congruence.hpp"
#include "tower/errors.hpp"
#include "tower/geometry.hpp"
#include "tower/group.hpp"
#include "tower/homology.hpp"

namespace tower {

struct TowerConfig {
    Int p = 7;
    int i_min = 1;
    int i_max = 1;
    size_t r_max = 6;
    bool psl_mode = true;
    mpfr_prec_t precision = kDefaultPrec;
    double delta = 0.1;
    size_t quotient_budget = 2'000'000;
    size_t ball_budget = 5'000'000;
    size_t homology_max_index = 10'000; // elimination fill-in grows fast beyond this
    unsigned long seed = 1;
    std::optional<double> c1, c2, delta_m; // quantitative quasi-isometry data, user-supplied
};

struct Certificate {
    std::string kind; // k_free_conditional | k_semifree_conditional
    size_t k = 0;
    std::vector<std::string> hypotheses;
    std::string citation;
};

// k = dim_h1 - 2 when that is >= 1; the systolic-genus hypothesis is always
// recorded as ASSUMED -- nothing here is unconditional.
inline std::optional<Certificate> certificate(size_t dim_h1, bool cusped,
                                              std::optional<double> sysg_heuristic = {}) {
    if (dim_h1 < 3) return std::nullopt;
    Certificate c;
    c.k = dim_h1 - 2;
    c.kind = cusped ? "k_semifree_conditional" : "k_free_conditional";
    c.hypotheses.push_back("ASSUMED: sysg(M) >= " + std::to_string(c.k) +
                           " (systolic genus bound, not verified here)" +
                           (sysg_heuristic
                                ? " [asymptotic heuristic value " + std::to_string(*sysg_heuristic) + "]"
                                : std::string()));
    c.hypotheses.push_back("ASSUMED: the group is the fundamental group of a " +
                           std::string(cusped ? "cusped" : "closed") +
                           " hyperbolic 3-manifold and dim H_1(., F_p) >= k + 2 applies");
    c.citation = cusped ? "k-semifree criterion for cusped manifolds"
                        : "Shalen-Wagreich free-rank criterion";
    return c;
}

struct Theorem2Record {
    CheckVerdict verdict = CheckVerdict::inconclusive;
    std::string note;
    double lhs = 0; // log(k_i)
    double rhs = 0; // (1/2 - delta) * sys_upper (upper endpoint)
};

// log(k_i) >= (1/2 - delta) * geodesic_systole_upper.  The right side uses an
// UPPER bound on the true systole, so a pass is conservative.
inline Theorem2Record theorem2_check(std::optional<size_t> k_i,
                                     const std::optional<BallReal>& sys_upper, double delta) {
    Theorem2Record rec;
    if (!k_i || !sys_upper) {
        rec.note = "insufficient-data";
        return rec;
    }
    if (*k_i == 0) {
        rec.note = "no conditional rank";
        rec.verdict = CheckVerdict::fail;
        return rec;
    }
    mpfr_prec_t prec = sys_upper->precision();
    BallReal lhs = ball_log(BallReal::from_si((long)*k_i, prec));
    BallReal c = BallReal::from_rational(Rat(1, 2), prec) -
                 BallReal::from_endpoints_d(delta, delta, prec);
    BallReal rhs = c * *sys_upper;
    rec.lhs = lhs.lo_d();
    rec.rhs = rhs.hi_d();
    if (rhs.certainly_le(lhs)) rec.verdict = CheckVerdict::pass;
    else if (lhs.certainly_lt(rhs)) rec.verdict = CheckVerdict::fail;
    return rec;
}

struct LevelReport {
    int i = 0;
    Int n_i;
    bool order_via_lift = false;     // order from the kernel lift, quotient not enumerated
    long certified_word_bound = 0;
    std::optional<size_t> word_systole; // absent: > r_max
    std::optional<Word> word_systole_witness;
    std::optional<BallReal> geodesic_systole_upper;
    std::optional<Word> geodesic_witness;
    std::optional<size_t> dim_h1;    // absent: n/a
    std::optional<size_t> k_i;
    std::optional<double> lambda_hat;
    Theorem2Record theorem2;
    std::optional<Certificate> cert;
    size_t claim3_checked = 0;       // members certified at this level
};

struct TowerReport {
    std::string group_name;
    TowerConfig config;
    std::vector<LevelReport> levels;
    std::optional<double> d_hat;
    std::vector<std::string> notes;
};

namespace detail {

inline std::string fmt_double(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

} // namespace detail

inline nlohmann::ordered_json to_json(const TowerReport& R) {
    nlohmann::ordered_json j;
    j["group"] = R.group_name;
    j["config"] = {{"p", R.config.p.get_str()},
                   {"i_min", R.config.i_min},
                   {"i_max", R.config.i_max},
                   {"r_max", R.config.r_max},
                   {"psl_mode", R.config.psl_mode},
                   {"precision", (long)R.config.precision},
                   {"delta", detail::fmt_double(R.config.delta)},
                   {"seed", R.config.seed}};
    if (R.d_hat) j["d_hat"] = detail::fmt_double(*R.d_hat);
    j["levels"] = nlohmann::ordered_json::array();
    for (const auto& L : R.levels) {
        nlohmann::ordered_json lj;
        lj["i"] = L.i;
        lj["n_i"] = L.n_i.get_str();
        lj["order_via_lift"] = L.order_via_lift;
        lj["certified_word_bound"] = L.certified_word_bound;
        lj["word_systole"] =
            L.word_systole ? nlohmann::ordered_json(*L.word_systole)
                           : nlohmann::ordered_json(">" + std::to_string(R.config.r_max));
        if (L.word_systole_witness) lj["word_systole_witness"] = L.word_systole_witness->to_string();
        if (L.geodesic_systole_upper) {
            lj["geodesic_systole_upper"] = detail::fmt_double(L.geodesic_systole_upper->hi_d());
            lj["geodesic_witness"] = L.geodesic_witness->to_string();
        } else {
            lj["geodesic_systole_upper"] = "no witness <= " + std::to_string(R.config.r_max);
        }
        lj["dim_h1"] = L.dim_h1 ? nlohmann::ordered_json(*L.dim_h1) : nlohmann::ordered_json("n/a");
        if (L.lambda_hat) lj["lambda_hat"] = detail::fmt_double(*L.lambda_hat);
        if (L.k_i) lj["conditional_free_rank"] = *L.k_i;
        lj["theorem2_check"] = {{"verdict", to_string(L.theorem2.verdict)},
                                {"note", L.theorem2.note},
                                {"lhs_log_k", detail::fmt_double(L.theorem2.lhs)},
                                {"rhs", detail::fmt_double(L.theorem2.rhs)}};
        if (L.cert) {
            lj["certificate"] = {{"kind", L.cert->kind},
                                 {"k", L.cert->k},
                                 {"hypotheses", L.cert->hypotheses},
                                 {"citation", L.cert->citation}};
        }
        lj["claim3_members_certified"] = L.claim3_checked;
        j["levels"].push_back(std::move(lj));
    }
    j["notes"] = R.notes;
    return j;
}

inline std::string to_text(const TowerReport& R) {
    std::ostringstream os;
    os << "tower report: " << R.group_name << "  (p = " << R.config.p.get_str() << ", i = "
       << R.config.i_min << ".." << R.config.i_max << ", R_max = " << R.config.r_max << ")\n";
    for (const auto& L : R.levels) {
        os << "level " << L.i << ": n_i = " << L.n_i.get_str()
           << (L.order_via_lift ? " (kernel lift)" : "") << "\n";
        os << "  certified word bound >= " << L.certified_word_bound << "\n";
        if (L.word_systole)
            os << "  word systole = " << *L.word_systole << "  [" << L.word_systole_witness->to_string()
               << "]\n";
        else
            os << "  word systole > " << R.config.r_max << "\n";
        if (L.geodesic_systole_upper)
            os << "  geodesic systole upper bound = " << detail::fmt_double(L.geodesic_systole_upper->hi_d())
               << "  [" << L.geodesic_witness->to_string() << "]\n";
        else
            os << "  geodesic systole: no loxodromic witness <= " << R.config.r_max << "\n";
        if (L.dim_h1) os << "  dim H_1(Gamma_i, F_p) = " << *L.dim_h1;
        else os << "  dim H_1: n/a";
        if (L.k_i) os << "  (conditional free rank k = " << *L.k_i << ")";
        os << "\n";
        os << "  theorem-2 style check: " << to_string(L.theorem2.verdict)
           << (L.theorem2.note.empty() ? "" : " (" + L.theorem2.note + ")") << "\n";
        if (L.cert) os << "  certificate: " << L.cert->kind << ", k = " << L.cert->k << " (conditional)\n";
    }
    if (R.d_hat) os << "empirical growth exponent d_hat = " << detail::fmt_double(*R.d_hat) << "\n";
    for (auto& n : R.notes) os << "note: " << n << "\n";
    return os.str();
}

// End-to-end driver.  Deterministic given the config; errors from any module
// are re-thrown annotated with the level and operation.
inline TowerReport run_tower(const GroupSpec& G, const TowerConfig& cfg) {
    TowerReport R;
    R.group_name = G.name;
    R.config = cfg;

    auto annotate = [](const std::string& where, const std::exception& e) -> std::string {
        return where + ": " + e.what();
    };

    BallEnumeration ball = bfs_ball(G, cfg.r_max, cfg.psl_mode, cfg.ball_budget);
    if (!ball.complete) R.notes.push_back("ball enumeration truncated by budget; bounds weakened");

    std::vector<Int> orders;
    bool prev_is_last_enumerated = false;
    Int lifted_next(0);

    for (int i = cfg.i_min; i <= cfg.i_max; ++i) {
        LevelReport L;
        L.i = i;
        CongruenceLevel level = [&] {
            try {
                return make_level(G, cfg.p, i, cfg.seed);
            } catch (const Error& e) {
                throw DomainError(annotate("level " + std::to_string(i) + " make_level", e));
            }
        }();

        std::optional<FiniteQuotient> q;
        bool skip_enumeration = prev_is_last_enumerated && lifted_next != 0 &&
                                lifted_next > Int((unsigned long)cfg.quotient_budget);
        try {
            if (skip_enumeration) throw BudgetExceeded("known order exceeds the budget");
            q.emplace(FiniteQuotient::compute(G, level, cfg.quotient_budget));
            L.n_i = q->order();
        } catch (const BudgetExceeded&) {
            if (prev_is_last_enumerated && lifted_next != 0) {
                L.n_i = lifted_next;
                L.order_via_lift = true;
                R.notes.push_back("level " + std::to_string(i) +
                                  ": order via kernel lift; quotient not enumerated");
            } else {
                throw BudgetExceeded("level " + std::to_string(i) +
                                     ": quotient too large and no previous level to lift from");
            }
        }
        orders.push_back(L.n_i);

        if (q) {
            try {
                LiftedOrder lo = quotient_order_lifted(G, *q);
                lifted_next = lo.order;
                prev_is_last_enumerated = true;
            } catch (const Error&) {
                prev_is_last_enumerated = false; // next modulus beyond the flat-ring limit
            }
        } else {
            prev_is_last_enumerated = false;
        }

        L.certified_word_bound = certified_word_bound(G, level, cfg.precision);

        WordSystoleResult ws = word_systole(G, level, cfg.r_max, cfg.psl_mode, &ball);
        if (ws.found) {
            L.word_systole = ws.value;
            L.word_systole_witness = ws.witness;
        }

        // certify every member found in the ball (Claim-3 chain); a
        // falsification propagates and the CLI maps it to exit code 1
        for (auto& [key, entry] : ball.elements) {
            (void)key;
            if (entry.length == 0) continue;
            if (!membership(entry.matrix, level, cfg.psl_mode)) continue;
            // H(-gamma) = H(gamma), so either lift of a psl member works
            claim3_certificate(entry.matrix, level, cfg.precision);
            ++L.claim3_checked;
        }

        GeodesicSystoleResult gs =
            geodesic_systole_upper(G, level, cfg.r_max, cfg.psl_mode, cfg.precision, &ball);
        if (gs.found) {
            L.geodesic_systole_upper = gs.length;
            L.geodesic_witness = gs.witness;
        }

        if (G.homology_enabled() && q && q->size() > cfg.homology_max_index) {
            R.notes.push_back("level " + std::to_string(i) + ": dim_h1 n/a, index " +
                              L.n_i.get_str() + " exceeds homology budget " +
                              std::to_string(cfg.homology_max_index));
        } else if (G.homology_enabled() && q) {
            try {
                HomologyResult h = dim_h1_mod_p(G, *q);
                L.dim_h1 = h.dim_h1;
                L.k_i = h.dim_h1 >= 2 ? h.dim_h1 - 2 : 0;
                std::optional<double> sysg_hint;
                if (L.geodesic_systole_upper)
                    sysg_hint = sysg_lower_bound(*L.geodesic_systole_upper, cfg.delta).lo_d();
                if (*L.k_i >= 1) L.cert = certificate(h.dim_h1, G.cusped, sysg_hint);
            } catch (const Error& e) {
                throw DomainError(annotate("level " + std::to_string(i) + " homology", e));
            }
        }

        L.theorem2 = theorem2_check(L.k_i, L.geodesic_systole_upper, cfg.delta);
        R.levels.push_back(std::move(L));
    }

    if (orders.size() >= 2) {
        auto est = estimate_dim_growth(orders, cfg.p);
        if (est.stabilized) R.d_hat = *est.stabilized;
        else if (!est.per_step.empty()) R.d_hat = est.per_step.back();
        if (R.d_hat) {
            for (auto& L : R.levels)
                if (L.dim_h1)
                    L.lambda_hat = (double)*L.dim_h1 /
                                   std::exp((*R.d_hat - 1.0) * L.i *
                                            std::log(mpz_get_d(cfg.p.get_mpz_t())));
        }
    }
    if (!G.homology_enabled())
        R.notes.push_back("no relators given: homology n/a, certificates absent");
    return R;
}

} // namespace tower

#endif
