#ifndef TOWER_HOMOLOGY_HPP
#define TOWER_HOMOLOGY_HPP

// dim_{F_p} H_1(Gamma_i, F_p) by Reidemeister--Schreier: the coset table of
// the finite quotient doubles as the Schreier graph, the subgroup is free on
// the non-tree Schreier generators, and the relator conjugates abelianize to
// a sparse matrix over F_p whose corank is the answer.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "tower/congruence.hpp"
#include "tower/errors.hpp"
#include "tower/group.hpp"

namespace tower {

struct CosetTable {
    size_t n_cosets = 0;
    size_t n_letters = 0;                       // symmetric letters, positive at even indices
    std::vector<std::vector<uint32_t>> action;  // action[letter][coset]
    std::vector<uint32_t> tree_parent;          // BFS tree; root 0 has parent 0
    std::vector<uint32_t> tree_letter;          // letter labelling the tree edge into a coset

    size_t act(size_t coset, size_t letter) const { return action[letter][coset]; }
};

// Right-multiplication action of the generators on Gamma_i\Gamma, read off
// the finite quotient.  Each letter must act by a bijection.
inline CosetTable coset_table(const FiniteQuotient& Q) {
    CosetTable T;
    T.n_cosets = Q.size();
    T.n_letters = Q.num_letters();
    T.action.assign(T.n_letters, std::vector<uint32_t>(T.n_cosets, 0));
    for (size_t li = 0; li < T.n_letters; ++li) {
        std::vector<bool> hit(T.n_cosets, false);
        for (size_t c = 0; c < T.n_cosets; ++c) {
            size_t d = Q.act(c, li);
            T.action[li][c] = (uint32_t)d;
            if (hit[d]) throw DomainError("coset_table: letter action is not a bijection");
            hit[d] = true;
        }
    }
    T.tree_parent.assign(T.n_cosets, 0);
    T.tree_letter.assign(T.n_cosets, 0);
    std::vector<bool> seen(T.n_cosets, false);
    seen[0] = true;
    std::deque<size_t> queue{0};
    size_t reached = 1;
    while (!queue.empty()) {
        size_t c = queue.front();
        queue.pop_front();
        for (size_t li = 0; li < T.n_letters; ++li) {
            size_t d = T.action[li][c];
            if (seen[d]) continue;
            seen[d] = true;
            T.tree_parent[d] = (uint32_t)c;
            T.tree_letter[d] = (uint32_t)li;
            queue.push_back(d);
            ++reached;
        }
    }
    if (reached != T.n_cosets)
        throw DomainError("coset_table: Schreier graph is not connected");
    return T;
}

struct HomologyResult {
    Int p;
    int level = 0;
    size_t index = 0;          // [Gamma : Gamma_i]
    size_t schreier_rank = 0;  // n(g-1)+1, the free rank of Gamma_i
    size_t relator_rank = 0;   // rank of the abelianized relator matrix over F_p
    size_t dim_h1 = 0;         // schreier_rank - relator_rank
};

namespace detail {

// Sparse row over F_p, kept sorted by column.
using SparseRow = std::vector<std::pair<uint32_t, uint64_t>>;

inline size_t sparse_rank_mod_p(std::vector<std::map<uint32_t, uint64_t>> rows, uint64_t p) {
    auto inv_mod = [p](uint64_t a) {
        uint64_t r = 1, b = a % p, e = p - 2;
        while (e) {
            if (e & 1) r = r * b % p;
            b = b * b % p;
            e >>= 1;
        }
        return r;
    };
    // min-weight pivoting; the heap holds (weight, row) lazily, entries with
    // stale weights are re-pushed on pop, ties break by row index so the
    // elimination order is deterministic
    std::priority_queue<std::pair<size_t, size_t>, std::vector<std::pair<size_t, size_t>>,
                        std::greater<>>
        heap;
    std::unordered_map<uint32_t, std::vector<size_t>> col_rows; // may hold stale row ids
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].empty()) continue;
        heap.emplace(rows[i].size(), i);
        for (auto& [c, v] : rows[i]) {
            (void)v;
            col_rows[c].push_back(i);
        }
    }
    std::vector<bool> used(rows.size(), false);
    size_t rank = 0;
    while (!heap.empty()) {
        auto [w, best] = heap.top();
        heap.pop();
        if (used[best] || rows[best].empty()) continue;
        if (rows[best].size() != w) { // stale weight: reinsert with the current one
            heap.emplace(rows[best].size(), best);
            continue;
        }
        used[best] = true;
        ++rank;
        uint32_t col = rows[best].begin()->first;
        uint64_t inv = inv_mod(rows[best].begin()->second);
        for (auto& [c, v] : rows[best]) v = v * inv % p;
        const auto& prow = rows[best];
        auto hit = col_rows.find(col);
        if (hit == col_rows.end()) continue;
        std::vector<size_t> targets = std::move(hit->second);
        col_rows.erase(hit);
        for (size_t i : targets) {
            if (used[i]) continue;
            auto it = rows[i].find(col);
            if (it == rows[i].end()) continue; // stale index entry
            uint64_t f = it->second;
            for (auto& [c, v] : prow) {
                uint64_t add = (p - f * v % p) % p;
                if (add == 0) continue;
                auto [jt, fresh] = rows[i].emplace(c, add);
                if (fresh) {
                    if (c != col) col_rows[c].push_back(i);
                } else {
                    jt->second = (jt->second + add) % p;
                    if (jt->second == 0) rows[i].erase(jt);
                }
            }
            if (!rows[i].empty()) heap.emplace(rows[i].size(), i);
        }
    }
    return rank;
}

} // namespace detail

// H_1 of the subgroup determined by a coset table, with coefficients F_p.
// Works for any table (including the one-coset table for the group itself);
// the table's letter indexing must match G.symmetric_letters().
inline HomologyResult dim_h1_from_table(const GroupSpec& G, const CosetTable& T, const Int& p,
                                        int level_tag = 0) {
    if (!G.homology_enabled())
        throw PresentationRequired(
            "homology needs relators or an explicit declaration that the group is free");
    size_t n = T.n_cosets;
    size_t g = G.generator_names.size();

    HomologyResult res;
    res.p = p;
    res.level = level_tag;
    res.index = n;
    res.schreier_rank = n * (g - 1) + 1;

    if (G.relators.empty()) { // declared free: H_1 is free abelian of the Schreier rank
        res.relator_rank = 0;
        res.dim_h1 = res.schreier_rank;
        return res;
    }

    // positive letter index per generator name, matching symmetric_letters()
    std::map<std::string, size_t> pos_letter;
    {
        auto letters = G.symmetric_letters();
        for (size_t li = 0; li < letters.size(); li += 2) pos_letter[letters[li].first] = li;
    }

    // Schreier generator (coset, positive generator) -> column; tree edges
    // are the trivial generators and get no column.
    std::vector<std::vector<int64_t>> column(g, std::vector<int64_t>(n, -1));
    size_t n_cols = 0;
    for (size_t c = 1; c < n; ++c) {
        uint32_t li = T.tree_letter[c];
        if (li % 2 == 0) {
            column[li / 2][T.tree_parent[c]] = -2; // tree edge c = parent * x
        } else {
            // tree edge used the inverse letter: parent * x^-1 = c, i.e. c * x = parent
            column[li / 2][c] = -2;
        }
    }
    for (size_t gi = 0; gi < g; ++gi)
        for (size_t c = 0; c < n; ++c)
            if (column[gi][c] == -1) column[gi][c] = (int64_t)n_cols++;
    if (n_cols != n * g - (n - 1)) // == schreier_rank by the tree edge count
        throw DomainError("dim_h1_mod_p: tree edge bookkeeping failed");

    uint64_t pu = p.get_ui();
    std::vector<std::map<uint32_t, uint64_t>> rows;
    rows.reserve(n * G.relators.size());
    for (const Word& r : G.relators) {
        for (size_t c0 = 0; c0 < n; ++c0) {
            std::map<uint32_t, uint64_t> row;
            size_t c = c0;
            for (auto& [name, e] : r.letters) {
                size_t li = pos_letter.at(name);
                size_t gi = li / 2;
                int64_t col;
                if (e > 0) {
                    col = column[gi][c];
                    c = T.act(c, li);
                } else {
                    // move back along x first: the inverse letter is li+1
                    c = T.act(c, li + 1);
                    col = column[gi][c];
                }
                if (col < 0) continue; // tree edge, trivial generator
                uint64_t add = e > 0 ? 1 : pu - 1;
                auto [it, fresh] = row.emplace((uint32_t)col, add);
                if (!fresh) {
                    it->second = (it->second + add) % pu;
                    if (it->second == 0) row.erase(it);
                }
            }
            if (c != c0)
                throw DomainError("dim_h1_mod_p: relator does not stabilize its coset");
            if (!row.empty()) rows.push_back(std::move(row));
        }
    }

    res.relator_rank = detail::sparse_rank_mod_p(std::move(rows), pu);
    res.dim_h1 = res.schreier_rank - res.relator_rank;
    return res;
}

// the one-coset table: every letter acts trivially (index-1 subgroup)
inline CosetTable trivial_coset_table(const GroupSpec& G) {
    CosetTable T;
    T.n_cosets = 1;
    T.n_letters = G.symmetric_letters().size();
    T.action.assign(T.n_letters, {0});
    T.tree_parent = {0};
    T.tree_letter = {0};
    return T;
}

// H_1(Gamma_i, F_p) where Gamma_i = ker(Gamma -> Q).
inline HomologyResult dim_h1_mod_p(const GroupSpec& G, const FiniteQuotient& Q) {
    return dim_h1_from_table(G, coset_table(Q), Q.level().p, Q.level().i);
}

struct GrowthReportEntry {
    int level;
    size_t dim_h1;
    double lambda_hat;  // dim / p^{(d_hat - 1) i}
};

// Empirical lambda-hat sequence for a conjectured growth exponent d_hat;
// diagnostic only, never a certificate.
inline std::vector<GrowthReportEntry> ce_growth_report(
    const std::vector<std::pair<int, size_t>>& dims_per_level, const Int& p, double d_hat) {
    std::vector<GrowthReportEntry> out;
    double logp = std::log(mpz_get_d(p.get_mpz_t()));
    for (auto& [i, dim] : dims_per_level) {
        double denom = std::exp((d_hat - 1.0) * i * logp);
        out.push_back({i, dim, (double)dim / denom});
    }
    return out;
}

} // namespace tower

#endif
