#ifndef TOWER_LATTICE_HPP
#define TOWER_LATTICE_HPP

// Full-rank sublattices of Z^n in row Hermite normal form, used to represent
// powers of prime ideals in the order Z[theta].

#include <gmpxx.h>

#include <vector>

#include "tower/errors.hpp"

namespace tower {

using IntVec = std::vector<mpz_class>;
using IntMat = std::vector<IntVec>;

// Row HNF of the lattice spanned by `rows` (must have full column rank n).
// Result is n x n upper triangular with positive diagonal and entries above
// each pivot reduced into [0, pivot).
inline IntMat hnf(IntMat rows, size_t n) {
    size_t pivot_row = 0;
    for (size_t col = 0; col < n; ++col) {
        // clear the column below pivot_row by gcd steps
        while (true) {
            size_t best = rows.size();
            for (size_t r = pivot_row; r < rows.size(); ++r) {
                if (rows[r][col] == 0) continue;
                if (best == rows.size() ||
                    cmp(abs(rows[r][col]), abs(rows[best][col])) < 0)
                    best = r;
            }
            if (best == rows.size()) throw DomainError("hnf: rank deficient input");
            std::swap(rows[pivot_row], rows[best]);
            mpz_class piv = rows[pivot_row][col];
            bool clean = true;
            for (size_t r = pivot_row + 1; r < rows.size(); ++r) {
                if (rows[r][col] == 0) continue;
                mpz_class q = rows[r][col] / piv; // truncated division is fine here
                for (size_t j = col; j < n; ++j) rows[r][j] -= q * rows[pivot_row][j];
                if (rows[r][col] != 0) clean = false;
            }
            if (clean) break;
        }
        if (rows[pivot_row][col] < 0)
            for (size_t j = col; j < n; ++j) rows[pivot_row][j] = -rows[pivot_row][j];
        // reduce entries above the pivot
        for (size_t r = 0; r < pivot_row; ++r) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), rows[r][col].get_mpz_t(),
                       rows[pivot_row][col].get_mpz_t());
            if (q != 0)
                for (size_t j = col; j < n; ++j) rows[r][j] -= q * rows[pivot_row][j];
        }
        ++pivot_row;
        if (pivot_row > n) break;
    }
    rows.resize(n);
    return rows;
}

// Membership of v in the lattice with upper-triangular HNF basis H.
inline bool lattice_contains(const IntMat& H, const IntVec& v) {
    size_t n = v.size();
    IntVec w = v;
    for (size_t i = 0; i < n; ++i) {
        if (w[i] == 0) continue;
        if (!mpz_divisible_p(w[i].get_mpz_t(), H[i][i].get_mpz_t())) return false;
        mpz_class c = w[i] / H[i][i];
        for (size_t j = i; j < n; ++j) w[j] -= c * H[i][j];
    }
    return true;
}

} // namespace tower

#endif
