// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.  Run with --falsify-child to exercise the falsified-invariant
// exit path (used internally by criterion 3).

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tower/report.hpp"

using namespace tower;

namespace {

GroupSpec catalog_group() {
    std::ifstream in(std::string(CATALOG_DIR) + "/figure_eight.json");
    if (!in.good()) throw std::runtime_error("catalog file missing");
    return load_group(nlohmann::json::parse(in));
}

// --- small exact linear-algebra oracles (independent of the library path) ---

size_t dense_rank_mod_p(std::vector<std::vector<long>> m, long p) {
    size_t rows = m.size();
    if (rows == 0) return 0;
    size_t cols = m[0].size();
    auto mod = [p](long x) { return ((x % p) + p) % p; };
    size_t rank = 0, r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = r;
        while (piv < rows && mod(m[piv][c]) == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[r]);
        long base = mod(m[r][c]), e = p - 2, inv = 1;
        while (e) {
            if (e & 1) inv = inv * base % p;
            base = base * base % p;
            e >>= 1;
        }
        for (size_t j = 0; j < cols; ++j) m[r][j] = mod(m[r][j]) * inv % p;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            long f = mod(m[i][c]);
            if (!f) continue;
            for (size_t j = 0; j < cols; ++j) m[i][j] = mod(m[i][j] - f * m[r][j]);
        }
        ++r;
        ++rank;
    }
    return rank;
}

std::vector<Int> smith_diagonal(std::vector<std::vector<Int>> m) {
    size_t rows = m.size();
    size_t cols = rows ? m[0].size() : 0;
    std::vector<Int> diag;
    size_t r = 0, c = 0;
    while (r < rows && c < cols) {
        size_t pi = rows, pj = cols;
        Int best(0);
        for (size_t i = r; i < rows; ++i)
            for (size_t j = c; j < cols; ++j)
                if (m[i][j] != 0 && (best == 0 || abs(m[i][j]) < abs(best))) {
                    best = m[i][j];
                    pi = i;
                    pj = j;
                }
        if (pi == rows) break;
        std::swap(m[pi], m[r]);
        for (size_t i = 0; i < rows; ++i) std::swap(m[i][pj], m[i][c]);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (size_t i = r + 1; i < rows; ++i)
                if (m[i][c] != 0) {
                    Int q = m[i][c] / m[r][c];
                    for (size_t j = c; j < cols; ++j) m[i][j] -= q * m[r][j];
                    if (m[i][c] != 0) {
                        std::swap(m[i], m[r]);
                        clean = false;
                    }
                }
            for (size_t j = c + 1; j < cols; ++j)
                if (m[r][j] != 0) {
                    Int q = m[r][j] / m[r][c];
                    for (size_t i = r; i < rows; ++i) m[i][j] -= q * m[i][c];
                    if (m[r][j] != 0) {
                        for (size_t i = 0; i < rows; ++i) std::swap(m[i][j], m[i][c]);
                        clean = false;
                    }
                }
        }
        diag.push_back(abs(m[r][c]));
        ++r;
        ++c;
    }
    return diag;
}

size_t smith_rank_mod_p(const std::vector<std::vector<Int>>& m, long p) {
    size_t rank = 0;
    for (auto& d : smith_diagonal(m))
        if (!mpz_divisible_ui_p(d.get_mpz_t(), (unsigned long)p)) ++rank;
    return rank;
}

// rebuild the relator matrix of a finite quotient densely (independent of the
// sparse path inside dim_h1_from_table)
std::vector<std::vector<long>> dense_relator_matrix(const GroupSpec& G, const CosetTable& T) {
    size_t n = T.n_cosets, g = G.generator_names.size();
    std::map<std::string, size_t> pos;
    for (size_t gi = 0; gi < g; ++gi) pos[G.generator_names[gi]] = 2 * gi;
    std::vector<std::vector<long long>> column(g, std::vector<long long>(n, -1));
    size_t n_cols = 0;
    for (size_t c = 1; c < n; ++c) {
        uint32_t li = T.tree_letter[c];
        if (li % 2 == 0) column[li / 2][T.tree_parent[c]] = -2;
        else column[li / 2][c] = -2;
    }
    for (size_t gi = 0; gi < g; ++gi)
        for (size_t c = 0; c < n; ++c)
            if (column[gi][c] == -1) column[gi][c] = (long long)n_cols++;
    std::vector<std::vector<long>> dense;
    for (const Word& r : G.relators)
        for (size_t c0 = 0; c0 < n; ++c0) {
            std::vector<long> row(n_cols, 0);
            size_t c = c0;
            for (auto& [name, e] : r.letters) {
                size_t li = pos.at(name), gi = li / 2;
                long long col;
                if (e > 0) {
                    col = column[gi][c];
                    c = T.act(c, li);
                } else {
                    c = T.act(c, li + 1);
                    col = column[gi][c];
                }
                if (col >= 0) row[(size_t)col] += e > 0 ? 1 : -1;
            }
            dense.push_back(std::move(row));
        }
    return dense;
}

GroupSpec sanov_free_group() {
    return load_group(nlohmann::json::parse(R"({
        "name": "sanov",
        "free": true,
        "field": {"min_poly": [-1, 1]},
        "generators": {
            "a": [[["1"], ["2"]], [["0"], ["1"]]],
            "b": [[["1"], ["0"]], [["2"], ["1"]]]
        }
    })"));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Harness {
    int failures = 0;

    void run(int n, const std::string& what, const std::function<void()>& body) {
        auto t0 = std::chrono::steady_clock::now();
        std::string err;
        try {
            body();
        } catch (const std::exception& e) {
            err = e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line.precision(1);
        line << std::fixed;
        if (err.empty()) {
            line << "CRITERION " << n << ": PASS  (" << secs << "s)  " << what;
        } else {
            line << "CRITERION " << n << ": FAIL  (" << secs << "s)  " << what << " -- " << err;
            ++failures;
        }
        std::cout << line.str() << std::endl;
    }
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

int falsify_child() {
    // a generator is not a congruence member; its height certificate must be
    // rigorously falsified, which maps to exit code 1
    try {
        GroupSpec G = catalog_group();
        auto L = make_level(G, 7, 1);
        claim3_certificate(G.generators.at("a"), L);
    } catch (const FalsifiedInvariant&) {
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected: " << e.what() << "\n";
        return 3;
    }
    std::cerr << "falsification did not trigger\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::string(argv[1]) == "--falsify-child") return falsify_child();

    Harness H;
    GroupSpec G = catalog_group();
    BallEnumeration ball8 = bfs_ball(G, 8);

    // 1. product formula, >= 10^3 random nonzero elements over two quadratic fields
    H.run(1, "product formula on random elements (exact finite part, 128-bit arch part)", [&] {
        size_t checked = 0;
        for (auto poly : {std::vector<long>{1, -1, 1}, std::vector<long>{-2, 0, 1}}) {
            auto K = nf_create(RatPoly::from_int_coeffs(poly));
            FieldElement t = FieldElement::generator(K);
            SplitRng rng(42);
            while (checked < (poly[0] == 1 ? 600u : 1200u)) {
                Rat c0((long)(rng.next() % 41) - 20, 1 + (long)(rng.next() % 9));
                Rat c1((long)(rng.next() % 41) - 20, 1 + (long)(rng.next() % 9));
                FieldElement x = FieldElement::from_rational(K, c0) +
                                 FieldElement::from_rational(K, c1) * t;
                if (x.is_zero()) continue;
                Rat nm = abs(x.norm());
                Rat finite(1);
                Int support = x.denominator() * nm.get_num() * nm.get_den();
                for (auto& [q, e] : factor_int(support)) {
                    (void)e;
                    for (auto& P : split_prime(K, q)) finite *= abs_value_finite(x, P);
                }
                require(finite * nm == Rat(1), "finite product * |Nm| != 1 at " + x.to_string());
                BallReal arch = BallReal::from_si(1, 128);
                for (auto& place : K->arch_places_at(128)) arch = arch * abs_value_arch(x, place);
                require(arch.contains(nm), "arch enclosure misses |Nm| at " + x.to_string());
                ++checked;
            }
        }
        require(checked >= 1000, "fewer than 10^3 elements checked");
    });

    // 2. H(MN) <= 4^{#S_inf} H(M) H(N), ball-rigorous for every radius-4 pair
    H.run(2, "height submultiplicativity over all radius-4 ball pairs", [&] {
        auto ball4 = bfs_ball(G, 4);
        std::vector<const GroupMatrix*> mats;
        std::vector<HeightValue> hs;
        for (auto& [key, e] : ball4.elements) {
            (void)key;
            mats.push_back(&e.matrix);
            hs.push_back(height_matrix(e.matrix));
        }
        size_t pairs = mats.size() * mats.size();
        require(pairs >= 10000, "ball too small: only " + std::to_string(pairs) + " pairs");
        Rat c(1);
        for (size_t k = 0; k < G.field->arch_places().size(); ++k) c *= 4;
        BallReal cb = BallReal::from_rational(c);
        for (size_t i = 0; i < mats.size(); ++i)
            for (size_t j = 0; j < mats.size(); ++j) {
                HeightValue lhs = height_matrix(*mats[i] * *mats[j]);
                bool ok;
                if (lhs.exact && hs[i].exact && hs[j].exact)
                    ok = *lhs.exact <= c * *hs[i].exact * *hs[j].exact; // exact rationals
                else if (lhs.total.certainly_le(cb * hs[i].total * hs[j].total))
                    ok = true;
                else // enclosures too wide at default precision: redo rigorously
                    ok = check_submultiplicative(*mats[i], *mats[j]).verified;
                require(ok, "pair (" + std::to_string(i) + "," + std::to_string(j) + ") failed");
            }
    });

    // 3. height lower bound for every nontrivial member found at five levels
    H.run(3, "height lower bound for congruence members at (7,1),(7,2),(3,1),(3,2),(5,1)", [&] {
        size_t members = 0;
        for (auto& [p, i] : std::vector<std::pair<int, int>>{
                 {7, 1}, {7, 2}, {3, 1}, {3, 2}, {5, 1}}) {
            auto L = make_level(G, p, i);
            for (auto& [key, e] : ball8.elements) {
                (void)key;
                if (e.length == 0) continue;
                if (!membership(e.matrix, L, true)) continue;
                auto cert = claim3_certificate(e.matrix, L); // throws on falsification
                require(cert.verified, "unverified certificate");
                ++members;
            }
        }
        require(members > 0, "no members found in the radius-8 ball");

        // the falsified path must exit with code 1
        std::string cmd = std::string("\"") + argv[0] + "\" --falsify-child";
        int rc = std::system(cmd.c_str());
        require(WIFEXITED(rc) && WEXITSTATUS(rc) == 1,
                "falsified invariant did not map to exit code 1");
    });

    // 4. certificate chain: certified bound <= word systole; monotone in i
    H.run(4, "certified word bound below the word systole, nondecreasing levels", [&] {
        std::map<int, std::vector<size_t>> systoles; // p -> found systoles by i
        for (auto& [p, i] : std::vector<std::pair<int, int>>{
                 {7, 1}, {7, 2}, {3, 1}, {3, 2}, {5, 1}}) {
            auto L = make_level(G, p, i);
            long bound = certified_word_bound(G, L);
            auto ws = word_systole(G, L, 8, true, &ball8);
            if (ws.found) {
                require(bound <= (long)ws.value,
                        "bound exceeds systole at (" + std::to_string(p) + "," +
                            std::to_string(i) + ")");
                systoles[p].resize((size_t)i, 0);
                systoles[p][(size_t)i - 1] = ws.value;
            }
        }
        // nondecreasing in i where found; a miss means > 8, above any found value
        for (auto& [p, v] : systoles)
            for (size_t k = 1; k < v.size(); ++k)
                if (v[k] && v[k - 1]) require(v[k] >= v[k - 1], "systole decreased in i");
        require(systoles[7].at(0) == 7, "word systole at (7,1) is not 7"); // witness a^7
    });

    // 5. quotient correctness, exhaustive at i <= 2 for p = 3
    H.run(5, "quotient orders divide ambient orders; membership = trivial reduction", [&] {
        auto L31 = make_level(G, 3, 1);
        auto L32 = make_level(G, 3, 2);
        auto Q1 = FiniteQuotient::compute(G, L31);
        auto Q2 = FiniteQuotient::compute(G, L32);
        require(mpz_divisible_p(ambient_sl2_order(L31).get_mpz_t(), Q1.order().get_mpz_t()),
                "n_1 does not divide the ambient order at p = 3");
        require(mpz_divisible_p(ambient_sl2_order(L32).get_mpz_t(), Q2.order().get_mpz_t()),
                "n_2 does not divide the ambient order at p = 3");
        require(mpz_divisible_p(Q2.order().get_mpz_t(), Q1.order().get_mpz_t()),
                "n_1 does not divide n_2");

        auto L71 = make_level(G, 7, 1);
        auto Q7 = FiniteQuotient::compute(G, L71);
        Int split_bound = Int(336) * Int(336);
        require(mpz_divisible_p(split_bound.get_mpz_t(), Q7.order().get_mpz_t()),
                "split-case order does not divide 336^2");

        auto ball5 = bfs_ball(G, 5);
        std::vector<std::pair<const CongruenceLevel*, const FiniteQuotient*>> instances{
            {&L31, &Q1}, {&L32, &Q2}};
        for (auto& [key, e] : ball5.elements) {
            (void)key;
            for (auto& [lvl, quo] : instances) {
                bool red = quo->reduces_to_identity(e.matrix) ||
                           quo->reduces_to_identity(-e.matrix);
                require(membership(e.matrix, *lvl, true) == red,
                        "membership/reduction mismatch at " + e.witness.to_string());
            }
        }
    });

    // 6. homology oracle equivalence
    H.run(6, "homology vs Smith-form oracles; Nielsen-Schreier ranks", [&] {
        // index 1: dim = 1 for several p, against the integer Smith form of
        // the exponent-sum matrix
        CosetTable T1 = trivial_coset_table(G);
        auto dense1 = dense_relator_matrix(G, T1);
        std::vector<std::vector<Int>> z1;
        for (auto& row : dense1) {
            std::vector<Int> zr;
            for (long v : row) zr.emplace_back(v);
            z1.push_back(std::move(zr));
        }
        for (long p : {2L, 3L, 5L, 7L}) {
            auto h = dim_h1_from_table(G, T1, Int(p));
            require(h.dim_h1 == 1, "index-1 dim != 1 at p = " + std::to_string(p));
            require(h.relator_rank == smith_rank_mod_p(z1, p), "index-1 Smith mismatch");
        }

        // every instance with n_i <= 10^3: sparse rank == dense F_p rank
        auto Q3 = FiniteQuotient::compute(G, make_level(G, 3, 1));
        require(Q3.order() <= 1000, "instance unexpectedly large");
        CosetTable T3 = coset_table(Q3);
        auto h3 = dim_h1_from_table(G, T3, Int(3));
        require(h3.relator_rank == dense_rank_mod_p(dense_relator_matrix(G, T3), 3),
                "sparse/dense rank mismatch on the index-648 instance");
        require(h3.dim_h1 == 36, "frozen dim H_1(Gamma_1, F_3) violated");

        // Nielsen-Schreier: rank-2 free group, dim = n + 1 at 5 quotients
        GroupSpec F = sanov_free_group();
        for (long p : {3L, 5L, 7L, 11L, 13L}) {
            auto Q = FiniteQuotient::compute(F, make_level(F, p, 1));
            auto h = dim_h1_mod_p(F, Q);
            require(h.dim_h1 == h.index + 1,
                    "Nielsen-Schreier violated at p = " + std::to_string(p));
        }
    });

    // 7. geometry benchmarks
    H.run(7, "translation length, ball volume, asymptotic ratio, parabolic generators", [&] {
        GroupMatrix m{FieldElement::from_rational(G.field, Rat(3)),
                      FieldElement::from_rational(G.field, Rat(1)),
                      FieldElement::from_rational(G.field, Rat(-1)),
                      FieldElement::from_rational(G.field, Rat(0))};
        auto cls = classify(m, G);
        require(cls.kind == IsometryKind::loxodromic, "trace-3 element not loxodromic");
        double len = 1.9248473002384139;
        require(cls.real_length.lo_d() > len - 1e-9 && cls.real_length.hi_d() < len + 1e-9,
                "translation length off by more than 1e-9");

        BallReal v1 = ball_volume(BallReal::from_si(1));
        double ve = 5.1109327057082914; // pi (sinh 2 - 2)
        require(v1.lo_d() > ve - 1e-9 && v1.hi_d() < ve + 1e-9, "ball volume off at r = 1");

        double ratio = ball_volume(BallReal::from_si(10)).mid_d() / (M_PI / 2 * std::exp(20.0));
        require(ratio >= 0.99 && ratio <= 1.0, "asymptotic volume ratio out of range");

        for (auto& [name, gen] : G.generators)
            require(classify(gen, G).kind == IsometryKind::parabolic,
                    "generator " + name + " not parabolic");
    });

    // 8. determinism: byte-identical JSON from two identical CLI runs
    H.run(8, "byte-identical JSON reports across runs", [&] {
        std::string group = std::string(CATALOG_DIR) + "/figure_eight.json";
        std::string base = std::string("\"") + TOWER_CLI_PATH + "\" tower \"" + group +
                           "\" -p 3 --i-min 1 --i-max 2 -R 5 -o ";
        require(std::system((base + "acceptance_run1.json > /dev/null").c_str()) == 0,
                "first CLI run failed");
        require(std::system((base + "acceptance_run2.json > /dev/null").c_str()) == 0,
                "second CLI run failed");
        std::string r1 = slurp("acceptance_run1.json"), r2 = slurp("acceptance_run2.json");
        require(!r1.empty() && r1 == r2, "CLI JSON reports differ between runs");

        TowerConfig cfg;
        cfg.p = 3;
        cfg.i_min = 1;
        cfg.i_max = 1;
        cfg.r_max = 4;
        require(to_json(run_tower(G, cfg)).dump() == to_json(run_tower(G, cfg)).dump(),
                "in-process reports differ between runs");
    });

    if (H.failures) {
        std::cout << H.failures << " criterion(s) FAILED" << std::endl;
        return 1;
    }
    std::cout << "all 8 criteria passed" << std::endl;
    return 0;
}
