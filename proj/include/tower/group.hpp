#ifndef TOWER_GROUP_HPP
#define TOWER_GROUP_HPP

// The finitely generated group: determinant-1 matrices over the field,
// words, the group file loader, and exact Cayley-ball enumeration with
// canonical-form deduplication.

#include <gmpxx.h>

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tower/errors.hpp"
#include "tower/heights.hpp"
#include "tower/number_field.hpp"

namespace tower {

class GroupMatrix {
  public:
    GroupMatrix() = default;
    GroupMatrix(FieldElement a, FieldElement b, FieldElement c, FieldElement d)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {}

    static GroupMatrix identity(const FieldPtr& K) {
        auto one = FieldElement::from_rational(K, Rat(1));
        auto zero = FieldElement::from_rational(K, Rat(0));
        return {one, zero, zero, one};
    }

    const FieldElement& a() const { return a_; }
    const FieldElement& b() const { return b_; }
    const FieldElement& c() const { return c_; }
    const FieldElement& d() const { return d_; }

    FieldElement det() const { return a_ * d_ - b_ * c_; }
    FieldElement trace() const { return a_ + d_; }

    friend GroupMatrix operator*(const GroupMatrix& x, const GroupMatrix& y) {
        return {x.a_ * y.a_ + x.b_ * y.c_, x.a_ * y.b_ + x.b_ * y.d_,
                x.c_ * y.a_ + x.d_ * y.c_, x.c_ * y.b_ + x.d_ * y.d_};
    }
    friend bool operator==(const GroupMatrix& x, const GroupMatrix& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && x.c_ == y.c_ && x.d_ == y.d_;
    }

    // adjugate; the inverse for determinant-1 matrices
    GroupMatrix inverse() const { return {d_, -b_, -c_, a_}; }
    GroupMatrix operator-() const { return {-a_, -b_, -c_, -d_}; }

    bool is_identity() const {
        const FieldPtr& K = a_.field();
        return *this == identity(K);
    }
    bool is_neg_identity() const {
        const FieldPtr& K = a_.field();
        return *this == -identity(K);
    }

    std::string to_string() const {
        return "[[" + a_.to_string() + ", " + b_.to_string() + "], [" + c_.to_string() +
               ", " + d_.to_string() + "]]";
    }

  private:
    FieldElement a_, b_, c_, d_;
};

// A freely reduced word in named generators; exponents are +-1 per letter.
struct Word {
    std::vector<std::pair<std::string, int>> letters;

    static Word parse(const std::string& text) {
        Word w;
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) {
            int e = 1;
            auto caret = tok.find("^-1");
            if (caret != std::string::npos) {
                if (caret + 3 != tok.size())
                    throw SchemaError("bad word token: " + tok);
                e = -1;
                tok = tok.substr(0, caret);
            }
            if (tok.empty()) throw SchemaError("empty generator name in word");
            if (tok.find('^') != std::string::npos)
                throw SchemaError("bad word token: only ^-1 exponents are supported: " + tok);
            // free reduction on the fly
            if (!w.letters.empty() && w.letters.back().first == tok &&
                w.letters.back().second == -e)
                w.letters.pop_back();
            else
                w.letters.emplace_back(tok, e);
        }
        return w;
    }

    size_t length() const { return letters.size(); }

    std::string to_string() const {
        std::string s;
        for (auto& [name, e] : letters) {
            if (!s.empty()) s += " ";
            s += name;
            if (e < 0) s += "^-1";
        }
        return s;
    }
};

struct GroupSpec {
    std::string name;
    bool cusped = false;
    bool declared_free = false;
    FieldPtr field;
    std::vector<std::string> generator_names;     // file order
    std::map<std::string, GroupMatrix> generators;
    std::vector<Word> relators;
    std::set<Int> denominator_primes;             // primes dividing any entry denominator
    std::optional<size_t> geometric_place;        // index into arch_places
    nlohmann::json config_defaults;

    bool homology_enabled() const { return !relators.empty() || declared_free; }

    GroupMatrix evaluate(const Word& w) const {
        GroupMatrix m = GroupMatrix::identity(field);
        for (auto& [name, e] : w.letters) {
            auto it = generators.find(name);
            if (it == generators.end())
                throw SchemaError("word references unknown generator '" + name + "'");
            m = m * (e > 0 ? it->second : it->second.inverse());
        }
        return m;
    }

    // The symmetric generating set X, in a fixed deterministic order:
    // g_1, g_1^-1, g_2, g_2^-1, ...
    std::vector<std::pair<std::string, int>> symmetric_letters() const {
        std::vector<std::pair<std::string, int>> out;
        for (auto& n : generator_names) {
            out.emplace_back(n, 1);
            out.emplace_back(n, -1);
        }
        return out;
    }

    GroupMatrix letter_matrix(const std::pair<std::string, int>& l) const {
        const GroupMatrix& g = generators.at(l.first);
        return l.second > 0 ? g : g.inverse();
    }
};

// --- JSON group files ---------------------------------------------------------

namespace detail {

inline Rat parse_rational_string(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw SchemaError("bad rational literal: '" + s + "'");
    q.canonicalize();
    if (q.get_den() == 0) throw SchemaError("zero denominator in rational literal: '" + s + "'");
    return q;
}

inline FieldElement parse_field_element(const FieldPtr& K, const nlohmann::json& j) {
    if (!j.is_array()) throw SchemaError("field element must be an array of rational strings");
    if ((int)j.size() > K->degree())
        throw SchemaError("field element has more coefficients than the field degree");
    std::vector<Rat> c;
    for (auto& s : j) {
        if (!s.is_string()) throw SchemaError("field element coefficients must be strings");
        c.push_back(parse_rational_string(s.get<std::string>()));
    }
    return {K, RatPoly(std::move(c))};
}

} // namespace detail

inline GroupSpec load_group(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("group document must be a JSON object");
    GroupSpec G;
    G.name = doc.value("name", std::string("unnamed"));
    G.cusped = doc.value("cusped", false);
    G.declared_free = doc.value("free", false);

    if (!doc.contains("field") || !doc["field"].contains("min_poly"))
        throw SchemaError("missing field.min_poly");
    std::vector<long> coeffs;
    for (auto& c : doc["field"]["min_poly"]) {
        if (!c.is_number_integer()) throw SchemaError("min_poly coefficients must be integers");
        coeffs.push_back(c.get<long>());
    }
    G.field = nf_create(RatPoly::from_int_coeffs(coeffs));

    if (doc.contains("geometric_place")) {
        size_t idx = doc["geometric_place"].get<size_t>();
        if (idx >= G.field->num_arch_places())
            throw SchemaError("geometric_place index out of range");
        G.geometric_place = idx;
    } else {
        // auto-select when there is exactly one complex place
        size_t complex_count = 0, complex_idx = 0;
        for (size_t i = 0; i < G.field->arch_places().size(); ++i)
            if (G.field->arch_places()[i].degree == 2) {
                ++complex_count;
                complex_idx = i;
            }
        if (complex_count == 1) G.geometric_place = complex_idx;
    }

    if (!doc.contains("generators") || !doc["generators"].is_object() ||
        doc["generators"].empty())
        throw SchemaError("missing generators");
    for (auto& [name, mat] : doc["generators"].items()) {
        if (!mat.is_array() || mat.size() != 2 || !mat[0].is_array() || mat[0].size() != 2 ||
            !mat[1].is_array() || mat[1].size() != 2)
            throw SchemaError("generator '" + name + "' is not a 2x2 array");
        GroupMatrix M(detail::parse_field_element(G.field, mat[0][0]),
                      detail::parse_field_element(G.field, mat[0][1]),
                      detail::parse_field_element(G.field, mat[1][0]),
                      detail::parse_field_element(G.field, mat[1][1]));
        FieldElement det = M.det();
        if (!(det == FieldElement::from_rational(G.field, Rat(1))))
            throw DetNotOne("generator '" + name + "' has determinant " + det.to_string());
        G.generator_names.push_back(name);
        G.generators.emplace(name, std::move(M));
    }
    std::sort(G.generator_names.begin(), G.generator_names.end());

    if (doc.contains("relators")) {
        for (auto& r : doc["relators"]) {
            Word w = Word::parse(r.get<std::string>());
            GroupMatrix m = G.evaluate(w);
            if (!m.is_identity() && !m.is_neg_identity())
                throw RelatorFailure("relator '" + w.to_string() +
                                     "' does not evaluate to +-identity; residual " +
                                     m.to_string());
            G.relators.push_back(std::move(w));
        }
    }

    for (auto& [name, M] : G.generators) {
        (void)name;
        for (const FieldElement* e : {&M.a(), &M.b(), &M.c(), &M.d()})
            for (auto& [q, mult] : factor_int(e->denominator())) {
                (void)mult;
                G.denominator_primes.insert(q);
            }
    }

    if (doc.contains("config_defaults")) G.config_defaults = doc["config_defaults"];
    return G;
}

// --- canonical forms and ball enumeration -------------------------------------

// Deterministic byte key; with psl_mode the sign is fixed by requiring the
// first nonzero entry (order a, b, c, d; coefficients low to high) positive.
inline std::string canonical_form(const GroupMatrix& M, bool psl_mode) {
    const FieldElement* entries[4] = {&M.a(), &M.b(), &M.c(), &M.d()};
    int sign = 1;
    if (psl_mode) {
        for (auto* e : entries) {
            bool found = false;
            for (size_t i = 0; i < e->rep().coeffs().size(); ++i) {
                const Rat& c = e->rep().coeffs()[i];
                if (c != 0) {
                    sign = sgn(c);
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
    }
    std::string key;
    int n = M.a().field()->degree();
    for (auto* e : entries) {
        for (int i = 0; i < n; ++i) {
            Rat c = Rat(sign) * e->coeff((size_t)i);
            key += c.get_str();
            key += ',';
        }
        key += ';';
    }
    return key;
}

struct BallEntry {
    GroupMatrix matrix;
    size_t length;
    Word witness;
};

struct BallEnumeration {
    size_t radius = 0;
    bool psl_mode = true;
    bool complete = true;                 // false when the budget truncated the ball
    std::map<std::string, BallEntry> elements; // canonical key -> entry
    std::vector<size_t> counts_per_length;

    size_t size() const { return elements.size(); }
};

// Exhaustive breadth-first enumeration of the radius-R ball in the word
// metric d_X.  Every element appears once with its true minimal length.
inline BallEnumeration bfs_ball(const GroupSpec& G, size_t radius, bool psl_mode = true,
                                size_t budget = 5'000'000) {
    BallEnumeration ball;
    ball.radius = radius;
    ball.psl_mode = psl_mode;
    auto letters = G.symmetric_letters();
    std::vector<GroupMatrix> letter_mats;
    for (auto& l : letters) letter_mats.push_back(G.letter_matrix(l));

    GroupMatrix id = GroupMatrix::identity(G.field);
    ball.elements.emplace(canonical_form(id, psl_mode), BallEntry{id, 0, Word{}});
    ball.counts_per_length.push_back(1);

    std::vector<const BallEntry*> frontier{&ball.elements.begin()->second};
    for (size_t r = 1; r <= radius; ++r) {
        // expand, then sort the finished frontier by canonical key so the
        // result is independent of expansion order
        std::vector<std::pair<std::string, BallEntry>> next;
        for (const BallEntry* e : frontier) {
            for (size_t li = 0; li < letters.size(); ++li) {
                GroupMatrix m = e->matrix * letter_mats[li];
                std::string key = canonical_form(m, psl_mode);
                if (ball.elements.count(key)) continue;
                Word w = e->witness;
                w.letters.push_back(letters[li]);
                next.emplace_back(std::move(key), BallEntry{std::move(m), r, std::move(w)});
            }
        }
        std::sort(next.begin(), next.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        size_t added = 0;
        frontier.clear();
        for (auto& [key, entry] : next) {
            auto [it, inserted] = ball.elements.emplace(key, std::move(entry));
            if (inserted) {
                frontier.push_back(&it->second);
                ++added;
            }
            if (ball.elements.size() > budget) {
                ball.complete = false;
                ball.counts_per_length.push_back(added);
                return ball;
            }
        }
        ball.counts_per_length.push_back(added);
    }
    return ball;
}

} // namespace tower

#endif
