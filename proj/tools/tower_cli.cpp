// Command-line surface: field/heights/ball/level/systole/homology/tower/check.
// Exit codes: 0 success, 1 falsified invariant, 2 usage or input error,
// 3 runtime limit (budget or precision cap).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tower/report.hpp"

using namespace tower;

namespace {

GroupSpec load_group_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open group file: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, true, true);
    return load_group(doc);
}

struct CommonOpts {
    std::string group_file;
    long prec = kDefaultPrec;
    bool no_psl = false;
    unsigned long seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("group", o.group_file, "group JSON file")->required();
    cmd->add_option("--prec", o.prec, "working precision in bits");
    cmd->add_flag("--no-psl", o.no_psl, "work in SL2 instead of PSL2");
    cmd->add_option("--seed", o.seed, "seed for polynomial factorization splitting");
}

int cmd_field(const CommonOpts& o, const std::string& p_str) {
    GroupSpec G = load_group_file(o.group_file);
    const auto& K = G.field;
    std::cout << "field: degree " << K->degree() << ", min poly " << K->min_poly().to_string("x")
              << "\n";
    std::cout << "discriminant: " << K->discriminant().get_str() << "\n";
    std::cout << "irreducibility: "
              << (K->irreducibility_status() == IrreducibilityStatus::verified ? "verified"
                                                                               : "assumed")
              << "\n";
    if (!K->warning().empty()) std::cout << "warning: " << K->warning() << "\n";
    size_t idx = 0;
    for (auto& pl : K->arch_places()) {
        std::cout << "place " << idx++ << ": " << (pl.degree == 1 ? "real" : "complex")
                  << " root " << pl.root.to_string(12) << "\n";
    }
    if (G.geometric_place) std::cout << "geometric place: " << *G.geometric_place << "\n";
    std::cout << "denominator primes S:";
    for (auto& q : G.denominator_primes) std::cout << " " << q.get_str();
    std::cout << "\n";
    if (!p_str.empty()) {
        Int p(p_str);
        auto primes = split_prime(K, p, o.seed);
        std::cout << "splitting at " << p.get_str() << ":\n";
        for (auto& P : primes)
            std::cout << "  (" << p.get_str() << ", " << P.local_generator().to_string("t")
                      << ")  e = " << P.ramification() << ", f = " << P.residue_degree() << "\n";
    }
    return 0;
}

int cmd_heights(const CommonOpts& o, const std::string& word) {
    GroupSpec G = load_group_file(o.group_file);
    auto show = [&](const std::string& name, const GroupMatrix& M) {
        HeightValue h = height_matrix(M, (mpfr_prec_t)o.prec);
        std::cout << "H(" << name << ") = " << h.total.to_string(15)
                  << "  (finite part " << h.finite_part.get_str() << ")\n";
    };
    for (auto& [name, M] : G.generators) show(name, M);
    if (!word.empty()) {
        Word w = Word::parse(word);
        show(w.to_string(), G.evaluate(w));
    }
    return 0;
}

int cmd_ball(const CommonOpts& o, size_t radius, size_t budget) {
    GroupSpec G = load_group_file(o.group_file);
    auto ball = bfs_ball(G, radius, !o.no_psl, budget);
    std::cout << "ball of radius " << radius << (ball.psl_mode ? " (psl)" : " (sl)") << ":\n";
    for (size_t r = 0; r < ball.counts_per_length.size(); ++r)
        std::cout << "  length " << r << ": " << ball.counts_per_length[r] << "\n";
    std::cout << "total " << ball.size() << (ball.complete ? "" : " (TRUNCATED by budget)")
              << "\n";
    return 0;
}

int cmd_level(const CommonOpts& o, const std::string& p_str, int i, size_t budget) {
    GroupSpec G = load_group_file(o.group_file);
    CongruenceLevel L = make_level(G, Int(p_str), i, o.seed);
    std::cout << "level (p = " << p_str << ", i = " << i << ")\n";
    for (auto& P : L.primes_above_p)
        std::cout << "  prime (" << p_str << ", " << P.local_generator().to_string("t")
                  << ")  e = " << P.ramification() << ", f = " << P.residue_degree() << "\n";
    std::cout << "certified word bound >= " << certified_word_bound(G, L, (mpfr_prec_t)o.prec)
              << "\n";
    try {
        auto Q = FiniteQuotient::compute(G, L, budget);
        std::cout << "index n_i = [Gamma : Gamma_i] = " << Q.order().get_str() << "\n";
        auto lift = quotient_order_lifted(G, Q);
        std::cout << "next level (kernel lift): n_" << (i + 1) << " = " << lift.order.get_str()
                  << "  (kernel dim " << lift.kernel_dim << ")\n";
    } catch (const BudgetExceeded& e) {
        std::cout << "quotient not enumerated: " << e.what() << "\n";
    }
    return 0;
}

int cmd_systole(const CommonOpts& o, const std::string& p_str, int i, size_t r_max) {
    GroupSpec G = load_group_file(o.group_file);
    CongruenceLevel L = make_level(G, Int(p_str), i, o.seed);
    bool psl = !o.no_psl;
    auto ball = bfs_ball(G, r_max, psl);
    auto ws = word_systole(G, L, r_max, psl, &ball);
    if (ws.found)
        std::cout << "word systole = " << ws.value << "  witness: " << ws.witness.to_string()
                  << (ws.psl_coset ? "  (-identity coset)" : "") << "\n";
    else
        std::cout << "word systole > " << r_max << "\n";
    std::cout << "certified lower bound >= " << certified_word_bound(G, L, (mpfr_prec_t)o.prec)
              << "\n";
    auto gs = geodesic_systole_upper(G, L, r_max, psl, (mpfr_prec_t)o.prec, &ball);
    if (gs.found)
        std::cout << "geodesic systole upper bound = " << gs.length.to_string(15)
                  << "  witness: " << gs.witness.to_string() << "\n";
    else
        std::cout << "geodesic systole: no loxodromic witness <= " << r_max << "\n";
    return 0;
}

int cmd_homology(const CommonOpts& o, const std::string& p_str, int i, size_t budget) {
    GroupSpec G = load_group_file(o.group_file);
    CongruenceLevel L = make_level(G, Int(p_str), i, o.seed);
    auto Q = FiniteQuotient::compute(G, L, budget);
    auto h = dim_h1_mod_p(G, Q);
    std::cout << "index " << h.index << ", Schreier rank " << h.schreier_rank
              << ", relator rank " << h.relator_rank << "\n";
    std::cout << "dim H_1(Gamma_" << i << ", F_" << p_str << ") = " << h.dim_h1 << "\n";
    if (h.dim_h1 >= 3) {
        auto c = certificate(h.dim_h1, G.cusped);
        std::cout << "certificate: " << c->kind << ", k = " << c->k << " (conditional)\n";
        for (auto& hyp : c->hypotheses) std::cout << "  " << hyp << "\n";
    }
    return 0;
}

int cmd_tower(const CommonOpts& o, TowerConfig cfg, const std::string& out_path) {
    GroupSpec G = load_group_file(o.group_file);
    cfg.psl_mode = !o.no_psl;
    cfg.precision = (mpfr_prec_t)o.prec;
    cfg.seed = o.seed;
    TowerReport R = run_tower(G, cfg);
    std::cout << to_text(R);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << to_json(R).dump(2) << "\n";
        std::cout << "json report written to " << out_path << "\n";
    }
    return 0;
}

int cmd_check(const CommonOpts& o, const std::string& p_str, int i, size_t r_max,
              bool claim2, bool claim3) {
    GroupSpec G = load_group_file(o.group_file);
    bool psl = !o.no_psl;
    mpfr_prec_t prec = (mpfr_prec_t)o.prec;
    if (claim2) {
        auto ball = bfs_ball(G, r_max, psl);
        size_t pairs = 0, failures = 0;
        std::vector<const GroupMatrix*> mats;
        for (auto& [k, e] : ball.elements) {
            (void)k;
            mats.push_back(&e.matrix);
        }
        for (auto* M : mats)
            for (auto* N : mats) {
                ++pairs;
                if (!check_submultiplicative(*M, *N, prec).verified) ++failures;
            }
        std::cout << "submultiplicativity: " << pairs << " pairs, " << failures << " failures\n";
        if (failures) throw FalsifiedInvariant("height submultiplicativity failed");
    }
    if (claim3) {
        CongruenceLevel L = make_level(G, Int(p_str), i, o.seed);
        auto ball = bfs_ball(G, r_max, psl);
        size_t members = 0;
        for (auto& [k, e] : ball.elements) {
            (void)k;
            if (e.length == 0 || !membership(e.matrix, L, psl)) continue;
            claim3_certificate(e.matrix, L, prec); // throws FalsifiedInvariant on failure
            ++members;
        }
        std::cout << "height lower bound: " << members << " members certified at (p = " << p_str
                  << ", i = " << i << ")\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"congruence tower toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string p_str = "7", word, out_path;
    int i = 1;
    size_t r_max = 6, budget = 2'000'000;
    bool claim2 = false, claim3 = false;
    TowerConfig cfg;
    int i_min = 1, i_max = 1;
    double delta = 0.1;

    auto* field = app.add_subcommand("field", "number field and prime splitting");
    add_common(field, o);
    field->add_option("-p,--prime", p_str, "also show the splitting at this prime")
        ->default_str("");
    std::string field_p;
    field->callback([&] { field_p = field->count("--prime") ? p_str : ""; });

    auto* heights = app.add_subcommand("heights", "Weil heights of generators (and a word)");
    add_common(heights, o);
    heights->add_option("-w,--word", word, "also evaluate this word");

    auto* ball = app.add_subcommand("ball", "Cayley ball enumeration and growth counts");
    add_common(ball, o);
    ball->add_option("-R,--radius", r_max, "ball radius")->required();
    ball->add_option("--budget", budget, "element budget");

    auto* level = app.add_subcommand("level", "congruence level: splitting, index, bounds");
    add_common(level, o);
    level->add_option("-p,--prime", p_str, "prime p")->required();
    level->add_option("-i,--level", i, "level i");
    level->add_option("--budget", budget, "quotient element budget");

    auto* systole = app.add_subcommand("systole", "word and geodesic systole bounds");
    add_common(systole, o);
    systole->add_option("-p,--prime", p_str, "prime p")->required();
    systole->add_option("-i,--level", i, "level i");
    systole->add_option("-R,--radius", r_max, "BFS radius");

    auto* homology = app.add_subcommand("homology", "dim H_1(Gamma_i, F_p) via rewriting");
    add_common(homology, o);
    homology->add_option("-p,--prime", p_str, "prime p")->required();
    homology->add_option("-i,--level", i, "level i");
    homology->add_option("--budget", budget, "quotient element budget");

    auto* tower_cmd = app.add_subcommand("tower", "full per-level report (text + JSON)");
    add_common(tower_cmd, o);
    tower_cmd->add_option("-p,--prime", p_str, "prime p")->required();
    tower_cmd->add_option("--i-min", i_min, "first level");
    tower_cmd->add_option("--i-max", i_max, "last level");
    tower_cmd->add_option("-R,--radius", r_max, "BFS radius");
    tower_cmd->add_option("--delta", delta, "delta in the asymptotic constants");
    tower_cmd->add_option("--budget", budget, "quotient element budget");
    tower_cmd->add_option("--homology-max-index", cfg.homology_max_index,
                          "skip homology beyond this index");
    tower_cmd->add_option("-o,--out", out_path, "write the JSON report here");

    auto* check = app.add_subcommand("check", "rigorous inequality checks over the ball");
    add_common(check, o);
    check->add_flag("--claim2", claim2, "height submultiplicativity on all ball pairs");
    check->add_flag("--claim3", claim3, "height lower bound for congruence members");
    check->add_option("-p,--prime", p_str, "prime p (claim3)");
    check->add_option("-i,--level", i, "level i (claim3)");
    check->add_option("-R,--radius", r_max, "BFS radius");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*field) return cmd_field(o, field_p);
        if (*heights) return cmd_heights(o, word);
        if (*ball) return cmd_ball(o, r_max, budget);
        if (*level) return cmd_level(o, p_str, i, budget);
        if (*systole) return cmd_systole(o, p_str, i, r_max);
        if (*homology) return cmd_homology(o, p_str, i, budget);
        if (*tower_cmd) {
            cfg.p = Int(p_str);
            cfg.i_min = i_min;
            cfg.i_max = i_max;
            cfg.r_max = r_max;
            cfg.delta = delta;
            cfg.quotient_budget = budget;
            return cmd_tower(o, cfg, out_path);
        }
        if (*check) {
            if (!claim2 && !claim3) {
                std::cerr << "check: pass --claim2 and/or --claim3\n";
                return 2;
            }
            return cmd_check(o, p_str, i, r_max, claim2, claim3);
        }
    } catch (const FalsifiedInvariant& e) {
        std::cerr << "FALSIFIED: " << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const PrecisionCapExceeded& e) {
        std::cerr << "precision cap: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
