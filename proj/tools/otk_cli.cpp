#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "otk/folding.hpp"
#include "otk/json_io.hpp"
#include "otk/random_graph.hpp"
#include "otk/splittings.hpp"
#include "otk/whitehead.hpp"

using nlohmann::json;
using namespace otk;

namespace {

// exit codes: 0 ok, 2 validation failure, 3 budget exhausted, 4 usage
struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationFailure("cannot read " + path);
    json j;
    in >> j;
    return j;
}

MarkedGraph load_graph(const std::string& path) {
    MarkedGraph g = graph_from_json(load_json(path));
    auto issues = g.validate();
    if (!issues.empty()) throw ValidationFailure(path + ": " + issues.front());
    if (!g.marking().valid) throw ValidationFailure(path + ": marking is not valid");
    return g;
}

Word parse_word(const std::string& s) {
    std::vector<int> letters;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::stringstream ts(tok);
        int x;
        while (ts >> x) letters.push_back(x);
    }
    return Word(std::move(letters));
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream f(out);
        f << text << "\n";
    }
}

json factor_to_json(const FreeFactor& f) {
    json basis = json::array();
    for (const Word& w : f.basis()) basis.push_back(word_to_json(w));
    return json{{"rank", f.rank()}, {"basis", basis}};
}

json splitting_to_json(const FreeSplitting& s) {
    json sides = json::array();
    for (const FreeFactor& f : s.sides) sides.push_back(factor_to_json(f));
    return json{{"kind", s.kind == SplitKind::hnn ? "hnn" : "amalgam"}, {"sides", sides}};
}

FreeSplitting splitting_from_json(const json& j) {
    std::vector<FreeFactor> sides;
    for (const auto& js : j.at("sides")) {
        std::vector<Word> gens;
        for (const auto& jw : js.at("basis")) gens.push_back(word_from_json(jw));
        sides.push_back(FreeFactor::from_generators(gens));
    }
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "hnn") {
        if (sides.size() != 1) throw ValidationFailure("hnn splitting needs one side");
        return FreeSplitting::hnn(sides[0]);
    }
    if (sides.size() != 2) throw ValidationFailure("amalgam needs two sides");
    return FreeSplitting::amalgam(sides[0], sides[1]);
}

json morphism_to_json(const GraphMorphism& f) {
    json vimg = json::object();
    for (auto& [v, w] : f.vimg) vimg[std::to_string(v)] = w;
    json eimg = json::object();
    for (auto& [e, p] : f.eimg) eimg[std::to_string(e)] = path_to_json(p);
    return json{{"target_subdivision", graph_to_json(f.tsub)},
                {"vertex_image", vimg},
                {"edge_image", eimg}};
}

json fold_to_json(const Fold& f) {
    return json{{"vertex", f.vertex},
                {"turn", {f.turn.first, f.turn.second}},
                {"amount", to_string(f.amount)}};
}

json path_to_json_full(const FoldingPath& p) {
    json stages = json::array(), folds = json::array(), guides = json::array();
    for (const auto& g : p.stages) stages.push_back(graph_to_json(g));
    for (const auto& f : p.folds) folds.push_back(fold_to_json(f));
    for (const auto& g : p.guides) guides.push_back(morphism_to_json(g));
    json j{{"target", graph_to_json(p.target)},
           {"stages", stages},
           {"folds", folds},
           {"guides", guides}};
    if (p.normalized) {
        json ns = json::array(), sc = json::array();
        for (const auto& g : p.normalized_stages) ns.push_back(graph_to_json(g));
        for (const auto& s : p.scales) sc.push_back(to_string(s));
        j["normalized_stages"] = ns;
        j["scales"] = sc;
    }
    return j;
}

json path_summary(const FoldingPath& p) {
    json volumes = json::array(), proj = json::array();
    for (const auto& g : p.stages) {
        volumes.push_back(to_string(g.volume()));
        proj.push_back(factor_to_json(upsilon_F(g)));
    }
    return json{{"fold_count", p.folds.size()}, {"volumes", volumes}, {"projection", proj}};
}

FoldingPath run_skora(const MarkedGraph& s, const MarkedGraph& t, bool normalized, int budget) {
    if (s.rank() != t.rank()) throw ValidationFailure("rank mismatch");
    try {
        return skora_path(s, t, normalized, budget);
    } catch (const std::runtime_error&) {
        throw BudgetExhausted("fold budget exhausted");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact toolkit for marked metric graphs and folding paths"};
    app.require_subcommand(1);
    std::string out;
    app.add_option("--out", out, "write output here instead of stdout");

    // gen
    auto* gen = app.add_subcommand("gen", "generate random marked graphs");
    std::uint64_t seed = 1;
    int rank = 3, count = 1, extra = 2, twists = 3;
    std::string format = "json";
    gen->add_option("--seed", seed);
    gen->add_option("--rank", rank);
    gen->add_option("--count", count);
    gen->add_option("--extra-vertices", extra);
    gen->add_option("--twists", twists);
    gen->add_option("--format", format)->check(CLI::IsMember({"json", "dot"}));

    // skora
    auto* skora = app.add_subcommand("skora", "folding path between two graphs");
    std::string s_path, t_path;
    bool normalized = false;
    int budget = 100000;
    skora->add_option("source", s_path)->required();
    skora->add_option("target", t_path)->required();
    skora->add_flag("--normalized", normalized);
    skora->add_option("--budget", budget);

    // fold
    auto* fold = app.add_subcommand("fold", "single fold of the optimal map");
    std::string f_s, f_t, amount_str;
    int fd1 = 0, fd2 = 0;
    fold->add_option("source", f_s)->required();
    fold->add_option("target", f_t)->required();
    fold->add_option("--d1", fd1, "first turn direction (default: least illegal turn)");
    fold->add_option("--d2", fd2);
    fold->add_option("--amount", amount_str, "fold amount (default maximal)");

    // cert
    auto* cert = app.add_subcommand("cert", "distance certificates");
    std::string kind, c_a, c_b, chain_path, frac_str = "1/2";
    int c_edge = 1, c_ell = 2, c_rank = 3, c_k = 4;
    cert->add_option("kind", kind)->required()->check(CLI::IsMember({"fs", "ff", "dng"}));
    cert->add_option("first", c_a)->required();
    cert->add_option("second", c_b)->required();
    cert->add_option("--edge", c_edge, "target edge for fs");
    cert->add_option("--frac", frac_str, "position on the edge for fs");
    cert->add_option("--rank", c_rank, "ambient rank for ff");
    cert->add_option("--ell", c_ell, "factor rank for dng");
    cert->add_option("--k", c_k, "loop length bound for dng");
    cert->add_option("--chain", chain_path, "graph chain for dng");
    cert->add_option("--budget", budget);

    // whitehead
    auto* wh = app.add_subcommand("whitehead", "whitehead graph tools");
    std::string word_str;
    bool do_min = false, do_prim = false, do_dot = false;
    wh->add_option("--word", word_str)->required();
    wh->add_option("--rank", rank);
    wh->add_flag("--min", do_min);
    wh->add_flag("--primitive", do_prim);
    wh->add_flag("--graph-dot", do_dot);

    // project
    auto* proj = app.add_subcommand("project", "corank-one projection and one-edge collapses");
    std::string p_g;
    proj->add_option("graph", p_g)->required();

    // tie
    auto* tie = app.add_subcommand("tie", "search for a shared short free factor");
    std::string tie_s, tie_t;
    tie->add_option("source", tie_s)->required();
    tie->add_option("target", tie_t)->required();
    tie->add_option("--ell", c_ell);
    tie->add_option("--k", c_k);

    for (auto* sub : {gen, skora, fold, cert, wh, proj, tie}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 4;
    }

    try {
        if (gen->parsed()) {
            if (rank < 2) throw CLI::ValidationError("--rank", "rank must be at least 2");
            std::mt19937_64 rng(seed);
            if (format == "dot") {
                std::string text;
                for (int i = 0; i < count; ++i)
                    text += random_graph(rng, rank, extra, twists).dot();
                emit(out, text);
            } else {
                json arr = json::array();
                for (int i = 0; i < count; ++i)
                    arr.push_back(graph_to_json(random_graph(rng, rank, extra, twists)));
                emit(out, arr.dump(2));
            }
        } else if (skora->parsed()) {
            auto s = load_graph(s_path), t = load_graph(t_path);
            auto path = run_skora(s, t, normalized, budget);
            json j{{"path", path_to_json_full(path)}, {"summary", path_summary(path)}};
            emit(out, j.dump(2));
        } else if (fold->parsed()) {
            auto s = load_graph(f_s), t = load_graph(f_t);
            auto g = unit_rescale(optimal_map(s, t)).second;
            std::pair<int, int> turn{fd1, fd2};
            if (fd1 == 0 || fd2 == 0) {
                auto turns = g.illegal_turns();
                if (turns.empty()) throw ValidationFailure("no illegal turns to fold");
                turn = turns.front();
            }
            Rational amount =
                amount_str.empty() ? max_foldable(g, turn) : parse_rational(amount_str);
            FoldResult fr;
            try {
                fr = fold_turn(g, turn, amount);
            } catch (const std::domain_error& e) {
                throw ValidationFailure(e.what());
            }
            json j{{"fold", fold_to_json(fr.fold)},
                   {"folded", graph_to_json(fr.folded)},
                   {"fold_map", morphism_to_json(fr.fold_map)},
                   {"guide", morphism_to_json(fr.guide)}};
            emit(out, j.dump(2));
        } else if (cert->parsed()) {
            if (kind == "fs") {
                auto s = load_graph(c_a), t = load_graph(c_b);
                if (s.rank() != t.rank()) throw ValidationFailure("rank mismatch");
                FSCertificate fc;
                try {
                    fc = fs_distance_certificate(optimal_map(s, t), c_edge,
                                                 parse_rational(frac_str), budget);
                } catch (const std::runtime_error&) {
                    throw BudgetExhausted("fold budget exhausted");
                }
                json steps = json::array();
                for (const auto& st : fc.steps)
                    steps.push_back(json{{"splitting", splitting_to_json(st.splitting)},
                                         {"stage", st.stage},
                                         {"edge", st.edge}});
                json j{{"valid", fc.valid},
                       {"note", fc.note},
                       {"preimage_count", fc.preimage_count},
                       {"stage_preimage_counts", fc.stage_preimage_counts},
                       {"steps", steps}};
                emit(out, j.dump(2));
                if (!fc.valid) return 2;
            } else if (kind == "ff") {
                auto x = splitting_from_json(load_json(c_a));
                auto y = splitting_from_json(load_json(c_b));
                auto w = common_refinement(x, y, c_rank);
                if (!w.found) throw ValidationFailure("no refinement witness found: " + w.note);
                auto fc = ff_adjacency_certificate(x, y, w, c_rank);
                json chain = json::array();
                for (const auto& f : fc.chain) chain.push_back(factor_to_json(f));
                json j{{"valid", fc.valid}, {"note", fc.note}, {"chain", chain}};
                emit(out, j.dump(2));
                if (!fc.valid) return 2;
            } else {
                auto s = load_graph(c_a), t = load_graph(c_b);
                std::vector<MarkedGraph> chain;
                if (!chain_path.empty())
                    for (const auto& jg : load_json(chain_path)) {
                        MarkedGraph g = graph_from_json(jg);
                        if (!g.is_valid()) throw ValidationFailure("invalid chain entry");
                        chain.push_back(std::move(g));
                    }
                auto d = dng_distance_upper(s, t, c_ell, chain, c_k);
                json wits = json::array();
                for (const auto& f : d.witnesses) wits.push_back(factor_to_json(f));
                json j{{"ok", d.ok},
                       {"failed_index", d.failed_index},
                       {"bound", d.bound},
                       {"witnesses", wits}};
                emit(out, j.dump(2));
                if (!d.ok) return 2;
            }
        } else if (wh->parsed()) {
            Word w = parse_word(word_str);
            int n = std::max(rank, w.max_generator());
            json j{{"word", word_to_json(w)}, {"rank", n}};
            auto g = whitehead_graph({w}, n);
            j["connected"] = is_connected(g);
            j["cut_vertex"] = has_cut_vertex(g);
            if (do_min) {
                auto mr = minimize(w, n);
                j["minimum"] = word_to_json(mr.word);
                j["moves"] = mr.applied.size();
            }
            if (do_prim) j["primitive"] = is_primitive(w, n);
            if (do_dot) j["dot"] = g.dot();
            emit(out, j.dump(2));
        } else if (proj->parsed()) {
            auto g = load_graph(p_g);
            json sp = json::array();
            for (auto& [eid, s] : upsilon(g))
                sp.push_back(json{{"edge", eid}, {"splitting", splitting_to_json(s)}});
            json j{{"edge", upsilon_F_edge(g)},
                   {"factor", factor_to_json(upsilon_F(g))},
                   {"splittings", sp}};
            emit(out, j.dump(2));
        } else if (tie->parsed()) {
            auto s = load_graph(tie_s), t = load_graph(tie_t);
            TieResult tr;
            try {
                tr = is_tied(s, t, c_ell, c_k);
            } catch (const std::invalid_argument& e) {
                throw ValidationFailure(e.what());
            }
            json j{{"found", tr.found}, {"note", tr.note}};
            if (tr.found) j["witness"] = factor_to_json(tr.witness);
            emit(out, j.dump(2));
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const BudgetExhausted& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const ValidationFailure& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}
