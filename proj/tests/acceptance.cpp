// End-to-end property checks over seeded random corpora. Each numbered
// check prints a single PASS/FAIL line; the exit code is the failure count.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otk/folding.hpp"
#include "otk/json_io.hpp"
#include "otk/random_graph.hpp"
#include "otk/splittings.hpp"
#include "otk/whitehead.hpp"

using namespace otk;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;
std::string detail;

void report(int num, const std::string& what, bool ok) {
    std::printf("criterion %2d: %s — %s%s%s\n", num, ok ? "PASS" : "FAIL", what.c_str(),
                detail.empty() ? "" : "; ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
    detail.clear();
}

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// --- 1: short bases ---------------------------------------------------------

bool check_short_bases() {
    auto t0 = clock_type::now();
    std::mt19937_64 rng(101);
    for (int i = 0; i < 200; ++i) {
        int rank = 3 + i % 3;
        MarkedGraph g = random_graph(rng, rank);
        ShortBasis sb = g.short_basis();
        if (static_cast<int>(sb.words.size()) != rank) {
            detail = "basis size mismatch at sample " + std::to_string(i);
            return false;
        }
        if (sb.max_loop_length > 2) {
            detail = "loop longer than 2 at sample " + std::to_string(i);
            return false;
        }
        for (std::size_t k = 0; k < sb.words.size(); ++k) {
            const EdgePath& l = sb.loops[k];
            if (!g.path_well_formed(l) || g.src(l.dirs.front()) != sb.base_vertex ||
                g.dst(l.dirs.back()) != sb.base_vertex ||
                !(g.path_label(l) == sb.words[k]) || g.path_length(l) > 2) {
                detail = "loop does not realize its word at sample " + std::to_string(i);
                return false;
            }
        }
        if (!(FreeFactor::from_generators(sb.words) == FreeFactor::whole_group(rank))) {
            detail = "words fail to fold to the rose at sample " + std::to_string(i);
            return false;
        }
    }
    double dt = seconds_since(t0);
    detail = "200 graphs in " + std::to_string(dt) + "s";
    return dt < 10.0;
}

// --- 2: fold accounting -----------------------------------------------------

bool final_stage_isometric(const FoldingPath& path) {
    const GraphMorphism& f = path.guides.back();
    if (!f.illegal_turns().empty()) return false;
    for (const Edge& e : f.source.edges())
        if (f.stretch(e.id) != Rational(1)) return false;
    if (f.source.volume() != f.target.volume()) return false;
    return f.marking_compatible();
}

bool check_fold_accounting() {
    std::mt19937_64 rng(202);
    for (int i = 0; i < 100; ++i) {
        MarkedGraph s = random_graph(rng, 3);
        MarkedGraph t = random_graph(rng, 3);
        FoldingPath path;
        try {
            path = skora_path(s, t, false, 60);
        } catch (const std::exception& e) {
            detail = std::string(e.what()) + " at sample " + std::to_string(i);
            return false;
        }
        for (std::size_t k = 0; k < path.folds.size(); ++k) {
            if (Rational(path.stages[k].volume() - path.stages[k + 1].volume()) !=
                path.folds[k].amount) {
                detail = "volume drop mismatch at sample " + std::to_string(i);
                return false;
            }
        }
        if (!final_stage_isometric(path)) {
            detail = "final stage not isometric to the target at sample " + std::to_string(i);
            return false;
        }
    }
    return true;
}

// --- 3: composition of stage maps -------------------------------------------

bool check_decompose_semigroup() {
    std::mt19937_64 rng(303);
    for (int i = 0; i < 50; ++i) {
        FoldingPath path = skora_path(random_graph(rng, 3), random_graph(rng, 3));
        std::size_t m = path.stages.size();
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        for (int j = 0; j < 10; ++j) {
            std::vector<std::size_t> idx{pick(rng), pick(rng), pick(rng)};
            std::sort(idx.begin(), idx.end());
            auto [s, t, u] = std::tuple{idx[0], idx[1], idx[2]};
            if (!same_map(decompose(path, s, u),
                          compose(decompose(path, t, u), decompose(path, s, t)))) {
                detail = "composition mismatch at sample " + std::to_string(i);
                return false;
            }
        }
    }
    return true;
}

// --- 4: translation length monotonicity -------------------------------------

bool check_length_monotone() {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> wl(1, 8);
    for (int i = 0; i < 50; ++i) {
        MarkedGraph t = random_graph(rng, 3);
        FoldingPath path = skora_path(random_graph(rng, 3), t);
        for (int j = 0; j < 20; ++j) {
            Word w = random_word(rng, 3, wl(rng));
            Rational prev = path.stages.front().translation_length(w);
            for (std::size_t k = 1; k < path.stages.size(); ++k) {
                Rational cur = path.stages[k].translation_length(w);
                if (cur > prev) {
                    detail = "length grew along the path at sample " + std::to_string(i);
                    return false;
                }
                prev = cur;
            }
            if (t.translation_length(w) > prev) {
                detail = "target length above the final stage at sample " + std::to_string(i);
                return false;
            }
        }
    }
    return true;
}

// --- 5: Lipschitz constants -------------------------------------------------

bool check_lipschitz() {
    std::mt19937_64 rng(505);
    std::vector<Rational> lambdas{Rational(1, 2), Rational(2), Rational(3, 7), Rational(5),
                                  Rational(13, 4)};
    for (int i = 0; i < 100; ++i) {
        int rank = 2 + i % 2;
        MarkedGraph s = random_graph(rng, rank);
        MarkedGraph t = random_graph(rng, rank);
        Rational lam = lipschitz_constant(s, t);
        if (optimal_map(s, t).max_stretch() != lam) {
            detail = "descent missed the candidate bound at sample " + std::to_string(i);
            return false;
        }
        if (lipschitz_constant(s, s) != Rational(1)) {
            detail = "sigma(G,G) != 1 at sample " + std::to_string(i);
            return false;
        }
        if (i < 5) {
            for (const Rational& l : lambdas) {
                if (lipschitz_constant(s, t.scaled(l)) != Rational(l * lam)) {
                    detail = "homogeneity failed at sample " + std::to_string(i);
                    return false;
                }
            }
        }
    }
    return true;
}

// --- 6: splitting chains along folding paths --------------------------------

// largest observed steps-per-preimage ratio, pinned after the first run
const double kMaxStepsPerPreimage = 3.0;

bool check_fs_certificates() {
    std::mt19937_64 rng(606);
    int done = 0, attempts = 0;
    double worst = 0;
    while (done < 50) {
        if (++attempts > 500) {
            detail = "corpus generation stalled";
            return false;
        }
        MarkedGraph s = random_graph(rng, 3);
        MarkedGraph t = random_graph(rng, 3);
        std::uniform_int_distribution<std::size_t> pe(0, t.edges().size() - 1);
        int y_edge = t.edges()[pe(rng)].id;
        std::uniform_int_distribution<int> pf(1, 6);
        Rational y_frac(pf(rng), 7);
        FSCertificate cert;
        try {
            cert = fs_distance_certificate(optimal_map(s, t), y_edge, y_frac);
        } catch (const std::exception& e) {
            detail = e.what();
            return false;
        }
        if (cert.preimage_count < 1 || cert.preimage_count > 3) continue;
        ++done;
        if (!cert.valid) {
            detail = cert.note + " (attempt " + std::to_string(attempts) + ")";
            return false;
        }
        worst = std::max(worst,
                         static_cast<double>(cert.steps.size()) / cert.preimage_count);
    }
    detail = "max steps per preimage " + std::to_string(worst);
    return worst <= kMaxStepsPerPreimage;
}

// --- 7: free factor chains for refinable splitting pairs ---------------------

bool check_ff_certificates() {
    std::mt19937_64 rng(707);
    int done = 0, attempts = 0;
    while (done < 50) {
        if (++attempts > 2000) {
            detail = "corpus generation stalled at " + std::to_string(done);
            return false;
        }
        MarkedGraph a = random_graph(rng, 3);
        MarkedGraph b = random_graph(rng, 3);
        std::uniform_int_distribution<std::size_t> pa(0, a.edges().size() - 1);
        std::uniform_int_distribution<std::size_t> pb(0, b.edges().size() - 1);
        FreeSplitting x = upsilon_edge(a, a.edges()[pa(rng)].id);
        FreeSplitting y = upsilon_edge(b, b.edges()[pb(rng)].id);
        RefinementWitness w = common_refinement(x, y, 3);
        if (!w.found) continue;
        FFCertificate cert = ff_adjacency_certificate(x, y, w, 3);
        if (!cert.valid) {
            detail = cert.note;
            return false;
        }
        if (cert.chain.size() > 9) {
            detail = "chain of " + std::to_string(cert.chain.size()) + " factors";
            return false;
        }
        ++done;
    }
    return true;
}

// --- 8: collapse certificates -----------------------------------------------

bool check_collapse_certificates() {
    std::mt19937_64 rng(808);
    int done = 0, attempts = 0;
    while (done < 50) {
        if (++attempts > 1000) {
            detail = "corpus generation stalled";
            return false;
        }
        MarkedGraph g = random_graph(rng, 2 + done % 3);
        std::vector<int> tree;
        for (const Edge& e : g.edges())
            if (e.from != e.to) tree.push_back(e.id);
        if (tree.empty()) continue;
        std::uniform_int_distribution<std::size_t> pe(0, tree.size() - 1);
        NearbyCertificate cert = collapse_nearby_certificate(g, {tree[pe(rng)]});
        if (!cert.valid) {
            detail = cert.note;
            return false;
        }
        ++done;
    }
    return true;
}

// --- 9: whitehead oracle agreement ------------------------------------------

void enumerate_reduced(int rank, int len, std::vector<int>& cur,
                       std::vector<Word>& out, std::set<std::vector<int>>& seen) {
    if (static_cast<int>(cur.size()) == len) {
        Word w(cur);
        if (w.cyclic_reduction().size() != w.size())return;  // not cyclically reduced
        if (seen.insert(w.cyclic_key()).second) out.push_back(w);
        return;
    }
    for (int x = -rank; x <= rank; ++x) {
        if (x == 0 || (!cur.empty() && cur.back() == -x)) continue;
        cur.push_back(x);
        enumerate_reduced(rank, len, cur, out, seen);
        cur.pop_back();
    }
}

bool check_whitehead_oracle() {
    auto t0 = clock_type::now();
    std::vector<Word> words;
    std::set<std::vector<int>> seen;
    for (int len = 1; len <= 6; ++len) {
        std::vector<int> cur;
        enumerate_reduced(2, len, cur, words, seen);
    }
    std::mt19937_64 rng(909);
    std::uniform_int_distribution<int> wl(1, 6);
    std::vector<std::pair<Word, int>> cases;
    for (const Word& w : words) cases.push_back({w, 2});
    int added = 0;
    std::set<std::vector<int>> seen3;
    while (added < 500) {
        Word w = random_word(rng, 3, wl(rng));
        if (w.cyclic_reduction().size() != w.size())continue;
        if (!seen3.insert(w.cyclic_key()).second) continue;
        cases.push_back({w, 3});
        ++added;
    }
    for (const auto& [w, rank] : cases) {
        bool fast = is_primitive(w, rank);
        bool slow = orbit_reaches_primitive(w, rank, 6);
        if (fast != slow) {
            detail = "oracle disagreement at rank " + std::to_string(rank);
            return false;
        }
        if (fast) {
            WhiteheadGraph wg = whitehead_graph({minimize(w, rank).word}, rank);
            if (is_connected(wg) && !has_cut_vertex(wg)) {
                detail = "primitive minimum with 2-connected whitehead graph";
                return false;
            }
        }
    }
    double dt = seconds_since(t0);
    detail = std::to_string(cases.size()) + " words in " + std::to_string(dt) + "s";
    return dt < 60.0;
}

// --- 10: collapse squares ---------------------------------------------------

bool check_collapse_squares() {
    std::mt19937_64 rng(1010);
    int done = 0, attempts = 0;
    while (done < 30) {
        if (++attempts > 300) {
            detail = "corpus generation stalled at " + std::to_string(done);
            return false;
        }
        MarkedGraph s = random_graph(rng, 3);
        MarkedGraph t = random_graph(rng, 3);
        FoldingPath path = skora_path(s, t);
        std::vector<int> tree;
        for (const Edge& e : path.stages.back().edges())
            if (e.from != e.to) tree.push_back(e.id);
        if (tree.empty()) continue;
        std::shuffle(tree.begin(), tree.end(), rng);
        CollapsedPath cp;
        bool usable = false;
        for (int eid : tree) {
            try {
                cp = collapse_along_path(path, {eid});
            } catch (const std::invalid_argument&) {
                continue;  // pullback hit a cycle; try another edge
            }
            bool nonempty = true;
            for (const auto& f : cp.forests) nonempty = nonempty && !f.empty();
            if (nonempty) {
                usable = true;
                break;
            }
        }
        if (!usable) continue;
        for (std::size_t k = 0; k + 1 < path.stages.size(); ++k) {
            if (!same_map(compose(cp.verticals[k + 1], path.fold_maps[k]),
                          compose(cp.path.fold_maps[k], cp.verticals[k]))) {
                detail = "square failed at stage " + std::to_string(k);
                return false;
            }
        }
        ++done;
    }
    return true;
}

// --- 11: CLI determinism ----------------------------------------------------

std::string run_cli(const std::string& bin, const std::string& args, int* code) {
    std::string tmp = "acceptance_cli_out.txt";
    int rc = std::system((bin + " " + args + " > " + tmp + " 2>/dev/null").c_str());
    if (code) *code = WEXITSTATUS(rc);
    std::ifstream in(tmp);
    std::stringstream ss;
    ss << in.rdbuf();
    std::remove(tmp.c_str());
    return ss.str();
}

bool check_cli_determinism() {
    const char* env = std::getenv("OTK_BIN");
    std::string bin = env ? env : "./otk";
    std::mt19937_64 rng(1111);
    {
        std::ofstream("acceptance_a.json") << graph_to_json(random_graph(rng, 3));
        std::ofstream("acceptance_b.json") << graph_to_json(random_graph(rng, 3));
    }
    std::vector<std::string> corpus = {
        "gen --seed 3 --rank 2 --count 2",
        "gen --seed 4 --rank 3 --count 2",
        "gen --seed 4 --rank 4 --count 1 --format dot",
        "skora acceptance_a.json acceptance_b.json",
        "skora acceptance_a.json acceptance_b.json --normalized",
        "cert fs acceptance_a.json acceptance_b.json --edge 1 --frac 2/5",
        "whitehead --word \"1 2 -1 -2 3\" --rank 3 --min --primitive",
        "project acceptance_a.json",
        "tie acceptance_a.json acceptance_b.json --ell 2",
    };
    bool ok = true;
    for (const std::string& cmd : corpus) {
        int c1 = 0, c2 = 0;
        std::string o1 = run_cli(bin, cmd, &c1);
        std::string o2 = run_cli(bin, cmd, &c2);
        if (o1 != o2 || c1 != c2 || o1.empty()) {
            detail = "nondeterministic or empty: " + cmd;
            ok = false;
            break;
        }
    }
    std::remove("acceptance_a.json");
    std::remove("acceptance_b.json");
    return ok;
}

}  // namespace

int main() {
    report(1, "short bases are free bases with loops of length at most 2",
           check_short_bases());
    report(2, "folds drop volume exactly and end at the target", check_fold_accounting());
    report(3, "stage maps compose as a semigroup", check_decompose_semigroup());
    report(4, "translation lengths are monotone along paths", check_length_monotone());
    report(5, "optimal maps attain the candidate lipschitz constant", check_lipschitz());
    report(6, "splitting chains validate with bounded length per preimage",
           check_fs_certificates());
    report(7, "refinable splitting pairs give short free factor chains",
           check_ff_certificates());
    report(8, "graph and forest collapse share a one-edge splitting",
           check_collapse_certificates());
    report(9, "greedy primitivity agrees with orbit search", check_whitehead_oracle());
    report(10, "collapse squares commute at every stage", check_collapse_squares());
    report(11, "cli output is byte-identical per seed", check_cli_determinism());
    return failures;
}
