#include "otk/splittings.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "otk/json_io.hpp"
#include "otk/whitehead.hpp"

#include <nlohmann/json.hpp>

namespace otk {

FreeSplitting FreeSplitting::amalgam(FreeFactor a, FreeFactor b) {
    FreeSplitting s;
    s.kind = SplitKind::amalgam;
    s.sides = {std::move(a), std::move(b)};
    if (s.sides[1].key() < s.sides[0].key()) std::swap(s.sides[0], s.sides[1]);
    return s;
}

FreeSplitting FreeSplitting::hnn(FreeFactor a) {
    FreeSplitting s;
    s.kind = SplitKind::hnn;
    s.sides = {std::move(a)};
    return s;
}

std::string FreeSplitting::key() const {
    std::string k = kind == SplitKind::amalgam ? "A|" : "H|";
    for (const FreeFactor& f : sides) k += f.key() + "|";
    return k;
}

std::string CyclicSplitting::key() const {
    std::string k = kind == SplitKind::amalgam ? "ZA|" : "ZH|";
    std::vector<std::string> sk;
    for (const FreeFactor& f : sides) sk.push_back(f.key());
    std::sort(sk.begin(), sk.end());
    for (const std::string& s : sk) k += s + "|";
    k += "w:";
    for (int x : edge_word.cyclic_key()) k += std::to_string(x) + ",";
    return k;
}

namespace {

// spanning-tree basis adapted to one edge: the tree avoids eid when eid is
// non-separating and contains it otherwise; each non-tree edge f yields the
// basis word (root -> f.from) . label(f) . (f.to -> root)
struct EdgeBasis {
    bool separating = false;
    std::map<int, Word> words;  // non-tree edge id -> word
    std::map<int, int> side;    // separating case: 0 = component of eid's from-end
};

EdgeBasis edge_adapted_basis(const MarkedGraph& g, int eid) {
    EdgeBasis eb;
    const Edge& e = g.edge(eid);
    // component of e.from in G minus e
    std::set<int> comp0{e.from};
    std::deque<int> todo{e.from};
    while (!todo.empty()) {
        int v = todo.front();
        todo.pop_front();
        for (int d : g.dirs_at(v)) {
            if (std::abs(d) == eid) continue;
            int w = g.dst(d);
            if (comp0.insert(w).second) todo.push_back(w);
        }
    }
    eb.separating = !comp0.count(e.to);

    int root = g.vertices().front();
    std::map<int, Word> to_root{{root, Word()}};
    std::set<int> tree;
    todo = {root};
    auto grow = [&](bool allow_e) {
        while (!todo.empty()) {
            int v = todo.front();
            todo.pop_front();
            for (int d : g.dirs_at(v)) {
                if (!allow_e && std::abs(d) == eid) continue;
                int w = g.dst(d);
                if (to_root.count(w)) continue;
                to_root[w] = to_root[v] * g.dir_label(d);
                tree.insert(std::abs(d));
                todo.push_back(w);
            }
        }
    };
    grow(false);
    if (to_root.size() != g.vertices().size()) {
        // eid is the only bridge to the rest
        for (int v : g.vertices())
            if (to_root.count(v)) todo.push_back(v);
        grow(true);
    }
    for (const Edge& f : g.edges()) {
        if (tree.count(f.id)) continue;
        eb.words[f.id] = to_root[f.from] * f.label * to_root[f.to].inverse();
        if (eb.separating) eb.side[f.id] = comp0.count(f.from) ? 0 : 1;
    }
    return eb;
}

}  // namespace

FreeSplitting upsilon_edge(const MarkedGraph& g, int eid) {
    EdgeBasis eb = edge_adapted_basis(g, eid);
    if (eb.separating) {
        std::vector<Word> a, b;
        for (auto& [id, w] : eb.words) (eb.side[id] == 0 ? a : b).push_back(w);
        return FreeSplitting::amalgam(FreeFactor::from_generators(a), FreeFactor::from_generators(b));
    }
    std::vector<Word> gens;
    for (auto& [id, w] : eb.words)
        if (id != eid) gens.push_back(w);
    return FreeSplitting::hnn(FreeFactor::from_generators(gens));
}

std::vector<std::pair<int, FreeSplitting>> upsilon(const MarkedGraph& g) {
    std::vector<std::pair<int, FreeSplitting>> out;
    for (const Edge& e : g.edges()) out.push_back({e.id, upsilon_edge(g, e.id)});
    return out;
}

int upsilon_F_edge(const MarkedGraph& g) {
    int best = 0;
    for (const Edge& e : g.edges())
        if (best == 0 || e.length > g.edge(best).length) best = e.id;
    return best;
}

FreeFactor upsilon_F(const MarkedGraph& g) {
    int eid = upsilon_F_edge(g);
    EdgeBasis eb = edge_adapted_basis(g, eid);
    if (!eb.separating) {
        std::vector<Word> gens;
        for (auto& [id, w] : eb.words)
            if (id != eid) gens.push_back(w);
        return FreeFactor::from_generators(gens);
    }
    // separating: larger-rank side, completed to corank one with the other
    // side's words minus the highest edge id
    std::vector<std::pair<int, Word>> s0, s1;
    for (auto& [id, w] : eb.words) (eb.side[id] == 0 ? s0 : s1).push_back({id, w});
    if (s0.size() < s1.size()) std::swap(s0, s1);
    std::vector<Word> gens;
    for (auto& [id, w] : s0) gens.push_back(w);
    for (std::size_t i = 0; i + 1 < s1.size(); ++i) gens.push_back(s1[i].second);
    return FreeFactor::from_generators(gens);
}

namespace {

std::vector<Word> u_candidates(const FreeFactor& a) {
    std::vector<Word> base = a.basis();
    std::vector<Word> out = base;
    std::vector<Word> signed_base = base;
    for (const Word& w : base) signed_base.push_back(w.inverse());
    for (const Word& x : signed_base)
        for (const Word& y : signed_base) {
            Word p = x * y;
            if (!p.trivial()) out.push_back(p);
        }
    return out;
}

std::optional<Word> complete_to(const std::vector<Word>& b_gens, const FreeFactor& target) {
    for (const Word& u : u_candidates(target)) {
        std::vector<Word> gens = b_gens;
        gens.push_back(u);
        if (FreeFactor::from_generators(gens) == target) return u;
    }
    return std::nullopt;
}

}  // namespace

RefinementWitness common_refinement(const FreeSplitting& x, const FreeSplitting& y, int rank) {
    RefinementWitness w;
    if (x == y) {
        w.found = true;
        w.note = "equal splittings";
        return w;
    }
    if (x.kind != SplitKind::hnn || y.kind != SplitKind::hnn || rank < 3) {
        w.note = "none-found-within-bounds: refinement search covers HNN pairs at rank >= 3";
        return w;
    }
    const FreeFactor& a = x.sides[0];
    const FreeFactor& c = y.sides[0];
    FreeFactor whole = FreeFactor::whole_group(rank);
    for (const FreeFactor& b : factor_intersections(a, c)) {
        if (b.rank() != rank - 2) continue;
        std::vector<Word> b_gens = b.basis();
        auto u = complete_to(b_gens, a);
        if (!u) continue;
        auto d = complete_to(b_gens, c);
        if (!d) continue;
        std::vector<Word> all = b_gens;
        all.push_back(*u);
        all.push_back(*d);
        if (FreeFactor::from_generators(all) != whole) continue;
        w.found = true;
        w.b_gens = std::move(b_gens);
        w.u = *u;
        w.d = *d;
        return w;
    }
    w.note = "none-found-within-bounds: no completable corank-two intersection";
    return w;
}

EdgeFoldResult edge_fold(const FreeSplitting& x, const Word& c, int rank) {
    EdgeFoldResult r;
    if (x.kind != SplitKind::amalgam) {
        r.error = "edge fold requires an amalgam";
        return r;
    }
    if (c.trivial()) {
        r.error = "edge word is trivial";
        return r;
    }
    auto [root, power] = c.primitive_root();
    if (power > 1) {
        r.error = "edge word is a proper power";
        r.root = root;
        return r;
    }
    FreeFactor cfac = FreeFactor::from_generators({c});
    const FreeFactor* a = nullptr;
    for (const FreeFactor& side : x.sides)
        if (factor_contains(side, cfac)) {
            a = &side;
            break;
        }
    if (!a) {
        r.error = "edge word lies in neither vertex group";
        return r;
    }
    const FreeFactor& b = x.sides[0] == *a ? x.sides[1] : x.sides[0];
    std::vector<Word> gens = b.basis();
    gens.push_back(c);
    r.ok = true;
    r.splitting.kind = SplitKind::amalgam;
    r.splitting.sides = {*a, FreeFactor::from_generators(gens)};
    r.splitting.edge_word = Word(c.cyclic_key());
    (void)rank;
    return r;
}

FreeFactor splitting_projection(const FreeSplitting& x) {
    if (x.kind == SplitKind::hnn) return x.sides[0];
    return x.sides[0].rank() >= x.sides[1].rank() ? x.sides[0] : x.sides[1];
}

namespace {

bool nested(const FreeFactor& a, const FreeFactor& b) {
    return factor_contains(a, b) || factor_contains(b, a);
}

bool validate_chain(const std::vector<FreeFactor>& chain) {
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        if (!nested(chain[i], chain[i + 1])) return false;
    return true;
}

void push_unique(std::vector<FreeFactor>& chain, const FreeFactor& f) {
    if (chain.empty() || chain.back() != f) chain.push_back(f);
}

// path between the two sides of one amalgam: A >= <a1> <= <a1>*B <= ... >= B
void amalgam_cross(std::vector<FreeFactor>& chain, const FreeFactor& from, const FreeFactor& to) {
    Word a1 = from.basis().front();
    std::vector<Word> joint = to.basis();
    joint.push_back(a1);
    push_unique(chain, from);
    push_unique(chain, FreeFactor::from_generators({a1}));
    push_unique(chain, FreeFactor::from_generators(joint));
    push_unique(chain, to);
}

}  // namespace

FFCertificate ff_adjacency_certificate(const FreeSplitting& x, const FreeSplitting& y,
                                       const RefinementWitness& witness, int rank) {
    FFCertificate cert;
    FreeFactor rx = splitting_projection(x), ry = splitting_projection(y);
    if (x == y) {
        cert.chain = {rx};
        cert.valid = true;
        return cert;
    }
    if (!witness.found) {
        cert.note = "witness missing";
        return cert;
    }
    if (witness.b_gens.empty()) {
        cert.note = "witness has no middle factor";
        return cert;
    }
    // re-validate the witness
    FreeFactor b = FreeFactor::from_generators(witness.b_gens);
    std::vector<Word> au = witness.b_gens, cd = witness.b_gens, all = witness.b_gens;
    au.push_back(witness.u);
    cd.push_back(witness.d);
    all.push_back(witness.u);
    all.push_back(witness.d);
    FreeFactor a = FreeFactor::from_generators(au), c = FreeFactor::from_generators(cd);
    if (FreeFactor::from_generators(all) != FreeFactor::whole_group(rank)) {
        cert.note = "witness does not assemble the whole group";
        return cert;
    }
    auto side_matching = [&](const FreeSplitting& s, const FreeFactor& f) -> const FreeFactor* {
        for (const FreeFactor& side : s.sides)
            if (side == f) return &side;
        return nullptr;
    };
    if (!side_matching(x, a) || !side_matching(y, c)) {
        cert.note = "witness sides do not match the splittings";
        return cert;
    }
    std::vector<FreeFactor> chain;
    if (rx != a)
        amalgam_cross(chain, rx, a);
    else
        push_unique(chain, a);
    push_unique(chain, b);
    if (ry != c) {
        amalgam_cross(chain, c, ry);
    } else {
        push_unique(chain, c);
    }
    if (chain.size() > 9) {  // more than 8 edges
        cert.note = "chain too long";
        return cert;
    }
    if (!validate_chain(chain)) {
        cert.note = "containment validation failed";
        return cert;
    }
    cert.chain = std::move(chain);
    cert.valid = true;
    return cert;
}

FreeFactor smallest_containing_factor(const Word& w, int rank) {
    if (w.trivial()) throw std::invalid_argument("trivial word");
    Word cur = w.cyclic_reduction();
    std::vector<WhiteheadAut> seq;
    auto auts = whitehead_automorphisms(rank);
    auto used_letters = [](const Word& v) {
        std::set<int> s;
        for (int x : v.letters()) s.insert(std::abs(x));
        return s;
    };
    bool improved = true;
    while (improved) {
        improved = false;
        // strict length descent
        for (const WhiteheadAut& aut : auts) {
            Word img = aut.apply(cur).cyclic_reduction();
            if (img.size() < cur.size()) {
                cur = img;
                seq.push_back(aut);
                improved = true;
                break;
            }
        }
        if (improved) continue;
        // at minimal length, search level moves for a smaller letter support
        std::set<std::vector<int>> seen{cur.cyclic_key()};
        std::deque<std::pair<Word, std::vector<WhiteheadAut>>> todo{{cur, {}}};
        std::size_t target = used_letters(cur).size();
        int expanded = 0;
        while (!todo.empty() && expanded < 2000) {
            auto [v, path] = todo.front();
            todo.pop_front();
            ++expanded;
            for (const WhiteheadAut& aut : auts) {
                Word img = aut.apply(v).cyclic_reduction();
                if (img.size() != cur.size()) continue;
                if (!seen.insert(img.cyclic_key()).second) continue;
                auto p2 = path;
                p2.push_back(aut);
                if (used_letters(img).size() < target) {
                    cur = img;
                    seq.insert(seq.end(), p2.begin(), p2.end());
                    improved = true;
                    break;
                }
                if (p2.size() < 4) todo.push_back({img, std::move(p2)});
            }
            if (improved) break;
        }
    }
    // transport <letters of cur> back through the inverse automorphisms
    std::vector<Word> gens;
    for (int i : used_letters(cur)) {
        Word g = Word::generator(i);
        for (auto it = seq.rbegin(); it != seq.rend(); ++it) g = it->inverse().apply(g);
        gens.push_back(g);
    }
    return FreeFactor::from_generators(gens);
}

FFCertificate ff_adjacency_certificate_zsplit(const FreeSplitting& x, const Word& cx,
                                              const FreeSplitting& y, const Word& cy, int rank) {
    FFCertificate cert;
    EdgeFoldResult fx = edge_fold(x, cx, rank), fy = edge_fold(y, cy, rank);
    if (!fx.ok || !fy.ok) {
        cert.note = "edge fold failed: " + (fx.ok ? fy.error : fx.error);
        return cert;
    }
    if (!(fx.splitting == fy.splitting)) {
        cert.note = "folds do not share a cyclic splitting";
        return cert;
    }
    FreeFactor rx = splitting_projection(x), ry = splitting_projection(y);
    if (x == y) {
        cert.chain = {rx};
        cert.valid = true;
        return cert;
    }
    FreeFactor fw = smallest_containing_factor(cx, rank);
    FreeFactor cfac = FreeFactor::from_generators({Word(cx.cyclic_key())});
    // side of x containing the edge word
    auto side_with = [&](const FreeSplitting& s, const FreeFactor& cf) -> const FreeFactor* {
        for (const FreeFactor& side : s.sides)
            if (factor_contains(side, cf)) return &side;
        return nullptr;
    };
    const FreeFactor* sx = side_with(x, cfac);
    const FreeFactor* sy = side_with(y, FreeFactor::from_generators({Word(cy.cyclic_key())}));
    if (!sx || !sy) {
        cert.note = "edge word not in a vertex group";
        return cert;
    }
    std::vector<FreeFactor> chain;
    if (rx != *sx)
        amalgam_cross(chain, rx, *sx);
    else
        push_unique(chain, rx);
    if (fw.rank() < rank) push_unique(chain, fw);  // whole group is not an FF vertex
    if (ry != *sy)
        amalgam_cross(chain, *sy, ry);
    else
        push_unique(chain, ry);
    if (chain.size() > 9 || !validate_chain(chain)) {
        cert.note = chain.size() > 9 ? "chain too long" : "containment validation failed";
        return cert;
    }
    cert.chain = std::move(chain);
    cert.valid = true;
    return cert;
}

namespace {

std::map<std::string, FreeFactor> tie_candidates(const MarkedGraph& g, int ell, int k) {
    ShortBasis sb = g.short_basis();
    std::vector<Word> words;
    for (std::size_t i = 0; i < sb.words.size(); ++i)
        if (g.path_length(sb.loops[i]) <= k) words.push_back(sb.words[i]);
    std::map<std::string, FreeFactor> out;
    int m = static_cast<int>(words.size());
    if (ell > m) return out;
    std::vector<int> idx(ell);
    for (int i = 0; i < ell; ++i) idx[i] = i;
    while (true) {
        std::vector<Word> gens;
        for (int i : idx) gens.push_back(words[i]);
        FreeFactor f = FreeFactor::from_generators(gens);
        if (f.rank() == ell) out.emplace(f.key(), std::move(f));
        int i = ell - 1;
        while (i >= 0 && idx[i] == m - ell + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < ell; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

}  // namespace

TieResult is_tied(const MarkedGraph& s, const MarkedGraph& t, int ell, int k) {
    if (ell < 1 || ell >= s.rank() || s.rank() != t.rank())
        throw std::invalid_argument("factor rank out of range");
    TieResult r;
    auto cs = tie_candidates(s, ell, k);
    auto ct = tie_candidates(t, ell, k);
    for (auto& [key, f] : cs) {
        if (ct.count(key)) {
            r.found = true;
            r.witness = f;
            return r;
        }
    }
    r.note = "none-found-within-bounds: candidate sets are disjoint at k=" + std::to_string(k);
    return r;
}

DngBound dng_distance_upper(const MarkedGraph& s, const MarkedGraph& t, int ell,
                            const std::vector<MarkedGraph>& chain, int k) {
    DngBound r;
    if (chain.empty()) {
        r.failed_index = 0;
        return r;
    }
    if (graph_to_json(chain.front()) != graph_to_json(s) ||
        graph_to_json(chain.back()) != graph_to_json(t)) {
        r.failed_index = 0;
        return r;
    }
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        TieResult tie = is_tied(chain[i], chain[i + 1], ell, k);
        if (!tie.found) {
            r.failed_index = static_cast<int>(i);
            return r;
        }
        r.witnesses.push_back(tie.witness);
    }
    r.ok = true;
    r.bound = static_cast<int>(chain.size()) - 1;
    return r;
}

NearbyCertificate collapse_nearby_certificate(const MarkedGraph& g, const std::vector<int>& forest) {
    NearbyCertificate cert;
    auto [g2, cmap] = g.collapse_forest(forest);
    std::set<int> fset(forest.begin(), forest.end());
    int best = 0;
    for (const Edge& e : g.edges()) {
        if (fset.count(e.id)) continue;
        if (best == 0 || e.length > g.edge(best).length) best = e.id;
    }
    if (best == 0) {
        cert.note = "forest contains every edge";
        return cert;
    }
    cert.edge_id = best;
    FreeSplitting a = upsilon_edge(g, best);
    FreeSplitting b = upsilon_edge(g2, best);
    if (!(a == b)) {
        cert.note = "collapse does not preserve the one-edge splitting";
        return cert;
    }
    cert.shared = std::move(a);
    cert.valid = true;
    return cert;
}

}  // namespace otk
