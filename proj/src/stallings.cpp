#include "otk/stallings.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace otk {

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) {
        for (int i = 0; i < n; ++i) p[i] = i;
    }
    int find(int v) { return p[v] == v ? v : p[v] = find(p[v]); }
    void unite(int a, int b) { p[std::max(find(a), find(b))] = std::min(find(a), find(b)); }
};

CoreGraph fold_core(CoreGraph g) {
    UnionFind uf(g.nv);
    bool changed = true;
    while (changed) {
        changed = false;
        std::set<std::tuple<int, int, int>> seen;
        std::vector<CoreArrow> arrows;
        for (const CoreArrow& a : g.arrows) {
            int f = uf.find(a.from), t = uf.find(a.to);
            if (seen.insert({f, t, a.letter}).second) arrows.push_back({f, t, a.letter});
        }
        g.arrows = std::move(arrows);
        std::map<std::pair<int, int>, int> out;  // (vertex, signed letter) -> target
        for (const CoreArrow& a : g.arrows) {
            auto probe = [&](int v, int l, int w) {
                auto [it, fresh] = out.emplace(std::make_pair(v, l), w);
                if (!fresh && it->second != w) {
                    uf.unite(it->second, w);
                    changed = true;
                }
            };
            probe(a.from, a.letter, a.to);
            if (changed) break;
            probe(a.to, -a.letter, a.from);
            if (changed) break;
        }
    }
    // compress vertex ids
    std::map<int, int> remap;
    for (const CoreArrow& a : g.arrows) {
        remap.emplace(a.from, 0);
        remap.emplace(a.to, 0);
    }
    int next = 0;
    for (auto& [v, nv] : remap) nv = next++;
    for (CoreArrow& a : g.arrows) {
        a.from = remap[a.from];
        a.to = remap[a.to];
    }
    g.nv = next;
    std::sort(g.arrows.begin(), g.arrows.end());
    return g;
}

// remove valence-1 vertices until none remain (cyclic core)
CoreGraph trim_core(CoreGraph g) {
    bool again = true;
    while (again) {
        again = false;
        std::vector<int> deg(g.nv, 0);
        for (const CoreArrow& a : g.arrows) {
            ++deg[a.from];
            ++deg[a.to];
        }
        std::set<int> drop;
        for (int v = 0; v < g.nv; ++v)
            if (deg[v] <= 1) drop.insert(v);
        if (drop.empty()) break;
        again = true;
        std::vector<CoreArrow> kept;
        for (const CoreArrow& a : g.arrows)
            if (!drop.count(a.from) && !drop.count(a.to)) kept.push_back(a);
        std::map<int, int> remap;
        for (const CoreArrow& a : kept) {
            remap.emplace(a.from, 0);
            remap.emplace(a.to, 0);
        }
        int next = 0;
        for (auto& [v, nv] : remap) nv = next++;
        for (CoreArrow& a : kept) {
            a.from = remap[a.from];
            a.to = remap[a.to];
        }
        g.arrows = std::move(kept);
        g.nv = next;
    }
    if (g.arrows.empty()) g.nv = 0;
    return g;
}

// signed-letter adjacency: vertex -> list of (signed letter, target),
// sorted by 1,-1,2,-2,...
std::vector<std::vector<std::pair<int, int>>> adjacency(const CoreGraph& g) {
    std::vector<std::vector<std::pair<int, int>>> adj(g.nv);
    for (const CoreArrow& a : g.arrows) {
        adj[a.from].push_back({a.letter, a.to});
        adj[a.to].push_back({-a.letter, a.from});
    }
    auto key = [](int l) { return std::abs(l) * 2 + (l < 0 ? 1 : 0); };
    for (auto& v : adj)
        std::sort(v.begin(), v.end(), [&](auto& x, auto& y) { return key(x.first) < key(y.first); });
    return adj;
}

struct Canonical {
    std::vector<int> enc;
    std::vector<int> number;  // old vertex -> canonical number
};

Canonical bfs_encoding(const CoreGraph& g, const std::vector<std::vector<std::pair<int, int>>>& adj,
                       int start, int max_letter) {
    Canonical c;
    c.number.assign(g.nv, -1);
    c.number[start] = 0;
    std::vector<int> order{start};
    // folded: (vertex, signed letter) determines the target uniquely
    std::vector<std::map<int, int>> out(g.nv);
    for (int v = 0; v < g.nv; ++v)
        for (auto [l, w] : adj[v]) out[v][l] = w;
    for (std::size_t i = 0; i < order.size(); ++i) {
        int v = order[i];
        for (int gl = 1; gl <= max_letter; ++gl) {
            for (int l : {gl, -gl}) {
                auto it = out[v].find(l);
                if (it == out[v].end()) {
                    c.enc.push_back(-1);
                    continue;
                }
                int w = it->second;
                if (c.number[w] == -1) {
                    c.number[w] = static_cast<int>(order.size());
                    order.push_back(w);
                }
                c.enc.push_back(c.number[w]);
            }
        }
    }
    if (static_cast<int>(order.size()) != g.nv) c.enc.clear();  // disconnected from start
    return c;
}

std::pair<CoreGraph, std::string> canonicalize(const CoreGraph& g) {
    if (g.nv == 0) return {g, ""};
    int max_letter = 0;
    for (const CoreArrow& a : g.arrows) max_letter = std::max(max_letter, a.letter);
    auto adj = adjacency(g);
    Canonical best;
    for (int s = 0; s < g.nv; ++s) {
        Canonical c = bfs_encoding(g, adj, s, max_letter);
        if (c.enc.empty()) continue;
        if (best.enc.empty() || c.enc < best.enc) best = std::move(c);
    }
    if (best.enc.empty()) throw std::logic_error("core graph is disconnected");
    CoreGraph out;
    out.nv = g.nv;
    for (const CoreArrow& a : g.arrows)
        out.arrows.push_back({best.number[a.from], best.number[a.to], a.letter});
    std::sort(out.arrows.begin(), out.arrows.end());
    std::ostringstream key;
    key << g.nv << ":";
    for (int x : best.enc) key << x << ",";
    return {std::move(out), key.str()};
}

}  // namespace

FreeFactor FreeFactor::from_core(CoreGraph core) {
    core = trim_core(fold_core(std::move(core)));
    FreeFactor f;
    if (core.nv == 0) return f;  // trivial group: invalid
    auto [canon, key] = canonicalize(core);
    f.core_ = std::move(canon);
    f.key_ = std::move(key);
    return f;
}

FreeFactor FreeFactor::from_generators(const std::vector<Word>& gens) {
    if (gens.empty()) throw std::invalid_argument("empty generator list");
    CoreGraph g;
    g.nv = 1;
    for (const Word& w : gens) {
        const auto& ls = w.letters();
        if (ls.empty()) continue;
        int prev = 0;
        for (std::size_t i = 0; i < ls.size(); ++i) {
            int nxt = (i + 1 == ls.size()) ? 0 : g.nv++;
            int x = ls[i];
            if (x > 0)
                g.arrows.push_back({prev, nxt, x});
            else
                g.arrows.push_back({nxt, prev, -x});
            prev = nxt;
        }
    }
    FreeFactor f = from_core(std::move(g));
    if (!f.valid()) throw std::domain_error("generators generate the trivial group");
    return f;
}

FreeFactor FreeFactor::whole_group(int n) {
    std::vector<Word> gens;
    for (int i = 1; i <= n; ++i) gens.push_back(Word::generator(i));
    return from_generators(gens);
}

std::vector<Word> FreeFactor::basis() const {
    if (!valid()) return {};
    auto adj = adjacency(core_);
    // BFS tree from canonical vertex 0; arrows indexed for tree membership
    std::map<std::tuple<int, int, int>, std::size_t> arrow_index;
    for (std::size_t i = 0; i < core_.arrows.size(); ++i) {
        const CoreArrow& a = core_.arrows[i];
        arrow_index[{a.from, a.to, a.letter}] = i;
    }
    auto index_of = [&](int v, int l, int w) {
        return l > 0 ? arrow_index.at({v, w, l}) : arrow_index.at({w, v, -l});
    };
    std::vector<Word> to_vertex(core_.nv);
    std::vector<bool> visited(core_.nv, false), in_tree(core_.arrows.size(), false);
    visited[0] = true;
    std::deque<int> todo{0};
    while (!todo.empty()) {
        int v = todo.front();
        todo.pop_front();
        for (auto [l, w] : adj[v]) {
            if (visited[w]) continue;
            visited[w] = true;
            in_tree[index_of(v, l, w)] = true;
            to_vertex[w] = to_vertex[v] * Word::generator(l);
            todo.push_back(w);
        }
    }
    std::vector<Word> out;
    for (std::size_t i = 0; i < core_.arrows.size(); ++i) {
        if (in_tree[i]) continue;
        const CoreArrow& a = core_.arrows[i];
        out.push_back(to_vertex[a.from] * Word::generator(a.letter) * to_vertex[a.to].inverse());
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool factor_contains(const FreeFactor& A, const FreeFactor& B) {
    if (!A.valid() || !B.valid()) return false;
    const CoreGraph& ga = A.core();
    const CoreGraph& gb = B.core();
    std::map<std::pair<int, int>, int> out_a;
    for (const CoreArrow& a : ga.arrows) {
        out_a[{a.from, a.letter}] = a.to;
        out_a[{a.to, -a.letter}] = a.from;
    }
    auto adj_b = adjacency(gb);
    for (int a0 = 0; a0 < ga.nv; ++a0) {
        std::vector<int> image(gb.nv, -1);
        image[0] = a0;
        std::deque<int> todo{0};
        bool ok = true;
        while (ok && !todo.empty()) {
            int u = todo.front();
            todo.pop_front();
            for (auto [l, w] : adj_b[u]) {
                auto it = out_a.find({image[u], l});
                if (it == out_a.end()) {
                    ok = false;
                    break;
                }
                if (image[w] == -1) {
                    image[w] = it->second;
                    todo.push_back(w);
                } else if (image[w] != it->second) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) return true;
    }
    return false;
}

std::vector<FreeFactor> factor_intersections(const FreeFactor& A, const FreeFactor& B) {
    if (!A.valid() || !B.valid()) return {};
    const CoreGraph& ga = A.core();
    const CoreGraph& gb = B.core();
    auto vid = [&](int i, int j) { return i * gb.nv + j; };
    std::map<int, std::vector<std::pair<int, int>>> by_letter_a, by_letter_b;
    for (const CoreArrow& a : ga.arrows) by_letter_a[a.letter].push_back({a.from, a.to});
    for (const CoreArrow& b : gb.arrows) by_letter_b[b.letter].push_back({b.from, b.to});
    CoreGraph prod;
    prod.nv = ga.nv * gb.nv;
    for (auto& [l, as] : by_letter_a) {
        auto it = by_letter_b.find(l);
        if (it == by_letter_b.end()) continue;
        for (auto [af, at] : as)
            for (auto [bf, bt] : it->second) prod.arrows.push_back({vid(af, bf), vid(at, bt), l});
    }
    // split into components before trimming
    UnionFind uf(prod.nv);
    for (const CoreArrow& a : prod.arrows) uf.unite(a.from, a.to);
    std::map<int, CoreGraph> comps;
    for (const CoreArrow& a : prod.arrows) comps[uf.find(a.from)].arrows.push_back(a);
    std::vector<FreeFactor> out;
    for (auto& [root, cg] : comps) {
        std::map<int, int> remap;
        for (const CoreArrow& a : cg.arrows) {
            remap.emplace(a.from, 0);
            remap.emplace(a.to, 0);
        }
        int next = 0;
        for (auto& [v, nv] : remap) nv = next++;
        for (CoreArrow& a : cg.arrows) {
            a.from = remap[a.from];
            a.to = remap[a.to];
        }
        cg.nv = next;
        FreeFactor f = FreeFactor::from_core(std::move(cg));
        if (f.valid() && f.rank() >= 1) out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), [](const FreeFactor& x, const FreeFactor& y) {
        return x.rank() != y.rank() ? x.rank() > y.rank() : x.key() < y.key();
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace otk
