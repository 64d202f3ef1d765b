#include "otk/marked_graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace otk {

std::vector<int> reduce_dirs(std::vector<int> dirs) {
    std::vector<int> out;
    out.reserve(dirs.size());
    for (int d : dirs) {
        if (!out.empty() && out.back() == -d)
            out.pop_back();
        else
            out.push_back(d);
    }
    return out;
}

MarkedGraph::MarkedGraph(std::vector<int> vertices, std::vector<Edge> edges, int basepoint)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), basepoint_(basepoint) {
    std::sort(vertices_.begin(), vertices_.end());
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    std::set<int> vset(vertices_.begin(), vertices_.end());
    if (vset.size() != vertices_.size()) throw std::invalid_argument("duplicate vertex id");
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.id <= 0) throw std::invalid_argument("edge ids must be positive");
        if (edge_index_.count(e.id)) throw std::invalid_argument("duplicate edge id");
        if (!vset.count(e.from) || !vset.count(e.to)) throw std::invalid_argument("edge endpoint not a vertex");
        edge_index_[e.id] = i;
    }
    if (!vset.count(basepoint_)) throw std::invalid_argument("basepoint not a vertex");
    for (int v : vertices_) out_dirs_[v] = {};
    for (const Edge& e : edges_) {
        out_dirs_[e.from].push_back(e.id);
        out_dirs_[e.to].push_back(-e.id);
    }
    for (auto& [v, ds] : out_dirs_) std::sort(ds.begin(), ds.end(), [](int a, int b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a > b;
    });
}

MarkedGraph MarkedGraph::rose(int rank, const std::vector<Rational>& petal_lengths) {
    if (rank < 2) throw std::invalid_argument("rank must be at least 2");
    if (static_cast<int>(petal_lengths.size()) != rank)
        throw std::invalid_argument("need one length per petal");
    std::vector<Edge> edges;
    for (int i = 1; i <= rank; ++i) {
        if (petal_lengths[i - 1] <= 0) throw std::invalid_argument("petal lengths must be positive");
        edges.push_back({i, 0, 0, petal_lengths[i - 1], Word::generator(i)});
    }
    return MarkedGraph({0}, std::move(edges), 0);
}

const Edge& MarkedGraph::edge(int id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) throw std::invalid_argument("no edge with id " + std::to_string(id));
    return edges_[it->second];
}

bool MarkedGraph::has_vertex(int v) const {
    return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

int MarkedGraph::src(int dir) const { return dir > 0 ? edge(dir).from : edge(-dir).to; }
int MarkedGraph::dst(int dir) const { return dir > 0 ? edge(dir).to : edge(-dir).from; }

Word MarkedGraph::dir_label(int dir) const {
    const Edge& e = edge(std::abs(dir));
    return dir > 0 ? e.label : e.label.inverse();
}

const std::vector<int>& MarkedGraph::dirs_at(int v) const {
    auto it = out_dirs_.find(v);
    if (it == out_dirs_.end()) throw std::invalid_argument("no vertex " + std::to_string(v));
    return it->second;
}

int MarkedGraph::rank() const {
    return static_cast<int>(edges_.size()) - static_cast<int>(vertices_.size()) + 1;
}

Rational MarkedGraph::volume() const {
    Rational v = 0;
    for (const Edge& e : edges_) v += e.length;
    return v;
}

bool MarkedGraph::connected() const {
    if (vertices_.empty()) return false;
    std::set<int> seen{vertices_.front()};
    std::deque<int> todo{vertices_.front()};
    while (!todo.empty()) {
        int v = todo.front();
        todo.pop_front();
        for (int d : dirs_at(v)) {
            int w = dst(d);
            if (seen.insert(w).second) todo.push_back(w);
        }
    }
    return seen.size() == vertices_.size();
}

std::vector<std::string> MarkedGraph::validate() const {
    std::vector<std::string> issues;
    if (vertices_.empty()) return {"empty graph"};
    if (!connected()) issues.push_back("not connected");
    for (int v : vertices_)
        if (valence(v) < 2) issues.push_back("not minimal: vertex " + std::to_string(v) + " has valence < 2");
    for (const Edge& e : edges_)
        if (e.length <= 0) issues.push_back("non-positive length on edge " + std::to_string(e.id));
    if (rank() < 2) issues.push_back("rank < 2");
    if (!issues.empty()) return issues;  // marking check needs a sane graph
    const MarkingInfo& mi = marking();
    issues.insert(issues.end(), mi.issues.begin(), mi.issues.end());
    return issues;
}

MarkedGraph MarkedGraph::scaled(const Rational& factor) const {
    if (factor <= 0) throw std::invalid_argument("scale factor must be positive");
    std::vector<Edge> es = edges_;
    for (Edge& e : es) e.length *= factor;
    return MarkedGraph(vertices_, std::move(es), basepoint_);
}

MarkedGraph MarkedGraph::normalized() const { return scaled(Rational(1) / volume()); }

MarkedGraph MarkedGraph::subdivided(int eid, const Rational& t, int* mid_vertex, int* first_piece,
                                    int* second_piece) const {
    const Edge& e = edge(eid);
    if (t <= 0 || t >= e.length) throw std::invalid_argument("subdivision point out of range");
    int mid = max_vertex_id() + 1;
    int id1 = max_edge_id() + 1;
    int id2 = id1 + 1;
    std::vector<int> vs = vertices_;
    vs.push_back(mid);
    std::vector<Edge> es;
    for (const Edge& f : edges_)
        if (f.id != eid) es.push_back(f);
    es.push_back({id1, e.from, mid, t, Word()});
    es.push_back({id2, mid, e.to, e.length - t, e.label});
    if (mid_vertex) *mid_vertex = mid;
    if (first_piece) *first_piece = id1;
    if (second_piece) *second_piece = id2;
    return MarkedGraph(std::move(vs), std::move(es), basepoint_);
}

std::pair<MarkedGraph, CollapseMap> MarkedGraph::collapse_forest(const std::vector<int>& forest) const {
    std::set<int> fset(forest.begin(), forest.end());
    // union-find over vertices along forest edges, detecting cycles
    std::map<int, int> parent;
    for (int v : vertices_) parent[v] = v;
    std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    for (int eid : fset) {
        const Edge& e = edge(eid);
        int a = find(e.from), b = find(e.to);
        if (a == b) throw std::invalid_argument("forest contains a cycle (edge " + std::to_string(eid) + ")");
        parent[std::max(a, b)] = std::min(a, b);  // lowest id represents the component
    }
    // connecting label d(u): label of the forest path from the component
    // representative to u, by BFS over forest edges in id order
    std::map<int, Word> conn;
    for (int v : vertices_)
        if (find(v) == v) conn[v] = Word();
    std::deque<int> todo;
    for (auto& [v, w] : conn) todo.push_back(v);
    while (!todo.empty()) {
        int v = todo.front();
        todo.pop_front();
        for (int d : dirs_at(v)) {
            if (!fset.count(std::abs(d))) continue;
            int w = dst(d);
            if (conn.count(w)) continue;
            conn[w] = conn[v] * dir_label(d);
            todo.push_back(w);
        }
    }
    CollapseMap cmap;
    for (int v : vertices_) cmap.vertex_map[v] = find(v);
    cmap.collapsed_edges.assign(fset.begin(), fset.end());
    std::vector<int> vs;
    for (int v : vertices_)
        if (find(v) == v) vs.push_back(v);
    std::vector<Edge> es;
    for (const Edge& e : edges_) {
        if (fset.count(e.id)) continue;
        Edge ne = e;
        ne.from = find(e.from);
        ne.to = find(e.to);
        ne.label = conn[e.from] * e.label * conn[e.to].inverse();
        es.push_back(ne);
    }
    return {MarkedGraph(std::move(vs), std::move(es), find(basepoint_)), std::move(cmap)};
}

EdgePath MarkedGraph::tighten(EdgePath p) const {
    p.dirs = reduce_dirs(std::move(p.dirs));
    return p;
}

Word MarkedGraph::path_label(const EdgePath& p) const {
    Word w;
    for (int d : p.dirs) w = w * dir_label(d);
    return w;
}

Rational MarkedGraph::path_length(const EdgePath& p) const {
    Rational len = 0;
    for (int d : p.dirs) len += dir_length(d);
    if (p.head_fraction && !p.dirs.empty()) len += *p.head_fraction - dir_length(p.dirs.front());
    if (p.tail_fraction && !p.dirs.empty()) len += *p.tail_fraction - dir_length(p.dirs.back());
    return len;
}

bool MarkedGraph::path_well_formed(const EdgePath& p) const {
    if (p.dirs.empty()) return has_vertex(p.start);
    if (src(p.dirs.front()) != p.start) return false;
    for (std::size_t i = 0; i + 1 < p.dirs.size(); ++i)
        if (dst(p.dirs[i]) != src(p.dirs[i + 1])) return false;
    return true;
}

// --- marking machinery -----------------------------------------------------
//
// The labeled graph is subdivided so every edge carries a single letter or
// the trivial label, then folded down (Stallings folds plus collapses of
// trivial non-loop edges). Each intermediate edge carries a witness path in
// the subdivided graph whose label equals the edge's label, so the petals of
// the final rose yield loops realizing the basis generators.

namespace {

struct WorkEdge {
    int from = 0;
    int to = 0;
    int letter = 0;  // 0 = trivial label
    std::vector<int> wit;
    bool alive = true;
};

std::vector<int> inv_dirs(const std::vector<int>& p) {
    std::vector<int> out;
    out.reserve(p.size());
    for (auto it = p.rbegin(); it != p.rend(); ++it) out.push_back(-*it);
    return out;
}

std::vector<int> cat(std::vector<int> a, const std::vector<int>& b) {
    for (int d : b) {
        if (!a.empty() && a.back() == -d)
            a.pop_back();
        else
            a.push_back(d);
    }
    return a;
}

}  // namespace

MarkingInfo MarkedGraph::compute_marking() const {
    MarkingInfo info;
    int n = rank();

    // Subdivided label graph W. W-edge k (1-based) records its provenance:
    // a piece of an original edge, or the whole edge.
    struct Piece {
        int orig_edge;
        int piece_index;
        int piece_count;
    };
    std::vector<Piece> pieces{{0, 0, 0}};  // 1-based
    std::vector<WorkEdge> work{{}};        // parallel, 1-based; doubles as W
    int next_vertex = max_vertex_id() + 1;
    std::map<int, std::vector<std::pair<int, int>>> w_adj;  // for the basepoint path

    for (const Edge& e : edges_) {
        const auto& ls = e.label.letters();
        int count = std::max<std::size_t>(1, ls.size());
        int prev = e.from;
        for (int k = 0; k < count; ++k) {
            int nxt = (k == count - 1) ? e.to : next_vertex++;
            int wid = static_cast<int>(work.size());
            WorkEdge we;
            we.from = prev;
            we.to = nxt;
            we.letter = ls.empty() ? 0 : ls[k];
            we.wit = {wid};
            work.push_back(we);
            pieces.push_back({e.id, k, count});
            prev = nxt;
        }
    }
    const std::vector<WorkEdge> wgraph(work);  // frozen copy: the graph W

    // adjacency for folding: vertex -> alive incident work-edge directions
    auto wdst = [&](int d) { return d > 0 ? work[d].to : work[-d].from; };
    auto wletter = [&](int d) { return d > 0 ? work[d].letter : -work[-d].letter; };
    auto wwit = [&](int d) { return d > 0 ? work[d].wit : inv_dirs(work[-d].wit); };

    std::map<int, std::set<int>> at;  // vertex -> signed work ids leaving it
    for (int i = 1; i < static_cast<int>(work.size()); ++i) {
        at[work[i].from].insert(i);
        at[work[i].to].insert(-i);
    }

    auto detach = [&](int wid) {
        at[work[wid].from].erase(wid);
        at[work[wid].to].erase(-wid);
        work[wid].alive = false;
    };

    // merge vertex b into a; kappa is a witness path from a's to b's
    // representative with trivial label
    auto merge_vertex = [&](int a, int b, const std::vector<int>& kappa) {
        if (a == b) return;
        std::vector<int> moved(at[b].begin(), at[b].end());
        for (int d : moved) {
            int wid = std::abs(d);
            at[b].erase(d);
            if (d > 0) {
                work[wid].from = a;
                work[wid].wit = cat(kappa, work[wid].wit);
            } else {
                work[wid].to = a;
                work[wid].wit = cat(work[wid].wit, inv_dirs(kappa));
            }
            at[a].insert(d);
        }
        at.erase(b);
    };

    bool rank_dropped = false;
    bool progress = true;
    while (progress) {
        progress = false;
        // collapse a trivial-label edge
        for (int i = 1; i < static_cast<int>(work.size()) && !progress; ++i) {
            if (!work[i].alive || work[i].letter != 0) continue;
            if (work[i].from == work[i].to) {
                rank_dropped = true;  // trivially-labeled loop kills a rank
                detach(i);
            } else {
                int a = work[i].from, b = work[i].to;
                std::vector<int> kappa = work[i].wit;  // a -> b, trivial label
                detach(i);
                merge_vertex(a, b, kappa);
            }
            progress = true;
        }
        if (progress) continue;
        // Stallings fold: two distinct directions with the same letter
        for (auto& [v, ds] : at) {
            std::map<int, int> first;  // letter -> direction
            int d1 = 0, d2 = 0;
            for (int d : ds) {
                int l = wletter(d);
                auto [it, fresh] = first.emplace(l, d);
                if (!fresh) {
                    d1 = it->second;
                    d2 = d;
                    break;
                }
            }
            if (d2 == 0) continue;
            int w1 = wdst(d1), w2 = wdst(d2);
            std::vector<int> kappa = cat(inv_dirs(wwit(d1)), wwit(d2));  // w1 -> w2
            if (w1 == w2) rank_dropped = true;
            detach(std::abs(d2));
            merge_vertex(w1, w2, kappa);
            progress = true;
            break;
        }
    }

    // trim hanging trees (they carry no fundamental group)
    bool trimmed = true;
    while (trimmed) {
        trimmed = false;
        for (auto it = at.begin(); it != at.end(); ++it) {
            if (it->second.size() == 1) {
                detach(std::abs(*it->second.begin()));
                at.erase(it);
                trimmed = true;
                break;
            }
        }
    }

    if (rank_dropped) info.issues.push_back("marking not pi1-isomorphism: labels are not independent");

    // the folded graph must be the standard rose on a_1..a_n
    if (at.size() != 1) {
        info.issues.push_back("marking not pi1-isomorphism: folded label graph is not a rose");
        return info;
    }
    int rose_vertex = at.begin()->first;
    std::map<int, std::vector<int>> petal;  // generator -> witness loop
    for (int d : at.begin()->second) {
        if (d < 0) continue;
        int l = work[d].letter;
        if (l == 0 || petal.count(std::abs(l))) {
            info.issues.push_back("marking not pi1-isomorphism: folded rose has repeated or trivial petal");
            return info;
        }
        petal[std::abs(l)] = l > 0 ? work[d].wit : inv_dirs(work[d].wit);
    }
    if (static_cast<int>(petal.size()) != n || petal.rbegin()->first != n) {
        info.issues.push_back("marking not pi1-isomorphism: folded rose rank mismatch (got " +
                              std::to_string(petal.size()) + ", expected " + std::to_string(n) + ")");
        return info;
    }

    // witness loops are based at the fold representative of rose_vertex,
    // which is always an original W-vertex? Not necessarily the basepoint:
    // conjugate them to the basepoint with a path in W.
    // BFS path in W from basepoint to rose_vertex's representative. The
    // witness paths are based at whatever W-vertex the folding kept; all
    // petals share it, namely the source of any witness loop.
    int anchor = basepoint_;
    if (!petal.empty() && !petal.begin()->second.empty()) {
        const auto& p0 = petal.begin()->second;
        anchor = p0.front() > 0 ? wgraph[p0.front()].from : wgraph[-p0.front()].to;
    } else if (petal.empty()) {
        info.issues.push_back("marking not pi1-isomorphism: no petals");
        return info;
    }
    (void)rose_vertex;

    std::vector<int> to_anchor;  // W-path basepoint -> anchor
    {
        std::map<int, std::vector<std::pair<int, int>>> adj;  // vertex -> (next, dir)
        for (int i = 1; i < static_cast<int>(wgraph.size()); ++i) {
            adj[wgraph[i].from].push_back({wgraph[i].to, i});
            adj[wgraph[i].to].push_back({wgraph[i].from, -i});
        }
        std::map<int, std::pair<int, int>> pred;  // vertex -> (prev vertex, dir)
        std::deque<int> todo{basepoint_};
        pred[basepoint_] = {basepoint_, 0};
        while (!todo.empty()) {
            int v = todo.front();
            todo.pop_front();
            for (auto [w, d] : adj[v])
                if (!pred.count(w)) {
                    pred[w] = {v, d};
                    todo.push_back(w);
                }
        }
        if (!pred.count(anchor)) {
            info.issues.push_back("internal: anchor unreachable in subdivided graph");
            return info;
        }
        std::vector<int> rev;
        for (int v = anchor; v != basepoint_; v = pred[v].first) rev.push_back(pred[v].second);
        to_anchor.assign(rev.rbegin(), rev.rend());
    }

    // convert a W-path based at the basepoint into a G-path
    auto to_graph_path = [&](const std::vector<int>& wpath) -> std::optional<EdgePath> {
        EdgePath out;
        out.start = basepoint_;
        std::size_t i = 0;
        while (i < wpath.size()) {
            int d = wpath[i];
            const Piece& pc = pieces[std::abs(d)];
            if (pc.piece_count == 1) {
                out.dirs.push_back(d > 0 ? pc.orig_edge : -pc.orig_edge);
                ++i;
                continue;
            }
            // must traverse a full run of pieces in order
            bool fwd = d > 0;
            if ((fwd && pc.piece_index != 0) || (!fwd && pc.piece_index != pc.piece_count - 1))
                return std::nullopt;
            int expect = pc.piece_index;
            std::size_t j = i;
            for (int k = 0; k < pc.piece_count; ++k) {
                if (j >= wpath.size()) return std::nullopt;
                int dj = wpath[j];
                const Piece& pj = pieces[std::abs(dj)];
                if (pj.orig_edge != pc.orig_edge) return std::nullopt;
                if ((dj > 0) != (d > 0)) return std::nullopt;
                if (pj.piece_index != expect) return std::nullopt;
                expect += fwd ? 1 : -1;
                ++j;
            }
            out.dirs.push_back(fwd ? pc.orig_edge : -pc.orig_edge);
            i = j;
        }
        return out;
    };

    info.generator_loops.resize(n);
    for (int g = 1; g <= n; ++g) {
        std::vector<int> based = reduce_dirs(cat(cat(to_anchor, petal[g]), inv_dirs(to_anchor)));
        auto gp = to_graph_path(based);
        if (!gp) {
            info.issues.push_back("internal: witness loop does not unsubdivide");
            return info;
        }
        info.generator_loops[g - 1] = *gp;
    }
    info.valid = true;
    return info;
}

const MarkingInfo& MarkedGraph::marking() const {
    if (!marking_cache_) marking_cache_ = std::make_shared<const MarkingInfo>(compute_marking());
    return *marking_cache_;
}

EdgePath MarkedGraph::realize_based(const Word& w) const {
    const MarkingInfo& mi = marking();
    if (!mi.valid) throw std::domain_error("graph has no valid marking");
    if (w.max_generator() > rank()) throw std::invalid_argument("word uses a generator beyond the rank");
    std::vector<int> dirs;
    for (int x : w.letters()) {
        const EdgePath& loop = mi.generator_loops[std::abs(x) - 1];
        dirs = cat(dirs, x > 0 ? loop.dirs : inv_dirs(loop.dirs));
    }
    EdgePath p;
    p.start = basepoint_;
    p.dirs = std::move(dirs);
    return p;
}

EdgePath MarkedGraph::loop_realization(const Word& w) const {
    if (w.trivial()) throw std::invalid_argument("trivial word has no loop realization");
    EdgePath p = realize_based(w);
    while (p.dirs.size() >= 2 && p.dirs.front() == -p.dirs.back()) {
        p.dirs.pop_back();
        p.dirs.erase(p.dirs.begin());
    }
    p.start = p.dirs.empty() ? basepoint_ : src(p.dirs.front());
    return p;
}

Rational MarkedGraph::translation_length(const Word& w) const {
    return path_length(loop_realization(w));
}

const std::map<int, int>& MarkedGraph::bfs_parents() const {
    if (!tree_cache_) {
        auto parents = std::make_shared<std::map<int, int>>();
        int root = vertices_.front();
        (*parents)[root] = 0;
        std::deque<int> todo{root};
        while (!todo.empty()) {
            int v = todo.front();
            todo.pop_front();
            for (int d : dirs_at(v)) {
                int w = dst(d);
                if (!parents->count(w)) {
                    (*parents)[w] = d;
                    todo.push_back(w);
                }
            }
        }
        tree_cache_ = std::move(parents);
    }
    return *tree_cache_;
}

EdgePath MarkedGraph::tree_path(int u, int v) const {
    const auto& par = bfs_parents();
    auto up = [&](int x) {  // path root -> x
        std::vector<int> rev;
        while (par.at(x) != 0) {
            rev.push_back(par.at(x));
            x = src(par.at(x));
        }
        return std::vector<int>(rev.rbegin(), rev.rend());
    };
    std::vector<int> a = up(u), b = up(v);
    std::size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
    EdgePath p;
    p.start = u;
    for (std::size_t j = a.size(); j > i; --j) p.dirs.push_back(-a[j - 1]);
    for (std::size_t j = i; j < b.size(); ++j) p.dirs.push_back(b[j]);
    return p;
}

ShortBasis MarkedGraph::short_basis() const {
    const auto& par = bfs_parents();
    int root = vertices_.front();
    std::set<int> tree_edges;
    for (auto& [v, d] : par)
        if (d != 0) tree_edges.insert(std::abs(d));
    ShortBasis sb;
    sb.base_vertex = root;
    sb.max_loop_length = 0;
    for (const Edge& e : edges_) {
        if (tree_edges.count(e.id)) continue;
        EdgePath p = tree_path(root, e.from);
        p.dirs.push_back(e.id);
        EdgePath back = tree_path(e.to, root);
        p.dirs.insert(p.dirs.end(), back.dirs.begin(), back.dirs.end());
        p = tighten(std::move(p));
        sb.words.push_back(path_label(p));
        sb.loops.push_back(p);
        sb.max_loop_length = std::max(sb.max_loop_length, path_length(p));
    }
    return sb;
}

int MarkedGraph::max_vertex_id() const { return vertices_.empty() ? -1 : vertices_.back(); }
int MarkedGraph::max_edge_id() const { return edges_.empty() ? 0 : edges_.back().id; }

std::string MarkedGraph::dot() const {
    std::ostringstream os;
    os << "graph marked {\n";
    for (int v : vertices_)
        os << "  v" << v << (v == basepoint_ ? " [shape=doublecircle]" : "") << ";\n";
    for (const Edge& e : edges_)
        os << "  v" << e.from << " -- v" << e.to << " [label=\"e" << e.id << " " << e.label.str()
           << " (" << to_string(e.length) << ")\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace otk
