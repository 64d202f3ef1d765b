#include "otk/folding.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

namespace otk {

namespace {

// Splits source edge eid of f at distance a from its from-endpoint. The
// image split point is taken proportionally along the image path; when it
// falls inside a tsub edge, tsub is refined first so the point becomes a
// vertex. Outputs the new source vertex and the two piece ids.
void subdivide_guide_source(GraphMorphism& f, int eid, const Rational& a, int* mid_out,
                            int* p1_out, int* p2_out) {
    Rational len = f.source.edge(eid).length;
    int sv = -1;
    std::size_t cut = 0;
    for (;;) {
        const EdgePath& img = f.eimg.at(eid);
        Rational imglen = f.tsub.path_length(img);
        Rational prefix = Rational(a * imglen / len);
        Rational acc = 0;
        std::size_t j = 0;
        for (; j < img.dirs.size(); ++j) {
            Rational dl = f.tsub.dir_length(img.dirs[j]);
            if (Rational(acc + dl) > prefix) break;
            acc += dl;
        }
        if (acc == prefix) {
            sv = j == 0 ? img.start : f.tsub.dst(img.dirs[j - 1]);
            cut = j;
            break;
        }
        int conn = 0;
        f.split_toward(img.dirs[j], Rational(prefix - acc), &conn);
    }
    int mid = 0, p1 = 0, p2 = 0;
    f.source = f.source.subdivided(eid, a, &mid, &p1, &p2);
    EdgePath img = f.eimg.at(eid);
    EdgePath i1, i2;
    i1.start = img.start;
    i1.dirs.assign(img.dirs.begin(), img.dirs.begin() + cut);
    i2.start = sv;
    i2.dirs.assign(img.dirs.begin() + cut, img.dirs.end());
    f.eimg.erase(eid);
    f.eimg[p1] = std::move(i1);
    f.eimg[p2] = std::move(i2);
    f.vimg[mid] = sv;
    *mid_out = mid;
    *p1_out = p1;
    *p2_out = p2;
}

}  // namespace

Rational max_foldable(const GraphMorphism& f, std::pair<int, int> turn) {
    auto [d1, d2] = turn;
    if (d1 == d2) throw std::domain_error("not a turn");
    if (f.source.src(d1) != f.source.src(d2))
        throw std::domain_error("turn directions leave different vertices");
    int dd1 = f.derivative(d1), dd2 = f.derivative(d2);
    if (dd1 == 0 || dd2 == 0) throw std::domain_error("collapsed edge at the turn");
    if (dd1 != dd2) throw std::domain_error("turn is legal");
    Rational lam = f.stretch(std::abs(d1));
    if (lam != f.stretch(std::abs(d2)))
        throw std::domain_error("unequal stretches at the turn");
    EdgePath p = f.dir_image(d1), q = f.dir_image(d2);
    Rational agree = 0;
    std::size_t n = std::min(p.dirs.size(), q.dirs.size());
    for (std::size_t i = 0; i < n && p.dirs[i] == q.dirs[i]; ++i)
        agree += f.tsub.dir_length(p.dirs[i]);
    Rational t = Rational(agree / lam);
    Rational len1 = f.source.dir_length(d1), len2 = f.source.dir_length(d2);
    Rational cap = std::abs(d1) == std::abs(d2) ? Rational(len1 / 2) : std::min(len1, len2);
    return std::min(t, cap);
}

FoldResult fold_turn(const GraphMorphism& f, std::pair<int, int> turn, const Rational& t) {
    auto [d1, d2] = turn;
    if (t <= 0) throw std::domain_error("fold amount must be positive");
    if (t > max_foldable(f, turn)) throw std::domain_error("fold amount exceeds the agreement");
    int v = f.source.src(d1);
    bool self = std::abs(d1) == std::abs(d2);
    if (self && d1 < 0) std::swap(d1, d2);

    GraphMorphism fw = f;
    // token lists tracking each original edge through the subdivisions
    std::map<int, std::vector<int>> repl;
    for (const Edge& e : f.source.edges()) repl[e.id] = {e.id};
    auto subdivide = [&](int eid, const Rational& a, int* mid, int* p1, int* p2) {
        subdivide_guide_source(fw, eid, a, mid, p1, p2);
        for (auto& [k, toks] : repl) {
            std::vector<int> out;
            for (int x : toks) {
                if (x == eid) {
                    out.push_back(*p1);
                    out.push_back(*p2);
                } else if (x == -eid) {
                    out.push_back(-*p2);
                    out.push_back(-*p1);
                } else {
                    out.push_back(x);
                }
            }
            toks = std::move(out);
        }
    };

    int s1 = 0, w1 = -1, s2 = 0, w2 = -1;
    if (self) {
        Rational len = f.source.dir_length(d1);
        if (Rational(2 * t) >= len) throw std::domain_error("self fold reaches the midpoint");
        int mid1 = 0, p1 = 0, p2 = 0;
        subdivide(d1, t, &mid1, &p1, &p2);
        s1 = p1;
        w1 = mid1;
        int mid2 = 0, q1 = 0, q2 = 0;
        subdivide(p2, Rational(fw.source.edge(p2).length - t), &mid2, &q1, &q2);
        s2 = -q2;
        w2 = mid2;
    } else {
        auto side = [&](int d, int& s, int& w) {
            int eid = std::abs(d);
            Rational len = fw.source.edge(eid).length;
            if (t == len) {
                s = d;
                w = fw.source.dst(d);
                return;
            }
            int mid = 0, p1 = 0, p2 = 0;
            subdivide(eid, d > 0 ? t : Rational(len - t), &mid, &p1, &p2);
            s = d > 0 ? p1 : -p2;
            w = mid;
        };
        side(d1, s1, w1);
        side(d2, s2, w2);
    }

    if (fw.dir_image(s1).dirs != fw.dir_image(s2).dirs)
        throw std::logic_error("fold segments disagree in the target");
    if (fw.vimg.at(w1) != fw.vimg.at(w2))
        throw std::logic_error("fold endpoints disagree in the target");
    if (w1 == w2) throw std::domain_error("fold identifies parallel edges");

    // homotopy inverse sends the merged vertex back to w1, inserting the
    // path s1^-1 s2 in front of anything that entered through w2
    Word c = fw.source.dir_label(s1).inverse() * fw.source.dir_label(s2);
    int dead = std::abs(s2);
    std::vector<int> verts;
    for (int u : fw.source.vertices())
        if (u != w2) verts.push_back(u);
    std::vector<Edge> edges;
    for (const Edge& e : fw.source.edges()) {
        if (e.id == dead) continue;
        Edge ne = e;
        bool at_from = ne.from == w2, at_to = ne.to == w2;
        if (at_from) ne.from = w1;
        if (at_to) ne.to = w1;
        if (at_from && at_to)
            ne.label = c * ne.label * c.inverse();
        else if (at_from)
            ne.label = c * ne.label;
        else if (at_to)
            ne.label = ne.label * c.inverse();
        edges.push_back(ne);
    }
    int bp = fw.source.basepoint() == w2 ? w1 : fw.source.basepoint();
    MarkedGraph folded(verts, edges, bp);
    for (int u : folded.vertices())
        if (folded.valence(u) < 2) throw std::domain_error("fold creates a spur");
    if (folded.volume() != Rational(f.source.volume() - t))
        throw std::logic_error("volume bookkeeping failed");

    GraphMorphism guide;
    guide.source = folded;
    guide.target = fw.target;
    guide.tsub = fw.tsub;
    guide.piece_orig = fw.piece_orig;
    guide.vimg = fw.vimg;
    guide.vimg.erase(w2);
    guide.eimg = fw.eimg;
    guide.eimg.erase(dead);

    GraphMorphism phi;
    phi.source = f.source;
    phi.target = folded;
    phi.tsub = folded;
    for (const Edge& e : folded.edges()) phi.piece_orig[e.id] = e.id;
    auto vmap = [&](int u) { return u == w2 ? w1 : u; };
    for (int u : f.source.vertices()) phi.vimg[u] = vmap(u);
    for (const Edge& e : f.source.edges()) {
        std::vector<int> toks;
        for (int x : repl[e.id]) {
            if (x == s2)
                toks.push_back(s1);
            else if (x == -s2)
                toks.push_back(-s1);
            else
                toks.push_back(x);
        }
        EdgePath p;
        p.start = vmap(e.from);
        p.dirs = reduce_dirs(std::move(toks));
        phi.eimg[e.id] = std::move(p);
    }

    FoldResult out;
    out.folded = std::move(folded);
    out.fold_map = std::move(phi);
    out.guide = std::move(guide);
    out.fold = Fold{v, {d1, d2}, t};
    return out;
}

FoldingPath skora_from_guide(const GraphMorphism& f0, bool normalized, int max_folds) {
    GraphMorphism f = f0;
    // collapse point-image edges so the rescaled source is nondegenerate
    auto collapse_empties = [&]() {
        std::vector<int> forest;
        for (const Edge& e : f.source.edges())
            if (f.eimg.at(e.id).dirs.empty()) forest.push_back(e.id);
        if (forest.empty()) return;
        auto [g2, cmap] = f.source.collapse_forest(forest);
        GraphMorphism nf;
        nf.source = g2;
        nf.target = f.target;
        nf.tsub = f.tsub;
        nf.piece_orig = f.piece_orig;
        for (auto& [u, iv] : f.vimg) {
            int nu = cmap.vertex_map.at(u);
            auto it = nf.vimg.find(nu);
            if (it == nf.vimg.end())
                nf.vimg[nu] = iv;
            else if (it->second != iv)
                throw std::logic_error("collapsed edge with distinct endpoint images");
        }
        for (const Edge& e : g2.edges()) nf.eimg[e.id] = f.eimg.at(e.id);
        f = std::move(nf);
    };
    // tighten: a vertex whose directions all enter the target the same way
    // would turn into a spur under folding, so pull its image back until a
    // second gate opens (or an edge image dies and is collapsed). Folds keep
    // every vertex at two or more gates, so one pass up front is enough.
    for (int guard = 0;; ++guard) {
        if (guard > 100000) throw std::runtime_error("tightening failed to terminate");
        collapse_empties();
        int tv = -1, common = 0;
        for (int v : f.source.vertices()) {
            std::set<int> germs;
            for (int d : f.source.dirs_at(v)) germs.insert(f.derivative(d));
            if (germs.size() == 1) {
                tv = v;
                common = *germs.begin();
                break;
            }
        }
        if (tv < 0) break;
        Rational delta = f.tsub.dir_length(common);
        for (const Edge& e : f.source.edges()) {
            if (e.from != tv && e.to != tv) continue;
            Rational il = f.tsub.path_length(f.eimg.at(e.id));
            delta = std::min(delta, e.from == e.to ? Rational(il / 2) : il);
        }
        if (delta <= 0) throw std::logic_error("tightening stalled");
        f.apply_move(tv, common, delta);
    }
    f = unit_rescale(f).second;

    FoldingPath path;
    path.target = f.target;
    path.normalized = normalized;
    for (;;) {
        path.stages.push_back(f.source);
        path.guides.push_back(f);
        auto turns = f.illegal_turns();
        if (turns.empty()) break;
        if (static_cast<int>(path.folds.size()) >= max_folds)
            throw std::runtime_error("fold budget exhausted");
        auto pick = *std::min_element(
            turns.begin(), turns.end(), [&](const auto& a, const auto& b) {
                return std::make_tuple(f.source.src(a.first), a.first, a.second) <
                       std::make_tuple(f.source.src(b.first), b.first, b.second);
            });
        FoldResult fr = fold_turn(f, pick, max_foldable(f, pick));
        path.fold_maps.push_back(std::move(fr.fold_map));
        path.folds.push_back(fr.fold);
        f = std::move(fr.guide);
    }
    if (normalized) {
        for (const MarkedGraph& g : path.stages) {
            path.scales.push_back(g.volume());
            path.normalized_stages.push_back(g.normalized());
        }
    }
    return path;
}

FoldingPath skora_path(const MarkedGraph& s, const MarkedGraph& t, bool normalized,
                       int max_folds) {
    return skora_from_guide(optimal_map(s, t), normalized, max_folds);
}

GraphMorphism decompose(const FoldingPath& path, std::size_t s, std::size_t t) {
    if (s > t || t >= path.stages.size()) throw std::invalid_argument("bad stage range");
    if (s == t) return GraphMorphism::identity(path.stages[s]);
    GraphMorphism m = path.fold_maps[s];
    for (std::size_t k = s + 1; k < t; ++k) m = compose(path.fold_maps[k], m);
    return m;
}

CollapsedPath collapse_along_path(const FoldingPath& path, const std::vector<int>& final_forest) {
    std::size_t m = path.stages.size();
    if (m == 0) throw std::invalid_argument("empty path");
    std::vector<std::vector<int>> forests(m);
    forests[m - 1] = final_forest;
    std::sort(forests[m - 1].begin(), forests[m - 1].end());
    for (std::size_t k = m - 1; k-- > 0;) {
        std::set<int> next(forests[k + 1].begin(), forests[k + 1].end());
        for (const Edge& e : path.stages[k].edges()) {
            const auto& dirs = path.fold_maps[k].eimg.at(e.id).dirs;
            bool allin = true;
            for (int x : dirs)
                if (!next.count(std::abs(x))) {
                    allin = false;
                    break;
                }
            if (allin) forests[k].push_back(e.id);
        }
    }

    std::vector<MarkedGraph> cstages;
    std::vector<CollapseMap> cmaps;
    for (std::size_t k = 0; k < m; ++k) {
        try {
            auto [cg, cm] = path.stages[k].collapse_forest(forests[k]);
            cstages.push_back(std::move(cg));
            cmaps.push_back(std::move(cm));
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("forest pullback contains a cycle at stage " +
                                        std::to_string(k));
        }
    }

    CollapsedPath out;
    out.forests = forests;
    for (std::size_t k = 0; k < m; ++k) {
        GraphMorphism pi;
        pi.source = path.stages[k];
        pi.target = cstages[k];
        pi.tsub = cstages[k];
        for (const Edge& e : cstages[k].edges()) pi.piece_orig[e.id] = e.id;
        pi.vimg = cmaps[k].vertex_map;
        std::set<int> fs(forests[k].begin(), forests[k].end());
        for (const Edge& e : path.stages[k].edges()) {
            EdgePath p;
            p.start = cmaps[k].vertex_map.at(e.from);
            if (!fs.count(e.id)) p.dirs = {e.id};
            pi.eimg[e.id] = std::move(p);
        }
        out.verticals.push_back(std::move(pi));
    }

    FoldingPath cp;
    cp.target = cstages.back();
    cp.stages = cstages;
    cp.folds = path.folds;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        GraphMorphism phi;
        phi.source = cstages[k];
        phi.target = cstages[k + 1];
        phi.tsub = cstages[k + 1];
        for (const Edge& e : cstages[k + 1].edges()) phi.piece_orig[e.id] = e.id;
        const auto& vm1 = cmaps[k + 1].vertex_map;
        for (int u : path.stages[k].vertices()) {
            int cu = cmaps[k].vertex_map.at(u);
            int img = vm1.at(path.fold_maps[k].vimg.at(u));
            auto it = phi.vimg.find(cu);
            if (it == phi.vimg.end())
                phi.vimg[cu] = img;
            else if (it->second != img)
                throw std::logic_error("collapse incompatible with the fold at stage " +
                                       std::to_string(k));
        }
        std::set<int> next(forests[k + 1].begin(), forests[k + 1].end());
        for (const Edge& e : cstages[k].edges()) {
            const EdgePath& p = path.fold_maps[k].eimg.at(e.id);
            std::vector<int> dirs;
            for (int x : p.dirs)
                if (!next.count(std::abs(x))) dirs.push_back(x);
            EdgePath q;
            q.start = vm1.at(p.start);
            q.dirs = reduce_dirs(std::move(dirs));
            phi.eimg[e.id] = std::move(q);
        }
        if (!same_map(compose(out.verticals[k + 1], path.fold_maps[k]),
                      compose(phi, out.verticals[k])))
            throw std::logic_error("collapsed square fails to commute at stage " +
                                   std::to_string(k));
        cp.fold_maps.push_back(std::move(phi));
    }

    std::vector<GraphMorphism> gd(m);
    gd[m - 1] = GraphMorphism::identity(cstages[m - 1]);
    for (std::size_t k = m - 1; k-- > 0;) gd[k] = compose(gd[k + 1], cp.fold_maps[k]);
    cp.guides = std::move(gd);
    out.path = std::move(cp);
    return out;
}

FSCertificate fs_distance_certificate(const GraphMorphism& f, int y_edge, const Rational& y_frac,
                                      int max_folds) {
    if (y_frac <= 0 || y_frac >= 1)
        throw std::invalid_argument("target point must be interior to its edge");
    FSCertificate cert;
    cert.path = skora_from_guide(f, false, max_folds);
    const FoldingPath& path = cert.path;
    int last = static_cast<int>(path.stages.size()) - 1;

    // the tsub piece whose interior contains the point, walking the pieces
    // of y_edge in order from its from-endpoint
    auto locate_piece = [&](const GraphMorphism& g) {
        const Edge& e = g.target.edge(y_edge);
        Rational x = Rational(y_frac * e.length);
        int cur = e.from;
        Rational acc = 0;
        std::set<int> used;
        for (;;) {
            int step = 0;
            for (int d : g.tsub.dirs_at(cur)) {
                if (d > 0 && !used.count(d) && g.piece_orig.at(d) == y_edge) {
                    step = d;
                    break;
                }
            }
            if (step == 0) throw std::logic_error("point fell off its target edge");
            Rational plen = g.tsub.dir_length(step);
            if (Rational(acc + plen) > x) return step;
            acc += plen;
            used.insert(step);
            cur = g.tsub.dst(step);
        }
    };

    std::vector<std::map<int, int>> per(last + 1);
    for (int k = 0; k <= last; ++k) {
        const GraphMorphism& g = path.guides[k];
        int piece = locate_piece(g);
        int total = 0;
        for (auto& [e, p] : g.eimg) {
            int c = 0;
            for (int x : p.dirs)
                if (std::abs(x) == piece) ++c;
            if (c) per[k][e] = c;
            total += c;
        }
        cert.stage_preimage_counts.push_back(total);
    }
    cert.preimage_count = cert.stage_preimage_counts.front();
    for (int k = 1; k <= last; ++k) {
        if (cert.stage_preimage_counts[k] > cert.stage_preimage_counts[k - 1]) {
            cert.note = "preimage count increased at stage " + std::to_string(k);
            return cert;
        }
    }
    if (cert.stage_preimage_counts.back() != 1) {
        cert.note = "final stage is not an embedding over the point";
        return cert;
    }

    std::vector<std::map<int, FreeSplitting>> ups(last + 1);
    auto U = [&](int k, int e) -> const FreeSplitting& {
        auto it = ups[k].find(e);
        if (it == ups[k].end()) it = ups[k].emplace(e, upsilon_edge(path.stages[k], e)).first;
        return it->second;
    };

    int cur = per[0].begin()->first;
    FreeSplitting sigma = U(0, cur);
    cert.steps.push_back({sigma, 0, cur});
    for (int k = 0; k < last; ++k) {
        // the fold was supported away from the dual point: same splitting
        // downstairs at a preimage edge
        int carry = -1;
        for (auto& [e, c] : per[k + 1]) {
            if (U(k + 1, e) == sigma) {
                carry = e;
                break;
            }
        }
        if (carry >= 0) {
            cur = carry;
            continue;
        }
        // a preimage merged; hop to a splitting the fold preserves (dual to
        // an unfolded remainder), preferring one still crossing the point
        int bh = -1, bh2 = -1, brank = 2;
        for (const Edge& ea : path.stages[k].edges()) {
            for (const Edge& eb : path.stages[k + 1].edges()) {
                if (!(U(k, ea.id) == U(k + 1, eb.id))) continue;
                int rank = per[k + 1].count(eb.id) ? 0 : 1;
                if (rank < brank) {
                    brank = rank;
                    bh = ea.id;
                    bh2 = eb.id;
                }
            }
        }
        if (bh < 0) {
            cert.note = "no splitting survives fold " + std::to_string(k);
            return cert;
        }
        // land the carried splitting at this stage before switching edges
        if (cert.steps.back().stage != k) cert.steps.push_back({sigma, k, cur});
        if (!(U(k, bh) == sigma)) cert.steps.push_back({U(k, bh), k, bh});
        cert.steps.push_back({U(k, bh), k + 1, bh2});
        sigma = U(k, bh);
        cur = bh2;
        if (!per[k + 1].count(cur)) {
            int hc = per[k + 1].begin()->first;
            cert.steps.push_back({U(k + 1, hc), k + 1, hc});
            sigma = U(k + 1, hc);
            cur = hc;
        }
    }
    if (cert.steps.back().stage != last) cert.steps.push_back({sigma, last, cur});

    // independent validation of the recorded chain
    bool ok = cert.steps.front().stage == 0 && cert.steps.back().stage == last;
    for (std::size_t i = 0; ok && i < cert.steps.size(); ++i) {
        const SplittingStep& st = cert.steps[i];
        if (!(upsilon_edge(path.stages[st.stage], st.edge) == st.splitting)) ok = false;
        if (i > 0) {
            const SplittingStep& pv = cert.steps[i - 1];
            if (st.stage < pv.stage) ok = false;
            // adjacent entries either share a stage graph (both one-edge
            // collapses of it) or carry an identical splitting forward
            if (st.stage != pv.stage && !(st.splitting == pv.splitting)) ok = false;
        }
    }
    if (!ok && cert.note.empty()) cert.note = "chain validation failed";
    cert.valid = ok;
    return cert;
}

}  // namespace otk
