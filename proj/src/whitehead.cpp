#include "otk/whitehead.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace otk {

namespace {

std::pair<int, int> pair_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

std::string letter_str(int x) {
    std::string s = "a" + std::to_string(std::abs(x));
    if (x < 0) s += "'";
    return s;
}

}  // namespace

int WhiteheadGraph::edge_count() const {
    int c = 0;
    for (auto& [k, m] : edges) c += m;
    return c;
}

std::set<int> WhiteheadGraph::support() const {
    std::set<int> s;
    for (auto& [k, m] : edges) {
        s.insert(k.first);
        s.insert(k.second);
    }
    return s;
}

std::string WhiteheadGraph::dot() const {
    std::ostringstream os;
    os << "graph whitehead {\n";
    for (int i = 1; i <= rank; ++i) {
        os << "  \"" << letter_str(i) << "\";\n";
        os << "  \"" << letter_str(-i) << "\";\n";
    }
    for (auto& [k, m] : edges)
        for (int i = 0; i < m; ++i)
            os << "  \"" << letter_str(k.first) << "\" -- \"" << letter_str(k.second) << "\";\n";
    os << "}\n";
    return os.str();
}

WhiteheadGraph whitehead_graph(const std::vector<Word>& words, int rank) {
    WhiteheadGraph g;
    g.rank = rank;
    for (const Word& w : words) {
        if (w.trivial()) throw std::invalid_argument("trivial word in whitehead_graph input");
        if (w.max_generator() > rank) throw std::invalid_argument("word uses a generator beyond the rank");
        Word c = w.cyclic_reduction();
        if (c != w) g.reduced_input = true;
        const auto& ls = c.letters();
        if (ls.size() < 2) g.degenerate = true;
        for (std::size_t i = 0; i < ls.size(); ++i) {
            int x = ls[i];
            int y = ls[(i + 1) % ls.size()];
            ++g.edges[pair_key(x, -y)];
        }
    }
    return g;
}

namespace {

// adjacency over all 2n letters (isolated ones count against connectivity),
// loops dropped since they never affect it
std::map<int, std::set<int>> simple_adjacency(const WhiteheadGraph& g) {
    std::map<int, std::set<int>> adj;
    for (int a = 1; a <= g.rank; ++a) {
        adj[a];
        adj[-a];
    }
    for (auto& [k, m] : g.edges) {
        if (k.first == k.second) {
            adj[k.first];
            continue;
        }
        adj[k.first].insert(k.second);
        adj[k.second].insert(k.first);
    }
    return adj;
}

bool connected_avoiding(const std::map<int, std::set<int>>& adj, int avoid) {
    int start = 0;
    std::size_t expect = 0;
    for (auto& [v, ns] : adj) {
        if (v == avoid) continue;
        ++expect;
        if (start == 0) start = v;
    }
    if (expect <= 1) return true;
    std::set<int> seen{start};
    std::deque<int> todo{start};
    while (!todo.empty()) {
        int v = todo.front();
        todo.pop_front();
        for (int w : adj.at(v)) {
            if (w == avoid) continue;
            if (seen.insert(w).second) todo.push_back(w);
        }
    }
    return seen.size() == expect;
}

}  // namespace

bool is_connected(const WhiteheadGraph& g) {
    return connected_avoiding(simple_adjacency(g), 0);
}

bool has_cut_vertex(const WhiteheadGraph& g) {
    auto adj = simple_adjacency(g);
    for (auto& [v, ns] : adj)
        if (!connected_avoiding(adj, v)) return true;
    return false;
}

Word WhiteheadAut::image_of_generator(int g) const {
    int a = multiplier;
    if (g == std::abs(a)) return Word::generator(g);
    bool in_pos = side.count(g) > 0;
    bool in_neg = side.count(-g) > 0;
    std::vector<int> img;
    if (in_neg) img.push_back(-a);
    img.push_back(g);
    if (in_pos) img.push_back(a);
    return Word(std::move(img));
}

Word WhiteheadAut::apply(const Word& w) const {
    Word out;
    for (int x : w.letters()) {
        Word img = image_of_generator(std::abs(x));
        out = out * (x > 0 ? img : img.inverse());
    }
    return out;
}

WhiteheadAut WhiteheadAut::inverse() const {
    WhiteheadAut inv;
    inv.multiplier = -multiplier;
    inv.side = side;
    inv.side.erase(multiplier);
    inv.side.insert(-multiplier);
    return inv;
}

std::string WhiteheadAut::str() const {
    std::ostringstream os;
    os << "(" << letter_str(multiplier) << "; ";
    bool first = true;
    for (int x : side) {
        if (!first) os << ",";
        os << letter_str(x);
        first = false;
    }
    os << ")";
    return os.str();
}

std::vector<WhiteheadAut> whitehead_automorphisms(int n) {
    if (n < 2) throw std::invalid_argument("rank must be at least 2");
    std::vector<int> letters;
    for (int i = 1; i <= n; ++i) {
        letters.push_back(i);
        letters.push_back(-i);
    }
    std::vector<WhiteheadAut> out;
    for (int a : letters) {
        std::vector<int> rest;
        for (int x : letters)
            if (x != a && x != -a) rest.push_back(x);
        int k = static_cast<int>(rest.size());
        for (int mask = 1; mask < (1 << k); ++mask) {  // mask 0 is the identity
            WhiteheadAut aut;
            aut.multiplier = a;
            aut.side.insert(a);
            for (int i = 0; i < k; ++i)
                if (mask & (1 << i)) aut.side.insert(rest[i]);
            out.push_back(std::move(aut));
        }
    }
    return out;
}

MinimizeResult minimize(const Word& w, int rank) {
    MinimizeResult res;
    res.word = w.cyclic_reduction();
    auto auts = whitehead_automorphisms(rank);
    bool improved = true;
    while (improved && !res.word.trivial()) {
        improved = false;
        for (const WhiteheadAut& aut : auts) {
            Word img = aut.apply(res.word).cyclic_reduction();
            if (img.size() < res.word.size()) {
                res.word = img;
                res.applied.push_back(aut);
                improved = true;
                break;
            }
        }
    }
    return res;
}

bool is_primitive(const Word& w, int rank) {
    if (w.trivial()) return false;
    return minimize(w, rank).word.size() == 1;
}

bool in_proper_free_factor(const Word& w, int rank) {
    if (w.trivial()) throw std::invalid_argument("trivial word");
    Word m = minimize(w, rank).word;
    std::set<int> used;
    for (int x : m.letters()) used.insert(std::abs(x));
    if (static_cast<int>(used.size()) < rank) return true;
    return !is_connected(whitehead_graph({m}, rank));
}

bool orbit_reaches_primitive(const Word& w, int rank, int depth) {
    Word start = w.cyclic_reduction();
    if (start.trivial()) return false;
    if (start.size() == 1) return true;
    auto auts = whitehead_automorphisms(rank);
    std::set<std::vector<int>> seen{start.cyclic_key()};
    std::deque<std::pair<Word, int>> todo{{start, 0}};
    while (!todo.empty()) {
        auto [cur, d] = todo.front();
        todo.pop_front();
        if (d >= depth) continue;
        for (const WhiteheadAut& aut : auts) {
            Word img = aut.apply(cur).cyclic_reduction();
            if (img.size() > cur.size()) continue;  // monotone chains suffice
            if (img.size() == 1) return true;
            if (seen.insert(img.cyclic_key()).second) todo.push_back({img, d + 1});
        }
    }
    return false;
}

}  // namespace otk
