#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otk/rational.hpp"
#include "otk/word.hpp"

namespace otk {

// Unoriented edge with a chosen orientation. A directed edge is a signed
// edge id: +id traverses from->to, -id traverses to->from. The label of the
// reversed direction is the inverse word.
struct Edge {
    int id = 0;  // positive
    int from = 0;
    int to = 0;
    Rational length;
    Word label;
};

// Tight edge paths carry no backtracking e,e^-1. `start` disambiguates the
// empty path. Optional fractional portions of the first/last edge are kept
// for point bookkeeping; most paths are vertex-to-vertex.
struct EdgePath {
    int start = -1;
    std::vector<int> dirs;
    std::optional<Rational> head_fraction;  // retained tail part of dirs.front()
    std::optional<Rational> tail_fraction;  // retained head part of dirs.back()

    bool empty() const { return dirs.empty(); }
    bool operator==(const EdgePath& o) const { return start == o.start && dirs == o.dirs; }
};

struct ShortBasis {
    int base_vertex = -1;
    std::vector<Word> words;
    std::vector<EdgePath> loops;
    Rational max_loop_length;
};

struct CollapseMap {
    std::map<int, int> vertex_map;     // old vertex -> new vertex
    std::vector<int> collapsed_edges;  // edge ids mapped to vertices
};

// Result of folding the label-annotated graph down to a rose: validity of
// the marking plus, when valid, a loop at the basepoint realizing each
// basis generator of F_n.
struct MarkingInfo {
    bool valid = false;
    std::vector<std::string> issues;
    std::vector<EdgePath> generator_loops;  // index i-1 realizes a_i
};

// A marked metric graph: a point of cv0(F_n) when normalized. Immutable
// after construction; all operations return new graphs.
class MarkedGraph {
public:
    MarkedGraph() = default;
    MarkedGraph(std::vector<int> vertices, std::vector<Edge> edges, int basepoint);

    static MarkedGraph rose(int rank, const std::vector<Rational>& petal_lengths);

    const std::vector<int>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int id) const;
    bool has_vertex(int v) const;
    int basepoint() const { return basepoint_; }

    int src(int dir) const;
    int dst(int dir) const;
    Word dir_label(int dir) const;
    const Rational& dir_length(int dir) const { return edge(std::abs(dir)).length; }
    // Directions leaving v, sorted by signed id; a loop contributes both.
    const std::vector<int>& dirs_at(int v) const;
    int valence(int v) const { return static_cast<int>(dirs_at(v).size()); }

    int rank() const;  // first Betti number E - V + 1
    Rational volume() const;
    bool connected() const;

    std::vector<std::string> validate() const;
    bool is_valid() const { return validate().empty(); }

    MarkedGraph normalized() const;
    MarkedGraph scaled(const Rational& factor) const;

    // Splits edge `eid` at distance t from its `from` endpoint. The first
    // piece carries the trivial label, the second the original label.
    // Outputs: new vertex id and the two piece ids, in traversal order.
    MarkedGraph subdivided(int eid, const Rational& t, int* mid_vertex = nullptr,
                           int* first_piece = nullptr, int* second_piece = nullptr) const;

    std::pair<MarkedGraph, CollapseMap> collapse_forest(const std::vector<int>& forest) const;

    // --- paths and words ---
    EdgePath tighten(EdgePath p) const;
    Word path_label(const EdgePath& p) const;
    Rational path_length(const EdgePath& p) const;
    bool path_well_formed(const EdgePath& p) const;

    // Tight loop at the basepoint whose label equals w exactly.
    EdgePath realize_based(const Word& w) const;
    // Cyclically tight closed path freely homotopic to the class of w.
    EdgePath loop_realization(const Word& w) const;
    Rational translation_length(const Word& w) const;

    ShortBasis short_basis() const;

    // Marking validity data (folding the labeled graph to the rose).
    const MarkingInfo& marking() const;

    // BFS spanning tree from the lowest-id vertex; parent directions keyed
    // by vertex. tree_path returns the tight tree path u -> v.
    const std::map<int, int>& bfs_parents() const;
    EdgePath tree_path(int u, int v) const;

    int max_vertex_id() const;
    int max_edge_id() const;

    std::string dot() const;

private:
    std::vector<int> vertices_;
    std::vector<Edge> edges_;
    int basepoint_ = -1;
    std::map<int, std::size_t> edge_index_;
    std::map<int, std::vector<int>> out_dirs_;

    mutable std::shared_ptr<const MarkingInfo> marking_cache_;
    mutable std::shared_ptr<const std::map<int, int>> tree_cache_;

    MarkingInfo compute_marking() const;
};

std::vector<int> reduce_dirs(std::vector<int> dirs);

}  // namespace otk
