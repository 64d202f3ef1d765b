#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "otk/marked_graph.hpp"

namespace otk {

struct TrainTrackWitness {
    bool ok = false;
    std::string reason;
    int vertex = -1;             // offending vertex, when gate count fails
    int edge = 0;                // offending edge, when stretch fails
};

// Marking-compatible map between marked graphs. Vertex images live at
// vertices of a private subdivided copy of the target (`tsub`), so images of
// interior points stay exact; edge images are tight vertex-to-vertex paths
// in tsub. piece_orig tracks which original target edge each tsub edge came
// from.
struct GraphMorphism {
    MarkedGraph source;
    MarkedGraph target;
    MarkedGraph tsub;
    std::map<int, int> piece_orig;   // tsub edge id -> target edge id
    std::map<int, int> vimg;         // source vertex -> tsub vertex
    std::map<int, EdgePath> eimg;    // source edge id -> path in tsub

    // marking-transported map: all vertices to the target basepoint, each
    // edge to the tight based loop realizing its transported label
    static GraphMorphism from_markings(const MarkedGraph& s, const MarkedGraph& t);
    // identity scaffold: same graph as source and target, every edge to itself
    static GraphMorphism identity(const MarkedGraph& g);

    EdgePath dir_image(int dir) const;
    Rational stretch(int eid) const;
    Rational max_stretch() const;
    std::vector<Rational> stretch_profile() const;  // sorted descending

    bool marking_compatible() const;

    // first image direction; 0 when the edge image is a point
    int derivative(int dir) const;
    // per vertex, the partition of incident directions by derivative
    std::map<int, std::vector<std::vector<int>>> gates() const;
    std::vector<std::pair<int, int>> illegal_turns() const;
    TrainTrackWitness train_track_status() const;

    // image of a source path, tightened
    EdgePath map_path(const EdgePath& p) const;

    // subdivide tsub inside edge |d| at distance delta from its d-source;
    // remaps all stored images; returns the new (or existing) vertex and the
    // tsub direction leading to it from the d-source
    int split_toward(int d, const Rational& delta, int* conn_dir);
    // move the image of source vertex v by delta along tsub direction d
    void apply_move(int v, int d, const Rational& delta);
    // move several vertex images at once; directions refer to the tsub
    // pieces before any of the moves are applied
    void apply_moves(std::vector<std::tuple<int, int, Rational>> moves);
};

// g after f; f's images must be unsubdivided target edges (piece_orig
// identity), as is the case for fold maps
GraphMorphism compose(const GraphMorphism& g, const GraphMorphism& f);

// equality as tightened edge-path maps over a shared target subdivision
bool same_map(const GraphMorphism& a, const GraphMorphism& b);

// conjugacy classes of all embedded circles, figure-eights and barbells
std::vector<Word> candidate_loops(const MarkedGraph& s);

// sigma(S,T): max over candidate loops of the translation length ratio
Rational lipschitz_constant(const MarkedGraph& s, const MarkedGraph& t);

// vertex-image descent from from_markings until no move strictly decreases
// the sorted stretch profile; throws on iteration-cap overrun
GraphMorphism optimal_map(const MarkedGraph& s, const MarkedGraph& t, int max_iters = 5000);

// source rescaled so every edge maps isometrically, with the guide carried
// over; requires no degenerate edges
std::pair<MarkedGraph, GraphMorphism> unit_rescale(const GraphMorphism& f);

}  // namespace otk
