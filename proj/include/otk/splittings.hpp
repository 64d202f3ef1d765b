#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otk/marked_graph.hpp"
#include "otk/stallings.hpp"

namespace otk {

enum class SplitKind { amalgam, hnn };

// One-edge free splitting: amalgam A*B (two vertex groups, ranks summing to
// n) or HNN extension A* (one vertex group of rank n-1). Vertex groups are
// conjugacy classes; amalgam sides are kept sorted by key, so equality is
// structural.
struct FreeSplitting {
    SplitKind kind = SplitKind::hnn;
    std::vector<FreeFactor> sides;

    static FreeSplitting amalgam(FreeFactor a, FreeFactor b);
    static FreeSplitting hnn(FreeFactor a);

    std::string key() const;
    bool operator==(const FreeSplitting& o) const { return key() == o.key(); }
    bool operator!=(const FreeSplitting& o) const { return !(*this == o); }
};

// One-edge splitting with infinite cyclic edge group generated by edge_word.
struct CyclicSplitting {
    SplitKind kind = SplitKind::amalgam;
    std::vector<FreeFactor> sides;
    Word edge_word;

    std::string key() const;
    bool operator==(const CyclicSplitting& o) const { return key() == o.key(); }
};

// the one-edge splitting obtained from G by collapsing every edge except eid
FreeSplitting upsilon_edge(const MarkedGraph& g, int eid);
// all one-edge collapses, keyed by edge id
std::vector<std::pair<int, FreeSplitting>> upsilon(const MarkedGraph& g);

// corank-one projection: vertex group at the longest edge (ties broken by
// lowest id), completed deterministically in the separating case
FreeFactor upsilon_F(const MarkedGraph& g);
// the edge upsilon_F selects (exposed for the length lower-bound assertions)
int upsilon_F_edge(const MarkedGraph& g);

// two-edge refinement witness for a pair of one-edge splittings: a splitting
// F_n = <B> * <u> * <d> with <B,u> one side of X and <B,d> one side of Y
struct RefinementWitness {
    bool found = false;
    std::string note;
    std::vector<Word> b_gens;
    Word u, d;
};

RefinementWitness common_refinement(const FreeSplitting& x, const FreeSplitting& y, int rank);

struct EdgeFoldResult {
    bool ok = false;
    std::string error;
    Word root;  // extracted root when c was a proper power
    CyclicSplitting splitting;
};

// folds the edge of the amalgam X = A*B over the maximal cyclic subgroup
// generated by c in A, giving A *_<c> <B,c>
EdgeFoldResult edge_fold(const FreeSplitting& x, const Word& c, int rank);

struct FFCertificate {
    bool valid = false;
    std::string note;
    std::vector<FreeFactor> chain;  // consecutive members nested up to conjugacy
};

FFCertificate ff_adjacency_certificate(const FreeSplitting& x, const FreeSplitting& y,
                                       const RefinementWitness& witness, int rank);
// type (b): both splittings fold onto a common cyclic splitting along cx/cy;
// the chain passes through the smallest free factor containing the edge word
FFCertificate ff_adjacency_certificate_zsplit(const FreeSplitting& x, const Word& cx,
                                              const FreeSplitting& y, const Word& cy, int rank);

// deterministic vertex-group choice for the FF projection R(.)
FreeFactor splitting_projection(const FreeSplitting& x);

// smallest free factor containing the cyclic word w, via Whitehead
// minimization with the minimizing automorphisms inverted and transported
FreeFactor smallest_containing_factor(const Word& w, int rank);

struct TieResult {
    bool found = false;
    std::string note;
    FreeFactor witness;
};

// searches for a rank-ell free factor generated by short-basis loops of
// length <= k in both graphs (bounded search; absence is not a proof)
TieResult is_tied(const MarkedGraph& s, const MarkedGraph& t, int ell, int k = 4);

struct DngBound {
    bool ok = false;
    int failed_index = -1;
    int bound = -1;
    std::vector<FreeFactor> witnesses;
};

DngBound dng_distance_upper(const MarkedGraph& s, const MarkedGraph& t, int ell,
                            const std::vector<MarkedGraph>& chain, int k = 4);

// FS-distance <= 2 certificate for G and a forest collapse of G: both graphs
// collapse onto the same one-edge splitting at a surviving edge
struct NearbyCertificate {
    bool valid = false;
    std::string note;
    int edge_id = 0;
    FreeSplitting shared;
};

NearbyCertificate collapse_nearby_certificate(const MarkedGraph& g, const std::vector<int>& forest);

}  // namespace otk
