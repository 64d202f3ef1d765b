#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "otk/word.hpp"

namespace otk {

// Whitehead graph of a multiset of cyclic words with respect to the standard
// basis: vertices are the 2n signed letters, one edge joining x and y^{-1}
// for each cyclic adjacency x.y. Loops (adjacency x.x) are allowed.
struct WhiteheadGraph {
    int rank = 0;
    // unordered letter pair (a,b) with a <= b -> multiplicity
    std::map<std::pair<int, int>, int> edges;
    bool degenerate = false;     // some input had cyclic length < 2
    bool reduced_input = false;  // some input was not cyclically reduced as given

    int edge_count() const;
    std::set<int> support() const;  // non-isolated vertices
    std::string dot() const;
};

WhiteheadGraph whitehead_graph(const std::vector<Word>& words, int rank);

// Connectivity restricted to non-isolated vertices; an empty graph counts
// as connected.
bool is_connected(const WhiteheadGraph& g);
bool has_cut_vertex(const WhiteheadGraph& g);

// Type-II Whitehead automorphism (A, a): the multiplier a is a signed
// letter, A contains a and not a^{-1}; x in A picks up a on the right,
// x^{-1} in A puts a^{-1} on the left.
struct WhiteheadAut {
    int multiplier = 0;
    std::set<int> side;

    Word apply(const Word& w) const;
    Word image_of_generator(int g) const;  // g positive
    WhiteheadAut inverse() const;
    std::string str() const;
};

// All type-II automorphisms for rank n, in a fixed deterministic order
// (the identity-acting ones A = {a} are skipped).
std::vector<WhiteheadAut> whitehead_automorphisms(int n);

struct MinimizeResult {
    Word word;                       // cyclically reduced local minimum
    std::vector<WhiteheadAut> applied;  // in application order
};

// Greedy cyclic-length descent: repeatedly applies the first automorphism in
// canonical order that strictly shortens the cyclic word.
MinimizeResult minimize(const Word& w, int rank);

bool is_primitive(const Word& w, int rank);

// True iff w lies in a proper free factor of F_rank: after minimization the
// word misses a basis letter or its Whitehead graph is disconnected.
bool in_proper_free_factor(const Word& w, int rank);

// Brute-force arbiter: BFS over length-nonincreasing Whitehead images up to
// the given depth, looking for a cyclic word of length 1.
bool orbit_reaches_primitive(const Word& w, int rank, int depth = 6);

}  // namespace otk
