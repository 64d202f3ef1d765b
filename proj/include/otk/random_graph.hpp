#pragma once

#include <random>

#include "otk/marked_graph.hpp"

namespace otk {

// uniform freely reduced word of the given length
Word random_word(std::mt19937_64& rng, int rank, int len);

// Connected graph of the given rank with every vertex of valence >= 2:
// a random spanning tree plus `rank` extra edges, integer lengths
// normalized to volume one. The marking (trivial tree labels, a_i on the
// extra edges) is shuffled by Whitehead automorphisms and a conjugation.
MarkedGraph random_graph(std::mt19937_64& rng, int rank, int max_extra_vertices = 2,
                         int twists = 3);

}  // namespace otk
