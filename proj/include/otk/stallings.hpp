#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "otk/word.hpp"

namespace otk {

// Arrow of a label graph, oriented along the positive letter.
struct CoreArrow {
    int from = 0;
    int to = 0;
    int letter = 0;  // positive
    bool operator<(const CoreArrow& o) const {
        return std::tie(from, to, letter) < std::tie(o.from, o.to, o.letter);
    }
    bool operator==(const CoreArrow& o) const {
        return from == o.from && to == o.to && letter == o.letter;
    }
};

struct CoreGraph {
    int nv = 0;
    std::vector<CoreArrow> arrows;
    int rank() const { return static_cast<int>(arrows.size()) - nv + 1; }
};

// Conjugacy class of a nontrivial finitely generated subgroup of a free
// group, represented by its cyclically reduced Stallings core in canonical
// form (lexicographically least BFS encoding over all start vertices).
// Equality of keys is equality of conjugacy classes.
class FreeFactor {
public:
    FreeFactor() = default;
    static FreeFactor from_generators(const std::vector<Word>& gens);
    static FreeFactor from_core(CoreGraph core);  // must already be folded
    static FreeFactor whole_group(int n);

    bool valid() const { return core_.nv > 0; }
    int rank() const { return valid() ? core_.rank() : 0; }
    const CoreGraph& core() const { return core_; }
    const std::string& key() const { return key_; }
    // free basis of a representative subgroup, deterministic
    std::vector<Word> basis() const;

    bool operator==(const FreeFactor& o) const { return key_ == o.key_; }
    bool operator!=(const FreeFactor& o) const { return key_ != o.key_; }
    bool operator<(const FreeFactor& o) const { return key_ < o.key_; }

private:
    CoreGraph core_;
    std::string key_;
};

// true iff some conjugate of B is a subgroup of A, decided by searching for
// a label immersion of B's core into A's core over start vertex pairs
bool factor_contains(const FreeFactor& A, const FreeFactor& B);

// nontrivial components of the fiber product of the two cores — the
// conjugacy classes of intersections of conjugates of A and B — sorted by
// descending rank, then key
std::vector<FreeFactor> factor_intersections(const FreeFactor& A, const FreeFactor& B);

}  // namespace otk
