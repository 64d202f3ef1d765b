#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "otk/word.hpp"

using otk::Word;

TEST_CASE("free reduction") {
    CHECK(Word({1, -1}).trivial());
    CHECK(Word({1, 2, -2, -1}).trivial());
    CHECK(Word({1, 2, -2, 1}) == Word({1, 1}));
    CHECK((Word({1, 2}) * Word({-2, 3})) == Word({1, 3}));
}

TEST_CASE("inverse and conjugation") {
    Word w({1, 2, -1});
    CHECK((w * w.inverse()).trivial());
    CHECK(w.conjugate(Word({2})) == Word({2, 1, 2, -1, -2}));
    CHECK(Word({1, 2, -1}).cyclic_reduction() == Word({2}));
}

TEST_CASE("cyclic key is conjugation and inversion invariant") {
    Word w({1, 2, -1, -2});
    Word g({2, 2, 1});
    CHECK(w.cyclic_key() == w.conjugate(g).cyclic_key());
    CHECK(w.cyclic_key() == w.inverse().cyclic_key());
    CHECK(w.cyclic_key() != Word({1, 2}).cyclic_key());
}

TEST_CASE("primitive root") {
    auto [r1, k1] = Word({1, 2, 1, 2}).primitive_root();
    CHECK(k1 == 2);
    CHECK(r1 == Word({1, 2}));
    auto [r2, k2] = Word({1, 2}).primitive_root();
    CHECK(k2 == 1);
    CHECK(r2 == Word({1, 2}));
    // conjugate of a power: root is returned in conjugated form
    auto [r3, k3] = Word({2, 1, 1, 1, -2}).primitive_root();
    CHECK(k3 == 3);
    CHECK(r3 == Word({2, 1, -2}));
    CHECK((r3.pow(3)) == Word({2, 1, 1, 1, -2}));
}

TEST_CASE("conjugating words") {
    Word u({1, 2, -1});
    Word w = u.conjugate(Word({2, 2}));
    auto mu = otk::conjugating_word(u, w);
    REQUIRE(mu.has_value());
    CHECK(u.conjugate(*mu) == w);
    CHECK(!otk::conjugating_word(Word({1}), Word({2})).has_value());
    CHECK(!otk::conjugating_word(Word({1}), Word()).has_value());
    CHECK(otk::conjugating_word(Word(), Word()) == Word());

    // single conjugator for a whole marking
    Word g({2, 1, 1});
    std::vector<std::pair<Word, Word>> pairs;
    for (auto v : {Word({1}), Word({2}), Word({1, -2, 1})})
        pairs.emplace_back(v, v.conjugate(g));
    auto c = otk::common_conjugator(pairs);
    REQUIRE(c.has_value());
    CHECK(*c == g);

    // pairwise conjugate but not simultaneously
    std::vector<std::pair<Word, Word>> bad = {
        {Word({1}), Word({1})},
        {Word({2}), Word({3, 2, -3})},
    };
    CHECK(!otk::common_conjugator(bad).has_value());
    // the correction runs over powers of the first word's root
    std::vector<std::pair<Word, Word>> shifted = {
        {Word({1}), Word({1})},
        {Word({2}), Word({1, 1, 2, -1, -1})},
    };
    auto cs = otk::common_conjugator(shifted);
    REQUIRE(cs.has_value());
    for (auto& pr : shifted) CHECK(pr.first.conjugate(*cs) == pr.second);
}

TEST_CASE("powers") {
    Word w({1, 2});
    CHECK(w.pow(3) == Word({1, 2, 1, 2, 1, 2}));
    CHECK(w.pow(-1) == w.inverse());
    CHECK(w.pow(0).trivial());
}
