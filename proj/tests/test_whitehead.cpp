#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "otk/whitehead.hpp"

using namespace otk;

TEST_CASE("whitehead graph of the commutator") {
    Word comm({1, 2, -1, -2});
    auto g = whitehead_graph({comm}, 2);
    CHECK(g.edge_count() == 4);
    // 4-cycle a1 - a2' - a1' - a2 - a1
    CHECK(g.edges.count({-2, 1}));
    CHECK(g.edges.count({-2, -1}));
    CHECK(g.edges.count({-1, 2}));
    CHECK(g.edges.count({1, 2}));
    CHECK(is_connected(g));
    CHECK(!has_cut_vertex(g));
}

TEST_CASE("whitehead graph of a primitive is disconnected") {
    auto g = whitehead_graph({Word({1, 2})}, 2);
    CHECK(g.edge_count() == 2);
    // adjacencies a1.a2 and a2.a1: edges {a1,a2'} and {a2,a1'}
    CHECK(g.edges.count({-2, 1}));
    CHECK(g.edges.count({-1, 2}));
    CHECK(!is_connected(g));
}

TEST_CASE("degenerate and unreduced inputs are flagged") {
    auto g = whitehead_graph({Word({1})}, 2);
    CHECK(g.degenerate);
    CHECK(g.edge_count() == 1);
    CHECK(g.edges.count({-1, 1}));

    auto h = whitehead_graph({Word({2, 1, -2})}, 2);
    CHECK(h.reduced_input);
    CHECK(h.edge_count() == 1);

    CHECK_THROWS_AS(whitehead_graph({Word()}, 2), std::invalid_argument);
}

TEST_CASE("edge count equals total cyclic length") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> ls;
        int len = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < len; ++i) {
            int g = 1 + static_cast<int>(rng() % 3);
            ls.push_back(rng() % 2 ? g : -g);
        }
        Word w(ls);
        if (w.cyclic_reduction().trivial()) continue;
        auto g = whitehead_graph({w}, 3);
        CHECK(g.edge_count() == static_cast<int>(w.cyclic_reduction().size()));
    }
}

TEST_CASE("cut vertex detection on a star") {
    WhiteheadGraph g;
    g.rank = 2;
    g.edges[{-2, 1}] = 1;
    g.edges[{-1, 1}] = 1;
    g.edges[{1, 2}] = 1;
    CHECK(is_connected(g));
    CHECK(has_cut_vertex(g));
}

TEST_CASE("whitehead automorphisms act correctly") {
    auto auts = whitehead_automorphisms(2);
    CHECK(auts.size() == 4 * 3);  // 4 multipliers, 2^2 - 1 nontrivial subsets
    for (const auto& aut : auts) {
        // bijectivity: inverse really inverts on the generators
        for (int g = 1; g <= 2; ++g) {
            CHECK(aut.inverse().apply(aut.apply(Word::generator(g))) == Word::generator(g));
            CHECK(aut.apply(aut.inverse().apply(Word::generator(g))) == Word::generator(g));
        }
        // homomorphism on a sample pair
        Word u({1, -2}), v({2, 2, 1});
        CHECK(aut.apply(u * v) == aut.apply(u) * aut.apply(v));
    }
}

TEST_CASE("minimize") {
    CHECK(minimize(Word({1, 2, -1}), 2).word == Word({2}));
    CHECK(minimize(Word({1, 2}), 2).word.size() == 1);
    auto r = minimize(Word({1, 2, -1, -2}), 2);
    CHECK(r.word.size() == 4);
    CHECK(r.applied.empty());
    // invariant under conjugation and inversion (length of minimum)
    Word w({1, 1, 2, -1, 2});
    auto m = minimize(w, 2).word.size();
    CHECK(minimize(w.conjugate(Word({2, 1})), 2).word.size() == m);
    CHECK(minimize(w.inverse(), 2).word.size() == m);
}

TEST_CASE("primitivity") {
    CHECK(is_primitive(Word({1}), 2));
    CHECK(is_primitive(Word({1, 2}), 2));
    CHECK(is_primitive(Word({1, 1, 2}), 2));
    CHECK(!is_primitive(Word({1, 1}), 2));
    CHECK(!is_primitive(Word({1, 2, -1, -2}), 2));
    CHECK(!is_primitive(Word({1, 1, 2, 2}), 2));
    CHECK(is_primitive(Word({1, 2, 3}), 3));
    CHECK(is_primitive(Word({1, 2, 1, 3}), 3));
}

TEST_CASE("proper free factor membership") {
    CHECK(!in_proper_free_factor(Word({1, 2, -1, -2}), 2));
    CHECK(in_proper_free_factor(Word({1, 1, 2, 2}), 3));  // misses a3
    CHECK(in_proper_free_factor(Word({1}), 2));
    CHECK(in_proper_free_factor(Word({1, 1}), 2));  // <a1> is a proper factor
    CHECK(!in_proper_free_factor(Word({1, 1, 2, 2}), 2));
}

TEST_CASE("greedy minimization agrees with orbit BFS at rank 2") {
    // all cyclic words of length <= 5 over a1,a2
    std::vector<Word> all;
    for (int len = 1; len <= 5; ++len) {
        std::vector<int> idx(len, 0);
        int total = 1;
        for (int i = 0; i < len; ++i) total *= 4;
        for (int code = 0; code < total; ++code) {
            int c = code;
            std::vector<int> ls;
            for (int i = 0; i < len; ++i) {
                int d = c % 4;
                c /= 4;
                ls.push_back(d < 2 ? d + 1 : -(d - 1));
            }
            Word w(ls);
            Word cr = w.cyclic_reduction();
            if (cr.trivial() || cr.size() != static_cast<std::size_t>(len)) continue;
            all.push_back(cr);
        }
    }
    int primitives = 0;
    for (const Word& w : all) {
        bool greedy = is_primitive(w, 2);
        bool oracle = orbit_reaches_primitive(w, 2, 6);
        CHECK(greedy == oracle);
        if (greedy) {
            ++primitives;
            Word m = minimize(w, 2).word;
            if (m.size() >= 2) {
                auto g = whitehead_graph({m}, 2);
                CHECK((!is_connected(g) || has_cut_vertex(g)));
            }
        }
    }
    CHECK(primitives > 0);
}
