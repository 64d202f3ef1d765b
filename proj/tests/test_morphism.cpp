#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "otk/morphism.hpp"

using namespace otk;

namespace {

Rational r(long p, long q = 1) { return Rational(p, q); }

// rose with petals labeled a1 and a1a2
MarkedGraph remarked_rose() {
    std::vector<Edge> es = {
        {1, 0, 0, r(1, 2), Word({1})},
        {2, 0, 0, r(1, 2), Word({1, 2})},
    };
    return MarkedGraph({0}, es, 0);
}

MarkedGraph theta() {
    std::vector<Edge> es = {
        {1, 0, 1, r(1, 3), Word({1})},
        {2, 0, 1, r(1, 3), Word({2})},
        {3, 0, 1, r(1, 3), Word()},
    };
    return MarkedGraph({0, 1}, es, 0);
}

}  // namespace

TEST_CASE("from_markings on identical roses is the identity") {
    auto g = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    auto f = GraphMorphism::from_markings(g, g);
    CHECK(f.max_stretch() == 1);
    CHECK(f.marking_compatible());
    CHECK(f.illegal_turns().empty());
    CHECK(f.train_track_status().ok);
    CHECK(f.eimg.at(1).dirs == std::vector<int>{1});
    CHECK_THROWS_AS(GraphMorphism::from_markings(g, MarkedGraph::rose(3, {r(1), r(1), r(1)})),
                    std::invalid_argument);
}

TEST_CASE("from_markings stretches the re-marked petal") {
    auto s = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    auto t = remarked_rose();
    auto f = GraphMorphism::from_markings(s, t);
    CHECK(f.marking_compatible());
    CHECK(f.stretch(1) == 1);
    // a2 realizes in T as petal1^-1 petal2, length 1
    CHECK(f.stretch(2) == 2);
    CHECK(f.max_stretch() == 2);
}

TEST_CASE("gates and illegal turns") {
    // manual guide on R2 with source lengths (1/2, 1): a1 -> a1, a2 -> a1 a2
    auto s = MarkedGraph::rose(2, {r(1, 2), r(1)});
    auto t = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    auto f = GraphMorphism::identity(t);
    f.source = s;
    EdgePath p2;
    p2.start = 0;
    p2.dirs = {1, 2};
    f.eimg[2] = p2;
    CHECK(f.stretch(1) == 1);
    CHECK(f.stretch(2) == 1);
    CHECK(f.derivative(1) == 1);
    CHECK(f.derivative(2) == 1);
    auto turns = f.illegal_turns();
    REQUIRE(turns.size() == 1);
    CHECK(turns[0] == std::pair<int, int>(1, 2));
    auto tt = f.train_track_status();
    CHECK(tt.ok);  // three gates at the single vertex

    auto id = GraphMorphism::identity(t);
    CHECK(id.illegal_turns().empty());
    CHECK(id.gates().at(0).size() == 4);
}

TEST_CASE("candidate loops") {
    auto r2 = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    auto cands = candidate_loops(r2);
    std::set<std::vector<int>> keys;
    for (const Word& w : cands) keys.insert(w.cyclic_key());
    CHECK(keys.count(Word({1}).cyclic_key()));
    CHECK(keys.count(Word({2}).cyclic_key()));
    CHECK(keys.count(Word({1, 2}).cyclic_key()));
    CHECK(keys.count(Word({1, -2}).cyclic_key()));
    CHECK(cands.size() == 4);

    CHECK(candidate_loops(theta()).size() == 3);

    // barbell: two circles, two arcs between them would need multiple edges;
    // here one connecting arc gives two orientation classes
    std::vector<Edge> es = {
        {1, 0, 0, r(1, 4), Word({1})},
        {2, 1, 1, r(1, 4), Word({2})},
        {3, 0, 1, r(1, 2), Word()},
    };
    MarkedGraph bb({0, 1}, es, 0);
    auto bc = candidate_loops(bb);
    std::set<std::vector<int>> bkeys;
    for (const Word& w : bc) bkeys.insert(w.cyclic_key());
    CHECK(bkeys.count(Word({1}).cyclic_key()));
    CHECK(bkeys.count(Word({2}).cyclic_key()));
    CHECK(bkeys.count(Word({1, 2}).cyclic_key()));
    CHECK(bkeys.count(Word({1, -2}).cyclic_key()));
}

TEST_CASE("lipschitz constant") {
    auto s = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    CHECK(lipschitz_constant(s, s) == 1);
    auto t = remarked_rose();
    CHECK(lipschitz_constant(s, t) == 2);
    // homogeneity
    for (long lam : {2, 3, 7}) {
        CHECK(lipschitz_constant(s, t.scaled(Rational(lam))) == Rational(lam) * 2);
        CHECK(lipschitz_constant(s, t.scaled(Rational(1, lam))) == Rational(2, lam));
    }
    // sigma(S,T) * sigma(T,S) >= 1
    CHECK(lipschitz_constant(s, t) * lipschitz_constant(t, s) >= 1);
    CHECK(lipschitz_constant(s, theta()) * lipschitz_constant(theta(), s) >= 1);
}

TEST_CASE("optimal maps achieve the lipschitz constant") {
    auto s = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    auto f = optimal_map(s, s);
    CHECK(f.max_stretch() == 1);
    CHECK(f.marking_compatible());

    auto t = remarked_rose();
    auto g = optimal_map(s, t);
    CHECK(g.max_stretch() == lipschitz_constant(s, t));
    CHECK(g.marking_compatible());

    auto h = optimal_map(s, theta());
    CHECK(h.max_stretch() == lipschitz_constant(s, theta()));
    CHECK(h.marking_compatible());

    auto k = optimal_map(theta(), s);
    CHECK(k.max_stretch() == lipschitz_constant(theta(), s));
    CHECK(k.marking_compatible());
}

TEST_CASE("unit rescale gives a train track guide") {
    auto s = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    auto t = remarked_rose();
    auto f = optimal_map(s, t);
    auto [s2, g] = unit_rescale(f);
    CHECK(g.max_stretch() == 1);
    CHECK(g.marking_compatible());
    auto tt = g.train_track_status();
    CHECK(tt.ok);
    // argmax edges invariant under global rescale of the source
    auto scaled = f;
    scaled.source = f.source.scaled(r(3));
    CHECK(scaled.max_stretch() == f.max_stretch() / 3);
}

TEST_CASE("composition and map equality") {
    auto g = MarkedGraph::rose(2, {r(1, 2), r(1, 2)});
    auto id = GraphMorphism::identity(g);
    auto f = GraphMorphism::from_markings(g, remarked_rose());
    auto c = compose(f, id);
    CHECK(same_map(c, f));
    EdgePath loop;
    loop.start = 0;
    loop.dirs = {1, 2, -1};
    auto img = f.map_path(loop);
    CHECK(f.tsub.path_well_formed(img));
}
