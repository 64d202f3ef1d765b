#include "otk/random_graph.hpp"

#include <stdexcept>

#include "otk/whitehead.hpp"

namespace otk {

Word random_word(std::mt19937_64& rng, int rank, int len) {
    std::vector<int> letters;
    std::uniform_int_distribution<int> pick(0, 2 * rank - 1);
    while (static_cast<int>(letters.size()) < len) {
        int r = pick(rng);
        int x = r < rank ? r + 1 : rank - r - 1;
        if (!letters.empty() && letters.back() == -x) continue;
        letters.push_back(x);
    }
    return Word(std::move(letters));
}

MarkedGraph random_graph(std::mt19937_64& rng, int rank, int max_extra_vertices, int twists) {
    if (rank < 2) throw std::invalid_argument("rank must be at least 2");
    std::uniform_int_distribution<int> extra(0, max_extra_vertices);
    std::uniform_int_distribution<int> len(1, 5);
    auto auts = whitehead_automorphisms(rank);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        int nv = 1 + extra(rng);
        std::vector<int> verts;
        for (int v = 0; v < nv; ++v) verts.push_back(v);
        std::vector<Edge> edges;
        int next = 1;
        for (int v = 1; v < nv; ++v) {
            std::uniform_int_distribution<int> parent(0, v - 1);
            edges.push_back({next++, parent(rng), v, Rational(len(rng)), Word()});
        }
        std::uniform_int_distribution<int> anyv(0, nv - 1);
        for (int i = 1; i <= rank; ++i)
            edges.push_back({next++, anyv(rng), anyv(rng), Rational(len(rng)), Word::generator(i)});

        std::map<int, int> valence;
        for (const Edge& e : edges) {
            ++valence[e.from];
            ++valence[e.to];
        }
        bool ok = true;
        for (int v = 0; v < nv; ++v)
            if (valence[v] < 2) ok = false;
        if (!ok) continue;

        std::uniform_int_distribution<int> pick_aut(0, static_cast<int>(auts.size()) - 1);
        std::uniform_int_distribution<int> conj_len(0, 2);
        std::vector<WhiteheadAut> chosen;
        for (int t = 0; t < twists; ++t) chosen.push_back(auts[pick_aut(rng)]);
        Word conj = random_word(rng, rank, conj_len(rng));
        for (Edge& e : edges) {
            for (const WhiteheadAut& a : chosen) e.label = a.apply(e.label);
            e.label = e.label.conjugate(conj);
        }

        MarkedGraph g(verts, edges, 0);
        g = g.normalized();
        if (g.is_valid() && g.marking().valid) return g;
    }
    throw std::runtime_error("random graph generation failed");
}

}  // namespace otk
