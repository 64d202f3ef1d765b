#pragma once

#include <string>
#include <utility>
#include <vector>

#include "otk/morphism.hpp"
#include "otk/splittings.hpp"

namespace otk {

struct Fold {
    int vertex = -1;
    std::pair<int, int> turn;  // directions in the pre-fold stage
    Rational amount;
};

struct FoldResult {
    MarkedGraph folded;
    GraphMorphism fold_map;  // pre-fold source -> folded
    GraphMorphism guide;     // folded -> original target
    Fold fold;
};

// largest t by which the illegal turn can be folded: image agreement length
// divided by the (common) stretch, capped by the incident edge lengths
// (half the loop length when the turn is the two ends of one loop)
Rational max_foldable(const GraphMorphism& f, std::pair<int, int> turn);

// folds the two initial segments of length t together, quotients, corrects
// labels by the homotopy inverse, and returns the fold map plus the guide
// induced on the folded graph
FoldResult fold_turn(const GraphMorphism& f, std::pair<int, int> turn, const Rational& t);

// Discrete Stallings/Skora folding sequence. stages[0] is the (rescaled)
// start, the last stage is isometric to the target via its guide;
// fold_maps[k] : stages[k] -> stages[k+1].
struct FoldingPath {
    MarkedGraph target;
    std::vector<MarkedGraph> stages;
    std::vector<GraphMorphism> guides;
    std::vector<GraphMorphism> fold_maps;
    std::vector<Fold> folds;
    bool normalized = false;
    std::vector<MarkedGraph> normalized_stages;  // stages scaled to volume 1
    std::vector<Rational> scales;                // per-stage volumes
};

// folding sequence driven by an existing train-track guide; collapses
// point-image edges and unit-rescales first, then folds maximal illegal
// turns (lowest vertex, least direction pair) until none remain
FoldingPath skora_from_guide(const GraphMorphism& f, bool normalized = false,
                             int max_folds = 100000);
// the path from the optimal map s -> t
FoldingPath skora_path(const MarkedGraph& s, const MarkedGraph& t, bool normalized = false,
                       int max_folds = 100000);

// composite fold map stages[s] -> stages[t]
GraphMorphism decompose(const FoldingPath& path, std::size_t s, std::size_t t);

// a folding path of collapsed stages, with the vertical collapse maps; the
// commuting squares are checked on construction
struct CollapsedPath {
    FoldingPath path;
    std::vector<GraphMorphism> verticals;  // stages[k] -> collapsed stages[k]
    std::vector<std::vector<int>> forests;
};

// pulls the final-stage forest back through the fold maps and collapses
// every stage; throws when some pullback contains a cycle
CollapsedPath collapse_along_path(const FoldingPath& path, const std::vector<int>& final_forest);

struct SplittingStep {
    FreeSplitting splitting;
    int stage = 0;
    int edge = 0;
};

// Chain of one-edge splittings witnessing a free-splitting-complex distance
// bound along the folding path of f. Consecutive steps either carry the
// same splitting to the next stage (the fold is supported away from the
// dual point) or collapse a shared stage graph two ways. Step count is
// linear in the number of preimages of the tracked target point.
struct FSCertificate {
    bool valid = false;
    std::string note;
    std::vector<SplittingStep> steps;
    int preimage_count = 0;
    std::vector<int> stage_preimage_counts;
    FoldingPath path;
};

// tracks the preimages of the point at fraction y_frac along target edge
// y_edge through the folding path of the guide f
FSCertificate fs_distance_certificate(const GraphMorphism& f, int y_edge, const Rational& y_frac,
                                      int max_folds = 100000);

}  // namespace otk
