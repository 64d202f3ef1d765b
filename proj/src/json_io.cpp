#include "otk/json_io.hpp"

#include <nlohmann/json.hpp>

namespace otk {

using nlohmann::json;

json word_to_json(const Word& w) { return json(w.letters()); }

Word word_from_json(const json& j) { return Word(j.get<std::vector<int>>()); }

json graph_to_json(const MarkedGraph& g) {
    json edges = json::array();
    for (const Edge& e : g.edges()) {
        edges.push_back({{"id", e.id},
                         {"from", e.from},
                         {"to", e.to},
                         {"length", to_string(e.length)},
                         {"label", word_to_json(e.label)}});
    }
    return json{{"vertices", g.vertices()}, {"edges", edges}, {"basepoint", g.basepoint()}};
}

MarkedGraph graph_from_json(const json& j) {
    std::vector<int> vertices = j.at("vertices").get<std::vector<int>>();
    std::vector<Edge> edges;
    for (const auto& je : j.at("edges")) {
        Edge e;
        e.id = je.at("id").get<int>();
        e.from = je.at("from").get<int>();
        e.to = je.at("to").get<int>();
        e.length = parse_rational(je.at("length").get<std::string>());
        e.label = word_from_json(je.at("label"));
        edges.push_back(std::move(e));
    }
    return MarkedGraph(std::move(vertices), std::move(edges), j.at("basepoint").get<int>());
}

json path_to_json(const EdgePath& p) {
    json j{{"start", p.start}, {"dirs", p.dirs}};
    if (p.head_fraction) j["head_fraction"] = to_string(*p.head_fraction);
    if (p.tail_fraction) j["tail_fraction"] = to_string(*p.tail_fraction);
    return j;
}

EdgePath path_from_json(const json& j) {
    EdgePath p;
    p.start = j.at("start").get<int>();
    p.dirs = j.at("dirs").get<std::vector<int>>();
    if (j.contains("head_fraction")) p.head_fraction = parse_rational(j["head_fraction"].get<std::string>());
    if (j.contains("tail_fraction")) p.tail_fraction = parse_rational(j["tail_fraction"].get<std::string>());
    return p;
}

}  // namespace otk
