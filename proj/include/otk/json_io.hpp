#pragma once

#include <nlohmann/json_fwd.hpp>

#include "otk/marked_graph.hpp"

namespace otk {

nlohmann::json word_to_json(const Word& w);
Word word_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const MarkedGraph& g);
MarkedGraph graph_from_json(const nlohmann::json& j);

nlohmann::json path_to_json(const EdgePath& p);
EdgePath path_from_json(const nlohmann::json& j);

}  // namespace otk
