// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/action/value.hpp"

namespace hintcoach::world {

using Attributes = std::map<std::string, std::string>;

/// One named graph. Edges are undirected and stored once under the sorted endpoint pair.
class Graph {
public:
    std::string name;
    std::map<std::string, Attributes> nodes;
    std::map<std::pair<std::string, std::string>, Attributes> edges;

    void add_node(const std::string& id, Attributes attrs);
    /// Adds or replaces the edge {a, b}. Both endpoints must exist.
    void add_edge(const std::string& a, const std::string& b, Attributes attrs);
    const Attributes* find_edge(const std::string& a, const std::string& b) const;
    /// Neighbours of `id`, sorted.
    std::vector<std::string> neighbours(const std::string& id) const;
};

/// The paper/author collaboration graph pair exposed through load_graph.
class GraphSet : public action::OpaqueGraph {
public:
    Graph paper_net;   // "PaperNet": papers with authors/venue/year attributes
    Graph author_net;  // "AuthorNet": authors with collaboration edges

    std::string describe() const override;
    /// Looks up "PaperNet" or "AuthorNet"; throws ToolFailure otherwise.
    const Graph& get(const std::string& name) const;
};

struct AgendaDoc {
    std::string doc_id;
    std::string text;
    // Structured fields kept alongside the rendered text for template oracles.
    std::string person;
    std::string event;
    std::string location;
    std::string date_words;  // "March 5, 2025"
};

struct WorldSizes {
    int flights = 60;
    int coffee = 40;
    int yelp = 40;
    int papers = 14;
    int authors = 16;
    int agenda = 16;
};

struct World {
    std::uint64_t seed = 0;
    std::map<std::string, std::shared_ptr<const action::Table>> tables;
    std::shared_ptr<const GraphSet> graphs;
    std::vector<AgendaDoc> agenda;

    const action::Table& table(const std::string& name) const;
};

/// Deterministic pseudo-random world; the same seed and sizes give a byte-identical export.
/// Throws ValidationError when a size is < 1.
World generate_world(std::uint64_t seed, const WorldSizes& sizes = {});

nlohmann::json export_world(const World& world);
World import_world(const nlohmann::json& doc);

/// Keyword retrieval over the agenda: score = number of distinct query words present in a
/// document; top-k by score, ties by doc id; zero-score documents are never returned.
std::vector<const AgendaDoc*> retrieve_agenda(const World& world, const std::string& query, std::size_t k);

/// Lower-cased alphanumeric words.
std::vector<std::string> keyword_tokens(const std::string& text);

} // namespace hintcoach::world
