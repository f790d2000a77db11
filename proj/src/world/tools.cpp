// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/world/tools.hpp"

#include <map>

#include <fmt/format.h>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/core/types.hpp"
#include "hintcoach/world/table.hpp"

namespace hintcoach::world {

using action::Kind;
using action::StaticKind;
using action::Table;
using action::ToolFailure;
using action::Value;

namespace {

struct ToolDoc {
    std::string name;
    std::string summary;
    std::vector<std::string> inputs;
    std::string output;
    std::vector<std::string> examples;
};

const std::vector<ToolDoc>& docs() {
    static const std::vector<ToolDoc> kDocs = {
        {"load_db",
         "Loads one of the tables ('flights', 'coffee' or 'yelp') and prints its column names.",
         {"variant (text): the table name"},
         "A table handle.",
         {"db = load_db('flights')"}},
        {"data_filter",
         "Keeps the rows of a table that satisfy every condition. Conditions have the form 'column OP value' "
         "with OP one of =, !=, >, >=, <, <= and are separated by a semicolon and a space. Values that look like "
         "numbers on both sides are compared as numbers, everything else as text.",
         {"table (table handle): the table to filter", "condition (text): one or more conditions"},
         "A table handle with the matching rows. All cells are text.",
         {"rows = data_filter(db, 'Origin=BUF; Dest=PHL')", "rows = data_filter(db, 'Distance>300')"}},
        {"get_value",
         "Returns the values of one column. When the table has several rows the values are concatenated "
         "using a comma and a space.",
         {"table (table handle)", "column (text): the column name"},
         "Text.",
         {"dep = get_value(rows, 'DepTime')"}},
        {"load_graph",
         "Loads the collaboration graph data ('dblp').",
         {"name (text): the graph data name"},
         "A graph handle holding 'PaperNet' and 'AuthorNet'.",
         {"graph = load_graph('dblp')"}},
        {"check_nodes",
         "Looks up one node (a paper title in PaperNet, an author name in AuthorNet) and returns its attributes.",
         {"graph (graph handle)", "graph_name (text): 'PaperNet' or 'AuthorNet'", "node (text)"},
         "A one-row table handle whose columns are 'node' and the node attributes.",
         {"paper = check_nodes(graph, 'PaperNet', 'Sparse Graph Matching for Web Tables')",
          "authors = get_value(paper, 'authors')"}},
        {"check_neighbours",
         "Lists the neighbours of a node.",
         {"graph (graph handle)", "graph_name (text)", "node (text)"},
         "A list of node names, sorted.",
         {"coauthors = check_neighbours(graph, 'AuthorNet', 'Alice Abbott')"}},
        {"check_edges",
         "Looks up the edge between two nodes. In AuthorNet an edge is a collaboration between two authors; "
         "its 'weight' is the number of papers they wrote together.",
         {"graph (graph handle)", "graph_name (text)", "node1 (text)", "node2 (text)"},
         "A one-row table handle with columns 'source', 'target' and the edge attributes.",
         {"edge = check_edges(graph, 'AuthorNet', 'Alice Abbott', 'Bruno Costa')", "n = get_value(edge, 'weight')"}},
        {"retrieve_agenda",
         "Searches the agenda documents by keywords and returns the best matches. Dates in the documents are "
         "written in words.",
         {"query (text): keywords", "k (number, optional, default 3): how many documents to return"},
         "A list of document texts, best match first.",
         {"docs = retrieve_agenda('Alice Abbott Budget Review', 1)"}},
        {"complete_task",
         "Finishes the task. Call it exactly once, on its own, when the answer is known.",
         {"report (text): a short summary of how the answer was found",
          "answer (text): the final answer; it must be text, so convert numbers with to_text"},
         "Nothing; the episode ends.",
         {"complete_task('Filtered flights and read the delay.', to_text(delay))"}},
    };
    return kDocs;
}

std::string arity_message(const std::string& name, std::size_t lo, std::size_t hi, std::size_t got) {
    std::string range = lo == hi ? std::to_string(lo) : fmt::format("{} to {}", lo, hi);
    return fmt::format("{} expects {} argument{}, got {}", name, range, hi == 1 ? "" : "s", got);
}

void need_args(const std::string& name, const std::vector<Value>& args, std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) throw ToolFailure(arity_message(name, lo, hi, args.size()));
}

const std::string& text_arg(const std::string& tool, const std::vector<Value>& args, std::size_t i,
                            const std::string& what) {
    if (!args[i].is_text()) {
        throw ToolFailure(fmt::format("{} must be text, got {}", what, action::kind_name(args[i].kind())));
    }
    return args[i].as_text();
}

const Table& table_arg(const std::vector<Value>& args, std::size_t i) {
    if (args[i].kind() != Kind::Table) {
        throw ToolFailure(fmt::format("expected a table handle, got {}", action::kind_name(args[i].kind())));
    }
    return *args[i].as_table();
}

const GraphSet& graph_arg(const std::vector<Value>& args, std::size_t i) {
    if (args[i].kind() != Kind::Graph) {
        throw ToolFailure(fmt::format("expected a graph handle, got {}", action::kind_name(args[i].kind())));
    }
    auto g = dynamic_cast<const GraphSet*>(args[i].as_graph().get());
    if (!g) throw ToolFailure("graph handle does not come from load_graph");
    return *g;
}

Value one_row(std::string name, std::vector<std::string> columns, std::vector<std::string> row) {
    auto t = std::make_shared<Table>();
    t->name = std::move(name);
    t->columns = std::move(columns);
    t->rows.push_back(std::move(row));
    return Value::table(std::move(t));
}

} // namespace

const std::vector<std::string>& all_tool_names() {
    static const std::vector<std::string> kNames = [] {
        std::vector<std::string> out;
        for (const auto& d : docs()) out.push_back(d.name);
        return out;
    }();
    return kNames;
}

std::string tool_documentation(const std::string& name) {
    for (const auto& d : docs()) {
        if (d.name != name) continue;
        std::string out = d.name + ": " + d.summary + "\nInputs:\n";
        for (const auto& in : d.inputs) out += "  - " + in + "\n";
        out += "Output: " + d.output + "\nExamples:\n";
        for (const auto& ex : d.examples) out += "  " + ex + "\n";
        return out;
    }
    throw NotFoundError("no documentation for tool '" + name + "'");
}

const action::KindMap& tool_return_kinds() {
    static const action::KindMap kKinds = {
        {"load_db", StaticKind::Table},         {"data_filter", StaticKind::Table},
        {"get_value", StaticKind::Text},        {"load_graph", StaticKind::Graph},
        {"check_nodes", StaticKind::Table},     {"check_neighbours", StaticKind::List},
        {"check_edges", StaticKind::Table},     {"retrieve_agenda", StaticKind::List},
        {"complete_task", StaticKind::Unit},
    };
    return kKinds;
}

WorldTools::WorldTools(std::shared_ptr<const World> world, std::vector<std::string> allowlist)
    : world_(std::move(world)), allowlist_(allowlist.begin(), allowlist.end()) {}

bool WorldTools::has(const std::string& name) const {
    return allowlist_.count(name) > 0 && tool_return_kinds().count(name) > 0;
}

Value WorldTools::call(const std::string& name, const std::vector<Value>& args, action::ToolContext& ctx) {
    if (!has(name)) throw ToolFailure("unknown tool '" + name + "'");

    if (name == "load_db") {
        need_args(name, args, 1, 1);
        const std::string& variant = text_arg(name, args, 0, "variant");
        auto it = world_->tables.find(variant);
        if (it == world_->tables.end()) {
            throw ToolFailure("unknown database variant '" + variant + "'; expected 'flights', 'coffee' or 'yelp'");
        }
        ctx.output += fmt::format("Loaded '{}' with {} rows. Columns: {}\n", variant, it->second->rows.size(),
                                  join(it->second->columns, ", "));
        return Value::table(it->second);
    }
    if (name == "data_filter") {
        need_args(name, args, 2, 2);
        const Table& table = table_arg(args, 0);
        const std::string& condition = text_arg(name, args, 1, "condition");
        auto conditions = parse_conditions(condition, table.columns);
        return Value::table(std::make_shared<Table>(filter_table(table, conditions)));
    }
    if (name == "get_value") {
        need_args(name, args, 2, 2);
        const Table& table = table_arg(args, 0);
        return Value::text(column_values(table, text_arg(name, args, 1, "column")));
    }
    if (name == "load_graph") {
        need_args(name, args, 1, 1);
        const std::string& which = text_arg(name, args, 0, "name");
        if (which != "dblp") throw ToolFailure("unknown graph data '" + which + "'; expected 'dblp'");
        return Value::graph(world_->graphs);
    }
    if (name == "check_nodes") {
        need_args(name, args, 3, 3);
        const Graph& g = graph_arg(args, 0).get(text_arg(name, args, 1, "graph_name"));
        const std::string& node = text_arg(name, args, 2, "node");
        auto it = g.nodes.find(node);
        if (it == g.nodes.end()) throw ToolFailure("node '" + node + "' not found in " + g.name);
        std::vector<std::string> columns = {"node"};
        std::vector<std::string> row = {node};
        for (const auto& [k, v] : it->second) {
            columns.push_back(k);
            row.push_back(v);
        }
        return one_row(g.name, std::move(columns), std::move(row));
    }
    if (name == "check_neighbours") {
        need_args(name, args, 3, 3);
        const Graph& g = graph_arg(args, 0).get(text_arg(name, args, 1, "graph_name"));
        const std::string& node = text_arg(name, args, 2, "node");
        if (!g.nodes.count(node)) throw ToolFailure("node '" + node + "' not found in " + g.name);
        action::List out;
        for (const auto& n : g.neighbours(node)) out.push_back(Value::text(n));
        return Value::list(std::move(out));
    }
    if (name == "check_edges") {
        need_args(name, args, 4, 4);
        const Graph& g = graph_arg(args, 0).get(text_arg(name, args, 1, "graph_name"));
        const std::string& a = text_arg(name, args, 2, "node1");
        const std::string& b = text_arg(name, args, 3, "node2");
        for (const auto* n : {&a, &b}) {
            if (!g.nodes.count(*n)) throw ToolFailure("node '" + *n + "' not found in " + g.name);
        }
        const Attributes* attrs = g.find_edge(a, b);
        if (!attrs) throw ToolFailure("no edge between '" + a + "' and '" + b + "' in " + g.name);
        std::vector<std::string> columns = {"source", "target"};
        std::vector<std::string> row = {a, b};
        for (const auto& [k, v] : *attrs) {
            columns.push_back(k);
            row.push_back(v);
        }
        return one_row(g.name, std::move(columns), std::move(row));
    }
    if (name == "retrieve_agenda") {
        need_args(name, args, 1, 2);
        const std::string& query = text_arg(name, args, 0, "query");
        std::size_t k = 3;
        if (args.size() == 2) {
            if (!args[1].is_number() || args[1].as_number() < 1 || args[1].as_number() > 20 ||
                args[1].as_number() != static_cast<double>(static_cast<int>(args[1].as_number()))) {
                throw ToolFailure("k must be an integer from 1 to 20");
            }
            k = static_cast<std::size_t>(args[1].as_number());
        }
        action::List out;
        for (const auto* d : retrieve_agenda(*world_, query, k)) out.push_back(Value::text(d->text));
        return Value::list(std::move(out));
    }
    if (name == kCompleteTaskTool) {
        need_args(name, args, 2, 2);
        const std::string& report = text_arg(name, args, 0, "report");
        const std::string& answer = text_arg(name, args, 1, "answer (return value)");
        completion_ = CompletionRecord{report, answer};
        ctx.output += "Task completed.\n";
        ctx.halt = true;
        return Value::unit();
    }
    throw ToolFailure("unknown tool '" + name + "'");
}

} // namespace hintcoach::world
