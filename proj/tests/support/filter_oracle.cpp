// SPDX-License-Identifier: Apache-2.0
#include "filter_oracle.hpp"

#include <optional>
#include <regex>

#include <fmt/format.h>

#include "hintcoach/core/text.hpp"
#include "hintcoach/world/tools.hpp"
#include "hintcoach/world/world.hpp"

namespace hintcoach::testkit {

namespace {

using action::Value;

// Written independently of the tool: a regex decides what is a number.
std::optional<double> oracle_number(const std::string& text) {
    static const std::regex kNumber(R"(^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$)");
    if (!std::regex_match(text, kNumber)) return std::nullopt;
    return std::stod(text);
}

bool oracle_compare(const std::string& cell, const std::string& op, const std::string& literal) {
    auto a = oracle_number(cell);
    auto b = oracle_number(literal);
    int c;
    if (a && b) c = (*a > *b) - (*a < *b);
    else c = (cell > literal) - (cell < literal);
    if (op == "=") return c == 0;
    if (op == "!=") return c != 0;
    if (op == "<") return c < 0;
    if (op == "<=") return c <= 0;
    if (op == ">") return c > 0;
    return c >= 0;
}

struct Clause {
    std::string column, op, value;
};

std::size_t column_index(const action::Table& table, const std::string& column) {
    std::size_t col = 0;
    while (table.columns[col] != column) ++col;
    return col;
}

std::vector<std::vector<std::string>> oracle_filter(const action::Table& table, const std::vector<Clause>& clauses) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : table.rows) {
        bool keep = true;
        for (const auto& c : clauses) keep = keep && oracle_compare(row[column_index(table, c.column)], c.op, c.value);
        if (keep) rows.push_back(row);
    }
    return rows;
}

} // namespace

FilterOracleResult run_filter_oracle(std::uint64_t world_seed, std::uint64_t query_seed, int queries) {
    auto world = std::make_shared<const world::World>(world::generate_world(world_seed));
    world::WorldTools tools(world, {"load_db", "data_filter"});
    const std::vector<std::string> ops = {"=", "!=", "<", "<=", ">", ">="};
    SplitMix64 rng(query_seed);
    FilterOracleResult result;
    for (int q = 0; q < queries; ++q) {
        auto it = world->tables.begin();
        std::advance(it, static_cast<long>(rng.below(world->tables.size())));
        const auto& table = *it->second;
        std::vector<Clause> clauses;
        const int n = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < n; ++k) {
            Clause c;
            c.column = table.columns[rng.below(table.columns.size())];
            c.op = ops[rng.below(ops.size())];
            const auto& row = table.rows[rng.below(table.rows.size())];
            c.value = row[column_index(table, c.column)];
            // Half of the numeric literals are nudged off the values present in the table.
            if (auto num = oracle_number(c.value); num && rng.below(2) == 0) {
                c.value = fmt::format("{}", *num + static_cast<double>(rng.below(5)) - 2.0);
            }
            if (contains(c.value, ";")) c.value = "x";
            clauses.push_back(c);
        }
        std::vector<std::string> parts;
        for (const auto& c : clauses) parts.push_back(c.column + c.op + c.value);
        const auto condition = join(parts, "; ");
        action::ToolContext ctx;
        auto db = tools.call("load_db", {Value::text(it->first)}, ctx);
        auto out = tools.call("data_filter", {db, Value::text(condition)}, ctx);
        ++result.queries;
        if (out.as_table()->rows != oracle_filter(table, clauses)) {
            ++result.mismatches;
            if (result.examples.size() < 5) result.examples.push_back(it->first + ": " + condition);
        }
    }
    return result;
}

} // namespace hintcoach::testkit
