// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/world/table.hpp"

#include <algorithm>

#include "hintcoach/action/interpreter.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::world {

using action::ToolFailure;

std::string op_symbol(CompareOp op) {
    switch (op) {
    case CompareOp::Equal: return "=";
    case CompareOp::NotEqual: return "!=";
    case CompareOp::Less: return "<";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::Greater: return ">";
    case CompareOp::GreaterEqual: return ">=";
    }
    return "=";
}

namespace {

bool find_operator(const std::string& clause, std::size_t& at, std::size_t& len, CompareOp& op) {
    static const std::pair<const char*, CompareOp> kTwo[] = {
        {">=", CompareOp::GreaterEqual}, {"<=", CompareOp::LessEqual}, {"!=", CompareOp::NotEqual}};
    static const std::pair<const char*, CompareOp> kOne[] = {
        {"=", CompareOp::Equal}, {">", CompareOp::Greater}, {"<", CompareOp::Less}};
    for (std::size_t i = 0; i < clause.size(); ++i) {
        for (const auto& [sym, kind] : kTwo) {
            if (clause.compare(i, 2, sym) == 0) {
                at = i;
                len = 2;
                op = kind;
                return true;
            }
        }
        for (const auto& [sym, kind] : kOne) {
            if (clause[i] == sym[0]) {
                at = i;
                len = 1;
                op = kind;
                return true;
            }
        }
    }
    return false;
}

} // namespace

std::vector<Condition> parse_conditions(const std::string& text, const std::vector<std::string>& columns) {
    std::vector<Condition> out;
    for (const auto& raw : split(text, "; ")) {
        std::string clause = trim(raw);
        std::size_t at = 0;
        std::size_t len = 0;
        CompareOp op = CompareOp::Equal;
        if (clause.empty() || !find_operator(clause, at, len, op)) {
            throw ToolFailure("malformed condition clause '" + raw + "'; expected 'column OP value'");
        }
        Condition c;
        c.column = trim(clause.substr(0, at));
        c.op = op;
        c.value = trim(clause.substr(at + len));
        if (c.column.empty()) throw ToolFailure("malformed condition clause '" + raw + "'; missing column name");
        if (std::find(columns.begin(), columns.end(), c.column) == columns.end()) {
            throw ToolFailure("unknown column '" + c.column + "' in condition clause '" + raw + "'");
        }
        out.push_back(std::move(c));
    }
    return out;
}

bool compare_cell(const std::string& cell, CompareOp op, const std::string& literal) {
    int c = 0;
    auto a = action::parse_number(cell);
    auto b = action::parse_number(literal);
    if (a && b) {
        c = *a < *b ? -1 : (*a > *b ? 1 : 0);
    } else {
        int raw = cell.compare(literal);
        c = raw < 0 ? -1 : (raw > 0 ? 1 : 0);
    }
    switch (op) {
    case CompareOp::Equal: return c == 0;
    case CompareOp::NotEqual: return c != 0;
    case CompareOp::Less: return c < 0;
    case CompareOp::LessEqual: return c <= 0;
    case CompareOp::Greater: return c > 0;
    case CompareOp::GreaterEqual: return c >= 0;
    }
    return false;
}

std::size_t column_index(const Table& table, const std::string& column) {
    auto it = std::find(table.columns.begin(), table.columns.end(), column);
    if (it == table.columns.end()) {
        throw ToolFailure("unknown column '" + column + "'; available columns: " + join(table.columns, ", "));
    }
    return static_cast<std::size_t>(it - table.columns.begin());
}

Table filter_table(const Table& table, const std::vector<Condition>& conditions) {
    std::vector<std::size_t> idx;
    for (const auto& c : conditions) idx.push_back(column_index(table, c.column));
    Table out;
    out.name = table.name;
    out.columns = table.columns;
    for (const auto& row : table.rows) {
        bool keep = true;
        for (std::size_t i = 0; i < conditions.size() && keep; ++i) {
            keep = compare_cell(row[idx[i]], conditions[i].op, conditions[i].value);
        }
        if (keep) out.rows.push_back(row);
    }
    return out;
}

std::string column_values(const Table& table, const std::string& column) {
    std::size_t c = column_index(table, column);
    std::vector<std::string> values;
    values.reserve(table.rows.size());
    for (const auto& row : table.rows) values.push_back(row[c]);
    return join(values, ", ");
}

} // namespace hintcoach::world
