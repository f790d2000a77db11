// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hintcoach/action/value.hpp"

namespace hintcoach::world {

using action::Table;

enum class CompareOp { Equal, NotEqual, Less, LessEqual, Greater, GreaterEqual };

std::string op_symbol(CompareOp op);

struct Condition {
    std::string column;
    CompareOp op = CompareOp::Equal;
    std::string value;
};

/// Parses `column OP value` clauses joined by "; ". The leftmost operator in a clause is
/// used, and at a given position a two-character operator beats its one-character prefix.
/// Throws action::ToolFailure echoing the offending clause or naming an unknown column.
std::vector<Condition> parse_conditions(const std::string& text, const std::vector<std::string>& columns);

/// Compares a cell against a literal: numerically when both parse as numbers, else as text.
bool compare_cell(const std::string& cell, CompareOp op, const std::string& literal);

/// Rows of `table` satisfying every condition, in their original order.
Table filter_table(const Table& table, const std::vector<Condition>& conditions);

/// Index of `column` in `table`, or throws ToolFailure naming it.
std::size_t column_index(const Table& table, const std::string& column);

/// Values of one column joined with ", ".
std::string column_values(const Table& table, const std::string& column);

} // namespace hintcoach::world
