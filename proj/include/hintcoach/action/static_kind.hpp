// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace hintcoach::action {

/// Value kind as far as it can be known without running the code.
enum class StaticKind { Unknown, Unit, Text, Number, Boolean, List, Table, Graph };

std::string static_kind_name(StaticKind kind);
/// Accepts the names used by static_kind_name ("text", "number", ...). Throws ValidationError.
StaticKind parse_static_kind(const std::string& name);

struct CallSite {
    std::string name;
    int line = 0;
    std::vector<StaticKind> args;
};

struct StaticSummary {
    bool parsed = false;
    std::vector<CallSite> calls;  // in evaluation order
    /// Kinds of names after the cell, including names inherited from `prior`.
    std::map<std::string, StaticKind> bindings;
};

using KindMap = std::map<std::string, StaticKind>;

/// Infers call sites and binding kinds for one code cell. `prior` carries kinds of names bound
/// by earlier cells; `tool_returns` gives return kinds of registry tools. Code that fails to
/// parse yields parsed = false and no calls.
StaticSummary analyze_cell(const std::string& code, const KindMap& prior = {}, const KindMap& tool_returns = {});

} // namespace hintcoach::action
