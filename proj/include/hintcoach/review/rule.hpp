// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "hintcoach/action/static_kind.hpp"
#include "hintcoach/core/types.hpp"

namespace hintcoach::review {

/// A compiled step predicate.
///
/// Rule documents are JSON trees:
///   {"any_of": [p, ...]}  {"all_of": [p, ...]}  {"not": p}
///   {"target": "monologue"|"code"|"observation", "contains": "text"}
///   {"target": ..., "regex": "ECMAScript pattern"}
///   {"calls": "tool"}                               the cell calls `tool`
///   {"calls": "tool", "args": k}                    ... with exactly k arguments
///   {"calls": "tool", "arg": i, "kind_is": kind}    ... whose i-th (0-based) argument has a known kind
///   {"calls": "tool", "arg": i, "kind_is_not": kind}
///   {"parse_fails": true}                           the cell is not valid action-language code
/// Argument kinds come from static inference over the cell, seeded with the kinds bound by
/// earlier cells of the same trajectory. An argument whose kind cannot be inferred never
/// satisfies kind_is or kind_is_not.
class RulePredicate {
public:
    /// Throws ConfigurationError describing the first malformed node.
    static RulePredicate compile(const nlohmann::json& rule);

    /// `prior` holds the kinds of names bound before this step's cell.
    bool matches(const Step& step, const action::KindMap& prior) const;

    struct Node;

private:
    explicit RulePredicate(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

} // namespace hintcoach::review
