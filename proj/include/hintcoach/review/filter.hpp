// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"

namespace hintcoach::review {

enum class FilterKind { Rule, LlmJudge };

std::string to_string(FilterKind kind);
FilterKind parse_filter_kind(const std::string& text);

/// A human-authored detector for one kind of mistake.
struct FilterSpec {
    std::string filter_id;
    FilterKind kind = FilterKind::Rule;
    /// What the mistake is, in the author's words. Shown to judges and stored with hints.
    std::string description;
    /// Predicate document (rule filters only); see RulePredicate.
    std::optional<nlohmann::json> rule;
    /// Prompt template with {description} and {trajectory} placeholders (judge filters only).
    std::optional<std::string> judge_prompt;
    /// Task groups the filter applies to; empty means every group.
    std::vector<std::string> scope;

    bool operator==(const FilterSpec&) const = default;
};

/// Checks field invariants and compiles rules. Throws ValidationError for missing fields and
/// ConfigurationError for malformed rule programs.
void validate(const FilterSpec& filter);
bool in_scope(const FilterSpec& filter, const std::string& group);

void to_json(nlohmann::json& j, const FilterSpec& f);
void from_json(const nlohmann::json& j, FilterSpec& f);

/// Loads and validates a filter file: either a JSON array or {"filters": [...]}. Filter ids must
/// be unique. The result is sorted by filter_id, which is also the attribution order.
std::vector<FilterSpec> load_filters(const std::string& path);
std::vector<FilterSpec> parse_filters(const nlohmann::json& document);

/// Evaluates a rule filter at every step. One finding per matching step, in step order,
/// with the filter id as reasoning. Pure.
std::vector<MistakeFinding> run_rule_filter(const FilterSpec& filter, const Trajectory& trajectory,
                                            int round_index = 0);

} // namespace hintcoach::review
