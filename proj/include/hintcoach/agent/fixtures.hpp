// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"

namespace hintcoach::agent {

/// Response used when no scripted rule matches: a harmless but useless cell.
inline constexpr const char* kFallbackResponse = "print('unsure')";

/// Predicate matching prompts for `task` (by its description).
nlohmann::json task_predicate(const Task& task);
/// Predicate matching the request for step `step` (the latest status block).
nlohmann::json step_predicate(int step);

/// Two scripted rules (monologue request, code request) producing one action at `step`.
/// `extra_when` adds predicates to both rules, e.g. a corrective-hint match.
std::vector<nlohmann::json> action_rules(const Task& task, int step, const std::string& monologue,
                                         const std::string& code, const std::vector<nlohmann::json>& extra_when = {});

/// Rules that replay `cells` as steps 1..n of `task`, with a generated monologue per step.
std::vector<nlohmann::json> script_rules(const Task& task, const std::vector<std::string>& cells);

/// Wraps rules into a scripted-behavior document.
nlohmann::json behavior_document(std::vector<nlohmann::json> rules,
                                 const std::optional<std::string>& default_response = std::string(kFallbackResponse));

/// Behavior that solves every task with the given cells (normally the template reference solutions).
nlohmann::json reference_behavior(const std::vector<Task>& tasks,
                                  const std::map<std::string, std::vector<std::string>>& cells);

} // namespace hintcoach::agent
