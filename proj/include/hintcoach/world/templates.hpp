// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hintcoach/core/text.hpp"
#include "hintcoach/core/types.hpp"
#include "hintcoach/world/world.hpp"

namespace hintcoach::world {

/// One drawn instance: the question, its oracle answer and a reference solution.
struct TaskInstance {
    std::string description;
    std::string expected_answer;
    /// Code cells that solve the instance; the last one calls complete_task.
    std::vector<std::string> reference_cells;
};

struct TaskTemplate {
    std::string template_id;
    std::string group;
    /// Question pattern with named placeholders, for documentation.
    std::string pattern;
    /// Draws placeholder values and runs the oracle. Returns nullopt when the drawn instance has
    /// no unique answer, so the caller redraws.
    std::function<std::optional<TaskInstance>(const World&, SplitMix64&)> draw;
};

/// The ten built-in templates across the groups flights, coffee, yelp, dblp and agenda.
const std::vector<TaskTemplate>& builtin_templates();
const TaskTemplate& find_template(const std::string& template_id);

/// Tools a task of `group` may call (always includes complete_task).
std::vector<std::string> group_tools(const std::string& group);
std::vector<std::string> all_groups();

struct SplitRatios {
    double train = 0.6;
    double valid = 0.1;
    double test = 0.3;
};

/// Per-template split sizes by largest remainder. When n >= 3 every split with a positive
/// ratio gets at least one instance. Throws ValidationError when ratios are negative or do
/// not sum to 1.
std::map<Split, int> split_counts(int n, const SplitRatios& ratios);

struct InstantiateResult {
    std::vector<Task> tasks;
    /// Reference solution per task id.
    std::map<std::string, std::vector<std::string>> reference_cells;
    int redraws = 0;
    std::vector<std::string> warnings;
};

/// Draws `n_per_template` distinct instances per template. Ambiguous or duplicate draws are
/// redrawn up to `max_attempts` times per instance; a template that cannot be filled yields a
/// warning and fewer tasks.
InstantiateResult instantiate_tasks(const World& world, const std::vector<TaskTemplate>& templates,
                                    int n_per_template, const SplitRatios& ratios, std::uint64_t seed,
                                    int max_attempts = 50);

} // namespace hintcoach::world
