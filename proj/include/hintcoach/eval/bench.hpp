// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/agent/runtime.hpp"
#include "hintcoach/core/store.hpp"

namespace hintcoach::eval {

/// Outcome of one task in one trial.
struct TaskOutcome {
    std::string task_id;
    std::string group;
    bool success = false;
    bool aborted = false;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::string usage_source = "approximate";
    std::string trajectory_id;

    bool operator==(const TaskOutcome&) const = default;
};

struct TrialResult {
    std::string model_tag;
    std::string profile_label;
    std::uint64_t seed = 0;
    std::vector<TaskOutcome> tasks;
    int aborted = 0;

    bool operator==(const TrialResult&) const = default;
};

struct TrialOptions {
    std::string profile_label = "none";
    /// Prompt profile per task; defaults to a hint-free profile with the task's tool docs.
    std::function<agent::PromptProfile(const Task&)> profile_for;
    agent::SamplingParams sampling{0.0, 512, 0};
    int workers = 1;
    /// When set, trajectories are stored and their ids recorded.
    RunStore* store = nullptr;
};

/// Runs every task once per seed. Aborted trajectories count as failures and are tallied.
/// Throws ValidationError when `seeds` is empty.
std::vector<TrialResult> run_trials(agent::AgentRuntime& runtime, const std::vector<Task>& tasks, const ModelTag& model,
                                    const std::vector<std::uint64_t>& seeds, const TrialOptions& options = {});

enum class Averaging { TaskWeighted, GroupWeighted };

/// One report cell: mean over trials of the per-trial success percentage, with the standard error
/// (sample standard deviation of the trial values divided by the square root of the trial count).
struct Cell {
    /// Absent when the group has no tasks.
    std::optional<double> mean;
    double standard_error = 0.0;
    int tasks = 0;

    bool operator==(const Cell&) const = default;
};

struct Report {
    std::string model_tag;
    std::string profile_label;
    int trials = 0;
    Averaging averaging = Averaging::TaskWeighted;
    std::map<std::string, Cell> groups;
    Cell average;
    int aborted = 0;
    double mean_input_tokens = 0.0;
    double mean_output_tokens = 0.0;
    /// "n=1" when a single trial makes the standard error meaningless.
    std::string note;
};

/// Pure and independent of trial and task order. `groups` lists groups to report even when empty.
Report summarize(const std::vector<TrialResult>& trials, Averaging averaging = Averaging::TaskWeighted,
                 const std::vector<std::string>& groups = {});

/// Mean and standard error of a list of per-trial values.
Cell mean_and_se(const std::vector<double>& values);

/// One decimal, e.g. "90.0"; absent values render as an em dash.
std::string format_percent(const std::optional<double>& value);

struct UsageRow {
    std::string profile_label;
    std::string model_tag;
    std::string usage_source;
    int trajectories = 0;
    double mean_input_tokens = 0.0;
    double mean_output_tokens = 0.0;

    bool operator==(const UsageRow&) const = default;
};

/// Mean tokens per task, one row per (profile, model, usage source).
std::vector<UsageRow> usage_report(const std::vector<TrialResult>& trials);

nlohmann::json to_json(const Report& report);
nlohmann::json to_json(const std::vector<UsageRow>& rows);
nlohmann::json to_json(const TrialResult& trial);

/// Markdown table with one row per report (profile/model) and one column per group plus the
/// average; cells read "mean ± se".
std::string render_markdown(const std::vector<Report>& reports);
std::string render_usage_markdown(const std::vector<UsageRow>& rows);

} // namespace hintcoach::eval
