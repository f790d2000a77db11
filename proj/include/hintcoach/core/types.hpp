// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hintcoach {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCompleteTaskTool = "complete_task";

enum class Split { Train, Valid, Test };

std::string to_string(Split split);
Split parse_split(const std::string& text);

/// A templated question instance.
struct Task {
    std::string task_id;
    std::string group;
    std::string template_id;
    std::string description;
    std::string expected_answer;
    Split split = Split::Train;
    std::vector<std::string> tool_allowlist;

    bool operator==(const Task&) const = default;
};

/// The `<status>` block values shown to the agent before a step.
struct StatusSnapshot {
    std::string now;      // "YYYY-MM-DD HH:MM:SS"
    std::string elapsed;  // "H:MM:SS"
    int step_number = 1;
    std::int64_t resources_spent = 0;
    std::int64_t input_tokens_remaining = 0;

    bool operator==(const StatusSnapshot&) const = default;
};

struct Step {
    int index = 1;
    std::string monologue;
    std::string code;
    std::string observation;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    StatusSnapshot status;

    bool operator==(const Step&) const = default;
};

enum class OutcomeKind { Completed, BudgetExhausted, StepLimit, Aborted };

std::string to_string(OutcomeKind kind);
OutcomeKind parse_outcome_kind(const std::string& text);

struct Outcome {
    OutcomeKind kind = OutcomeKind::Aborted;
    std::string answer;  // completed only
    std::string report;  // completed only
    std::string reason;  // aborted only

    static Outcome completed(std::string report, std::string answer);
    static Outcome budget_exhausted();
    static Outcome step_limit();
    static Outcome aborted(std::string reason);

    bool operator==(const Outcome&) const = default;
};

enum class Success { Unscored, Succeeded, Failed };

std::string to_string(Success success);
Success parse_success(const std::string& text);

struct Trajectory {
    std::string trajectory_id;
    std::string task_id;
    std::string model_tag;
    std::string hint_profile_id;
    /// Snapshot of the prompt profile (hint ids, tool docs, budget) used for every step.
    nlohmann::json prompt_profile = nlohmann::json::object();
    std::string project_start;
    std::vector<Step> steps;
    Outcome outcome;
    Success success = Success::Unscored;
    std::string usage_source = "approximate";
    std::string created_at;
    std::uint64_t seed = 0;
    /// Deterministic key of the orchestration slot that produced this record (may be empty).
    std::string run_key;

    bool operator==(const Trajectory&) const = default;
};

/// State s_t: the prefix of a trajectory strictly before the action at `step_index`.
struct StateRef {
    std::string trajectory_id;
    int step_index = 1;

    auto operator<=>(const StateRef&) const = default;
    bool operator==(const StateRef&) const = default;
};

enum class BackendKind { HttpChat, Scripted };

std::string to_string(BackendKind kind);
BackendKind parse_backend_kind(const std::string& text);

struct ModelTag {
    std::string name;
    int round_index = 0;
    BackendKind backend_kind = BackendKind::Scripted;
    std::string endpoint_or_script;

    bool operator==(const ModelTag&) const = default;
};

struct MistakeFinding {
    std::string finding_id;
    std::string filter_id;
    StateRef state;
    std::string verdict_reasoning;
    int round_index = 0;

    bool operator==(const MistakeFinding&) const = default;
};

struct RoundManifest {
    std::string manifest_id;
    int round_index = 1;
    std::string model_tag_in;
    std::string model_tag_out;
    /// "completed", "partial" or "awaiting_trainer".
    std::string status = "completed";
    /// Stage names in execution order.
    std::vector<std::string> stages;
    std::vector<std::string> dataset_ids;
    std::vector<std::string> filter_ids;
    std::vector<std::string> hint_ids;
    std::map<std::string, std::int64_t> counts;
    nlohmann::json config = nlohmann::json::object();
    std::string plan_hash;
    std::string created_at;

    bool operator==(const RoundManifest&) const = default;
};

/// Checks the static invariants of each record. Throws ValidationError naming the field.
void validate(const Task& task);
void validate(const Trajectory& trajectory);
void validate(const MistakeFinding& finding);
void validate(const RoundManifest& manifest);
void validate(const ModelTag& tag);

/// Counts `complete_task(...)` call sites in a code cell.
int count_complete_task_calls(const std::string& code);

} // namespace hintcoach
