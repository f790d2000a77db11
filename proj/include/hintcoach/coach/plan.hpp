// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/distill/balance.hpp"
#include "hintcoach/distill/export.hpp"

namespace hintcoach::coach {

struct SamplingPlan {
    /// Teacher rollouts per task (round 1) or hint-free rollouts per task (later rounds).
    int rollouts_per_task = 3;
    /// Actions sampled per flagged state after the corrective hint is injected.
    int m_per_state = 3;
    double temperature = 0.7;
    int max_output_tokens = 512;
    /// Logprob alternatives captured on corrective samples (0 disables).
    int top_k_logprobs = 0;
};

struct BalancePlan {
    bool enabled = true;
    /// Candidate trajectories per task sampled with the initial hints.
    int candidate_rollouts = 1;
    int per_template_floor = 0;
    std::optional<int> per_group_floor;
    int retention_quota = 0;
};

struct HandoffPlan {
    /// Where the dataset is written; empty means `<run-dir>/datasets/<dataset_id>`.
    std::string dataset_path;
    /// The model the trainer is expected to register once training finishes.
    std::string model_tag_out;
    /// Opaque trainer settings (e.g. epochs), forwarded into the manifest.
    nlohmann::json trainer = nlohmann::json::object();
};

/// Everything one coaching round needs. Round 1 distils the initial hints; later rounds review
/// hint-free rollouts, inject corrective hints at flagged states and distil those.
struct RoundPlan {
    int round_index = 1;
    std::string model_tag_in;
    /// Task split to train on and an optional explicit subset.
    std::string split = "train";
    std::vector<std::string> task_ids;
    SamplingPlan sampling;
    /// Filter file (required from round 2 on, forbidden in round 1).
    std::string filter_file;
    /// Judge model for judge filters; defaults to model_tag_in.
    std::string judge_model;
    bool judge_failed_only = false;
    int cap_per_filter = 16;
    double dropout_p = 0.9;
    bool drop_tool_docs = false;
    BalancePlan balance;
    distill::TrainMode mode = distill::TrainMode::Kl;
    double val_fraction = 0.1;
    std::optional<int> valid_count;
    HandoffPlan handoff;
    int max_steps = 10;
    int max_input_tokens = 12000;
    std::uint64_t seed = 0;
    int workers = 1;
};

/// Throws ValidationError naming the offending field.
void validate(const RoundPlan& plan);

nlohmann::json plan_to_json(const RoundPlan& plan);
RoundPlan plan_from_json(const nlohmann::json& j);
RoundPlan load_plan(const std::string& path);

/// Hash of the canonical plan JSON; identical plans share it.
std::string plan_hash(const RoundPlan& plan);

/// Stage names in execution order.
const std::vector<std::string>& round_stages(int round_index);

} // namespace hintcoach::coach
