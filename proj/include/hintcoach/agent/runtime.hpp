// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hintcoach/agent/prompt.hpp"
#include "hintcoach/core/types.hpp"
#include "hintcoach/gateway/gateway.hpp"
#include "hintcoach/hints/ledger.hpp"
#include "hintcoach/world/world.hpp"

namespace hintcoach::agent {

struct SamplingParams {
    double temperature = 0.7;
    int max_output_tokens = 512;
    /// Per-token alternatives to capture (0 disables logprob capture).
    int top_k_logprobs = 0;
};

/// Reason recorded on aborted trajectories.
inline constexpr const char* kMalformedOutput = "malformed_output";
inline constexpr const char* kBudgetBeforeFirstStep = "budget_exhausted_before_first_step";

struct RunSpec {
    Task task;
    ModelTag model;
    PromptProfile profile;
    SamplingParams sampling;
    std::uint64_t seed = 0;
    std::string run_key;
};

/// One sampled action at a fixed state, with the full context it was sampled from.
struct ActionSample {
    StateRef state;
    std::string hint_id;
    int sample_index = 0;
    std::uint64_t seed = 0;
    /// Context for the monologue request: prefix, corrective hint message, format reminder.
    std::vector<ChatMessage> teacher_messages;
    std::string monologue;
    std::string code;
    /// Logprobs of the monologue and code responses, when captured.
    std::vector<gateway::TokenLogprob> logprobs;
};

struct InjectResult {
    std::vector<ActionSample> samples;
    /// Samples dropped because the model twice broke the response format.
    int malformed = 0;
};

/// Runs the ReAct loop: monologue request, code request, execute, observe, repeat.
class AgentRuntime {
public:
    AgentRuntime(gateway::Gateway& gateway, std::shared_ptr<const world::World> world);

    /// Runs one trajectory to completion. The result is scored against the task and not yet stored
    /// (its trajectory_id is empty).
    Trajectory run_trajectory(const RunSpec& spec);

    /// Runs several specs on `workers` threads; results come back in spec order.
    std::vector<Trajectory> run_batch(const std::vector<RunSpec>& specs, int workers);

    /// Rebuilds the state before `step_index` of a stored trajectory, appends `hint_text` as the final
    /// message before the format reminder, and samples `m` monologue+code actions with seeds
    /// seed, seed + 1, ... without executing them.
    InjectResult inject_hint_and_continue(const Trajectory& trajectory, const Task& task, int step_index,
                                          const hints::HintSection& hint, const ModelTag& model,
                                          const SamplingParams& sampling, int m, std::uint64_t seed);

    /// Messages of the monologue request at `step_index` of a stored trajectory, rebuilt from the
    /// stored profile and statuses. `profile_override` substitutes the prompt profile.
    static std::vector<ChatMessage> state_messages(const Trajectory& trajectory, const Task& task, int step_index,
                                                   const std::optional<std::string>& corrective_hint = std::nullopt,
                                                   const PromptProfile* profile_override = nullptr);

private:
    struct SectionResult {
        bool ok = false;
        std::string body;
        std::int64_t input_tokens = 0;
        std::int64_t output_tokens = 0;
        bool over_budget = false;
        std::vector<gateway::TokenLogprob> logprobs;
    };

    SectionResult request_section(const ModelTag& model, const SamplingParams& sampling, std::uint64_t seed,
                                  const std::function<std::vector<ChatMessage>(const PromptTail&)>& build,
                                  PromptTail tail, std::int64_t max_input_tokens, const std::string& ledger_key);

    gateway::Gateway& gateway_;
    std::shared_ptr<const world::World> world_;
};

} // namespace hintcoach::agent
