// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hintcoach/agent/prompt.hpp"
#include "hintcoach/coach/context.hpp"
#include "hintcoach/coach/plan.hpp"
#include "hintcoach/core/error.hpp"
#include "hintcoach/distill/export.hpp"
#include "hintcoach/review/flagged.hpp"

namespace hintcoach::coach {

/// The round cannot start or finish until the trainer registers a model.
class AwaitingModelError : public Error {
public:
    explicit AwaitingModelError(const std::string& model_name)
        : Error("awaiting_model", "awaiting model_tag_out '" + model_name + "'"), model_(model_name) {}
    const std::string& model() const { return model_; }

private:
    std::string model_;
};

/// Which hints a prompt carries.
enum class ProfileKind { None, Initial, Combined };

ProfileKind parse_profile_kind(const std::string& text);
std::string to_string(ProfileKind kind);

/// Prompt profile for `task`: hint sections per `kind` (combined = initial plus corrective hints as of
/// `round`), the task's tool docs and the given budget.
agent::PromptProfile build_profile(const hints::HintLedger& ledger, const Task& task, ProfileKind kind, int round,
                                   const agent::Budget& budget = {});

struct RoundHooks {
    /// Called before each stage starts; throwing aborts the round (used to simulate crashes).
    std::function<void(const std::string& stage)> before_stage;
};

struct RoundResult {
    RoundManifest manifest;
    distill::DatasetManifest dataset;
    /// The plan had already completed; nothing was recomputed.
    bool reused = false;
    /// Export finished but model_tag_out is not registered yet.
    bool awaiting_trainer = false;
    review::FlaggedSet flagged;
    std::vector<std::string> warnings;
};

/// Runs one coaching round and appends its RoundManifest. Stored trajectories are reused by their
/// run keys, so a rerun after a failure resumes without duplicating work; rerunning a finished plan
/// returns the stored manifest. A failing stage appends a "partial" manifest and rethrows.
RoundResult run_round(RunContext& context, const RoundPlan& plan, const RoundHooks& hooks = {});

struct ChainCheck {
    bool ok = true;
    std::string problem;
    /// Stage names of the replayed chain, round by round.
    std::vector<std::string> stages;
};

/// Checks that the finished rounds form a chain 1..n with the expected stage order and that each round
/// starts from the model the previous round handed off.
ChainCheck verify_chain(const std::vector<RoundManifest>& manifests);

} // namespace hintcoach::coach
