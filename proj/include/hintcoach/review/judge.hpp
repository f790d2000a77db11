// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hintcoach/core/types.hpp"
#include "hintcoach/gateway/gateway.hpp"
#include "hintcoach/review/filter.hpp"

namespace hintcoach::review {

using gateway::ChatMessage;

/// Template used when a judge filter's prompt is just a description of the mistake.
extern const char* const kDefaultJudgePrompt;
/// Appended when a template has no {trajectory} placeholder.
extern const char* const kLastStepInstruction;

struct JudgeOptions {
    double temperature = 0.0;
    int max_tokens = 512;
    /// Skip trajectories that did not fail.
    bool failed_only = false;
    std::uint64_t seed = 0;
};

/// A step the judge could not be made to rule on.
struct JudgeError {
    std::string filter_id;
    StateRef state;
    std::string raw_output;

    bool operator==(const JudgeError&) const = default;
};

struct JudgeScan {
    std::vector<MistakeFinding> findings;
    std::vector<JudgeError> errors;
    int requests = 0;
};

enum class VerdictKind { Correct, Mistake, Unparseable };

struct Verdict {
    VerdictKind kind = VerdictKind::Unparseable;
    std::string reasoning;
};

/// Reads `<reasoning>` and `<answer>`. "True" means the last step is fine or irrelevant to the
/// described mistake, "False" means the mistake is present. Case and surrounding space are ignored.
Verdict parse_verdict(const std::string& text);

/// The task and steps 1..through_step as plain text, one "### Step k" block per step.
std::string render_trajectory_prefix(const Trajectory& trajectory, const Task& task, int through_step);

/// Fills {description} and {trajectory}; without a {trajectory} placeholder the prefix and the
/// last-step instruction are appended.
std::string render_judge_prompt(const FilterSpec& filter, const std::string& trajectory_text);

/// Judge request for the prefix through `through_step`. The message carries a "last_step" span over
/// the final step block so scripted judges can key on it.
std::vector<ChatMessage> judge_messages(const FilterSpec& filter, const Trajectory& trajectory, const Task& task,
                                        int through_step);

/// Asks the judge about every step prefix. An unparseable answer is re-requested once; a second
/// failure is reported as a JudgeError and yields no finding.
JudgeScan run_judge_filter(const FilterSpec& filter, const Trajectory& trajectory, const Task& task,
                           gateway::Gateway& gateway, const ModelTag& judge_model, const JudgeOptions& options = {},
                           int round_index = 0);

} // namespace hintcoach::review
