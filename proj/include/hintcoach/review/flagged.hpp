// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "hintcoach/core/types.hpp"
#include "hintcoach/gateway/gateway.hpp"
#include "hintcoach/review/filter.hpp"
#include "hintcoach/review/judge.hpp"

namespace hintcoach::review {

inline constexpr int kDefaultCapPerFilter = 16;

/// The flagged state set of a round.
struct FlaggedSet {
    /// Unique states ordered by (trajectory_id, step_index).
    std::vector<StateRef> states;
    /// Filter credited with each state: the first filter (in filter order) that flagged it.
    std::map<StateRef, std::string> attribution;
    /// States kept per filter after deduplication and capping.
    std::map<std::string, int> kept_per_filter;
    /// Findings beyond a filter's cap.
    int dropped_by_cap = 0;
};

/// Deduplicates findings by state, credits each state to the earliest filter in `filter_order`
/// (lexicographic filter id when empty), keeps at most `cap_per_filter` states per filter taking the
/// earliest trajectories first, and orders the result by (trajectory_id, step_index). The result does
/// not depend on the order of `findings`.
FlaggedSet collect_flagged_states(const std::vector<MistakeFinding>& findings, int cap_per_filter = kDefaultCapPerFilter,
                                  const std::vector<std::string>& filter_order = {});

/// Collapses findings to one per (filter_id, state), keeping the first occurrence.
std::vector<MistakeFinding> dedupe_findings(const std::vector<MistakeFinding>& findings);

struct ReviewOptions {
    int round_index = 0;
    int workers = 1;
    JudgeOptions judge;
};

struct ReviewReport {
    /// Sorted by (filter_id, trajectory_id, step_index), one per (filter, state).
    std::vector<MistakeFinding> findings;
    std::vector<JudgeError> judge_errors;
    int trajectories_scanned = 0;
    int judge_requests = 0;
};

/// Runs every in-scope filter over every trajectory. `tasks` maps task ids to tasks (for scope and
/// judge prompts); trajectories whose task is unknown are skipped. Judge filters need `gateway`.
ReviewReport review_trajectories(const std::vector<FilterSpec>& filters, const std::vector<Trajectory>& trajectories,
                                 const std::map<std::string, Task>& tasks, gateway::Gateway* gateway,
                                 const ModelTag& judge_model, const ReviewOptions& options = {});

} // namespace hintcoach::review
