// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hintcoach/distill/dropout.hpp"
#include "hintcoach/distill/sample.hpp"

namespace hintcoach::distill {

struct BalanceConfig {
    bool enabled = true;
    /// Pass 1: a task with fewer corrected samples than this pulls in candidate trajectories of its
    /// template, in seeded random order, until the template's samples reach the floor.
    int per_template_floor = 0;
    /// Pass 2: groups below this many samples pull in candidates of that group, most failures first.
    /// Defaults to the largest corrected-sample count of any group.
    std::optional<int> per_group_floor;
    /// Failure counts per task id from earlier rounds, used to order pass 2.
    std::map<std::string, int> failure_priority;
    /// Pass 3: number of random candidate trajectories taken from groups untouched by passes 1 and 2.
    int retention_quota = 0;
    std::uint64_t seed = 0;
    /// Dropout applied to the samples of added trajectories.
    DropoutConfig dropout;
    int round_index = 2;
};

struct BalanceSelection {
    std::string trajectory_id;
    /// 1, 2 or 3.
    int pass = 0;
    std::string reason;

    bool operator==(const BalanceSelection&) const = default;
};

struct BalanceResult {
    /// Corrected samples followed by the samples of selected trajectories in selection order.
    std::vector<DistillSample> samples;
    std::vector<BalanceSelection> selected;
    /// Floors that could not be met from the available candidates.
    std::vector<std::string> warnings;
};

/// Tops up corrected samples with candidate trajectories that were sampled with the initial hints.
/// With balancing disabled the corrected samples pass through untouched.
BalanceResult balance_dataset(const std::vector<DistillSample>& corrected, const std::vector<Trajectory>& candidates,
                              const std::map<std::string, Task>& tasks, const BalanceConfig& config);

} // namespace hintcoach::distill
