// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "hintcoach/agent/runtime.hpp"
#include "hintcoach/distill/dropout.hpp"
#include "hintcoach/distill/sample.hpp"

namespace hintcoach::distill {

struct HarvestOptions {
    int round_index = 1;
    SampleSource source = SampleSource::Rollout;
    DropoutConfig dropout;
    int workers = 1;
};

struct SkippedTrajectory {
    std::string trajectory_id;
    std::string reason;
};

struct HarvestResult {
    std::vector<DistillSample> samples;
    std::vector<SkippedTrajectory> skipped;
};

/// One sample per step: the teacher context is the monologue request actually sent at that step,
/// the action is the step's monologue and code, and the student context comes from hint dropout.
/// Trajectories with malformed steps or an unknown task are skipped and reported; rollouts
/// without any hint section are skipped too, since they teach nothing to internalize.
/// Sample ids are "<trajectory_id>:<step>" plus ":b" for balance samples.
HarvestResult harvest_trajectories(const std::vector<Trajectory>& trajectories,
                                   const std::map<std::string, Task>& tasks, const HarvestOptions& options);

/// One sample per injected action. The student context is the teacher context without the
/// injected hint message; corrective hints are never subject to dropout.
/// Sample ids are "<trajectory_id>:<step>:<hint_id>:<sample_index>".
std::vector<DistillSample> harvest_corrective(const std::vector<agent::ActionSample>& actions,
                                              const std::map<std::string, Trajectory>& trajectories,
                                              const std::map<std::string, Task>& tasks, int round_index);

} // namespace hintcoach::distill
