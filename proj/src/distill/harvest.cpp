// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/distill/harvest.hpp"

#include <fmt/format.h>

#include "hintcoach/agent/prompt.hpp"
#include "hintcoach/core/error.hpp"
#include "hintcoach/core/parallel.hpp"

namespace hintcoach::distill {

namespace {

struct Harvested {
    std::vector<DistillSample> samples;
    std::optional<SkippedTrajectory> skipped;
};

Harvested harvest_one(const Trajectory& t, const std::map<std::string, Task>& tasks, const HarvestOptions& options) {
    Harvested out;
    auto skip = [&](std::string reason) {
        out.samples.clear();
        out.skipped = SkippedTrajectory{t.trajectory_id, std::move(reason)};
        return out;
    };
    auto task = tasks.find(t.task_id);
    if (task == tasks.end()) return skip("unknown task '" + t.task_id + "'");
    auto hint_ids = t.prompt_profile.value("hint_ids", std::vector<std::string>{});
    if (options.source == SampleSource::Rollout && hint_ids.empty()) return skip("rollout carries no hint sections");

    for (const auto& step : t.steps) {
        if (step.monologue.empty() || step.code.empty()) {
            return skip(fmt::format("step {} has no monologue or code", step.index));
        }
        DistillSample s;
        s.sample_id = fmt::format("{}:{}{}", t.trajectory_id, step.index,
                                  options.source == SampleSource::Balance ? ":b" : "");
        s.round_index = options.round_index;
        s.task_id = t.task_id;
        s.group = task->second.group;
        s.template_id = task->second.template_id;
        s.source = options.source;
        s.state = {t.trajectory_id, step.index};
        try {
            s.teacher_messages = agent::AgentRuntime::state_messages(t, task->second, step.index);
        } catch (const Error& e) {
            return skip(fmt::format("step {}: {}", step.index, e.what()));
        }
        s.action_text = agent::action_text(step.monologue, step.code);
        s.hint_ids = hint_ids;
        s.source_success = t.success == Success::Succeeded;
        apply_hint_dropout(s, options.dropout);
        out.samples.push_back(std::move(s));
    }
    return out;
}

} // namespace

HarvestResult harvest_trajectories(const std::vector<Trajectory>& trajectories,
                                   const std::map<std::string, Task>& tasks, const HarvestOptions& options) {
    auto parts = parallel_map(trajectories.size(), static_cast<std::size_t>(std::max(1, options.workers)),
                              [&](std::size_t i) { return harvest_one(trajectories[i], tasks, options); });
    HarvestResult result;
    for (auto& p : parts) {
        if (p.skipped) result.skipped.push_back(std::move(*p.skipped));
        for (auto& s : p.samples) result.samples.push_back(std::move(s));
    }
    return result;
}

std::vector<DistillSample> harvest_corrective(const std::vector<agent::ActionSample>& actions,
                                              const std::map<std::string, Trajectory>& trajectories,
                                              const std::map<std::string, Task>& tasks, int round_index) {
    std::vector<DistillSample> out;
    for (const auto& a : actions) {
        auto t = trajectories.find(a.state.trajectory_id);
        if (t == trajectories.end()) throw NotFoundError("trajectory " + a.state.trajectory_id);
        auto task = tasks.find(t->second.task_id);
        if (task == tasks.end()) throw NotFoundError("task " + t->second.task_id);
        DistillSample s;
        s.sample_id = fmt::format("{}:{}:{}:{}", a.state.trajectory_id, a.state.step_index, a.hint_id, a.sample_index);
        s.round_index = round_index;
        s.task_id = task->second.task_id;
        s.group = task->second.group;
        s.template_id = task->second.template_id;
        s.source = SampleSource::Corrective;
        s.state = a.state;
        s.teacher_messages = a.teacher_messages;
        s.student_messages = remove_messages_with_span(a.teacher_messages, "hint");
        s.action_text = agent::action_text(a.monologue, a.code);
        s.hint_ids = {a.hint_id};
        s.source_success = t->second.success == Success::Succeeded;
        s.teacher_logprobs = a.logprobs;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace hintcoach::distill
