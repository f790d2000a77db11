// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/distill/balance.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "hintcoach/core/text.hpp"
#include "hintcoach/distill/harvest.hpp"

namespace hintcoach::distill {

namespace {

struct Candidate {
    const Trajectory* trajectory;
    const Task* task;
    int samples;
};

} // namespace

BalanceResult balance_dataset(const std::vector<DistillSample>& corrected, const std::vector<Trajectory>& candidates,
                              const std::map<std::string, Task>& tasks, const BalanceConfig& config) {
    BalanceResult result;
    result.samples = corrected;
    if (!config.enabled) return result;

    // Candidates sorted by id so the seeded shuffles below do not depend on input order.
    std::vector<Candidate> pool;
    for (const auto& t : candidates) {
        auto task = tasks.find(t.task_id);
        if (task == tasks.end() || t.steps.empty()) continue;
        pool.push_back({&t, &task->second, static_cast<int>(t.steps.size())});
    }
    std::sort(pool.begin(), pool.end(),
              [](const auto& a, const auto& b) { return a.trajectory->trajectory_id < b.trajectory->trajectory_id; });

    std::map<std::string, int> per_task;
    std::map<std::string, int> per_template;
    std::map<std::string, int> per_group;
    std::map<std::string, std::string> template_of_task;
    for (const auto& s : corrected) {
        ++per_task[s.task_id];
        ++per_template[s.template_id];
        ++per_group[s.group];
        template_of_task[s.task_id] = s.template_id;
    }

    const auto corrected_per_group = per_group;

    std::set<std::string> taken;
    std::set<std::string> touched_groups;
    std::vector<const Trajectory*> chosen;
    auto take = [&](const Candidate& c, int pass, std::string reason) {
        taken.insert(c.trajectory->trajectory_id);
        touched_groups.insert(c.task->group);
        per_template[c.task->template_id] += c.samples;
        per_group[c.task->group] += c.samples;
        chosen.push_back(c.trajectory);
        result.selected.push_back({c.trajectory->trajectory_id, pass, std::move(reason)});
    };

    // Pass 1: tasks with too few corrected samples borrow trajectories of the same template.
    for (const auto& [task_id, count] : per_task) {
        if (count >= config.per_template_floor) continue;
        const auto& tmpl = template_of_task[task_id];
        std::vector<const Candidate*> same;
        for (const auto& c : pool)
            if (c.task->template_id == tmpl && !taken.count(c.trajectory->trajectory_id)) same.push_back(&c);
        SplitMix64 rng(derive_seed(config.seed, "balance/template/" + task_id));
        rng.shuffle(same);
        for (const auto* c : same) {
            if (per_template[tmpl] >= config.per_template_floor) break;
            take(*c, 1, fmt::format("template {} of task {} below floor {}", tmpl, task_id, config.per_template_floor));
        }
        if (per_template[tmpl] < config.per_template_floor) {
            result.warnings.push_back(fmt::format("template {}: {} samples, floor {} (not enough candidates)", tmpl,
                                                  per_template[tmpl], config.per_template_floor));
        }
    }

    // Pass 2: underrepresented groups, most failure-prone tasks first.
    int group_floor = 0;
    if (config.per_group_floor) {
        group_floor = *config.per_group_floor;
    } else {
        for (const auto& [g, n] : corrected_per_group) group_floor = std::max(group_floor, n);
    }
    std::set<std::string> groups;
    for (const auto& c : pool) groups.insert(c.task->group);
    for (const auto& [g, n] : per_group) groups.insert(g);
    for (const auto& g : groups) {
        if (per_group[g] >= group_floor) continue;
        std::vector<const Candidate*> members;
        for (const auto& c : pool)
            if (c.task->group == g && !taken.count(c.trajectory->trajectory_id)) members.push_back(&c);
        auto failures = [&](const Candidate* c) {
            auto it = config.failure_priority.find(c->task->task_id);
            return it == config.failure_priority.end() ? 0 : it->second;
        };
        std::stable_sort(members.begin(), members.end(),
                         [&](const auto* a, const auto* b) { return failures(a) > failures(b); });
        for (const auto* c : members) {
            if (per_group[g] >= group_floor) break;
            take(*c, 2, fmt::format("group {} below floor {} ({} failures)", g, group_floor, failures(c)));
        }
        if (per_group[g] < group_floor) {
            result.warnings.push_back(fmt::format("group {}: {} samples, floor {} (not enough candidates)", g,
                                                  per_group[g], group_floor));
        }
    }

    // Pass 3: keep earlier skills alive with random trajectories from groups nobody touched yet.
    if (config.retention_quota > 0) {
        std::vector<const Candidate*> untouched;
        for (const auto& c : pool) {
            if (taken.count(c.trajectory->trajectory_id) || touched_groups.count(c.task->group)) continue;
            untouched.push_back(&c);
        }
        SplitMix64 rng(derive_seed(config.seed, "balance/retention"));
        rng.shuffle(untouched);
        int added = 0;
        for (const auto* c : untouched) {
            if (added >= config.retention_quota) break;
            take(*c, 3, "retention");
            ++added;
        }
        if (added < config.retention_quota) {
            result.warnings.push_back(
                fmt::format("retention: {} of {} trajectories available", added, config.retention_quota));
        }
    }

    std::vector<Trajectory> picked;
    for (const auto* t : chosen) picked.push_back(*t);
    HarvestOptions ho;
    ho.round_index = config.round_index;
    ho.source = SampleSource::Balance;
    ho.dropout = config.dropout;
    auto harvested = harvest_trajectories(picked, tasks, ho);
    for (const auto& s : harvested.skipped) {
        result.warnings.push_back("balance trajectory " + s.trajectory_id + " skipped: " + s.reason);
    }
    for (auto& s : harvested.samples) result.samples.push_back(std::move(s));
    return result;
}

} // namespace hintcoach::distill
