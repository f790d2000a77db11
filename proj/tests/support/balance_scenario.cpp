// SPDX-License-Identifier: Apache-2.0
#include "balance_scenario.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "hintcoach/coach/round.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::testkit {

namespace {

std::vector<std::string> tasks_of(const coach::RunContext& ctx, const std::string& template_id) {
    std::vector<std::string> out;
    for (const auto& t : ctx.tasks())
        if (t.template_id == template_id) out.push_back(t.task_id);
    std::sort(out.begin(), out.end());
    return out;
}

distill::DistillSample corrected_sample(const Task& task, int n) {
    distill::DistillSample s;
    s.sample_id = fmt::format("{}:c{}", task.task_id, n);
    s.task_id = task.task_id;
    s.group = task.group;
    s.template_id = task.template_id;
    s.source = distill::SampleSource::Corrective;
    return s;
}

} // namespace

BalanceScenario make_balance_scenario(coach::RunContext& ctx) {
    const auto extra = tasks_of(ctx, "flights_extra_minutes");
    const auto longc = tasks_of(ctx, "flights_long_count");
    const auto coffee = tasks_of(ctx, "coffee_range");
    const auto yelp = tasks_of(ctx, "yelp_stars");

    BalanceScenario sc;
    sc.corrected.push_back(corrected_sample(ctx.task(extra[0]), 0));
    for (int i = 0; i < 1000; ++i) sc.corrected.push_back(corrected_sample(ctx.task(yelp[0]), i));

    const std::vector<std::pair<std::string, std::string>> plan = {
        {"cand-01", extra[1]},  {"cand-02", longc[0]},  {"cand-03", longc[1]}, {"cand-04", coffee[0]},
        {"cand-05", coffee[1]}, {"cand-06", coffee[2]}, {"cand-07", yelp[1]},  {"cand-08", yelp[2]},
    };
    const auto model = ctx.require_model("base");
    for (const auto& [id, task_id] : plan) {
        const auto& task = ctx.task(task_id);
        agent::RunSpec spec;
        spec.task = task;
        spec.model = model;
        spec.profile = coach::build_profile(ctx.hints(), task, coach::ProfileKind::Initial, 1);
        spec.seed = 1;
        auto t = ctx.runtime().run_trajectory(spec);
        t.trajectory_id = id;
        sc.candidates.push_back(std::move(t));
    }

    sc.config.per_template_floor = 2;
    sc.config.per_group_floor = 1000;
    sc.config.failure_priority = {{coffee[0], 1}, {coffee[1], 5}, {coffee[2], 3}, {longc[1], 2}};
    sc.config.retention_quota = 1;
    sc.config.seed = 9;
    sc.expected_prefix = {{"cand-01", 1}, {"cand-05", 2}, {"cand-06", 2},
                          {"cand-04", 2}, {"cand-03", 2}, {"cand-02", 2}};
    sc.retention_pool = {"cand-07", "cand-08"};
    return sc;
}

std::string check_balance(const BalanceScenario& sc, const distill::BalanceResult& r) {
    const std::size_t want = sc.expected_prefix.size() + 1;
    if (r.selected.size() != want) return fmt::format("selected {} trajectories, expected {}", r.selected.size(), want);
    for (std::size_t i = 0; i < sc.expected_prefix.size(); ++i) {
        const auto& got = r.selected[i];
        const auto& [id, pass] = sc.expected_prefix[i];
        if (got.trajectory_id != id || got.pass != pass) {
            return fmt::format("selection {} is {} (pass {}), expected {} (pass {})", i, got.trajectory_id, got.pass,
                               id, pass);
        }
    }
    const auto& last = r.selected.back();
    if (last.pass != 3 || !sc.retention_pool.count(last.trajectory_id)) {
        return fmt::format("retention picked {} (pass {})", last.trajectory_id, last.pass);
    }
    std::size_t added = 0;
    for (const auto& sel : r.selected)
        for (const auto& c : sc.candidates)
            if (c.trajectory_id == sel.trajectory_id) added += c.steps.size();
    if (r.samples.size() != sc.corrected.size() + added) {
        return fmt::format("{} samples, expected {}", r.samples.size(), sc.corrected.size() + added);
    }
    if (!std::equal(sc.corrected.begin(), sc.corrected.end(), r.samples.begin())) {
        return "corrected samples were not kept in front";
    }
    for (std::size_t i = sc.corrected.size(); i < r.samples.size(); ++i) {
        if (r.samples[i].source != distill::SampleSource::Balance || !ends_with(r.samples[i].sample_id, ":b")) {
            return "added sample " + r.samples[i].sample_id + " is not marked as a balance sample";
        }
    }
    return "";
}

} // namespace hintcoach::testkit
