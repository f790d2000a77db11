// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/review/flagged.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/parallel.hpp"

namespace hintcoach::review {

namespace {

bool finding_less(const MistakeFinding& a, const MistakeFinding& b) {
    return std::tie(a.filter_id, a.state, a.verdict_reasoning) < std::tie(b.filter_id, b.state, b.verdict_reasoning);
}

} // namespace

std::vector<MistakeFinding> dedupe_findings(const std::vector<MistakeFinding>& findings) {
    std::set<std::pair<std::string, StateRef>> seen;
    std::vector<MistakeFinding> out;
    for (const auto& f : findings) {
        if (seen.emplace(f.filter_id, f.state).second) out.push_back(f);
    }
    return out;
}

FlaggedSet collect_flagged_states(const std::vector<MistakeFinding>& findings, int cap_per_filter,
                                  const std::vector<std::string>& filter_order) {
    if (cap_per_filter < 0) throw ValidationError("cap_per_filter", "must not be negative");

    std::map<std::string, std::set<StateRef>> by_filter;
    for (const auto& f : findings) by_filter[f.filter_id].insert(f.state);

    std::vector<std::string> order;
    std::set<std::string> listed;
    for (const auto& id : filter_order) {
        if (listed.insert(id).second) order.push_back(id);
    }
    for (const auto& [id, states] : by_filter) {
        if (listed.insert(id).second) order.push_back(id);
    }

    FlaggedSet out;
    for (const auto& id : order) {
        auto it = by_filter.find(id);
        if (it == by_filter.end()) continue;
        int kept = 0;
        for (const auto& state : it->second) {  // std::set iterates in (trajectory_id, step) order
            if (out.attribution.count(state)) continue;
            if (kept >= cap_per_filter) {
                ++out.dropped_by_cap;
                continue;
            }
            out.attribution.emplace(state, id);
            ++kept;
        }
        out.kept_per_filter[id] = kept;
    }
    for (const auto& [state, id] : out.attribution) out.states.push_back(state);
    return out;
}

ReviewReport review_trajectories(const std::vector<FilterSpec>& filters, const std::vector<Trajectory>& trajectories,
                                 const std::map<std::string, Task>& tasks, gateway::Gateway* gateway,
                                 const ModelTag& judge_model, const ReviewOptions& options) {
    bool needs_judge = std::any_of(filters.begin(), filters.end(),
                                   [](const auto& f) { return f.kind == FilterKind::LlmJudge; });
    if (needs_judge && gateway == nullptr) throw ConfigurationError("judge filters need a model gateway");

    struct Partial {
        std::vector<MistakeFinding> findings;
        std::vector<JudgeError> errors;
        int requests = 0;
        bool scanned = false;
    };

    auto partials = parallel_map(trajectories.size(), static_cast<std::size_t>(std::max(1, options.workers)),
                                 [&](std::size_t i) {
                                     Partial p;
                                     const auto& t = trajectories[i];
                                     auto task = tasks.find(t.task_id);
                                     if (task == tasks.end()) return p;
                                     p.scanned = true;
                                     for (const auto& f : filters) {
                                         if (!in_scope(f, task->second.group)) continue;
                                         if (f.kind == FilterKind::Rule) {
                                             auto found = run_rule_filter(f, t, options.round_index);
                                             p.findings.insert(p.findings.end(), found.begin(), found.end());
                                         } else {
                                             auto scan = run_judge_filter(f, t, task->second, *gateway, judge_model,
                                                                          options.judge, options.round_index);
                                             p.findings.insert(p.findings.end(), scan.findings.begin(),
                                                               scan.findings.end());
                                             p.errors.insert(p.errors.end(), scan.errors.begin(), scan.errors.end());
                                             p.requests += scan.requests;
                                         }
                                     }
                                     return p;
                                 });

    ReviewReport report;
    for (auto& p : partials) {
        report.findings.insert(report.findings.end(), p.findings.begin(), p.findings.end());
        report.judge_errors.insert(report.judge_errors.end(), p.errors.begin(), p.errors.end());
        report.judge_requests += p.requests;
        report.trajectories_scanned += p.scanned ? 1 : 0;
    }
    std::sort(report.findings.begin(), report.findings.end(), finding_less);
    report.findings = dedupe_findings(report.findings);
    std::sort(report.judge_errors.begin(), report.judge_errors.end(), [](const auto& a, const auto& b) {
        return std::tie(a.filter_id, a.state) < std::tie(b.filter_id, b.state);
    });
    return report;
}

} // namespace hintcoach::review
