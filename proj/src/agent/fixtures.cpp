// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/agent/fixtures.hpp"

#include <fmt/format.h>

#include "hintcoach/core/text.hpp"

namespace hintcoach::agent {

nlohmann::json task_predicate(const Task& task) {
    return {{"tag", "task_description"}, {"contains", "\n" + task.description + "\n\n"}};
}

nlohmann::json step_predicate(int step) {
    return {{"tag", "status"}, {"contains", fmt::format("You are on step {}\n", step)}};
}

std::vector<nlohmann::json> action_rules(const Task& task, int step, const std::string& monologue,
                                         const std::string& code, const std::vector<nlohmann::json>& extra_when) {
    nlohmann::json when = nlohmann::json::array({task_predicate(task), step_predicate(step)});
    for (const auto& w : extra_when) when.push_back(w);
    nlohmann::json mono_when = when;
    mono_when.push_back({{"prefill", "<inner_monologue>"}});
    nlohmann::json code_when = when;
    code_when.push_back({{"prefill", "<run_ipython>"}});
    return {
        {{"when", mono_when}, {"response", "\n" + monologue + "\n</inner_monologue>"}},
        {{"when", code_when}, {"response", "\n" + code + "\n</run_ipython>"}},
    };
}

std::vector<nlohmann::json> script_rules(const Task& task, const std::vector<std::string>& cells) {
    std::vector<nlohmann::json> rules;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string first_line = split(cells[i], "\n").front();
        std::string monologue = fmt::format("Step {} of my plan: {}", i + 1, first_line);
        for (auto& r : action_rules(task, static_cast<int>(i) + 1, monologue, cells[i])) rules.push_back(std::move(r));
    }
    return rules;
}

nlohmann::json behavior_document(std::vector<nlohmann::json> rules, const std::optional<std::string>& default_response) {
    nlohmann::json doc = {{"rules", std::move(rules)}};
    if (default_response) doc["default"] = {{"response", *default_response}};
    return doc;
}

nlohmann::json reference_behavior(const std::vector<Task>& tasks,
                                  const std::map<std::string, std::vector<std::string>>& cells) {
    std::vector<nlohmann::json> rules;
    for (const auto& task : tasks) {
        auto it = cells.find(task.task_id);
        if (it == cells.end()) continue;
        for (auto& r : script_rules(task, it->second)) rules.push_back(std::move(r));
    }
    return behavior_document(std::move(rules));
}

} // namespace hintcoach::agent
