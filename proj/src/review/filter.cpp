// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/review/filter.hpp"

#include <algorithm>
#include <set>

#include "hintcoach/action/static_kind.hpp"
#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/review/rule.hpp"
#include "hintcoach/world/tools.hpp"

namespace hintcoach::review {

std::string to_string(FilterKind kind) { return kind == FilterKind::Rule ? "rule" : "llm-judge"; }

FilterKind parse_filter_kind(const std::string& text) {
    if (text == "rule") return FilterKind::Rule;
    if (text == "llm-judge") return FilterKind::LlmJudge;
    throw ValidationError("kind", "expected 'rule' or 'llm-judge', got '" + text + "'");
}

void validate(const FilterSpec& f) {
    if (f.filter_id.empty()) throw ValidationError("filter_id", "must not be empty");
    if (f.description.empty()) throw ValidationError("description", "must not be empty");
    if (f.kind == FilterKind::Rule) {
        if (!f.rule) throw ValidationError("rule", "rule filters need a rule");
        if (f.judge_prompt) throw ValidationError("judge_prompt", "rule filters must not carry a judge prompt");
        RulePredicate::compile(*f.rule);
    } else {
        if (!f.judge_prompt || f.judge_prompt->empty())
            throw ValidationError("judge_prompt", "llm-judge filters need a judge prompt");
        if (f.rule) throw ValidationError("rule", "llm-judge filters must not carry a rule");
    }
}

bool in_scope(const FilterSpec& f, const std::string& group) {
    return f.scope.empty() || std::find(f.scope.begin(), f.scope.end(), group) != f.scope.end();
}

void to_json(nlohmann::json& j, const FilterSpec& f) {
    j = {{"filter_id", f.filter_id}, {"kind", to_string(f.kind)}, {"description", f.description}, {"scope", f.scope}};
    if (f.rule) j["rule"] = *f.rule;
    if (f.judge_prompt) j["judge_prompt"] = *f.judge_prompt;
}

void from_json(const nlohmann::json& j, FilterSpec& f) {
    if (!j.is_object()) throw ValidationError("filter", "must be an object");
    if (!j.contains("filter_id") || !j.at("filter_id").is_string()) throw ValidationError("filter_id", "required");
    f.filter_id = j.at("filter_id").get<std::string>();
    f.kind = parse_filter_kind(j.value("kind", std::string("rule")));
    f.description = j.value("description", std::string());
    f.rule.reset();
    f.judge_prompt.reset();
    if (j.contains("rule")) f.rule = j.at("rule");
    if (j.contains("judge_prompt")) f.judge_prompt = j.at("judge_prompt").get<std::string>();
    f.scope = j.value("scope", std::vector<std::string>{});
}

std::vector<FilterSpec> parse_filters(const nlohmann::json& document) {
    const nlohmann::json& list = document.is_object() && document.contains("filters") ? document.at("filters") : document;
    if (!list.is_array()) throw ValidationError("filters", "expected a list of filters");
    std::vector<FilterSpec> out;
    std::set<std::string> seen;
    for (const auto& item : list) {
        auto f = item.get<FilterSpec>();
        validate(f);
        if (!seen.insert(f.filter_id).second) throw ValidationError("filter_id", "duplicate id '" + f.filter_id + "'");
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.filter_id < b.filter_id; });
    return out;
}

std::vector<FilterSpec> load_filters(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigurationError("filter file " + path + " is not valid JSON: " + e.what());
    }
    return parse_filters(doc);
}

std::vector<MistakeFinding> run_rule_filter(const FilterSpec& filter, const Trajectory& trajectory, int round_index) {
    if (filter.kind != FilterKind::Rule || !filter.rule) {
        throw ValidationError("kind", "filter '" + filter.filter_id + "' is not a rule filter");
    }
    auto predicate = RulePredicate::compile(*filter.rule);
    std::vector<MistakeFinding> out;
    action::KindMap bindings;
    for (const auto& step : trajectory.steps) {
        if (predicate.matches(step, bindings)) {
            MistakeFinding f;
            f.filter_id = filter.filter_id;
            f.state = {trajectory.trajectory_id, step.index};
            f.verdict_reasoning = "rule " + filter.filter_id + ": " + filter.description;
            f.round_index = round_index;
            out.push_back(std::move(f));
        }
        auto summary = action::analyze_cell(step.code, bindings, world::tool_return_kinds());
        if (summary.parsed) bindings = std::move(summary.bindings);
    }
    return out;
}

} // namespace hintcoach::review
