// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/review/judge.hpp"

#include <fmt/format.h>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::review {

const char* const kDefaultJudgePrompt =
    "You are reviewing the work of an agent that solves data questions by writing code cells.\n"
    "Decide whether the agent's most recent step shows the following problem:\n"
    "{description}\n\n"
    "<trajectory>\n{trajectory}\n</trajectory>\n\n"
    "Only the last step matters for your decision; earlier steps are context.\n"
    "Explain briefly inside <reasoning></reasoning>, then reply inside <answer></answer> with True if the last "
    "step is free of the problem (or the problem does not apply), or False if the last step shows it.";

const char* const kLastStepInstruction =
    "Only the last step matters for your decision; earlier steps are context.\n"
    "Explain briefly inside <reasoning></reasoning>, then reply inside <answer></answer> with True if the last "
    "step is free of the problem (or the problem does not apply), or False if the last step shows it.";

namespace {

std::optional<std::string> between(const std::string& text, const std::string& open, const std::string& close) {
    auto b = text.find(open);
    if (b == std::string::npos) return std::nullopt;
    b += open.size();
    auto e = text.find(close, b);
    if (e == std::string::npos) return std::nullopt;
    return text.substr(b, e - b);
}

std::string step_header(int index) { return fmt::format("### Step {}", index); }

} // namespace

Verdict parse_verdict(const std::string& text) {
    Verdict v;
    auto answer = between(text, "<answer>", "</answer>");
    if (!answer) return v;
    auto a = to_lower(trim(*answer));
    if (a == "true") {
        v.kind = VerdictKind::Correct;
    } else if (a == "false") {
        v.kind = VerdictKind::Mistake;
    } else {
        return v;
    }
    v.reasoning = trim(between(text, "<reasoning>", "</reasoning>").value_or(""));
    return v;
}

std::string render_trajectory_prefix(const Trajectory& trajectory, const Task& task, int through_step) {
    std::string out = "Task: " + task.description + "\n";
    for (const auto& step : trajectory.steps) {
        if (step.index > through_step) break;
        out += fmt::format("\n{}\n<inner_monologue>\n{}\n</inner_monologue>\n<run_ipython>\n{}\n</run_ipython>\n"
                           "<observation>\n{}\n</observation>\n",
                           step_header(step.index), step.monologue, step.code, step.observation);
    }
    return out;
}

std::string render_judge_prompt(const FilterSpec& filter, const std::string& trajectory_text) {
    std::string tmpl = filter.judge_prompt.value_or(kDefaultJudgePrompt);
    bool has_trajectory = contains(tmpl, "{trajectory}");
    // Substitute the trajectory last so text inside it is never treated as a placeholder.
    std::string out = replace_all(tmpl, "{description}", filter.description);
    if (has_trajectory) return replace_all(out, "{trajectory}", trajectory_text);
    return out + "\n\n<trajectory>\n" + trajectory_text + "\n</trajectory>\n\n" + kLastStepInstruction;
}

std::vector<ChatMessage> judge_messages(const FilterSpec& filter, const Trajectory& trajectory, const Task& task,
                                        int through_step) {
    ChatMessage m;
    m.role = "user";
    m.content = render_judge_prompt(filter, render_trajectory_prefix(trajectory, task, through_step));
    auto header = step_header(through_step) + "\n";
    auto b = m.content.rfind(header);
    if (b != std::string::npos) {
        auto e = m.content.find("</observation>", b);
        e = e == std::string::npos ? m.content.size() : e + std::string("</observation>").size();
        m.section_tags.push_back({"last_step", b, e});
    }
    return {m};
}

JudgeScan run_judge_filter(const FilterSpec& filter, const Trajectory& trajectory, const Task& task,
                           gateway::Gateway& gateway, const ModelTag& judge_model, const JudgeOptions& options,
                           int round_index) {
    if (filter.kind != FilterKind::LlmJudge) {
        throw ValidationError("kind", "filter '" + filter.filter_id + "' is not a judge filter");
    }
    JudgeScan scan;
    if (options.failed_only && trajectory.success != Success::Failed) return scan;

    for (const auto& step : trajectory.steps) {
        auto messages = judge_messages(filter, trajectory, task, step.index);
        gateway::CompletionParams params;
        params.temperature = options.temperature;
        params.max_tokens = options.max_tokens;
        params.stop.clear();
        std::uint64_t base = derive_seed(options.seed,
                                         fmt::format("{}/{}/{}", filter.filter_id, trajectory.trajectory_id, step.index));
        Verdict verdict;
        std::string raw;
        for (int attempt = 0; attempt < 2 && verdict.kind == VerdictKind::Unparseable; ++attempt) {
            params.seed = base + static_cast<std::uint64_t>(attempt);
            raw = gateway.complete(judge_model, messages, params).text;
            ++scan.requests;
            verdict = parse_verdict(raw);
        }
        StateRef state{trajectory.trajectory_id, step.index};
        if (verdict.kind == VerdictKind::Unparseable) {
            scan.errors.push_back({filter.filter_id, state, raw});
        } else if (verdict.kind == VerdictKind::Mistake) {
            MistakeFinding f;
            f.filter_id = filter.filter_id;
            f.state = state;
            f.verdict_reasoning = verdict.reasoning.empty() ? "judge answered False" : verdict.reasoning;
            f.round_index = round_index;
            scan.findings.push_back(std::move(f));
        }
    }
    return scan;
}

} // namespace hintcoach::review
