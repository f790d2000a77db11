// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/core/types.hpp"

#include <cctype>
#include <regex>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach {

std::string to_string(Split split) {
    switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
    }
    return "train";
}

Split parse_split(const std::string& text) {
    if (text == "train") return Split::Train;
    if (text == "valid") return Split::Valid;
    if (text == "test") return Split::Test;
    throw ValidationError("split", "must be one of train/valid/test, got '" + text + "'");
}

std::string to_string(OutcomeKind kind) {
    switch (kind) {
    case OutcomeKind::Completed: return "completed";
    case OutcomeKind::BudgetExhausted: return "budget_exhausted";
    case OutcomeKind::StepLimit: return "step_limit";
    case OutcomeKind::Aborted: return "aborted";
    }
    return "aborted";
}

OutcomeKind parse_outcome_kind(const std::string& text) {
    if (text == "completed") return OutcomeKind::Completed;
    if (text == "budget_exhausted") return OutcomeKind::BudgetExhausted;
    if (text == "step_limit") return OutcomeKind::StepLimit;
    if (text == "aborted") return OutcomeKind::Aborted;
    throw ValidationError("outcome.kind", "unknown outcome '" + text + "'");
}

Outcome Outcome::completed(std::string report, std::string answer) {
    Outcome o;
    o.kind = OutcomeKind::Completed;
    o.report = std::move(report);
    o.answer = std::move(answer);
    return o;
}

Outcome Outcome::budget_exhausted() {
    Outcome o;
    o.kind = OutcomeKind::BudgetExhausted;
    return o;
}

Outcome Outcome::step_limit() {
    Outcome o;
    o.kind = OutcomeKind::StepLimit;
    return o;
}

Outcome Outcome::aborted(std::string reason) {
    Outcome o;
    o.kind = OutcomeKind::Aborted;
    o.reason = std::move(reason);
    return o;
}

std::string to_string(Success success) {
    switch (success) {
    case Success::Unscored: return "unscored";
    case Success::Succeeded: return "true";
    case Success::Failed: return "false";
    }
    return "unscored";
}

Success parse_success(const std::string& text) {
    if (text == "unscored") return Success::Unscored;
    if (text == "true") return Success::Succeeded;
    if (text == "false") return Success::Failed;
    throw ValidationError("success", "must be true/false/unscored, got '" + text + "'");
}

std::string to_string(BackendKind kind) { return kind == BackendKind::HttpChat ? "http-chat" : "scripted"; }

BackendKind parse_backend_kind(const std::string& text) {
    if (text == "http-chat") return BackendKind::HttpChat;
    if (text == "scripted") return BackendKind::Scripted;
    throw ValidationError("backend_kind", "must be http-chat or scripted, got '" + text + "'");
}

int count_complete_task_calls(const std::string& code) {
    // Lexical scan that skips string literals and comments; mirrors the action-language lexer.
    int count = 0;
    std::size_t i = 0;
    const std::string name = kCompleteTaskTool;
    auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < code.size()) {
        char c = code[i];
        if (c == '#') {
            while (i < code.size() && code[i] != '\n') ++i;
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            ++i;
            while (i < code.size() && code[i] != quote && code[i] != '\n') {
                if (code[i] == '\\') ++i;
                ++i;
            }
            ++i;
            continue;
        }
        if (is_ident(c)) {
            std::size_t start = i;
            while (i < code.size() && is_ident(code[i])) ++i;
            if (code.compare(start, i - start, name) == 0 && i - start == name.size()) {
                std::size_t j = i;
                while (j < code.size() && (code[j] == ' ' || code[j] == '\t')) ++j;
                if (j < code.size() && code[j] == '(') ++count;
            }
            continue;
        }
        ++i;
    }
    return count;
}

void validate(const Task& task) {
    if (task.task_id.empty()) throw ValidationError("task_id", "must be non-empty");
    if (trim(task.expected_answer).empty()) throw ValidationError("expected_answer", "must be non-empty");
    bool has_complete = false;
    for (const auto& tool : task.tool_allowlist) has_complete = has_complete || tool == kCompleteTaskTool;
    if (!has_complete) throw ValidationError("tool_allowlist", "must contain complete_task");
}

void validate(const Trajectory& t) {
    if (t.task_id.empty()) throw ValidationError("task_id", "must be non-empty");
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& step = t.steps[i];
        if (step.index != static_cast<int>(i) + 1) {
            throw ValidationError("steps[" + std::to_string(i) + "].index",
                                  "expected " + std::to_string(i + 1) + ", got " + std::to_string(step.index));
        }
        if (step.input_tokens < 0 || step.output_tokens < 0) {
            throw ValidationError("steps[" + std::to_string(i) + "].tokens", "token counts must be >= 0");
        }
    }
    if (t.outcome.kind != OutcomeKind::Aborted && t.steps.empty()) {
        throw ValidationError("steps", "must be non-empty for outcome " + to_string(t.outcome.kind));
    }
    if (t.outcome.kind == OutcomeKind::Completed) {
        int calls = count_complete_task_calls(t.steps.back().code);
        if (calls != 1) {
            throw ValidationError("outcome", "completed outcome requires exactly one complete_task call in the final step, found " +
                                                 std::to_string(calls));
        }
    }
    if (t.success == Success::Succeeded && t.outcome.kind != OutcomeKind::Completed) {
        throw ValidationError("success", "success=true requires a completed outcome");
    }
}

void validate(const MistakeFinding& f) {
    if (f.filter_id.empty()) throw ValidationError("filter_id", "must be non-empty");
    if (f.state.trajectory_id.empty()) throw ValidationError("state.trajectory_id", "must be non-empty");
    if (f.state.step_index < 1) throw ValidationError("state.step_index", "must be >= 1");
}

void validate(const RoundManifest& m) {
    if (m.round_index < 1) throw ValidationError("round_index", "must be >= 1");
    if (m.status == "completed" && m.dataset_ids.empty()) {
        throw ValidationError("dataset_ids", "must be non-empty for a completed round");
    }
}

void validate(const ModelTag& tag) {
    static const std::regex name_re("[A-Za-z0-9_.:/-]+");
    if (!std::regex_match(tag.name, name_re)) throw ValidationError("name", "invalid model tag name '" + tag.name + "'");
    if (tag.round_index < 0) throw ValidationError("round_index", "must be >= 0");
}

} // namespace hintcoach
