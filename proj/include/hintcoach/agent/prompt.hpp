// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"
#include "hintcoach/gateway/chat.hpp"
#include "hintcoach/hints/ledger.hpp"

namespace hintcoach::agent {

using gateway::ChatMessage;

inline constexpr const char* kDefaultProjectStart = "2025-01-10 20:10:23";

struct Budget {
    int max_steps = 10;
    std::int64_t max_input_tokens = 12000;
};

/// Everything besides the task and the history that shapes a prompt. Stored verbatim on each
/// trajectory so its prompts can be rebuilt later.
struct PromptProfile {
    /// Hint sections placed in the guidelines block; an empty profile omits the block entirely.
    hints::HintProfile hints = hints::HintLedger::none();
    bool include_tool_docs = true;
    /// Tools to document; empty means the task's allowlist.
    std::vector<std::string> tool_docs;
    Budget budget;
    std::string monologue_reminder =
        "Continue with your inner monologue to plan the next action. Use exactly this format:\n"
        "<inner_monologue>\nyour reasoning\n</inner_monologue>";
    std::string code_reminder =
        "Now write one code cell that carries out this step. Use exactly this format:\n"
        "<run_ipython>\nyour code\n</run_ipython>";
    std::string project_start = kDefaultProjectStart;
    /// Simulated seconds that pass per model call, which keeps status blocks deterministic.
    int seconds_per_call = 7;
};

void validate(const PromptProfile& profile);
nlohmann::json profile_to_json(const PromptProfile& profile);
PromptProfile profile_from_json(const nlohmann::json& j);

enum class Phase { Monologue, Code };

/// Extra pieces appended after the history for one request.
struct PromptTail {
    Phase phase = Phase::Monologue;
    /// Code phase only: the monologue produced for this step.
    std::string pending_monologue;
    /// Corrective hint placed as its own message after the current status.
    std::optional<std::string> corrective_hint;
    /// Format-correction note from a failed attempt.
    std::optional<std::string> format_correction;
};

/// Renders the `<status>` block body.
std::string render_status(const StatusSnapshot& status);

/// Builds the message list for the next request. Pure: the same inputs give the same messages.
/// `history` holds completed steps (contiguous from 1); `current` is the status for the step
/// about to be taken.
std::vector<ChatMessage> assemble_prompt(const Task& task, const PromptProfile& profile,
                                         const std::vector<Step>& history, const StatusSnapshot& current,
                                         const PromptTail& tail = {});

/// Assistant message recording one completed action.
ChatMessage action_message(const std::string& monologue, const std::string& code);
/// The action as one text block, exactly as `action_message` renders it.
std::string action_text(const std::string& monologue, const std::string& code);

/// Opening tag that prefills the response for `phase`.
std::string opening_tag(Phase phase);
std::string closing_tag(Phase phase);

/// Result of strict section parsing.
struct ParsedSection {
    bool ok = false;
    std::string body;
    std::string error;
};

/// Extracts the body of one response section. The response continues after the opening tag.
/// Accepts a missing closing tag only when finish_reason is "stop" (the stop sequence consumed it).
/// Rejects bodies that contain any section tag or are empty.
ParsedSection parse_section(Phase phase, const std::string& text, const std::string& finish_reason);

/// Splits a rendered section body out of a message by span name; empty when absent.
std::string span_text(const ChatMessage& message, const std::string& span_name);

/// Simulated clock helpers: "YYYY-MM-DD HH:MM:SS" plus seconds, and "H:MM:SS".
std::string add_seconds(const std::string& timestamp, std::int64_t seconds);
std::string format_elapsed(std::int64_t seconds);

} // namespace hintcoach::agent
