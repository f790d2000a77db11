// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/agent/prompt.hpp"

#include <cstdio>

#include <fmt/format.h>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/world/tools.hpp"

namespace hintcoach::agent {

namespace {

const char* const kSectionTags[] = {"<inner_monologue>", "</inner_monologue>", "<run_ipython>", "</run_ipython>",
                                    "<observation>",     "</observation>",     "<status>",      "</status>"};

/// Builds a message from pieces, recording a span for each named piece.
class MessageBuilder {
public:
    explicit MessageBuilder(std::string role) { msg_.role = std::move(role); }

    MessageBuilder& text(const std::string& s) {
        msg_.content += s;
        return *this;
    }

    MessageBuilder& span(const std::string& name, const std::string& s) {
        gateway::SectionSpan sp;
        sp.name = name;
        sp.begin = msg_.content.size();
        msg_.content += s;
        sp.end = msg_.content.size();
        msg_.section_tags.push_back(std::move(sp));
        return *this;
    }

    ChatMessage build() { return std::move(msg_); }

private:
    ChatMessage msg_;
};

std::string tagged(const std::string& tag, const std::string& body) {
    return "<" + tag + ">\n" + body + "\n</" + tag + ">";
}

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

} // namespace

std::string add_seconds(const std::string& timestamp, std::int64_t seconds) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(timestamp.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6) {
        throw ValidationError("project_start", "expected 'YYYY-MM-DD HH:MM:SS', got '" + timestamp + "'");
    }
    std::int64_t total = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 + h * 3600 +
                         mi * 60 + s + seconds;
    std::int64_t days = total >= 0 ? total / 86400 : (total - 86399) / 86400;
    std::int64_t rem = total - days * 86400;
    std::int64_t yy = 0;
    unsigned mm = 0, dd = 0;
    civil_from_days(days, yy, mm, dd);
    return fmt::format("{:04d}-{:02d}-{:02d} {:02d}:{:02d}:{:02d}", yy, mm, dd, rem / 3600, (rem / 60) % 60, rem % 60);
}

std::string format_elapsed(std::int64_t seconds) {
    return fmt::format("{}:{:02d}:{:02d}", seconds / 3600, (seconds / 60) % 60, seconds % 60);
}

void validate(const PromptProfile& profile) {
    if (profile.budget.max_steps < 1) throw ValidationError("max_steps", "must be at least 1");
    if (profile.budget.max_input_tokens < 1) throw ValidationError("max_input_tokens", "must be at least 1");
    if (profile.hints.hint_ids.size() != profile.hints.sections.size()) {
        throw ValidationError("hints", "hint ids and sections differ in length");
    }
    for (const auto& s : profile.hints.sections) hints::validate_hint_text(s);
    add_seconds(profile.project_start, 0);
}

nlohmann::json profile_to_json(const PromptProfile& p) {
    return {{"hint_profile_id", p.hints.profile_id},
            {"hint_ids", p.hints.hint_ids},
            {"hint_sections", p.hints.sections},
            {"include_tool_docs", p.include_tool_docs},
            {"tool_docs", p.tool_docs},
            {"max_steps", p.budget.max_steps},
            {"max_input_tokens", p.budget.max_input_tokens},
            {"monologue_reminder", p.monologue_reminder},
            {"code_reminder", p.code_reminder},
            {"project_start", p.project_start},
            {"seconds_per_call", p.seconds_per_call}};
}

PromptProfile profile_from_json(const nlohmann::json& j) {
    PromptProfile p;
    try {
        p.hints.profile_id = j.value("hint_profile_id", "none");
        p.hints.hint_ids = j.value("hint_ids", std::vector<std::string>{});
        p.hints.sections = j.value("hint_sections", std::vector<std::string>{});
        p.include_tool_docs = j.value("include_tool_docs", true);
        p.tool_docs = j.value("tool_docs", std::vector<std::string>{});
        p.budget.max_steps = j.value("max_steps", p.budget.max_steps);
        p.budget.max_input_tokens = j.value("max_input_tokens", p.budget.max_input_tokens);
        p.monologue_reminder = j.value("monologue_reminder", p.monologue_reminder);
        p.code_reminder = j.value("code_reminder", p.code_reminder);
        p.project_start = j.value("project_start", p.project_start);
        p.seconds_per_call = j.value("seconds_per_call", p.seconds_per_call);
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError("prompt_profile", std::string("malformed prompt profile: ") + ex.what());
    }
    validate(p);
    return p;
}

std::string render_status(const StatusSnapshot& s) {
    return fmt::format(
        "Current date and time: {}\nTime elapsed since project start: {}\nYou are on step {}\n"
        "Resources spent so far: {}\nInput tokens remaining: {}",
        s.now, s.elapsed, s.step_number, s.resources_spent, s.input_tokens_remaining);
}

std::string opening_tag(Phase phase) { return phase == Phase::Monologue ? "<inner_monologue>" : "<run_ipython>"; }
std::string closing_tag(Phase phase) { return phase == Phase::Monologue ? "</inner_monologue>" : "</run_ipython>"; }

std::string action_text(const std::string& monologue, const std::string& code) {
    return tagged("inner_monologue", monologue) + "\n" + tagged("run_ipython", code);
}

ChatMessage action_message(const std::string& monologue, const std::string& code) {
    return MessageBuilder("assistant")
        .span("monologue", tagged("inner_monologue", monologue))
        .text("\n")
        .span("code", tagged("run_ipython", code))
        .build();
}

std::vector<ChatMessage> assemble_prompt(const Task& task, const PromptProfile& profile,
                                         const std::vector<Step>& history, const StatusSnapshot& current,
                                         const PromptTail& tail) {
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (history[i].index != static_cast<int>(i) + 1) {
            throw ValidationError("history", "history steps must be contiguous from 1");
        }
    }
    std::vector<ChatMessage> out;
    out.push_back(MessageBuilder("user")
                      .span("task_description",
                            tagged("task_description",
                                   task.description +
                                       "\n\nWhen you have the answer, pass it to complete_task as text."))
                      .text("\n\nProject started at " + profile.project_start)
                      .build());

    if (!profile.hints.empty()) {
        MessageBuilder b("user");
        b.text("<guidelines>\n");
        for (std::size_t i = 0; i < profile.hints.sections.size(); ++i) {
            if (i > 0) b.text(hints::kSectionSeparator);
            b.span("hint:" + profile.hints.hint_ids[i], profile.hints.sections[i]);
        }
        b.text("\n</guidelines>");
        out.push_back(b.build());
    }

    if (profile.include_tool_docs) {
        const auto& names = profile.tool_docs.empty() ? task.tool_allowlist : profile.tool_docs;
        if (!names.empty()) {
            MessageBuilder b("user");
            b.text("<tool_documentation>\n");
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (i > 0) b.text(std::string(hints::kSeparatorLine) + "\n");
                b.span("tool:" + names[i], world::tool_documentation(names[i]));
            }
            b.text("</tool_documentation>");
            out.push_back(b.build());
        }
    }

    auto status_message = [](const StatusSnapshot& s) {
        return MessageBuilder("user").span("status", tagged("status", render_status(s))).build();
    };

    for (const auto& step : history) {
        out.push_back(status_message(step.status));
        out.push_back(action_message(step.monologue, step.code));
        out.push_back(MessageBuilder("user").span("observation", tagged("observation", step.observation)).build());
    }
    out.push_back(status_message(current));

    if (tail.corrective_hint) {
        out.push_back(MessageBuilder("user").span("hint", tagged("hint", *tail.corrective_hint)).build());
    }
    if (tail.phase == Phase::Monologue) {
        out.push_back(MessageBuilder("user").span("reminder", profile.monologue_reminder).build());
    } else {
        out.push_back(MessageBuilder("user").span("reminder", profile.monologue_reminder).build());
        out.push_back(MessageBuilder("assistant")
                          .span("monologue", tagged("inner_monologue", tail.pending_monologue))
                          .build());
        out.push_back(MessageBuilder("user").span("reminder", profile.code_reminder).build());
    }
    if (tail.format_correction) {
        out.push_back(MessageBuilder("user").span("format_correction", *tail.format_correction).build());
    }
    return out;
}

ParsedSection parse_section(Phase phase, const std::string& text, const std::string& finish_reason) {
    ParsedSection out;
    std::string body = text;
    const std::string open = opening_tag(phase);
    const std::string close = closing_tag(phase);
    // Some servers echo the prefilled opening tag.
    if (starts_with(trim(body), open)) body = trim(body).substr(open.size());
    auto pos = body.find(close);
    if (pos != std::string::npos) {
        if (!trim(body.substr(pos + close.size())).empty()) {
            out.error = "text after " + close;
            return out;
        }
        body.resize(pos);
    } else if (finish_reason != "stop") {
        out.error = "missing " + close + " (finish_reason " + finish_reason + ")";
        return out;
    }
    for (const char* tag : kSectionTags) {
        if (body.find(tag) != std::string::npos) {
            out.error = std::string("unexpected ") + tag + " inside " + open;
            return out;
        }
    }
    body = trim(body);
    if (body.empty()) {
        out.error = "empty " + open + " section";
        return out;
    }
    out.ok = true;
    out.body = std::move(body);
    return out;
}

std::string span_text(const ChatMessage& message, const std::string& span_name) {
    for (const auto& s : message.section_tags) {
        if (s.name == span_name) return message.content.substr(s.begin, s.end - s.begin);
    }
    return {};
}

} // namespace hintcoach::agent
