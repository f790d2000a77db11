// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/distill/sample.hpp"

#include <algorithm>
#include <optional>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::distill {

std::string to_string(SampleSource source) {
    switch (source) {
    case SampleSource::Rollout: return "rollout";
    case SampleSource::Corrective: return "corrective";
    case SampleSource::Balance: return "balance";
    }
    return "rollout";
}

SampleSource parse_sample_source(const std::string& text) {
    if (text == "rollout") return SampleSource::Rollout;
    if (text == "corrective") return SampleSource::Corrective;
    if (text == "balance") return SampleSource::Balance;
    throw ValidationError("source", "unknown sample source '" + text + "'");
}

namespace {

bool is_block_section(const std::string& name) { return starts_with(name, "hint:") || starts_with(name, "tool:"); }

std::vector<const gateway::SectionSpan*> block_sections(const ChatMessage& m) {
    std::vector<const gateway::SectionSpan*> out;
    for (const auto& s : m.section_tags)
        if (is_block_section(s.name)) out.push_back(&s);
    std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->begin < b->begin; });
    return out;
}

/// Rebuilds one message without the named sections; nullopt when no section survives.
std::optional<ChatMessage> strip_message(const ChatMessage& m, const std::set<std::string>& drop) {
    auto sections = block_sections(m);
    if (sections.empty()) return m;
    bool any = std::any_of(sections.begin(), sections.end(), [&](const auto* s) { return drop.count(s->name) > 0; });
    if (!any) return m;

    const std::size_t first = sections.front()->begin;
    const std::size_t last = sections.back()->end;
    std::string separator = sections.size() > 1 ? m.content.substr(sections[0]->end, sections[1]->begin - sections[0]->end)
                                                : std::string();
    ChatMessage out;
    out.role = m.role;
    out.content = m.content.substr(0, first);
    for (const auto& s : m.section_tags)
        if (!is_block_section(s.name) && s.end <= first) out.section_tags.push_back(s);

    bool kept_any = false;
    for (const auto* s : sections) {
        if (drop.count(s->name)) continue;
        if (kept_any) out.content += separator;
        gateway::SectionSpan span{s->name, out.content.size(), 0};
        out.content += m.content.substr(s->begin, s->end - s->begin);
        span.end = out.content.size();
        out.section_tags.push_back(span);
        kept_any = true;
    }
    if (!kept_any) return std::nullopt;

    const std::size_t shift_from = last;
    const std::size_t new_suffix_start = out.content.size();
    out.content += m.content.substr(last);
    for (const auto& s : m.section_tags) {
        if (!is_block_section(s.name) && s.begin >= shift_from) {
            out.section_tags.push_back({s.name, s.begin - shift_from + new_suffix_start, s.end - shift_from + new_suffix_start});
        }
    }
    return out;
}

bool has_span(const ChatMessage& m, const std::string& name) {
    return std::any_of(m.section_tags.begin(), m.section_tags.end(), [&](const auto& s) { return s.name == name; });
}

/// Matches student messages against teacher messages in order; returns the number of deleted
/// teacher messages, or nullopt when the student is not derivable.
std::optional<int> align(const std::vector<ChatMessage>& teacher, const std::vector<ChatMessage>& student) {
    std::size_t j = 0;
    int deleted = 0;
    for (const auto& t : teacher) {
        if (j < student.size()) {
            const auto& s = student[j];
            if (s == t) {
                ++j;
                continue;
            }
            if (s.role == t.role) {
                std::set<std::string> missing;
                for (const auto* sec : block_sections(t))
                    if (!has_span(s, sec->name)) missing.insert(sec->name);
                if (!missing.empty()) {
                    auto stripped = strip_message(t, missing);
                    if (stripped && *stripped == s) {
                        ++j;
                        continue;
                    }
                }
            }
        }
        bool deletable = !block_sections(t).empty() || has_span(t, "hint");
        if (!deletable) return std::nullopt;
        ++deleted;
    }
    if (j != student.size()) return std::nullopt;
    return deleted;
}

} // namespace

bool is_droppable_section(const std::string& span_name, bool drop_tool_docs) {
    return starts_with(span_name, "hint:") || (drop_tool_docs && starts_with(span_name, "tool:"));
}

std::vector<SectionRef> droppable_sections(const std::vector<ChatMessage>& messages, bool drop_tool_docs) {
    std::vector<SectionRef> out;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        for (const auto* s : block_sections(messages[i]))
            if (is_droppable_section(s->name, drop_tool_docs)) out.push_back({i, s->name});
    }
    return out;
}

std::vector<ChatMessage> remove_sections(const std::vector<ChatMessage>& messages, const std::vector<SectionRef>& drop) {
    std::vector<ChatMessage> out;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        std::set<std::string> names;
        for (const auto& d : drop)
            if (d.message_index == i) names.insert(d.name);
        if (names.empty()) {
            out.push_back(messages[i]);
            continue;
        }
        if (auto stripped = strip_message(messages[i], names)) out.push_back(std::move(*stripped));
    }
    return out;
}

std::vector<ChatMessage> remove_messages_with_span(const std::vector<ChatMessage>& messages,
                                                   const std::string& span_name) {
    std::vector<ChatMessage> out;
    for (const auto& m : messages)
        if (!has_span(m, span_name)) out.push_back(m);
    return out;
}

bool is_student_derivable(const std::vector<ChatMessage>& teacher, const std::vector<ChatMessage>& student) {
    return align(teacher, student).has_value();
}

int removed_message_count(const std::vector<ChatMessage>& teacher, const std::vector<ChatMessage>& student) {
    auto n = align(teacher, student);
    if (!n) throw ValidationError("student_messages", "student context is not derivable from the teacher context");
    return *n;
}

void validate(const DistillSample& s) {
    auto fail = [&](const std::string& field, const std::string& msg) {
        throw ValidationError(field, "sample " + s.sample_id + ": " + msg);
    };
    if (s.sample_id.empty()) throw ValidationError("sample_id", "must not be empty");
    if (s.action_text.empty()) fail("action_text", "must not be empty");
    if (s.teacher_messages.empty()) fail("teacher_messages", "must not be empty");
    if (!(s.weight > 0.0)) fail("weight", "must be positive");
    if (s.dropout_p < 0.0 || s.dropout_p > 1.0) fail("dropout_p", "must lie in [0, 1]");
    if (s.dropout_mask.size() != s.droppable.size()) fail("dropout_mask", "needs one entry per droppable section");
    if (s.source != SampleSource::Balance && s.hint_ids.empty()) fail("hint_ids", "teacher samples need a hint");
    if (!is_student_derivable(s.teacher_messages, s.student_messages)) {
        fail("student_messages", "student context is not derivable from the teacher context");
    }
    if (s.source == SampleSource::Corrective && removed_message_count(s.teacher_messages, s.student_messages) != 1) {
        fail("student_messages", "corrective samples hide exactly the injected hint message");
    }
}

void to_json(nlohmann::json& j, const SectionRef& s) { j = {{"message_index", s.message_index}, {"name", s.name}}; }

void from_json(const nlohmann::json& j, SectionRef& s) {
    s.message_index = j.at("message_index").get<std::size_t>();
    s.name = j.at("name").get<std::string>();
}

void to_json(nlohmann::json& j, const DistillSample& s) {
    j = {{"sample_id", s.sample_id},
         {"round_index", s.round_index},
         {"task_id", s.task_id},
         {"group", s.group},
         {"template_id", s.template_id},
         {"source", to_string(s.source)},
         {"state", s.state},
         {"teacher_messages", s.teacher_messages},
         {"student_messages", s.student_messages},
         {"action_text", s.action_text},
         {"hint_ids", s.hint_ids},
         {"droppable_sections", s.droppable},
         {"dropout_mask", s.dropout_mask},
         {"dropout_p", s.dropout_p},
         {"dropout_seed", s.dropout_seed},
         {"weight", s.weight},
         {"source_success", s.source_success},
         {"teacher_logprobs", s.teacher_logprobs}};
}

void from_json(const nlohmann::json& j, DistillSample& s) {
    s.sample_id = j.at("sample_id").get<std::string>();
    s.round_index = j.at("round_index").get<int>();
    s.task_id = j.at("task_id").get<std::string>();
    s.group = j.value("group", std::string());
    s.template_id = j.value("template_id", std::string());
    s.source = parse_sample_source(j.at("source").get<std::string>());
    s.state = j.at("state").get<StateRef>();
    s.teacher_messages = j.value("teacher_messages", std::vector<ChatMessage>{});
    s.student_messages = j.at("student_messages").get<std::vector<ChatMessage>>();
    s.action_text = j.at("action_text").get<std::string>();
    s.hint_ids = j.value("hint_ids", std::vector<std::string>{});
    s.droppable = j.value("droppable_sections", std::vector<SectionRef>{});
    s.dropout_mask = j.value("dropout_mask", std::vector<bool>{});
    s.dropout_p = j.value("dropout_p", 0.0);
    s.dropout_seed = j.value("dropout_seed", std::uint64_t{0});
    s.weight = j.value("weight", 1.0);
    s.source_success = j.value("source_success", false);
    s.teacher_logprobs = j.value("teacher_logprobs", std::vector<gateway::TokenLogprob>{});
}

} // namespace hintcoach::distill
