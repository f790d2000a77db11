// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"
#include "hintcoach/gateway/chat.hpp"

namespace hintcoach::distill {

using gateway::ChatMessage;

/// Where a sample came from.
enum class SampleSource {
    /// A step of a teacher rollout under the initial hints.
    Rollout,
    /// An action sampled after a corrective hint was injected at a flagged state.
    Corrective,
    /// A step of a candidate trajectory added by balancing.
    Balance,
};

std::string to_string(SampleSource source);
SampleSource parse_sample_source(const std::string& text);

/// A removable section of a context: the span `name` inside message `message_index`.
struct SectionRef {
    std::size_t message_index = 0;
    std::string name;

    bool operator==(const SectionRef&) const = default;
};

/// One (state, action, hint) triplet with its teacher and student contexts.
struct DistillSample {
    std::string sample_id;
    int round_index = 1;
    std::string task_id;
    std::string group;
    std::string template_id;
    SampleSource source = SampleSource::Rollout;
    StateRef state;
    std::vector<ChatMessage> teacher_messages;
    std::vector<ChatMessage> student_messages;
    /// The supervised output: monologue and code in their tags.
    std::string action_text;
    std::vector<std::string> hint_ids;
    /// Sections subject to dropout, in context order.
    std::vector<SectionRef> droppable;
    /// Per droppable section: true when kept in `student_messages`.
    std::vector<bool> dropout_mask;
    double dropout_p = 0.0;
    std::uint64_t dropout_seed = 0;
    double weight = 1.0;
    /// Success of the trajectory the sample was taken from.
    bool source_success = false;
    std::vector<gateway::TokenLogprob> teacher_logprobs;

    bool operator==(const DistillSample&) const = default;
};

/// Span names treated as droppable hint sections ("hint:<id>", and "tool:<name>" when enabled).
bool is_droppable_section(const std::string& span_name, bool drop_tool_docs);
std::vector<SectionRef> droppable_sections(const std::vector<ChatMessage>& messages, bool drop_tool_docs);

/// Removes whole sections. Within a message the framing text before the first section and after
/// the last one is preserved and the separator between sections is reused for the survivors; a
/// message whose droppable sections are all removed is deleted. Spans are kept consistent.
std::vector<ChatMessage> remove_sections(const std::vector<ChatMessage>& messages, const std::vector<SectionRef>& drop);

/// Deletes every message carrying a span named `span_name` (e.g. the injected "hint" message).
std::vector<ChatMessage> remove_messages_with_span(const std::vector<ChatMessage>& messages,
                                                   const std::string& span_name);

/// Structural check that `student` is `teacher` with zero or more whole droppable sections, whole
/// hint blocks, or injected hint messages deleted, and nothing else changed.
bool is_student_derivable(const std::vector<ChatMessage>& teacher, const std::vector<ChatMessage>& student);

/// Number of messages in `teacher` that are absent from `student` (by position-preserving match).
/// Used to confirm corrective samples differ by exactly one message.
int removed_message_count(const std::vector<ChatMessage>& teacher, const std::vector<ChatMessage>& student);

/// Checks the sample invariants. Throws ValidationError naming the sample.
void validate(const DistillSample& sample);

void to_json(nlohmann::json& j, const SectionRef& s);
void from_json(const nlohmann::json& j, SectionRef& s);
void to_json(nlohmann::json& j, const DistillSample& s);
void from_json(const nlohmann::json& j, DistillSample& s);

} // namespace hintcoach::distill
