// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/gateway/chat.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace hintcoach::gateway {

RetryableError::RetryableError(const std::string& message, int attempts)
    : Error("transport", fmt::format("{} (after {} attempt{})", message, attempts, attempts == 1 ? "" : "s")),
      attempts_(attempts) {}

void validate(const ChatMessage& message) {
    if (message.role != "system" && message.role != "user" && message.role != "assistant") {
        throw ValidationError("role", "unknown message role '" + message.role + "'");
    }
    std::vector<SectionSpan> spans = message.section_tags;
    std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
    std::size_t last_end = 0;
    for (const auto& s : spans) {
        if (s.begin > s.end || s.end > message.content.size()) {
            throw ValidationError("section_tags", "span '" + s.name + "' lies outside the message content");
        }
        if (s.begin < last_end) throw ValidationError("section_tags", "span '" + s.name + "' overlaps another span");
        last_end = s.end;
    }
}

void validate_request(const std::vector<ChatMessage>& messages, const CompletionParams& params) {
    if (messages.empty()) throw ValidationError("messages", "a completion request needs at least one message");
    for (const auto& m : messages) validate(m);
    if (params.top_k_logprobs < 0 || params.top_k_logprobs > kMaxTopKLogprobs) {
        throw ValidationError("top_k_logprobs", fmt::format("must be between 0 and {}", kMaxTopKLogprobs));
    }
    if (params.max_tokens < 1) throw ValidationError("max_tokens", "must be at least 1");
}

const SectionSpan* find_last_span(const std::vector<ChatMessage>& messages, const std::string& name,
                                  const ChatMessage** owner) {
    for (auto m = messages.rbegin(); m != messages.rend(); ++m) {
        for (auto s = m->section_tags.rbegin(); s != m->section_tags.rend(); ++s) {
            if (s->name == name) {
                if (owner) *owner = &*m;
                return &*s;
            }
        }
    }
    return nullptr;
}

void to_json(nlohmann::json& j, const SectionSpan& s) { j = {{"name", s.name}, {"begin", s.begin}, {"end", s.end}}; }

void from_json(const nlohmann::json& j, SectionSpan& s) {
    s.name = j.at("name").get<std::string>();
    s.begin = j.at("begin").get<std::size_t>();
    s.end = j.at("end").get<std::size_t>();
}

void to_json(nlohmann::json& j, const ChatMessage& m) {
    j = {{"role", m.role}, {"content", m.content}};
    if (!m.section_tags.empty()) j["section_tags"] = m.section_tags;
}

void from_json(const nlohmann::json& j, ChatMessage& m) {
    m.role = j.at("role").get<std::string>();
    m.content = j.at("content").get<std::string>();
    m.section_tags = j.value("section_tags", std::vector<SectionSpan>{});
}

void to_json(nlohmann::json& j, const TokenLogprob& t) {
    nlohmann::json alts = nlohmann::json::array();
    for (const auto& [tok, lp] : t.top_k) alts.push_back({tok, lp});
    j = {{"token", t.token}, {"logprob", t.logprob}, {"top_k", alts}};
}

void from_json(const nlohmann::json& j, TokenLogprob& t) {
    t.token = j.at("token").get<std::string>();
    t.logprob = j.at("logprob").get<double>();
    t.top_k.clear();
    for (const auto& alt : j.value("top_k", nlohmann::json::array())) {
        t.top_k.emplace_back(alt.at(0).get<std::string>(), alt.at(1).get<double>());
    }
}

void to_json(nlohmann::json& j, const Usage& u) {
    j = {{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}, {"source", u.source}};
}

void to_json(nlohmann::json& j, const Completion& c) {
    j = {{"text", c.text}, {"finish_reason", c.finish_reason}, {"tokens", c.tokens}, {"usage", c.usage}};
}

} // namespace hintcoach::gateway
