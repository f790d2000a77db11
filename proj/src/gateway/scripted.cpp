// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <fmt/format.h>

#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/gateway/backend.hpp"

namespace hintcoach::gateway {

namespace {

/// Probability mass given to the chosen token when synthesising logprobs.
constexpr double kSyntheticChosenProb = 0.8;

std::vector<TokenLogprob> synthetic_logprobs(const std::vector<std::string>& pieces, int k) {
    std::vector<TokenLogprob> out;
    for (const auto& piece : pieces) {
        TokenLogprob t;
        t.token = piece;
        t.logprob = std::log(kSyntheticChosenProb);
        if (k > 0) {
            t.top_k.emplace_back(piece, t.logprob);
            double rest = (1.0 - kSyntheticChosenProb) / std::max(1, k - 1);
            for (int i = 1; i < k; ++i) t.top_k.emplace_back(fmt::format("<alt{}>", i), std::log(rest));
        }
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

ScriptedBackend::Rule ScriptedBackend::parse_rule(const nlohmann::json& j, bool is_default) {
    if (!j.is_object()) throw ConfigurationError("scripted rule must be an object");
    Rule rule;
    if (j.contains("when")) {
        if (is_default) throw ConfigurationError("the default response cannot have a 'when' clause");
        if (!j["when"].is_array()) throw ConfigurationError("'when' must be a list of predicates");
        for (const auto& p : j["when"]) {
            Predicate pred;
            if (!p.is_object()) throw ConfigurationError("predicate must be an object");
            if (p.contains("tag")) {
                pred.type = "tag";
                pred.tag = p["tag"].get<std::string>();
                pred.value = p.value("contains", "");
            } else if (p.contains("contains")) {
                pred.type = "contains";
                pred.value = p["contains"].get<std::string>();
            } else if (p.contains("last_message_contains")) {
                pred.type = "last_message_contains";
                pred.value = p["last_message_contains"].get<std::string>();
            } else if (p.contains("prefill")) {
                pred.type = "prefill";
                pred.value = p["prefill"].get<std::string>();
            } else {
                throw ConfigurationError("unknown predicate " + p.dump());
            }
            rule.when.push_back(std::move(pred));
        }
    } else if (!is_default) {
        throw ConfigurationError("scripted rule is missing 'when'");
    }
    if (j.contains("responses")) {
        rule.responses = j["responses"].get<std::vector<std::string>>();
        if (rule.responses.empty()) throw ConfigurationError("'responses' must not be empty");
    } else if (j.contains("response")) {
        rule.responses.push_back(j["response"].get<std::string>());
    } else {
        throw ConfigurationError("scripted rule needs 'response' or 'responses'");
    }
    rule.finish_reason = j.value("finish_reason", "");
    if (j.contains("logprobs")) rule.logprobs = j["logprobs"].get<std::vector<TokenLogprob>>();
    return rule;
}

ScriptedBackend::ScriptedBackend(const nlohmann::json& behavior) {
    try {
        if (!behavior.is_object()) throw ConfigurationError("scripted behavior must be a JSON object");
        for (const auto& r : behavior.value("rules", nlohmann::json::array())) rules_.push_back(parse_rule(r, false));
        if (behavior.contains("default") && !behavior["default"].is_null()) {
            default_ = std::make_unique<Rule>(parse_rule(behavior["default"], true));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigurationError(std::string("malformed scripted behavior: ") + ex.what());
    }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigurationError("cannot parse scripted behavior " + path + ": " + ex.what());
    }
    return std::make_shared<ScriptedBackend>(doc);
}

bool ScriptedBackend::matches(const Rule& rule, const std::vector<ChatMessage>& messages,
                              const CompletionParams& params) const {
    for (const auto& p : rule.when) {
        if (p.type == "contains") {
            bool found = contains(params.prefill, p.value);
            for (const auto& m : messages) found = found || contains(m.content, p.value);
            if (!found) return false;
        } else if (p.type == "last_message_contains") {
            const std::string& last = params.prefill.empty() ? messages.back().content : params.prefill;
            if (!contains(last, p.value)) return false;
        } else if (p.type == "prefill") {
            if (params.prefill != p.value) return false;
        } else if (p.type == "tag") {
            const ChatMessage* owner = nullptr;
            const SectionSpan* span = find_last_span(messages, p.tag, &owner);
            if (!span) return false;
            std::string_view body(owner->content);
            if (!contains(body.substr(span->begin, span->end - span->begin), p.value)) return false;
        }
    }
    return true;
}

Completion ScriptedBackend::complete(const std::vector<ChatMessage>& messages, const CompletionParams& params) {
    validate_request(messages, params);
    const Rule* chosen = nullptr;
    for (const auto& rule : rules_) {
        if (matches(rule, messages, params)) {
            chosen = &rule;
            break;
        }
    }
    if (!chosen) chosen = default_.get();
    if (!chosen) throw ConfigurationError("no scripted rule matches the prompt and no default is configured");

    Completion c;
    c.text = chosen->responses[static_cast<std::size_t>(params.seed % chosen->responses.size())];
    c.finish_reason = chosen->finish_reason.empty() ? "stop" : chosen->finish_reason;

    // Honour stop sequences: cut at the earliest one.
    std::size_t cut = std::string::npos;
    for (const auto& s : params.stop) {
        if (s.empty()) continue;
        auto pos = c.text.find(s);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    if (cut != std::string::npos) {
        c.text.resize(cut);
        c.finish_reason = "stop";
    }

    auto pieces = tokenizer_.pieces(c.text);
    if (static_cast<int>(pieces.size()) > params.max_tokens) {
        pieces.resize(static_cast<std::size_t>(params.max_tokens));
        c.text = join(pieces, "");
        c.finish_reason = "length";
    }
    if (!chosen->logprobs.empty()) {
        c.tokens = chosen->logprobs;
    } else if (params.top_k_logprobs > 0) {
        c.tokens = synthetic_logprobs(pieces, params.top_k_logprobs);
    }
    c.usage.input_tokens = count_prompt_tokens(tokenizer_, messages) + tokenizer_.count(params.prefill);
    c.usage.output_tokens = static_cast<std::int64_t>(pieces.size());
    c.usage.source = "approximate";
    return c;
}

} // namespace hintcoach::gateway
