// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"
#include "hintcoach/gateway/chat.hpp"
#include "hintcoach/gateway/tokenizer.hpp"

namespace hintcoach::gateway {

class Backend {
public:
    virtual ~Backend() = default;
    /// One request. Usage may be left at zero with source "approximate"; the gateway fills it.
    virtual Completion complete(const std::vector<ChatMessage>& messages, const CompletionParams& params) = 0;
    virtual BackendKind kind() const = 0;
};

/// Deterministic rule-matching backend used as a stand-in for a model in tests and fixtures.
///
/// Rules document:
///   {"rules": [{"when": [predicate...], "response": "..." | "responses": ["...", ...],
///               "finish_reason": "stop", "logprobs": [{"token", "logprob", "top_k": [[t, lp], ...]}]}],
///    "default": {"response": "..."}}
/// Predicates (all must hold): {"contains": s} over every message, {"last_message_contains": s},
/// {"tag": name, "contains": s} over the last span with that name, {"prefill": s} exact prefill.
/// The prefill counts as the last message. "responses" picks by seed modulo count.
class ScriptedBackend : public Backend {
public:
    /// Throws ConfigurationError for malformed rules.
    explicit ScriptedBackend(const nlohmann::json& behavior);
    static std::shared_ptr<ScriptedBackend> from_file(const std::string& path);

    Completion complete(const std::vector<ChatMessage>& messages, const CompletionParams& params) override;
    BackendKind kind() const override { return BackendKind::Scripted; }

    std::size_t rule_count() const { return rules_.size(); }

private:
    struct Predicate {
        std::string type;
        std::string tag;
        std::string value;
    };
    struct Rule {
        std::vector<Predicate> when;
        std::vector<std::string> responses;
        std::string finish_reason;
        std::vector<TokenLogprob> logprobs;
    };

    static Rule parse_rule(const nlohmann::json& j, bool is_default);
    bool matches(const Rule& rule, const std::vector<ChatMessage>& messages, const CompletionParams& params) const;

    std::vector<Rule> rules_;
    std::unique_ptr<Rule> default_;
    ApproximateTokenizer tokenizer_;
};

struct HttpBackendOptions {
    std::string endpoint;  // e.g. "http://127.0.0.1:8000"
    std::string model;     // served model name
    std::string api_key_env = "HINTCOACH_API_KEY";
    int timeout_seconds = 120;
};

/// OpenAI-compatible chat-completions client (POST {endpoint}/v1/chat/completions).
class HttpChatBackend : public Backend {
public:
    explicit HttpChatBackend(HttpBackendOptions options);

    Completion complete(const std::vector<ChatMessage>& messages, const CompletionParams& params) override;
    BackendKind kind() const override { return BackendKind::HttpChat; }

    /// Request body, exposed for tests.
    nlohmann::json build_request(const std::vector<ChatMessage>& messages, const CompletionParams& params) const;
    /// Parses a response body. Throws ProtocolError.
    static Completion parse_response(const nlohmann::json& body, int top_k_logprobs);

private:
    HttpBackendOptions options_;
};

} // namespace hintcoach::gateway
