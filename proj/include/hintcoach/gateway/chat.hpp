// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/error.hpp"

namespace hintcoach::gateway {

/// A named byte range inside a message, e.g. the `<status>` block.
struct SectionSpan {
    std::string name;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const SectionSpan&) const = default;
};

struct ChatMessage {
    std::string role;  // system, user or assistant
    std::string content;
    std::vector<SectionSpan> section_tags;

    bool operator==(const ChatMessage&) const = default;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
    /// Alternatives sorted by descending logprob.
    std::vector<std::pair<std::string, double>> top_k;

    bool operator==(const TokenLogprob&) const = default;
};

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    /// "backend" when reported by the server, "approximate" when estimated locally.
    std::string source = "approximate";

    bool operator==(const Usage&) const = default;
};

struct Completion {
    std::string text;
    std::string finish_reason = "stop";
    std::vector<TokenLogprob> tokens;
    Usage usage;

    bool operator==(const Completion&) const = default;
};

inline constexpr int kMaxTopKLogprobs = 20;

struct CompletionParams {
    double temperature = 0.7;
    int max_tokens = 512;
    int top_k_logprobs = 0;
    std::vector<std::string> stop = {"</inner_monologue>", "</run_ipython>"};
    std::uint64_t seed = 0;
    /// Assistant text the completion continues from (e.g. an opening tag).
    std::string prefill;
};

/// Spans must lie inside the content and must not overlap. Throws ValidationError.
void validate(const ChatMessage& message);
/// Messages non-empty, roles known, top_k within range. Throws ValidationError.
void validate_request(const std::vector<ChatMessage>& messages, const CompletionParams& params);

/// The last span called `name` across `messages` (and its message via `owner`), or nullptr.
const SectionSpan* find_last_span(const std::vector<ChatMessage>& messages, const std::string& name,
                                  const ChatMessage** owner = nullptr);

/// Raised for transport failures; the caller may retry. `attempts()` counts tries made so far.
class RetryableError : public Error {
public:
    RetryableError(const std::string& message, int attempts);
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

/// The backend answered with something that is not a valid completion.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& message) : Error("protocol", message) {}
};

void to_json(nlohmann::json& j, const SectionSpan& s);
void from_json(const nlohmann::json& j, SectionSpan& s);
void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const TokenLogprob& t);
void from_json(const nlohmann::json& j, TokenLogprob& t);
void to_json(nlohmann::json& j, const Usage& u);
void to_json(nlohmann::json& j, const Completion& c);

} // namespace hintcoach::gateway
