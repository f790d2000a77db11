// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hintcoach/gateway/chat.hpp"

namespace hintcoach::gateway {

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::int64_t count(std::string_view text) const = 0;
    /// Splits text into token strings whose concatenation, ignoring whitespace, is the input.
    virtual std::vector<std::string> pieces(std::string_view text) const = 0;
    virtual std::string name() const = 0;
    /// True when counts are estimates rather than the model's own vocabulary.
    virtual bool approximate() const = 0;
};

/// Each run of letters/digits is one token and every other non-space byte is one token.
/// Whitespace is dropped, except that each piece keeps the whitespace that preceded it so
/// the pieces concatenate back to the input.
class ApproximateTokenizer : public Tokenizer {
public:
    std::int64_t count(std::string_view text) const override;
    std::vector<std::string> pieces(std::string_view text) const override;
    std::string name() const override { return "approximate"; }
    bool approximate() const override { return true; }
};

/// Per-message framing cost added on top of content tokens when counting a prompt.
inline constexpr std::int64_t kMessageOverheadTokens = 3;

std::int64_t count_prompt_tokens(const Tokenizer& tokenizer, const std::vector<ChatMessage>& messages);

} // namespace hintcoach::gateway
