// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/gateway/tokenizer.hpp"

#include <cctype>

namespace hintcoach::gateway {

namespace {

bool is_word(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;  // keep multi-byte characters inside words
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

} // namespace

std::int64_t ApproximateTokenizer::count(std::string_view text) const {
    std::int64_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
        } else if (is_word(text[i])) {
            while (i < text.size() && is_word(text[i])) ++i;
            ++n;
        } else {
            ++i;
            ++n;
        }
    }
    return n;
}

std::vector<std::string> ApproximateTokenizer::pieces(std::string_view text) const {
    std::vector<std::string> out;
    std::size_t i = 0;
    std::string pending;  // whitespace carried into the next piece
    while (i < text.size()) {
        if (is_space(text[i])) {
            pending.push_back(text[i++]);
            continue;
        }
        std::size_t start = i;
        if (is_word(text[i])) {
            while (i < text.size() && is_word(text[i])) ++i;
        } else {
            ++i;
        }
        out.push_back(pending + std::string(text.substr(start, i - start)));
        pending.clear();
    }
    if (!pending.empty()) {
        if (out.empty()) out.push_back(pending);
        else out.back() += pending;
    }
    return out;
}

std::int64_t count_prompt_tokens(const Tokenizer& tokenizer, const std::vector<ChatMessage>& messages) {
    std::int64_t total = 0;
    for (const auto& m : messages) total += tokenizer.count(m.content) + kMessageOverheadTokens;
    return total;
}

} // namespace hintcoach::gateway
