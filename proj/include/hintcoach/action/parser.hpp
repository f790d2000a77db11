// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hintcoach/action/ast.hpp"
#include "hintcoach/core/error.hpp"

namespace hintcoach::action {

/// Raised by parse(). `is_limit()` distinguishes the statement cap from grammar errors.
class SyntaxError : public Error {
public:
    SyntaxError(int line, int column, std::string found, std::vector<std::string> expected);
    /// Statement-limit variant.
    SyntaxError(int line, std::size_t statement_count);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }
    bool is_limit() const noexcept { return limit_; }

private:
    int line_;
    int column_;
    std::vector<std::string> expected_;
    bool limit_ = false;
};

enum class TokenType {
    Number,
    String,
    Identifier,
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Less,
    LessEqual,
    Greater,
    GreaterEqual,
    EqualEqual,
    NotEqual,
    Newline,
    End,
};

struct Token {
    TokenType type = TokenType::End;
    std::string text;  // decoded string literal body or raw lexeme
    double number = 0.0;
    int line = 1;
    int column = 1;
};

std::string describe(TokenType type);

/// Splits source into tokens. Newlines inside brackets are dropped; `#` starts a comment.
std::vector<Token> tokenize(std::string_view source);

/// Parses a code cell. Throws SyntaxError on grammar errors or when the cell has more
/// than kMaxStatements statements.
Program parse(std::string_view source);

} // namespace hintcoach::action
