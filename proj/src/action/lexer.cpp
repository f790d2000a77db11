// SPDX-License-Identifier: Apache-2.0
#include <cctype>

#include <fmt/format.h>

#include "hintcoach/action/parser.hpp"
#include "hintcoach/action/value.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::action {

namespace {

std::string syntax_message(int line, int column, const std::string& found, const std::vector<std::string>& expected) {
    std::string msg = fmt::format("line {}, column {}: unexpected {}", line, column, found);
    if (!expected.empty()) msg += "; expected one of: " + join(expected, ", ");
    return msg;
}

} // namespace

SyntaxError::SyntaxError(int line, int column, std::string found, std::vector<std::string> expected)
    : Error("parse", syntax_message(line, column, found, expected)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

SyntaxError::SyntaxError(int line, std::size_t statement_count)
    : Error("limit_exceeded", fmt::format("line {}: cell has {} statements; the limit is {}", line, statement_count,
                                          kMaxStatements)),
      line_(line),
      column_(1),
      limit_(true) {}

std::string describe(TokenType type) {
    switch (type) {
    case TokenType::Number: return "number";
    case TokenType::String: return "string";
    case TokenType::Identifier: return "identifier";
    case TokenType::True: return "'true'";
    case TokenType::False: return "'false'";
    case TokenType::LParen: return "'('";
    case TokenType::RParen: return "')'";
    case TokenType::LBracket: return "'['";
    case TokenType::RBracket: return "']'";
    case TokenType::Comma: return "','";
    case TokenType::Assign: return "'='";
    case TokenType::Plus: return "'+'";
    case TokenType::Minus: return "'-'";
    case TokenType::Star: return "'*'";
    case TokenType::Slash: return "'/'";
    case TokenType::Less: return "'<'";
    case TokenType::LessEqual: return "'<='";
    case TokenType::Greater: return "'>'";
    case TokenType::GreaterEqual: return "'>='";
    case TokenType::EqualEqual: return "'=='";
    case TokenType::NotEqual: return "'!='";
    case TokenType::Newline: return "newline";
    case TokenType::End: return "end of input";
    }
    return "token";
}

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> tokens;
    int line = 1;
    int column = 1;
    int depth = 0;
    std::size_t i = 0;

    auto push = [&](TokenType type, std::string text, int col) {
        Token t;
        t.type = type;
        t.text = std::move(text);
        t.line = line;
        t.column = col;
        tokens.push_back(std::move(t));
    };

    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            if (depth == 0 && !tokens.empty() && tokens.back().type != TokenType::Newline) {
                push(TokenType::Newline, "\n", column);
            }
            ++i;
            ++line;
            column = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++column;
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i, ++column;
            continue;
        }
        int start_col = column;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            std::string lexeme(src.substr(i, j - i));
            auto value = parse_number(lexeme);
            if (!value) throw SyntaxError(line, start_col, "number literal '" + lexeme + "'", {});
            push(TokenType::Number, lexeme, start_col);
            tokens.back().number = *value;
            column += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            std::string word(src.substr(i, j - i));
            TokenType type = TokenType::Identifier;
            if (word == "true" || word == "True") type = TokenType::True;
            if (word == "false" || word == "False") type = TokenType::False;
            push(type, word, start_col);
            column += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            std::string body;
            std::size_t j = i + 1;
            int col = column + 1;
            bool closed = false;
            while (j < src.size()) {
                char d = src[j];
                if (d == '\n') break;
                if (d == quote) {
                    closed = true;
                    ++j;
                    ++col;
                    break;
                }
                if (d == '\\' && j + 1 < src.size()) {
                    char e = src[j + 1];
                    switch (e) {
                    case 'n': body.push_back('\n'); break;
                    case 't': body.push_back('\t'); break;
                    case '\\': body.push_back('\\'); break;
                    case '\'': body.push_back('\''); break;
                    case '"': body.push_back('"'); break;
                    default:
                        body.push_back('\\');
                        body.push_back(e);
                    }
                    j += 2;
                    col += 2;
                    continue;
                }
                body.push_back(d);
                ++j;
                ++col;
            }
            if (!closed) throw SyntaxError(line, start_col, "unterminated string literal", {"closing quote"});
            push(TokenType::String, body, start_col);
            column = col;
            i = j;
            continue;
        }

        auto two = src.substr(i, 2);
        TokenType type;
        std::size_t len = 1;
        if (two == "<=") {
            type = TokenType::LessEqual;
            len = 2;
        } else if (two == ">=") {
            type = TokenType::GreaterEqual;
            len = 2;
        } else if (two == "==") {
            type = TokenType::EqualEqual;
            len = 2;
        } else if (two == "!=") {
            type = TokenType::NotEqual;
            len = 2;
        } else {
            switch (c) {
            case '(': type = TokenType::LParen; ++depth; break;
            case ')': type = TokenType::RParen; depth = std::max(0, depth - 1); break;
            case '[': type = TokenType::LBracket; ++depth; break;
            case ']': type = TokenType::RBracket; depth = std::max(0, depth - 1); break;
            case ',': type = TokenType::Comma; break;
            case '=': type = TokenType::Assign; break;
            case '+': type = TokenType::Plus; break;
            case '-': type = TokenType::Minus; break;
            case '*': type = TokenType::Star; break;
            case '/': type = TokenType::Slash; break;
            case '<': type = TokenType::Less; break;
            case '>': type = TokenType::Greater; break;
            default: throw SyntaxError(line, start_col, fmt::format("character '{}'", c), {});
            }
        }
        push(type, std::string(src.substr(i, len)), start_col);
        i += len;
        column += static_cast<int>(len);
    }
    if (!tokens.empty() && tokens.back().type != TokenType::Newline) push(TokenType::Newline, "\n", column);
    push(TokenType::End, "", column);
    return tokens;
}

} // namespace hintcoach::action
