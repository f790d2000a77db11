// SPDX-License-Identifier: Apache-2.0
#include <memory>

#include "hintcoach/action/parser.hpp"

namespace hintcoach::action {

namespace {

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Program run(std::string_view source) {
        Program program;
        program.source = std::string(source);
        skip_newlines();
        while (peek().type != TokenType::End) {
            if (program.statements.size() == kMaxStatements) {
                throw SyntaxError(peek().line, count_remaining(program.statements.size()));
            }
            program.statements.push_back(statement());
            if (peek().type != TokenType::End) {
                expect(TokenType::Newline, {"newline", "operator"});
            }
            skip_newlines();
        }
        return program;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }

    const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    bool match(TokenType type) {
        if (peek().type != type) return false;
        advance();
        return true;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        std::string found = describe(t.type);
        if (t.type == TokenType::Identifier || t.type == TokenType::Number) found += " '" + t.text + "'";
        throw SyntaxError(t.line, t.column, found, std::move(expected));
    }

    const Token& expect(TokenType type, std::vector<std::string> expected) {
        if (peek().type != type) fail(std::move(expected));
        return advance();
    }

    void skip_newlines() {
        while (peek().type == TokenType::Newline) advance();
    }

    /// Counts statements in the whole cell, for the limit message.
    std::size_t count_remaining(std::size_t parsed) const {
        std::size_t extra = 0;
        bool in_statement = false;
        for (std::size_t i = pos_; i < tokens_.size(); ++i) {
            auto type = tokens_[i].type;
            if (type == TokenType::Newline || type == TokenType::End) {
                if (in_statement) ++extra;
                in_statement = false;
            } else {
                in_statement = true;
            }
        }
        return parsed + extra;
    }

    Statement statement() {
        Statement st;
        st.line = peek().line;
        if (peek().type == TokenType::Identifier && peek(1).type == TokenType::Assign) {
            st.kind = Statement::Kind::Assignment;
            st.name = advance().text;
            advance();
            st.expr = expression();
            return st;
        }
        st.expr = expression();
        if (st.expr->kind == Expr::Kind::Call && st.expr->text == "print") st.kind = Statement::Kind::Print;
        return st;
    }

    static std::shared_ptr<Expr> node(Expr::Kind kind, const Token& at) {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->line = at.line;
        e->column = at.column;
        return e;
    }

    static bool is_comparison(TokenType t) {
        return t == TokenType::Less || t == TokenType::LessEqual || t == TokenType::Greater ||
               t == TokenType::GreaterEqual || t == TokenType::EqualEqual || t == TokenType::NotEqual;
    }

    ExprPtr binary(const Token& op, ExprPtr lhs, ExprPtr rhs) {
        auto e = node(Expr::Kind::Binary, op);
        e->text = op.text;
        e->children = {std::move(lhs), std::move(rhs)};
        return e;
    }

    ExprPtr expression() {
        ExprPtr lhs = additive();
        while (is_comparison(peek().type)) {
            Token op = advance();
            lhs = binary(op, lhs, additive());
        }
        return lhs;
    }

    ExprPtr additive() {
        ExprPtr lhs = multiplicative();
        while (peek().type == TokenType::Plus || peek().type == TokenType::Minus) {
            Token op = advance();
            lhs = binary(op, lhs, multiplicative());
        }
        return lhs;
    }

    ExprPtr multiplicative() {
        ExprPtr lhs = unary();
        while (peek().type == TokenType::Star || peek().type == TokenType::Slash) {
            Token op = advance();
            lhs = binary(op, lhs, unary());
        }
        return lhs;
    }

    ExprPtr unary() {
        if (peek().type == TokenType::Minus) {
            Token op = advance();
            auto e = node(Expr::Kind::Unary, op);
            e->text = "-";
            e->children = {unary()};
            return e;
        }
        return postfix();
    }

    ExprPtr postfix() {
        ExprPtr base = primary();
        while (true) {
            if (peek().type == TokenType::LParen) {
                if (base->kind != Expr::Kind::Identifier) fail({"operator", "newline"});
                Token open = advance();
                auto call = node(Expr::Kind::Call, open);
                call->line = base->line;
                call->column = base->column;
                call->text = base->text;
                call->children = arguments(TokenType::RParen, "')'");
                base = call;
            } else if (peek().type == TokenType::LBracket) {
                Token open = advance();
                auto index = node(Expr::Kind::Index, open);
                ExprPtr key = expression();
                expect(TokenType::RBracket, {"']'", "operator"});
                index->children = {base, key};
                base = index;
            } else {
                return base;
            }
        }
    }

    std::vector<ExprPtr> arguments(TokenType close, const std::string& close_name) {
        std::vector<ExprPtr> args;
        if (match(close)) return args;
        while (true) {
            args.push_back(expression());
            if (match(close)) return args;
            expect(TokenType::Comma, {"','", close_name, "operator"});
            if (match(close)) return args;  // trailing comma
        }
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.type) {
        case TokenType::Number: {
            auto e = node(Expr::Kind::Number, t);
            e->number = t.number;
            advance();
            return e;
        }
        case TokenType::String: {
            auto e = node(Expr::Kind::String, t);
            e->text = t.text;
            advance();
            return e;
        }
        case TokenType::True:
        case TokenType::False: {
            auto e = node(Expr::Kind::Boolean, t);
            e->boolean = t.type == TokenType::True;
            advance();
            return e;
        }
        case TokenType::Identifier: {
            auto e = node(Expr::Kind::Identifier, t);
            e->text = t.text;
            advance();
            return e;
        }
        case TokenType::LBracket: {
            auto e = node(Expr::Kind::List, t);
            advance();
            e->children = arguments(TokenType::RBracket, "']'");
            return e;
        }
        case TokenType::LParen: {
            advance();
            ExprPtr inner = expression();
            expect(TokenType::RParen, {"')'", "operator"});
            return inner;
        }
        default: fail({"number", "string", "identifier", "'true'", "'false'", "'['", "'('", "'-'"});
        }
    }
};

} // namespace

Program parse(std::string_view source) {
    Parser parser(tokenize(source));
    return parser.run(source);
}

} // namespace hintcoach::action
