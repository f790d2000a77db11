// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

namespace hintcoach::action {

inline constexpr std::size_t kMaxStatements = 32;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Number, String, Boolean, Identifier, Call, List, Index, Binary, Unary };

    Kind kind = Kind::Number;
    int line = 1;
    int column = 1;
    double number = 0.0;
    bool boolean = false;
    /// String literal body, identifier name, callee name, or operator symbol.
    std::string text;
    /// Call arguments, list elements, {lhs, rhs}, {target, index} or {operand}.
    std::vector<ExprPtr> children;
};

struct Statement {
    enum class Kind { Assignment, Expression, Print };

    Kind kind = Kind::Expression;
    int line = 1;
    std::string name;  // assignment target
    /// The assigned or evaluated expression. For Print, the print call itself.
    ExprPtr expr;
};

struct Program {
    std::vector<Statement> statements;
    std::string source;
};

} // namespace hintcoach::action
