// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/action/interpreter.hpp"

#include <fmt/format.h>

#include "hintcoach/action/builtins.hpp"
#include "hintcoach/action/parser.hpp"

namespace hintcoach::action {

std::string error_kind_label(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return "SyntaxError";
    case ErrorKind::NameNotFound: return "NameError";
    case ErrorKind::TypeMismatch: return "TypeError";
    case ErrorKind::ToolError: return "ToolError";
    case ErrorKind::LimitExceeded: return "LimitError";
    }
    return "Error";
}

Value EmptyRegistry::call(const std::string& name, const std::vector<Value>&, ToolContext&) {
    throw ToolFailure("unknown tool '" + name + "'");
}

std::size_t utf8_length(std::string_view text) {
    std::size_t n = 0;
    for (char c : text) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::string truncate_observation(std::string text, std::size_t max_chars) {
    std::size_t chars = 0;
    for (std::size_t b = 0; b < text.size(); ++b) {
        if ((static_cast<unsigned char>(text[b]) & 0xC0) == 0x80) continue;
        if (chars == max_chars) {
            text.resize(b);
            text += kTruncationSuffix;
            return text;
        }
        ++chars;
    }
    return text;
}

namespace {

/// Internal signal carrying a classified error out of expression evaluation.
struct CellFailure {
    CellError error;
};

class Evaluator {
public:
    Evaluator(Environment& env, ToolRegistry& tools, std::string& output) : env_(env), tools_(tools), output_(output) {}

    bool halted() const { return halted_; }

    Value eval(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Number: return Value::number(e.number);
        case Expr::Kind::String: return Value::text(e.text);
        case Expr::Kind::Boolean: return Value::boolean(e.boolean);
        case Expr::Kind::Identifier: {
            auto it = env_.find(e.text);
            if (it == env_.end()) {
                fail(ErrorKind::NameNotFound, e.line, fmt::format("name '{}' is not defined", e.text));
            }
            return it->second;
        }
        case Expr::Kind::List: {
            List items;
            items.reserve(e.children.size());
            for (const auto& child : e.children) items.push_back(eval(*child));
            return guarded(e.line, [&] {
                Value v = Value::list(std::move(items));
                check_limits(v);
                return v;
            });
        }
        case Expr::Kind::Index: {
            Value target = eval(*e.children[0]);
            Value index = eval(*e.children[1]);
            return guarded(e.line, [&] { return apply_index(target, index); });
        }
        case Expr::Kind::Unary: {
            Value operand = eval(*e.children[0]);
            return guarded(e.line, [&] { return apply_negate(operand); });
        }
        case Expr::Kind::Binary: {
            Value lhs = eval(*e.children[0]);
            Value rhs = eval(*e.children[1]);
            return guarded(e.line, [&] { return apply_binary(e.text, lhs, rhs); });
        }
        case Expr::Kind::Call: return call(e);
        }
        return Value::unit();
    }

    [[noreturn]] static void fail(ErrorKind kind, int line, const std::string& message, std::string tool = {}) {
        CellError err;
        err.kind = kind;
        err.line = line;
        err.tool_name = std::move(tool);
        err.message = fmt::format("{} (line {}): {}", error_kind_label(kind), line, message);
        throw CellFailure{std::move(err)};
    }

private:
    Environment& env_;
    ToolRegistry& tools_;
    std::string& output_;
    bool halted_ = false;

    template <typename F>
    Value guarded(int line, F&& fn) {
        try {
            return fn();
        } catch (const TypeMismatch& ex) {
            fail(ErrorKind::TypeMismatch, line, ex.what());
        } catch (const LimitExceeded& ex) {
            fail(ErrorKind::LimitExceeded, line, ex.what());
        }
    }

    Value call(const Expr& e) {
        std::vector<Value> args;
        args.reserve(e.children.size());
        for (const auto& child : e.children) args.push_back(eval(*child));

        if (e.text == "print") {
            std::string line;
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (i > 0) line += " ";
                line += to_display(args[i]);
            }
            output_ += line;
            output_ += "\n";
            return Value::unit();
        }
        if (is_builtin(e.text)) return guarded(e.line, [&] { return call_builtin(e.text, args); });
        if (!tools_.has(e.text)) fail(ErrorKind::ToolError, e.line, "unknown tool '" + e.text + "'", e.text);

        ToolContext ctx;
        Value result;
        try {
            result = tools_.call(e.text, args, ctx);
            check_limits(result);
        } catch (const ToolFailure& ex) {
            output_ += ctx.output;
            fail(ErrorKind::ToolError, e.line, e.text + ": " + ex.what(), e.text);
        } catch (const TypeMismatch& ex) {
            output_ += ctx.output;
            fail(ErrorKind::TypeMismatch, e.line, e.text + ": " + ex.what(), e.text);
        } catch (const LimitExceeded& ex) {
            output_ += ctx.output;
            fail(ErrorKind::LimitExceeded, e.line, e.text + ": " + ex.what(), e.text);
        } catch (const std::exception& ex) {
            output_ += ctx.output;
            fail(ErrorKind::ToolError, e.line, e.text + ": " + ex.what(), e.text);
        }
        output_ += ctx.output;
        if (ctx.halt) halted_ = true;
        return result;
    }
};

std::string parse_error_text(const SyntaxError& ex) {
    std::string what = ex.what();
    if (ex.is_limit()) return fmt::format("LimitError (line {}): {}", ex.line(), what.substr(what.find(": ") + 2));
    auto colon = what.find(": ");
    std::string detail = colon == std::string::npos ? what : what.substr(colon + 2);
    return fmt::format("SyntaxError (line {}, column {}): {}", ex.line(), ex.column(), detail);
}

CellResult finish(std::string output, std::optional<CellError> error, Environment delta, bool halted,
                  std::size_t max_chars) {
    CellResult result;
    if (error) {
        output += error->message;
        output += "\n";
    }
    result.observation = truncate_observation(std::move(output), max_chars);
    result.error = std::move(error);
    result.bindings_delta = std::move(delta);
    result.halted = halted;
    return result;
}

} // namespace

CellResult execute_program(const Program& program, Environment& env, ToolRegistry& tools, std::size_t max_chars) {
    std::string output;
    Environment delta;
    Evaluator evaluator(env, tools, output);
    if (program.statements.size() > kMaxStatements) {
        CellError err;
        err.kind = ErrorKind::LimitExceeded;
        err.line = program.statements[kMaxStatements].line;
        err.message = fmt::format("LimitError (line {}): cell has {} statements; the limit is {}", err.line,
                                  program.statements.size(), kMaxStatements);
        return finish(std::move(output), std::move(err), std::move(delta), false, max_chars);
    }
    for (const auto& st : program.statements) {
        try {
            Value v = evaluator.eval(*st.expr);
            if (st.kind == Statement::Kind::Assignment) {
                env[st.name] = v;
                delta[st.name] = std::move(v);
            }
        } catch (const CellFailure& failure) {
            return finish(std::move(output), failure.error, std::move(delta), false, max_chars);
        }
        if (evaluator.halted()) return finish(std::move(output), std::nullopt, std::move(delta), true, max_chars);
    }
    return finish(std::move(output), std::nullopt, std::move(delta), false, max_chars);
}

CellResult execute_cell(const std::string& code, Environment& env, ToolRegistry& tools, std::size_t max_chars) {
    Program program;
    try {
        program = parse(code);
    } catch (const SyntaxError& ex) {
        CellError err;
        err.kind = ex.is_limit() ? ErrorKind::LimitExceeded : ErrorKind::Parse;
        err.line = ex.line();
        err.message = parse_error_text(ex);
        return finish({}, std::move(err), {}, false, max_chars);
    }
    return execute_program(program, env, tools, max_chars);
}

} // namespace hintcoach::action
