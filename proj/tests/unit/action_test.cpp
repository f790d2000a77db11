// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "hintcoach/action/builtins.hpp"
#include "hintcoach/action/interpreter.hpp"
#include "hintcoach/action/parser.hpp"
#include "hintcoach/action/static_kind.hpp"
#include "hintcoach/core/text.hpp"
#include "program_gen.hpp"

namespace hintcoach::action {
namespace {

CellResult run(const std::string& code) {
    Environment env;
    EmptyRegistry tools;
    return execute_cell(code, env, tools);
}

std::string repeat_statements(int n) {
    std::string code;
    for (int i = 0; i < n; ++i) code += "x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
    return code;
}

TEST(Lexer, TracksLinesAndDropsNewlinesInsideBrackets) {
    auto tokens = tokenize("x = [1,\n 2]\ny = 'a'");
    int newlines = 0;
    for (const auto& t : tokens) newlines += t.type == TokenType::Newline;
    EXPECT_EQ(newlines, 2);
    EXPECT_EQ(tokens.back().type, TokenType::End);
    EXPECT_THROW(tokenize("s = 'open"), SyntaxError);
    EXPECT_THROW(tokenize("a = 1 $ 2"), SyntaxError);
}

TEST(Parser, PrecedenceFollowsArithmetic) {
    auto r = run("print(1 + 2 * 3)\nprint((1 + 2) * 3)\nprint(-2 * 3)\nprint(10 / 4)");
    EXPECT_FALSE(r.error);
    EXPECT_EQ(r.observation, "7\n9\n-6\n2.5\n");
}

TEST(Parser, ReportsPositionAndExpectedTokens) {
    try {
        parse("x = (1 + \n");
        FAIL() << "expected a syntax error";
    } catch (const SyntaxError& e) {
        EXPECT_FALSE(e.is_limit());
        EXPECT_GE(e.line(), 1);
        EXPECT_FALSE(e.expected().empty());
    }
}

TEST(Limits, ThirtyTwoStatementsRunAndThirtyThreeAreRejected) {
    EXPECT_NO_THROW(parse(repeat_statements(static_cast<int>(kMaxStatements))));
    try {
        parse(repeat_statements(static_cast<int>(kMaxStatements) + 1));
        FAIL() << "expected the statement cap to trigger";
    } catch (const SyntaxError& e) {
        EXPECT_TRUE(e.is_limit());
    }
    auto r = run(repeat_statements(33));
    ASSERT_TRUE(r.error);
    EXPECT_EQ(r.error->kind, ErrorKind::LimitExceeded);
    EXPECT_TRUE(r.bindings_delta.empty()) << "a rejected cell must not run any statement";
}

TEST(Limits, ObservationTruncatesAtBoundWithSuffix) {
    auto r = run("print(join('', split('" + std::string(3000, 'a') + "', 'b')) + '" + std::string(3000, 'c') + "')");
    ASSERT_FALSE(r.error) << r.observation;
    EXPECT_EQ(utf8_length(r.observation), kMaxObservationChars + utf8_length(kTruncationSuffix));
    EXPECT_TRUE(ends_with(r.observation, kTruncationSuffix));

    std::string exact(kMaxObservationChars, 'z');
    EXPECT_EQ(truncate_observation(exact), exact);
    // Multi-byte characters count once.
    std::string wide;
    for (int i = 0; i < 5000; ++i) wide += "é";
    EXPECT_EQ(utf8_length(truncate_observation(wide)), kMaxObservationChars + utf8_length(kTruncationSuffix));
}

TEST(Interpreter, NameErrorsKeepEarlierOutput) {
    auto r = run("print('before')\nprint(missing)\nprint('after')");
    ASSERT_TRUE(r.error);
    EXPECT_EQ(r.error->kind, ErrorKind::NameNotFound);
    EXPECT_EQ(r.error->line, 2);
    EXPECT_TRUE(starts_with(r.observation, "before\n"));
    EXPECT_FALSE(contains(r.observation, "after"));
    EXPECT_TRUE(contains(r.observation, "NameError (line 2)"));
}

TEST(Interpreter, TypeErrorsAreClassified) {
    auto r = run("x = 'a' - 1");
    ASSERT_TRUE(r.error);
    EXPECT_EQ(r.error->kind, ErrorKind::TypeMismatch);
}

TEST(Interpreter, BindingsPersistAcrossCells) {
    Environment env;
    EmptyRegistry tools;
    execute_cell("total = sum([1, 2, 3])", env, tools);
    auto r = execute_cell("print(total * 2)", env, tools);
    EXPECT_EQ(r.observation, "12\n");
}

TEST(Interpreter, UnknownToolIsAToolError) {
    auto r = run("load_db('flights')");
    ASSERT_TRUE(r.error);
    EXPECT_EQ(r.error->kind, ErrorKind::ToolError);
    EXPECT_EQ(r.error->tool_name, "load_db");
}

TEST(Builtins, NumberFormattingAndRounding) {
    EXPECT_EQ(format_number(3.0), "3");
    EXPECT_EQ(format_number(2.5), "2.5");
    EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
    // Half away from zero on the decimal form: 2.675 stays 2.68, unlike binary rounding.
    EXPECT_DOUBLE_EQ(round_decimal(2.675, 2), 2.68);
    EXPECT_DOUBLE_EQ(round_decimal(-0.5, 0), -1.0);
    EXPECT_DOUBLE_EQ(round_decimal(1.25, 1), 1.3);
}

TEST(Builtins, StrictNumberParsing) {
    EXPECT_EQ(parse_number(" 12.5 "), 12.5);
    EXPECT_EQ(parse_number("-3e2"), -300.0);
    EXPECT_FALSE(parse_number("12abc"));
    EXPECT_FALSE(parse_number("inf"));
    EXPECT_FALSE(parse_number("0x10"));
    EXPECT_FALSE(parse_number(""));
}

TEST(Builtins, TextAndListHelpers) {
    auto r = run("print(split('a, b, c', ', '))\nprint(join('-', ['x', 'y']))\nprint(len('abc'))\n"
                 "print(sort([3, 1, 2]))\nprint(unique([1, 1, 2]))\nprint(max([4, 9, 2]))\nprint(to_text(5))\n"
                 "print(contains('haystack', 'st'))\nprint(to_numbers(split('1, 2, 3', ', ')))\nx = unique(['a', 'b', 'a'])\nprint(join(', ', x))");
    ASSERT_FALSE(r.error) << r.observation;
    EXPECT_EQ(r.observation, "['a', 'b', 'c']\nx-y\n3\n[1, 2, 3]\n[1, 2]\n9\n5\nTrue\n[1, 2, 3]\na, b\n");
}

TEST(Builtins, AllDocumentedNamesExist) {
    for (const auto& name : builtin_names()) EXPECT_TRUE(is_builtin(name)) << name;
    EXPECT_FALSE(is_builtin("open"));
}

TEST(StaticKind, InfersBindingsFromToolReturnKinds) {
    KindMap tools = {{"load_db", StaticKind::Table}, {"get_value", StaticKind::Text}};
    auto s = analyze_cell("db = load_db('flights')\nv = get_value(db, 'x')\nn = to_number(v)", {}, tools);
    ASSERT_TRUE(s.parsed);
    EXPECT_EQ(s.bindings.at("db"), StaticKind::Table);
    EXPECT_EQ(s.bindings.at("v"), StaticKind::Text);
    EXPECT_EQ(s.bindings.at("n"), StaticKind::Number);
    ASSERT_GE(s.calls.size(), 3u);
    EXPECT_EQ(s.calls[1].name, "get_value");
    EXPECT_EQ(s.calls[1].args.front(), StaticKind::Table);
    EXPECT_FALSE(analyze_cell("x = (").parsed);
}

TEST(Determinism, RandomProgramsGiveIdenticalResultsTwice) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto code = testkit::random_program(seed);
        auto a = run(code);
        auto b = run(code);
        ASSERT_EQ(a.observation, b.observation) << code;
        ASSERT_EQ(a.error.has_value(), b.error.has_value()) << code;
        if (a.error) ASSERT_EQ(a.error->message, b.error->message) << code;
        ASSERT_EQ(a.bindings_delta, b.bindings_delta) << code;
    }
}

} // namespace
} // namespace hintcoach::action
