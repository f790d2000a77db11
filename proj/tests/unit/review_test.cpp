// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "hintcoach/coach/round.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/review/filter.hpp"
#include "hintcoach/review/flagged.hpp"
#include "hintcoach/review/judge.hpp"
#include "hintcoach/review/rule.hpp"
#include "hintcoach/world/tools.hpp"
#include "run_fixture.hpp"

namespace hintcoach::review {
namespace {

Step step(const std::string& monologue, const std::string& code, const std::string& observation = "") {
    Step s;
    s.monologue = monologue;
    s.code = code;
    s.observation = observation;
    return s;
}

bool matches(const nlohmann::json& rule, const Step& s, const action::KindMap& prior = {}) {
    return RulePredicate::compile(rule).matches(s, prior);
}

TEST(Rule, TextPredicates) {
    auto s = step("I guess the answer", "print(1)", "NameError (line 1): name 'x' is not defined");
    EXPECT_TRUE(matches({{"target", "monologue"}, {"contains", "guess"}}, s));
    EXPECT_FALSE(matches({{"target", "code"}, {"contains", "guess"}}, s));
    EXPECT_TRUE(matches({{"target", "observation"}, {"regex", "^NameError"}}, s));
    EXPECT_TRUE(matches({{"any_of", {{{"target", "code"}, {"contains", "zzz"}}, {{"target", "code"}, {"contains", "print"}}}}}, s));
    EXPECT_FALSE(matches({{"all_of", {{{"target", "code"}, {"contains", "zzz"}}, {{"target", "code"}, {"contains", "print"}}}}}, s));
    EXPECT_TRUE(matches({{"not", {{"target", "code"}, {"contains", "zzz"}}}}, s));
}

TEST(Rule, CallPredicatesUseStaticKinds) {
    const auto& tools = world::tool_return_kinds();
    (void)tools;
    auto s = step("", "rows = data_filter(db, 'Origin=BUF')\nv = get_value(rows, 'DepTime')\ncomplete_task('r', v)");
    action::KindMap prior = {{"db", action::StaticKind::Table}};
    EXPECT_TRUE(matches({{"calls", "get_value"}}, s, prior));
    EXPECT_TRUE(matches({{"calls", "complete_task"}, {"args", 2}}, s, prior));
    EXPECT_FALSE(matches({{"calls", "complete_task"}, {"args", 1}}, s, prior));
    EXPECT_TRUE(matches({{"calls", "data_filter"}, {"arg", 0}, {"kind_is", "table"}}, s, prior));
    // Unknown kinds never satisfy a kind check.
    EXPECT_FALSE(matches({{"calls", "data_filter"}, {"arg", 0}, {"kind_is_not", "text"}}, s, {}));
    EXPECT_TRUE(matches({{"parse_fails", true}}, step("", "x = (")));
    EXPECT_FALSE(matches({{"parse_fails", true}}, s));
}

TEST(Rule, MalformedRulesAreConfigurationErrors) {
    EXPECT_THROW(RulePredicate::compile({{"target", "elsewhere"}, {"contains", "x"}}), ConfigurationError);
    EXPECT_THROW(RulePredicate::compile({{"target", "code"}, {"regex", "("}}), ConfigurationError);
    EXPECT_THROW(RulePredicate::compile({{"any_of", nlohmann::json::array()}}), ConfigurationError);
    EXPECT_THROW(RulePredicate::compile({{"calls", "x"}, {"arg", 0}}), ConfigurationError);
    EXPECT_THROW(RulePredicate::compile({{"whatever", 1}}), ConfigurationError);
}

TEST(Filters, ParseValidateAndSort) {
    nlohmann::json doc = {{"filters",
                           {{{"filter_id", "z-rule"}, {"kind", "rule"}, {"description", "d"},
                             {"rule", {{"target", "code"}, {"contains", "x"}}}},
                            {{"filter_id", "a-judge"}, {"kind", "llm-judge"}, {"description", "d"},
                             {"judge_prompt", "{description} {trajectory}"}, {"scope", {"yelp"}}}}}};
    auto filters = parse_filters(doc);
    ASSERT_EQ(filters.size(), 2u);
    EXPECT_EQ(filters[0].filter_id, "a-judge");
    EXPECT_TRUE(in_scope(filters[0], "yelp"));
    EXPECT_FALSE(in_scope(filters[0], "dblp"));
    EXPECT_TRUE(in_scope(filters[1], "dblp"));

    auto dup = doc;
    dup["filters"][1]["filter_id"] = "z-rule";
    EXPECT_THROW(parse_filters(dup), ValidationError);
    auto both = doc;
    both["filters"][0]["judge_prompt"] = "x";
    EXPECT_ANY_THROW(parse_filters(both));
}

TEST(Filters, RuleFilterEmitsOneFindingPerMatchingStep) {
    Trajectory t;
    t.trajectory_id = "t-000001";
    t.steps = {step("a", "db = load_db('flights')"), step("b", "print(db)"), step("c", "print(db)")};
    for (int i = 0; i < 3; ++i) t.steps[static_cast<std::size_t>(i)].index = i + 1;
    FilterSpec f;
    f.filter_id = "prints-table";
    f.description = "prints a whole table";
    f.rule = nlohmann::json{{"calls", "print"}, {"arg", 0}, {"kind_is", "table"}};
    auto findings = run_rule_filter(f, t, 2);
    ASSERT_EQ(findings.size(), 2u);
    EXPECT_EQ(findings[0].state, (StateRef{"t-000001", 2}));
    EXPECT_EQ(findings[1].state, (StateRef{"t-000001", 3}));
    EXPECT_EQ(findings[0].round_index, 2);
}

TEST(Judge, VerdictParsing) {
    EXPECT_EQ(parse_verdict("<reasoning>ok</reasoning><answer>true</answer>").kind, VerdictKind::Correct);
    auto v = parse_verdict("<reasoning>bad</reasoning>\n<answer> FALSE </answer>");
    EXPECT_EQ(v.kind, VerdictKind::Mistake);
    EXPECT_EQ(v.reasoning, "bad");
    EXPECT_EQ(parse_verdict("maybe").kind, VerdictKind::Unparseable);
    EXPECT_EQ(parse_verdict("<answer>perhaps</answer>").kind, VerdictKind::Unparseable);
}

TEST(Judge, PromptTemplatingAndLastStepSpan) {
    FilterSpec f;
    f.filter_id = "j";
    f.kind = FilterKind::LlmJudge;
    f.description = "guessing";
    f.judge_prompt = "Check for {description}.\n{trajectory}";
    EXPECT_EQ(render_judge_prompt(f, "T"), "Check for guessing.\nT");
    f.judge_prompt = "Check for {description}.";
    auto appended = render_judge_prompt(f, "T");
    EXPECT_TRUE(starts_with(appended, "Check for guessing."));
    EXPECT_TRUE(contains(appended, "T"));
}

class JudgeRunTest : public ::testing::Test {
protected:
    testkit::TempDir dir{"judge"};
    std::unique_ptr<coach::RunContext> ctx = testkit::make_run(dir.path());

    Trajectory marked_trajectory(const Task& task) {
        testkit::register_script(*ctx, "marked", testkit::marked_behavior(*ctx, {task.task_id}));
        agent::RunSpec s;
        s.task = task;
        s.model = ctx->require_model("marked");
        s.profile = coach::build_profile(ctx->hints(), task, coach::ProfileKind::None, 2);
        auto t = ctx->runtime().run_trajectory(s);
        t.trajectory_id = ctx->store().append(t);
        return t;
    }
};

TEST_F(JudgeRunTest, FlagsExactlyTheMarkedStep) {
    const auto& task = ctx->tasks().front();
    auto t = marked_trajectory(task);
    testkit::register_script(*ctx, "judge", testkit::marker_judge_behavior());
    auto filter = parse_filters(testkit::judge_filter_document("assumption")).front();
    auto scan = run_judge_filter(filter, t, task, ctx->gateway(), ctx->require_model("judge"), {}, 2);
    EXPECT_EQ(scan.requests, static_cast<int>(t.steps.size()));
    ASSERT_EQ(scan.findings.size(), 1u);
    EXPECT_EQ(scan.findings[0].state, (StateRef{t.trajectory_id, 1}));
    EXPECT_TRUE(scan.errors.empty());
}

TEST_F(JudgeRunTest, UnparseableTwiceRecordsAnError) {
    const auto& task = ctx->tasks().front();
    auto t = marked_trajectory(task);
    testkit::register_script(*ctx, "mumbler", {{"default", {{"response", "I am not sure."}}}});
    auto filter = parse_filters(testkit::judge_filter_document("assumption")).front();
    auto scan = run_judge_filter(filter, t, task, ctx->gateway(), ctx->require_model("mumbler"));
    EXPECT_TRUE(scan.findings.empty());
    EXPECT_EQ(scan.errors.size(), t.steps.size());
    EXPECT_EQ(scan.requests, static_cast<int>(2 * t.steps.size()));
}

TEST_F(JudgeRunTest, ReviewNeedsAGatewayForJudgeFilters) {
    auto t = marked_trajectory(ctx->tasks().front());
    auto filters = parse_filters(testkit::judge_filter_document("assumption"));
    EXPECT_THROW(review_trajectories(filters, {t}, ctx->task_map(), nullptr, {}), ConfigurationError);
}

MistakeFinding finding(const std::string& filter, const std::string& traj, int step) {
    MistakeFinding f;
    f.filter_id = filter;
    f.state = {traj, step};
    return f;
}

TEST(Flagged, CapPerFilterAndFirstFilterClaimsSharedStates) {
    std::vector<MistakeFinding> findings = {finding("b", "t-1", 1), finding("a", "t-1", 1), finding("a", "t-1", 2),
                                            finding("a", "t-2", 1), finding("b", "t-3", 1), finding("b", "t-3", 2)};
    auto set = collect_flagged_states(findings, 2);
    EXPECT_EQ(set.attribution.at({"t-1", 1}), "a");
    EXPECT_EQ(set.kept_per_filter.at("a"), 2);
    EXPECT_EQ(set.dropped_by_cap, 1);
    EXPECT_EQ(set.attribution.at({"t-3", 1}), "b");
    EXPECT_EQ(set.states.size(), 4u);

    auto ordered = collect_flagged_states(findings, 2, {"b", "a"});
    EXPECT_EQ(ordered.attribution.at({"t-1", 1}), "b");
}

TEST(Flagged, DedupeKeepsOnePerFilterAndState) {
    auto out = dedupe_findings({finding("a", "t-1", 1), finding("a", "t-1", 1), finding("b", "t-1", 1)});
    EXPECT_EQ(out.size(), 2u);
}

} // namespace
} // namespace hintcoach::review
