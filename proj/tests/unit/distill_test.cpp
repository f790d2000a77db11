// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hintcoach/coach/round.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/distill/balance.hpp"
#include "hintcoach/distill/dropout.hpp"
#include "hintcoach/distill/export.hpp"
#include "hintcoach/distill/harvest.hpp"
#include "hintcoach/distill/kl.hpp"
#include "balance_scenario.hpp"
#include "run_fixture.hpp"

namespace hintcoach::distill {
namespace {

using gateway::SectionSpan;
using gateway::TokenLogprob;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ChatMessage guidelines_message() {
    ChatMessage m;
    m.role = "user";
    m.content = "Guidelines:\n- A\n- B\n- C\nend";
    m.section_tags = {{"hint:h-0001", 12, 15}, {"hint:h-0002", 16, 19}, {"hint:h-0003", 20, 23}};
    return m;
}

TEST(Sections, DroppableNamesRespectTheToolDocFlag) {
    EXPECT_TRUE(is_droppable_section("hint:h-0001", false));
    EXPECT_FALSE(is_droppable_section("tool:load_db", false));
    EXPECT_TRUE(is_droppable_section("tool:load_db", true));
    EXPECT_FALSE(is_droppable_section("status", true));
    EXPECT_FALSE(is_droppable_section("hint", true));
}

TEST(Sections, RemovingOneSectionKeepsFramingAndSeparators) {
    std::vector<ChatMessage> msgs = {{"system", "You are an agent.", {}}, guidelines_message()};
    auto refs = droppable_sections(msgs, false);
    ASSERT_EQ(refs.size(), 3u);
    EXPECT_EQ(refs[0], (SectionRef{1, "hint:h-0001"}));

    auto first = remove_sections(msgs, {refs[0]});
    ASSERT_EQ(first.size(), 2u);
    EXPECT_EQ(first[1].content, "Guidelines:\n- B\n- C\nend");
    auto middle = remove_sections(msgs, {refs[1]});
    EXPECT_EQ(middle[1].content, "Guidelines:\n- A\n- C\nend");
    auto last = remove_sections(msgs, {refs[2]});
    EXPECT_EQ(last[1].content, "Guidelines:\n- A\n- B\nend");
    for (const auto& out : {first, middle, last}) {
        ASSERT_EQ(out[1].section_tags.size(), 2u);
        for (const auto& s : out[1].section_tags) {
            EXPECT_EQ(out[1].content.substr(s.begin, s.end - s.begin).substr(0, 2), "- ");
        }
        EXPECT_TRUE(is_student_derivable(msgs, out));
    }
}

TEST(Sections, RemovingAllSectionsDeletesTheMessage) {
    std::vector<ChatMessage> msgs = {{"system", "You are an agent.", {}}, guidelines_message()};
    auto out = remove_sections(msgs, droppable_sections(msgs, false));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].content, "You are an agent.");
    EXPECT_TRUE(is_student_derivable(msgs, out));
    EXPECT_EQ(removed_message_count(msgs, out), 1);
}

TEST(Sections, EditedTextIsNotDerivable) {
    std::vector<ChatMessage> msgs = {{"system", "You are an agent.", {}}, guidelines_message()};
    auto edited = msgs;
    edited[0].content = "You are a different agent.";
    EXPECT_FALSE(is_student_derivable(msgs, edited));
}

TEST(Dropout, KeepRateMatchesOneMinusP) {
    constexpr std::size_t kDraws = 10'000;
    auto mask = draw_keep_mask(kDraws, 0.9, 12345);
    ASSERT_EQ(mask.size(), kDraws);
    double kept = 0;
    for (bool k : mask) kept += k ? 1 : 0;
    const double rate = kept / kDraws;
    const double se = std::sqrt(0.1 * 0.9 / kDraws);
    EXPECT_NEAR(rate, 0.1, 3 * se);
    EXPECT_NEAR(rate, 0.1, 0.01);
}

TEST(Dropout, ExtremesAndDeterminism) {
    auto none = draw_keep_mask(100, 0.0, 1);
    auto all = draw_keep_mask(100, 1.0, 1);
    EXPECT_EQ(std::count(none.begin(), none.end(), true), 100);
    EXPECT_EQ(std::count(all.begin(), all.end(), true), 0);
    EXPECT_EQ(draw_keep_mask(50, 0.5, 9), draw_keep_mask(50, 0.5, 9));
    EXPECT_NE(dropout_stream_seed(3, "s", 0), dropout_stream_seed(3, "s", 1));
    EXPECT_EQ(dropout_stream_seed(3, "s", 2), derive_seed(3, "s#epoch=2"));
}

DistillSample guideline_sample() {
    DistillSample s;
    s.sample_id = "t-000001:1";
    s.task_id = "task";
    s.group = "flights";
    s.template_id = "tmpl";
    s.state = {"t-000001", 1};
    s.teacher_messages = {{"system", "You are an agent.", {}}, guidelines_message(), {"user", "Go.", {}}};
    s.action_text = "<inner_monologue>\nplan\n</inner_monologue>";
    s.hint_ids = {"h-0001", "h-0002", "h-0003"};
    return s;
}

TEST(Dropout, ApplyRespectsP) {
    auto keep = guideline_sample();
    apply_hint_dropout(keep, {0.0, false, 5});
    EXPECT_EQ(keep.student_messages, keep.teacher_messages);
    EXPECT_EQ(keep.dropout_mask, (std::vector<bool>{true, true, true}));

    auto drop = guideline_sample();
    apply_hint_dropout(drop, {1.0, false, 5});
    ASSERT_EQ(drop.student_messages.size(), 2u);
    for (const auto& m : drop.student_messages)
        for (const auto& span : m.section_tags) EXPECT_FALSE(starts_with(span.name, "hint:"));
    EXPECT_TRUE(is_student_derivable(drop.teacher_messages, drop.student_messages));

    auto bad = guideline_sample();
    EXPECT_THROW(apply_hint_dropout(bad, {1.5, false, 5}), ValidationError);
}

TEST(Dropout, MasksVaryAcrossEpochs) {
    std::set<std::vector<bool>> seen;
    for (int epoch = 0; epoch < 16; ++epoch) {
        auto s = guideline_sample();
        apply_hint_dropout(s, {0.5, false, 77}, epoch);
        EXPECT_EQ(s.dropout_seed, 77u);
        EXPECT_EQ(s.dropout_mask, draw_keep_mask(3, 0.5, dropout_stream_seed(77, s.sample_id, epoch)));
        seen.insert(s.dropout_mask);
    }
    EXPECT_GT(seen.size(), 1u);
}

TEST(Kl, ClosedFormTwoTokenExample) {
    TokenLogprob teacher{"a", std::log(0.9), {{"a", std::log(0.9)}, {"b", std::log(0.1)}}};
    TokenLogprob student{"a", std::log(0.5), {{"a", std::log(0.5)}, {"b", std::log(0.5)}}};
    const double expected = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
    EXPECT_NEAR(token_kl(teacher, student), expected, 1e-12);
    EXPECT_NEAR(token_kl(teacher, student), 0.368, 1e-3);
    EXPECT_NEAR(token_kl(teacher, teacher), 0.0, 1e-12);

    auto r = diagnostic_kl(std::vector<TokenLogprob>{teacher, teacher}, std::vector<TokenLogprob>{student, teacher});
    ASSERT_EQ(r.per_token.size(), 2u);
    EXPECT_NEAR(r.mean, expected / 2, 1e-12);
}

TEST(Kl, NonNegativeOnRandomPairs) {
    SplitMix64 rng(4);
    for (int i = 0; i < 500; ++i) {
        TokenLogprob t{"x", 0, {}};
        TokenLogprob s{"x", 0, {}};
        for (const char* tok : {"x", "y", "z", "w"}) {
            t.top_k.emplace_back(tok, std::log(rng.uniform01() + 1e-6));
            s.top_k.emplace_back(tok, std::log(rng.uniform01() + 1e-6));
        }
        t.logprob = t.top_k.front().second;
        s.logprob = s.top_k.front().second;
        EXPECT_GE(token_kl(t, s), -1e-9);
    }
}

TEST(Kl, MisalignedSequencesRaise) {
    TokenLogprob a{"a", 0, {}};
    TokenLogprob b{"b", 0, {}};
    EXPECT_THROW(diagnostic_kl(std::vector<TokenLogprob>{a}, std::vector<TokenLogprob>{a, a}), AlignmentError);
    EXPECT_THROW(diagnostic_kl(std::vector<TokenLogprob>{a}, std::vector<TokenLogprob>{b}), AlignmentError);
}

class DistillRunTest : public ::testing::Test {
protected:
    testkit::TempDir dir{"distill"};
    std::unique_ptr<coach::RunContext> ctx = testkit::make_run(dir.path());

    Trajectory rollout(const std::string& task_id, coach::ProfileKind kind, const std::string& id,
                       std::uint64_t seed = 1) {
        const auto& task = ctx->task(task_id);
        agent::RunSpec spec;
        spec.task = task;
        spec.model = ctx->require_model("base");
        spec.profile = coach::build_profile(ctx->hints(), task, kind, 1);
        spec.seed = seed;
        auto t = ctx->runtime().run_trajectory(spec);
        t.trajectory_id = id;
        return t;
    }

    std::vector<std::string> tasks_of(const std::string& template_id) const {
        std::vector<std::string> out;
        for (const auto& t : ctx->tasks())
            if (t.template_id == template_id) out.push_back(t.task_id);
        std::sort(out.begin(), out.end());
        return out;
    }
};

TEST_F(DistillRunTest, HarvestYieldsOneSamplePerStep) {
    auto ids = testkit::pick_tasks(*ctx, 4);
    std::vector<Trajectory> ts;
    std::size_t steps = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ts.push_back(rollout(ids[i], coach::ProfileKind::Initial, "t-00000" + std::to_string(i + 1)));
        steps += ts.back().steps.size();
    }
    ts.push_back(rollout(ids[0], coach::ProfileKind::None, "t-000009"));

    HarvestOptions opts;
    opts.dropout = {0.9, false, 3};
    auto r = harvest_trajectories(ts, ctx->task_map(), opts);
    EXPECT_EQ(r.samples.size(), steps);
    ASSERT_EQ(r.skipped.size(), 1u);
    EXPECT_EQ(r.skipped[0].trajectory_id, "t-000009");
    for (const auto& s : r.samples) {
        EXPECT_EQ(s.source, SampleSource::Rollout);
        EXPECT_FALSE(s.hint_ids.empty());
        EXPECT_TRUE(is_student_derivable(s.teacher_messages, s.student_messages)) << s.sample_id;
        EXPECT_EQ(s.teacher_messages.back().role, "user");
        EXPECT_NO_THROW(validate(s));
    }
    EXPECT_EQ(r.samples.front().sample_id, "t-000001:1");
}

TEST_F(DistillRunTest, CorrectiveSamplesDropExactlyTheHintMessage) {
    const auto task_id = testkit::pick_tasks(*ctx, 1).front();
    auto t = rollout(task_id, coach::ProfileKind::None, "t-000001");
    hints::HintSection hint;
    hint.hint_id = "h-0042";
    hint.kind = hints::HintKind::Corrective;
    hint.text = "Check the column names before filtering.";
    hint.filter_id = "f";
    hint.round_introduced = 2;
    auto injected =
        ctx->runtime().inject_hint_and_continue(t, ctx->task(task_id), 1, hint, ctx->require_model("base"), {}, 3, 0);
    ASSERT_EQ(injected.samples.size(), 3u);

    auto samples = harvest_corrective(injected.samples, {{t.trajectory_id, t}}, ctx->task_map(), 2);
    ASSERT_EQ(samples.size(), 3u);
    for (const auto& s : samples) {
        EXPECT_EQ(s.source, SampleSource::Corrective);
        EXPECT_EQ(removed_message_count(s.teacher_messages, s.student_messages), 1) << s.sample_id;
        EXPECT_EQ(s.teacher_messages.size(), s.student_messages.size() + 1);
        int hint_messages = 0;
        for (const auto& m : s.teacher_messages)
            for (const auto& span : m.section_tags) hint_messages += span.name == "hint" ? 1 : 0;
        EXPECT_EQ(hint_messages, 1);
        for (const auto& m : s.student_messages) {
            EXPECT_FALSE(contains(m.content, hint.text));
            for (const auto& span : m.section_tags) EXPECT_NE(span.name, "hint");
        }
        EXPECT_TRUE(contains(s.sample_id, "h-0042"));
    }
}

DistillSample corrected_sample(const Task& task, int n) {
    DistillSample s;
    s.sample_id = task.task_id + ":c" + std::to_string(n);
    s.task_id = task.task_id;
    s.group = task.group;
    s.template_id = task.template_id;
    s.source = SampleSource::Corrective;
    return s;
}

TEST_F(DistillRunTest, BalancingRunsThreePassesInOrder) {
    auto sc = testkit::make_balance_scenario(*ctx);
    auto r = balance_dataset(sc.corrected, sc.candidates, ctx->task_map(), sc.config);
    EXPECT_EQ(testkit::check_balance(sc, r), "");
    // Coffee and flights cannot reach 1000 samples from three candidates each.
    EXPECT_EQ(r.warnings.size(), 2u);

    auto again = balance_dataset(sc.corrected, sc.candidates, ctx->task_map(), sc.config);
    EXPECT_EQ(again.selected, r.selected);
    EXPECT_EQ(again.samples, r.samples);

    // Input order does not matter.
    auto reversed = sc.candidates;
    std::reverse(reversed.begin(), reversed.end());
    EXPECT_EQ(balance_dataset(sc.corrected, reversed, ctx->task_map(), sc.config).selected, r.selected);

    sc.config.retention_quota = 5;
    auto greedy = balance_dataset(sc.corrected, sc.candidates, ctx->task_map(), sc.config);
    EXPECT_EQ(greedy.selected.size(), 8u);
    EXPECT_EQ(greedy.warnings.size(), 3u);
}

TEST_F(DistillRunTest, DefaultGroupFloorIsTheLargestCorrectedGroup) {
    auto coffee = tasks_of("coffee_range");
    auto flights = tasks_of("flights_extra_minutes");
    std::vector<DistillSample> corrected;
    for (int i = 0; i < 3; ++i) corrected.push_back(corrected_sample(ctx->task(flights[0]), i));
    std::vector<Trajectory> candidates = {rollout(coffee[0], coach::ProfileKind::Initial, "cand-01"),
                                          rollout(coffee[1], coach::ProfileKind::Initial, "cand-02")};
    BalanceConfig cfg;
    cfg.failure_priority = {{coffee[1], 4}};
    auto r = balance_dataset(corrected, candidates, ctx->task_map(), cfg);
    ASSERT_FALSE(r.selected.empty());
    EXPECT_EQ(r.selected.front().trajectory_id, "cand-02");
    int coffee_samples = 0;
    for (const auto& s : r.samples) coffee_samples += s.group == "coffee" ? 1 : 0;
    EXPECT_GE(coffee_samples, std::min<int>(3, static_cast<int>(candidates[0].steps.size() + candidates[1].steps.size())));
}

TEST_F(DistillRunTest, DisabledBalancingPassesThrough) {
    std::vector<DistillSample> corrected = {corrected_sample(ctx->tasks().front(), 0)};
    std::vector<Trajectory> candidates = {rollout(ctx->tasks().back().task_id, coach::ProfileKind::Initial, "c")};
    BalanceConfig cfg;
    cfg.enabled = false;
    cfg.per_template_floor = 10;
    auto r = balance_dataset(corrected, candidates, ctx->task_map(), cfg);
    EXPECT_EQ(r.samples, corrected);
    EXPECT_TRUE(r.selected.empty());
}

TEST_F(DistillRunTest, ExportIsByteIdenticalAndRoundTrips) {
    auto ids = testkit::pick_tasks(*ctx, 5);
    std::vector<Trajectory> ts;
    for (std::size_t i = 0; i < ids.size(); ++i)
        ts.push_back(rollout(ids[i], coach::ProfileKind::Initial, "t-00000" + std::to_string(i + 1)));
    HarvestOptions ho;
    ho.dropout = {0.9, false, 2};
    auto samples = harvest_trajectories(ts, ctx->task_map(), ho).samples;
    ASSERT_GE(samples.size(), 5u);

    ExportOptions eo;
    eo.dataset_id = "ds-test";
    eo.valid_count = 2;
    eo.seed = 4;
    eo.dropout = ho.dropout;
    auto a = export_dataset(samples, dir.path() / "a", eo);
    auto b = export_dataset(samples, dir.path() / "b", eo);
    EXPECT_EQ(a, b);
    for (const char* f : {"train.jsonl", "valid.jsonl", "manifest.json"}) {
        EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;
    }
    EXPECT_EQ(a.total, static_cast<int>(samples.size()));
    EXPECT_EQ(a.valid_count, 2);
    EXPECT_EQ(a.train_count + a.valid_count, a.total);

    auto chosen = choose_validation(samples, 2, 4);
    auto loaded = load_dataset(dir.path() / "a");
    EXPECT_EQ(loaded.manifest, a);
    ASSERT_EQ(loaded.valid.size(), 2u);
    std::set<std::string> valid_ids;
    for (const auto& line : loaded.valid) valid_ids.insert(line.at("sample_id").get<std::string>());
    EXPECT_EQ(valid_ids, std::set<std::string>(chosen.begin(), chosen.end()));
    for (const auto& line : loaded.train) {
        EXPECT_TRUE(line.contains("teacher_messages"));
        EXPECT_TRUE(line.contains("student_messages"));
        EXPECT_TRUE(line.contains("action_text"));
    }
}

TEST_F(DistillRunTest, CrossEntropyExportRejectsFailedSources) {
    auto t = rollout(testkit::pick_tasks(*ctx, 1).front(), coach::ProfileKind::Initial, "t-000001");
    auto samples = harvest_trajectories({t}, ctx->task_map(), {}).samples;
    ASSERT_FALSE(samples.empty());
    ExportOptions eo;
    eo.dataset_id = "ce";
    eo.mode = TrainMode::CrossEntropy;
    eo.valid_count = 0;
    auto ok = export_dataset(samples, dir.path() / "ce", eo);
    EXPECT_EQ(ok.mode, TrainMode::CrossEntropy);
    auto loaded = load_dataset(dir.path() / "ce");
    for (const auto& line : loaded.train) EXPECT_FALSE(line.contains("teacher_messages"));

    samples.back().source_success = false;
    try {
        export_dataset(samples, dir.path() / "ce2", eo);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_TRUE(contains(e.what(), samples.back().sample_id));
    }
}

} // namespace
} // namespace hintcoach::distill
