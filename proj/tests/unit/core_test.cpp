// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/normalize.hpp"
#include "hintcoach/core/parallel.hpp"
#include "hintcoach/core/store.hpp"
#include "hintcoach/core/text.hpp"
#include "run_fixture.hpp"

namespace hintcoach {
namespace {

TEST(Text, Fnv1aMatchesPublishedVectors) {
    // Reference values of the 64-bit FNV-1a hash.
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Text, SplitMixMatchesReferenceSequence) {
    // First outputs of the reference SplitMix64 generator seeded with 0.
    SplitMix64 rng(0);
    EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(Text, UniformAndBelowStayInRange) {
    SplitMix64 rng(42);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(rng.below(7), 7u);
    }
}

TEST(Text, ShuffleIsAPermutationAndSeeded) {
    std::vector<int> a(50), b(50);
    for (int i = 0; i < 50; ++i) a[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] = i;
    SplitMix64 r1(5), r2(5);
    r1.shuffle(a);
    r2.shuffle(b);
    EXPECT_EQ(a, b);
    std::set<int> seen(a.begin(), a.end());
    EXPECT_EQ(seen.size(), 50u);
}

TEST(Text, DeriveSeedSeparatesTags) {
    EXPECT_EQ(derive_seed(1, "x"), derive_seed(1, "x"));
    EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
    EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
}

TEST(Text, StringHelpers) {
    EXPECT_EQ(trim("  a b \n"), "a b");
    EXPECT_EQ(split("a; b; c", "; "), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(join({"a", "b"}, ", "), "a, b");
    EXPECT_EQ(replace_all("aXbXc", "X", "--"), "a--b--c");
    EXPECT_EQ(to_lower("AbC"), "abc");
    EXPECT_TRUE(starts_with("hello", "he"));
    EXPECT_TRUE(contains("hello", "ll"));
}

TEST(Normalize, CollapsesWhitespaceAndKeepsCase) {
    EXPECT_EQ(normalize_answer("  12  34\n"), "12 34");
    EXPECT_NE(normalize_answer("Boston"), normalize_answer("boston"));
    EXPECT_EQ(normalize_answer("Boston", {false}), normalize_answer("boston", {false}));
}

TEST(Normalize, ScoresOnlyCompletedTrajectories) {
    Task task;
    task.task_id = "x-001";
    task.expected_answer = "42";
    Trajectory t;
    t.task_id = "x-001";
    t.outcome = Outcome::completed("done", " 42 ");
    EXPECT_TRUE(score_trajectory(t, task));
    t.outcome = Outcome::step_limit();
    EXPECT_FALSE(score_trajectory(t, task));
}

TEST(Types, CountsCompleteTaskCalls) {
    EXPECT_EQ(count_complete_task_calls("x = 1\ncomplete_task('r', 'a')"), 1);
    EXPECT_EQ(count_complete_task_calls("print(1)"), 0);
}

TEST(Parallel, KeepsOrderAndPropagatesErrors) {
    auto out = parallel_map(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
    EXPECT_THROW(parallel_map(10, 3,
                              [](std::size_t i) -> int {
                                  if (i == 7) throw ValidationError("i", "boom");
                                  return 0;
                              }),
                 ValidationError);
}

Trajectory sample_trajectory(const std::string& task_id, int steps) {
    Trajectory t;
    t.task_id = task_id;
    t.model_tag = "base";
    t.project_start = "2025-01-10 20:10:23";
    for (int i = 1; i <= steps; ++i) {
        Step s;
        s.index = i;
        s.monologue = "think " + std::to_string(i);
        s.code = "print(" + std::to_string(i) + ")";
        s.observation = std::to_string(i);
        s.status.step_number = i;
        t.steps.push_back(s);
    }
    t.steps.back().code = "complete_task('r', 'a')";
    t.outcome = Outcome::completed("r", "a");
    t.success = Success::Succeeded;
    return t;
}

TEST(Store, AssignsSequentialIdsAndRoundTrips) {
    testkit::TempDir dir("store");
    RunStore store(dir.path());
    auto id1 = store.append(sample_trajectory("a-001", 2));
    auto id2 = store.append(sample_trajectory("b-001", 3));
    EXPECT_EQ(id1, "t-000001");
    EXPECT_EQ(id2, "t-000002");

    RunStore reopened(dir.path());
    auto all = reopened.trajectories();
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[1].steps.size(), 3u);
    EXPECT_EQ(reopened.append(sample_trajectory("c-001", 1)), "t-000003");
    EXPECT_THROW(reopened.get_trajectory("t-999999"), NotFoundError);
}

TEST(Store, ModelRegistrationConflictsOnDuplicate) {
    testkit::TempDir dir("models");
    RunStore store(dir.path());
    ModelTag tag{"base", 0, BackendKind::Scripted, "script.json"};
    store.register_model(tag);
    EXPECT_THROW(store.register_model(tag), ConflictError);
    ASSERT_TRUE(store.find_model("base"));
    EXPECT_EQ(*store.find_model("base"), tag);
}

TEST(Store, CheckStateValidatesStepRange) {
    testkit::TempDir dir("state");
    RunStore store(dir.path());
    auto id = store.append(sample_trajectory("a-001", 2));
    EXPECT_NO_THROW(store.check_state({id, 2}));
    EXPECT_THROW(store.check_state({id, 3}), NotFoundError);
    EXPECT_THROW(store.check_state({"t-000404", 1}), NotFoundError);
}

TEST(JsonIo, TrajectoryRoundTrip) {
    auto t = sample_trajectory("a-001", 2);
    t.trajectory_id = "t-000001";
    nlohmann::json j = t;
    EXPECT_EQ(j.get<Trajectory>(), t);
}

TEST(JsonIo, TasksJsonlRoundTrip) {
    testkit::TempDir dir("tasks");
    Task a{"a-001", "flights", "a", "What?", "1", Split::Test, {"load_db", "complete_task"}};
    auto path = (dir.path() / "tasks.jsonl").string();
    save_tasks_jsonl(path, {a});
    auto back = load_tasks_jsonl(path);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], a);
}

} // namespace
} // namespace hintcoach
