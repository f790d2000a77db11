// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hintcoach/coach/cli.hpp"
#include "hintcoach/coach/plan.hpp"
#include "hintcoach/coach/round.hpp"
#include "hintcoach/coach/service.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/distill/sample.hpp"
#include "run_fixture.hpp"

namespace hintcoach::coach {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Contents of every regular file below `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

TEST(Plan, ValidationNamesTheField) {
    RoundPlan ok = testkit::round1_plan({"t"});
    EXPECT_NO_THROW(validate(ok));

    auto bad = ok;
    bad.sampling.rollouts_per_task = 0;
    try {
        validate(bad);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_TRUE(contains(e.what(), "rollouts_per_task"));
    }
    bad = ok;
    bad.filter_file = "filters.json";
    EXPECT_THROW(validate(bad), ValidationError);
    bad = testkit::round2_plan({"t"});
    bad.filter_file.clear();
    EXPECT_THROW(validate(bad), ValidationError);
    bad = ok;
    bad.dropout_p = 1.5;
    EXPECT_THROW(validate(bad), ValidationError);
    bad = ok;
    bad.val_fraction = 1.0;
    EXPECT_THROW(validate(bad), ValidationError);
}

TEST(Plan, JsonRoundTripPreservesTheHash) {
    auto plan = testkit::round2_plan({"a", "b"});
    plan.balance.per_group_floor = 4;
    auto back = plan_from_json(plan_to_json(plan));
    EXPECT_EQ(plan_to_json(back), plan_to_json(plan));
    EXPECT_EQ(plan_hash(back), plan_hash(plan));
    back.seed += 1;
    EXPECT_NE(plan_hash(back), plan_hash(plan));
}

TEST(Chain, DetectsGapsAndWrongHandoffs) {
    RoundManifest r1;
    r1.round_index = 1;
    r1.model_tag_in = "base";
    r1.model_tag_out = "r1";
    r1.stages = round_stages(1);
    RoundManifest r2 = r1;
    r2.round_index = 2;
    r2.model_tag_in = "r1";
    r2.model_tag_out = "r2";
    r2.stages = round_stages(2);
    EXPECT_TRUE(verify_chain({r1, r2}).ok);
    EXPECT_FALSE(verify_chain({r2}).ok);
    auto wrong = r2;
    wrong.model_tag_in = "base";
    EXPECT_FALSE(verify_chain({r1, wrong}).ok);
    auto partial = r2;
    partial.status = "partial";
    partial.stages = {"sample"};
    EXPECT_TRUE(verify_chain({r1, partial, r2}).ok);
}

class RoundTest : public ::testing::Test {
protected:
    testkit::TempDir dir{"coach"};
    std::unique_ptr<RunContext> ctx = testkit::make_run(dir.path());
    std::vector<std::string> tasks = testkit::pick_tasks(*ctx, 12);
};

TEST_F(RoundTest, RoundOneHandsOffAndAwaitsTheTrainer) {
    auto plan = testkit::round1_plan(tasks);
    auto r = run_round(*ctx, plan);
    EXPECT_TRUE(r.awaiting_trainer);
    EXPECT_EQ(r.manifest.status, "awaiting_trainer");
    EXPECT_EQ(r.manifest.counts.at("trajectories"), 36);
    EXPECT_EQ(r.manifest.counts.at("samples"), r.manifest.counts.at("steps"));
    EXPECT_EQ(r.manifest.stages, round_stages(1));
    EXPECT_EQ(r.dataset.total, r.dataset.train_count + r.dataset.valid_count);
    EXPECT_EQ(ctx->store().trajectories().size(), 36u);

    const fs::path ds = r.manifest.config.at("dataset_dir").get<std::string>();
    for (const char* f : {"train.jsonl", "valid.jsonl", "manifest.json", "handoff.json"})
        EXPECT_TRUE(fs::exists(ds / f)) << f;

    // Rerunning before the trainer registers changes nothing.
    auto before = snapshot(dir.path());
    auto again = run_round(*ctx, plan);
    EXPECT_TRUE(again.reused);
    EXPECT_TRUE(again.awaiting_trainer);
    EXPECT_EQ(snapshot(dir.path()), before);

    // Round 2 cannot start from a model that has not been trained yet.
    testkit::prepare_round2(*ctx, {});
    auto r2 = testkit::round2_plan(tasks);
    r2.model_tag_in = "r1-missing";
    RoundManifest pending;
    pending.round_index = 1;
    pending.model_tag_in = "base";
    pending.model_tag_out = "r1-missing";
    pending.status = "awaiting_trainer";
    pending.stages = round_stages(1);
    pending.plan_hash = "x";
    ctx->store().append(pending);
    EXPECT_THROW(run_round(*ctx, r2), AwaitingModelError);

    // prepare_round2 registered "r1", which completes the first round.
    auto done = run_round(*ctx, plan);
    EXPECT_TRUE(done.reused);
    EXPECT_EQ(done.manifest.status, "completed");
}

TEST_F(RoundTest, RoundTwoDistilsCorrectiveHints) {
    ASSERT_EQ(run_round(*ctx, testkit::round1_plan(tasks)).manifest.counts.at("trajectories"), 36);
    std::set<std::string> marked(tasks.begin(), tasks.begin() + 5);
    testkit::prepare_round2(*ctx, marked);

    auto plan = testkit::round2_plan(tasks);
    auto r = run_round(*ctx, plan);
    EXPECT_EQ(r.manifest.stages, round_stages(2));
    EXPECT_EQ(r.manifest.counts.at("trajectories"), 12);
    EXPECT_EQ(r.manifest.counts.at("flagged_states"), 5);
    EXPECT_EQ(r.manifest.counts.at("hinted_states"), 5);
    EXPECT_EQ(r.manifest.counts.at("corrective_samples"), 15);
    EXPECT_EQ(r.manifest.counts.at("samples"), 15);
    EXPECT_EQ(r.manifest.filter_ids, std::vector<std::string>{testkit::kFilterId});
    EXPECT_EQ(r.flagged.states.size(), 5u);
    for (const auto& s : r.flagged.states) EXPECT_EQ(s.step_index, 1);

    const fs::path ds = r.manifest.config.at("dataset_dir").get<std::string>();
    auto loaded = distill::load_dataset(ds);
    std::vector<nlohmann::json> lines = loaded.train;
    lines.insert(lines.end(), loaded.valid.begin(), loaded.valid.end());
    ASSERT_EQ(lines.size(), 15u);
    for (const auto& line : lines) {
        auto teacher = line.at("teacher_messages").get<std::vector<gateway::ChatMessage>>();
        auto student = line.at("student_messages").get<std::vector<gateway::ChatMessage>>();
        EXPECT_EQ(distill::removed_message_count(teacher, student), 1);
        EXPECT_TRUE(contains(line.at("action_text").get<std::string>(), testkit::kCorrectedMonologue));
    }
    EXPECT_EQ(ctx->store().findings().size(), 5u);

    auto again = run_round(*ctx, plan);
    EXPECT_TRUE(again.reused);
    EXPECT_EQ(ctx->store().findings().size(), 5u);
    EXPECT_EQ(run_round(*ctx, testkit::round1_plan(tasks)).manifest.status, "completed");
    auto chain = verify_chain(ctx->store().manifests());
    EXPECT_TRUE(chain.ok) << chain.problem;
}

TEST_F(RoundTest, CrashedStageResumesWithoutDuplicates) {
    auto plan = testkit::round1_plan(tasks);
    RoundHooks crash;
    crash.before_stage = [](const std::string& stage) {
        if (stage == "harvest") throw std::runtime_error("simulated crash");
    };
    EXPECT_THROW(run_round(*ctx, plan, crash), std::runtime_error);
    ASSERT_EQ(ctx->store().manifests().size(), 1u);
    EXPECT_EQ(ctx->store().manifests().front().status, "partial");
    auto r = run_round(*ctx, plan);
    EXPECT_FALSE(r.reused);
    EXPECT_EQ(ctx->store().trajectories().size(), 36u);
}

class ServiceTest : public RoundTest {
protected:
    void SetUp() override {
        run_round(*ctx, testkit::round1_plan(tasks));
        testkit::prepare_round2(*ctx, {tasks.front()});
        service = std::make_unique<CoachService>(*ctx);
    }

    ServiceResponse call(const std::string& method, const std::string& path, const nlohmann::json& body = nullptr,
                         std::map<std::string, std::string> query = {}) {
        return service->handle({method, path, std::move(query), body.is_null() ? "" : body.dump()});
    }

    std::unique_ptr<CoachService> service;
};

TEST_F(ServiceTest, ReadsDoNotMutateTheRun) {
    auto before = snapshot(dir.path());
    EXPECT_EQ(call("GET", "/api/health").status, 200);
    auto list = call("GET", "/api/trajectories", nullptr, {{"task_id", tasks.front()}});
    ASSERT_EQ(list.status, 200);
    ASSERT_EQ(list.body.at("trajectories").size(), 3u);
    auto id = list.body.at("trajectories").at(0).at("trajectory_id").get<std::string>();
    auto one = call("GET", "/api/trajectories/" + id);
    ASSERT_EQ(one.status, 200);
    const auto& step = one.body.at("steps").at(0).at("sections");
    for (const char* key : {"status", "monologue", "code", "observation"}) EXPECT_TRUE(step.contains(key)) << key;
    EXPECT_EQ(call("GET", "/api/hints").status, 200);
    EXPECT_EQ(call("GET", "/api/manifests").status, 200);
    EXPECT_EQ(call("GET", "/api/models").status, 200);
    EXPECT_EQ(call("GET", "/api/tasks", nullptr, {{"split", "train"}}).status, 200);
    EXPECT_EQ(call("GET", "/api/trajectories/t-999999").status, 404);
    EXPECT_EQ(call("GET", "/api/nowhere").status, 404);
    EXPECT_EQ(snapshot(dir.path()), before);
}

TEST_F(ServiceTest, WritesNeedAnAuthorAndAreAudited) {
    auto missing = call("POST", "/api/hints", {{"text", "Check units."}});
    EXPECT_EQ(missing.status, 400);
    EXPECT_EQ(missing.body.at("error").at("code"), "validation");

    auto created = call("POST", "/api/hints", {{"text", "Check units."}, {"author", "ana"}});
    ASSERT_EQ(created.status, 201);
    EXPECT_TRUE(created.body.at("draft").get<bool>());
    const auto hint_id = created.body.at("hint_id").get<std::string>();

    EXPECT_EQ(call("PUT", "/api/hints/" + hint_id, {{"text", "Check the units."}, {"author", "ana"}}).status, 200);
    // The filter already has a corrective hint for round 2.
    auto clash = call("POST", "/api/hints/" + hint_id + "/bind",
                      {{"filter_id", testkit::kFilterId}, {"round", 2}, {"author", "ana"}});
    EXPECT_EQ(clash.status, 409);
    auto unknown = call("POST", "/api/hints/" + hint_id + "/bind",
                        {{"filter_id", "no-such-filter"}, {"round", 3}, {"author", "ana"}});
    EXPECT_EQ(unknown.status, 404);
    auto bound = call("POST", "/api/hints/" + hint_id + "/bind",
                      {{"filter_id", testkit::kFilterId}, {"round", 3}, {"author", "ana"}});
    EXPECT_EQ(bound.status, 200);

    auto audit = ctx->store().audit_log();
    ASSERT_GE(audit.size(), 3u);
    EXPECT_EQ(audit.back().at("author"), "ana");

    EXPECT_EQ(call("POST", "/api/models", {{"name", "base"}, {"backend_kind", "scripted"}, {"endpoint_or_script", "x.json"}, {"author", "ana"}}).status,
              409);
}

TEST_F(ServiceTest, PreviewInjectsAHintWithoutStoringIt) {
    EXPECT_EQ(call("POST", "/api/hints/preview",
                   {{"trajectory_id", "t-999999"}, {"step_index", 1}, {"text", "x"}, {"author", "ana"}})
                  .status,
              404);
    auto id = ctx->store().trajectories().front().trajectory_id;
    auto before = ctx->store().trajectories().size();
    auto r = call("POST", "/api/hints/preview",
                  {{"trajectory_id", id}, {"step_index", 1}, {"text", "Look first."}, {"author", "ana"}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_TRUE(r.body.at("original").contains("monologue"));
    EXPECT_TRUE(r.body.at("action").contains("action_text"));
    EXPECT_EQ(ctx->store().trajectories().size(), before);
}

TEST_F(ServiceTest, FilterRunStoresFindings) {
    auto marked = ctx->store().trajectories();
    std::vector<std::string> ids;
    for (const auto& t : marked)
        if (t.task_id == tasks.front()) ids.push_back(t.trajectory_id);
    auto r = call("POST", "/api/filters/run",
                  {{"filter_file", testkit::kFilterFile}, {"round", 2}, {"trajectory_ids", ids},
                   {"judge_model", "judge"}, {"author", "ana"}});
    ASSERT_EQ(r.status, 200) << r.body.dump();
    // Round-1 trajectories follow the reference solution, so the judge finds nothing.
    EXPECT_EQ(r.body.at("new_findings").get<int>(), 0);
}

class CliTest : public ::testing::Test {
protected:
    testkit::TempDir dir{"cli"};

    int run(std::vector<std::string> args) {
        out.str("");
        err.str("");
        args.push_back("--run-dir");
        args.push_back(dir.path().string());
        return run_cli(args, out, err);
    }

    std::ostringstream out;
    std::ostringstream err;
};

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run_cli({"--help"}, out, err), kExitOk);
    EXPECT_EQ(run_cli({"world", "gen", "--no-such-flag"}, out, err), kExitUsage);
    EXPECT_FALSE(err.str().empty());
    EXPECT_EQ(run_cli({"nonsense"}, out, err), kExitUsage);

    ASSERT_EQ(run({"world", "gen", "--seed", "3"}), kExitOk) << err.str();
    ASSERT_EQ(run({"tasks", "gen", "--per-template", "2", "--seed", "3"}), kExitOk) << err.str();
    ASSERT_EQ(run({"hints", "init"}), kExitOk) << err.str();
    ASSERT_EQ(run({"fixtures", "reference", "--out", "reference_script.json"}), kExitOk) << err.str();
    ASSERT_EQ(run({"model", "register", "--name", "base", "--backend", "scripted", "--endpoint",
                   "reference_script.json"}),
              kExitOk)
        << err.str();
    EXPECT_EQ(run({"model", "register", "--name", "base", "--backend", "scripted", "--endpoint", "x.json"}),
              kExitError);
    EXPECT_TRUE(contains(err.str(), "code=conflict"));

    ASSERT_EQ(run({"eval", "run", "--model", "base", "--trials", "3", "--json"}), kExitOk) << err.str();
    auto report = nlohmann::json::parse(out.str());
    EXPECT_EQ(report.at("trials"), 3);
    EXPECT_DOUBLE_EQ(report.at("average").at("mean").get<double>(), 100.0);

    auto plan = testkit::round1_plan({});
    plan.task_ids.clear();
    plan.sampling.rollouts_per_task = 1;
    const auto plan_path = (dir.path() / "plan.json").string();
    write_file_atomic(plan_path, plan_to_json(plan).dump(2));
    EXPECT_EQ(run({"round", "run", "--config", plan_path}), kExitAwaitingModel) << err.str();
    EXPECT_EQ(run({"round", "run", "--config", plan_path}), kExitAwaitingModel);
    EXPECT_EQ(run({"model", "register", "--name", "r1", "--backend", "scripted", "--endpoint",
                   "reference_script.json", "--round", "1"}),
              kExitOk);
    EXPECT_EQ(run({"round", "run", "--config", plan_path, "--json"}), kExitOk) << err.str();
}

} // namespace
} // namespace hintcoach::coach
