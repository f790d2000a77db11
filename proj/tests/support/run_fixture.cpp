// SPDX-License-Identifier: Apache-2.0
#include "run_fixture.hpp"

#include <atomic>

#include <fmt/format.h>

#include "hintcoach/agent/fixtures.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/world/templates.hpp"

namespace hintcoach::testkit {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            fmt::format("hintcoach-{}-{}-{}", tag, static_cast<long>(::getpid()), counter.fetch_add(1));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::unique_ptr<coach::RunContext> make_run(const fs::path& dir, std::uint64_t seed) {
    auto ctx = std::make_unique<coach::RunContext>(dir);
    ctx->set_world(world::generate_world(seed));
    auto tasks = world::instantiate_tasks(*ctx->world(), world::builtin_templates(), 3, {}, seed);
    ctx->set_tasks(tasks.tasks, tasks.reference_cells);
    for (const auto& [text, groups] : coach::default_initial_hints()) ctx->hints().add_initial(text, groups);
    ctx->save_hints();
    register_script(*ctx, "base", agent::reference_behavior(ctx->tasks(), ctx->reference_cells()));
    return ctx;
}

void register_script(coach::RunContext& ctx, const std::string& name, const nlohmann::json& behavior,
                     int round_index) {
    const std::string file = name + "_script.json";
    write_file_atomic((ctx.run_dir() / file).string(), behavior.dump(2));
    ModelTag tag;
    tag.name = name;
    tag.round_index = round_index;
    tag.backend_kind = BackendKind::Scripted;
    tag.endpoint_or_script = file;
    ctx.store().register_model(tag);
}

std::vector<std::string> pick_tasks(const coach::RunContext& ctx, int n) {
    std::map<std::string, std::vector<std::string>> by_template;
    for (const auto& t : ctx.tasks()) by_template[t.template_id].push_back(t.task_id);
    for (auto& [_, ids] : by_template) std::sort(ids.begin(), ids.end());
    std::vector<std::string> out;
    for (std::size_t k = 0; static_cast<int>(out.size()) < n; ++k) {
        bool any = false;
        for (const auto& [_, ids] : by_template) {
            if (k >= ids.size() || static_cast<int>(out.size()) >= n) continue;
            out.push_back(ids[k]);
            any = true;
        }
        if (!any) break;
    }
    return out;
}

nlohmann::json marked_behavior(const coach::RunContext& ctx, const std::set<std::string>& marked) {
    std::vector<nlohmann::json> rules;
    const nlohmann::json hinted = {{"tag", "hint"}};
    for (const auto& task : ctx.tasks()) {
        const auto& cells = ctx.reference_cells().at(task.task_id);
        if (marked.count(task.task_id)) {
            for (auto& r : agent::action_rules(task, 1, kCorrectedMonologue, cells.front(), {hinted}))
                rules.push_back(std::move(r));
            auto first_line = split(cells.front(), "\n").front();
            for (auto& r : agent::action_rules(task, 1, std::string(kMarker) + ": " + first_line, cells.front()))
                rules.push_back(std::move(r));
        }
        for (auto& r : agent::script_rules(task, cells)) rules.push_back(std::move(r));
    }
    return agent::behavior_document(std::move(rules));
}

nlohmann::json marker_judge_behavior() {
    return {{"rules",
             {{{"when", {{{"tag", "last_step"}, {"contains", kMarker}}}},
               {"response", "<reasoning>The step acts on an unchecked assumption.</reasoning>\n<answer>false</answer>"}}}},
            {"default", {{"response", "<reasoning>Reasonable step.</reasoning>\n<answer>true</answer>"}}}};
}

nlohmann::json judge_filter_document(const std::string& filter_id) {
    return {{"filters",
             {{{"filter_id", filter_id},
               {"kind", "llm-judge"},
               {"description", "The step acts on an assumption it never checked."},
               {"judge_prompt", "Review the trajectory for this problem: {description}\n\n{trajectory}"}}}}};
}

coach::RoundPlan round1_plan(const std::vector<std::string>& tasks, const std::string& model_out) {
    coach::RoundPlan plan;
    plan.round_index = 1;
    plan.model_tag_in = "base";
    plan.task_ids = tasks;
    plan.sampling.rollouts_per_task = 3;
    plan.handoff.model_tag_out = model_out;
    plan.seed = 11;
    return plan;
}

void prepare_round2(coach::RunContext& ctx, const std::set<std::string>& marked) {
    register_script(ctx, "r1", marked_behavior(ctx, marked), 1);
    register_script(ctx, "judge", marker_judge_behavior());
    fs::create_directories(ctx.run_dir() / "filters");
    write_file_atomic((ctx.run_dir() / kFilterFile).string(), judge_filter_document(kFilterId).dump(2));
    ctx.hints().bind_corrective(kFilterId, kCorrectiveText, 2);
    ctx.save_hints();
}

coach::RoundPlan round2_plan(const std::vector<std::string>& tasks, const std::string& model_out) {
    coach::RoundPlan plan;
    plan.round_index = 2;
    plan.model_tag_in = "r1";
    plan.task_ids = tasks;
    plan.sampling.rollouts_per_task = 1;
    plan.sampling.m_per_state = 3;
    plan.filter_file = kFilterFile;
    plan.judge_model = "judge";
    plan.balance.enabled = false;
    plan.handoff.model_tag_out = model_out;
    plan.seed = 12;
    return plan;
}

} // namespace hintcoach::testkit
