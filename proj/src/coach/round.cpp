// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/coach/round.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/parallel.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/distill/balance.hpp"
#include "hintcoach/distill/harvest.hpp"
#include "hintcoach/review/filter.hpp"

namespace hintcoach::coach {

ProfileKind parse_profile_kind(const std::string& text) {
    if (text == "none") return ProfileKind::None;
    if (text == "initial") return ProfileKind::Initial;
    if (text == "combined") return ProfileKind::Combined;
    throw ValidationError("profile", "expected none, initial or combined, got '" + text + "'");
}

std::string to_string(ProfileKind kind) {
    switch (kind) {
    case ProfileKind::None: return "none";
    case ProfileKind::Initial: return "initial";
    case ProfileKind::Combined: return "combined";
    }
    return "none";
}

agent::PromptProfile build_profile(const hints::HintLedger& ledger, const Task& task, ProfileKind kind, int round,
                                   const agent::Budget& budget) {
    agent::PromptProfile p;
    switch (kind) {
    case ProfileKind::None: p.hints = hints::HintLedger::none(); break;
    case ProfileKind::Initial: p.hints = ledger.select_initial(task.group); break;
    case ProfileKind::Combined: p.hints = ledger.select_combined(task.group, round); break;
    }
    p.tool_docs = task.tool_allowlist;
    p.budget = budget;
    return p;
}

namespace {

std::vector<Task> select_tasks(const RunContext& ctx, const RoundPlan& plan) {
    std::vector<Task> out;
    if (!plan.task_ids.empty()) {
        for (const auto& id : plan.task_ids) out.push_back(ctx.task(id));
    } else {
        auto split = parse_split(plan.split);
        for (const auto& t : ctx.tasks())
            if (t.split == split) out.push_back(t);
    }
    if (out.empty()) throw ValidationError("tasks", "the plan selects no tasks; run `tasks gen` first");
    return out;
}

std::filesystem::path resolve(const RunContext& ctx, const std::string& path) {
    std::filesystem::path p(path);
    return p.is_relative() && !std::filesystem::exists(p) ? ctx.run_dir() / p : p;
}

/// Samples `rollouts` trajectories per task, reusing stored ones with the same run key.
std::vector<Trajectory> sample_rollouts(RunContext& ctx, const RoundPlan& plan, const std::string& hash,
                                        const std::string& purpose, const std::vector<Task>& tasks, int rollouts,
                                        ProfileKind kind, const ModelTag& model) {
    std::map<std::string, Trajectory> existing;
    for (auto& t : ctx.store().trajectories())
        if (!t.run_key.empty()) existing.emplace(t.run_key, std::move(t));

    std::vector<std::string> keys;
    std::vector<agent::RunSpec> missing;
    for (const auto& task : tasks) {
        for (int k = 0; k < rollouts; ++k) {
            auto key = fmt::format("r{}/{}/{}/{}/{}", plan.round_index, hash, purpose, task.task_id, k);
            keys.push_back(key);
            if (existing.count(key)) continue;
            agent::RunSpec spec;
            spec.task = task;
            spec.model = model;
            spec.profile = build_profile(ctx.hints(), task, kind, plan.round_index,
                                         agent::Budget{plan.max_steps, plan.max_input_tokens});
            spec.sampling = {plan.sampling.temperature, plan.sampling.max_output_tokens, 0};
            spec.seed = derive_seed(plan.seed, key);
            spec.run_key = key;
            missing.push_back(std::move(spec));
        }
    }
    auto fresh = ctx.runtime().run_batch(missing, plan.workers);
    for (auto& t : fresh) {
        t.trajectory_id = ctx.store().append(t);
        existing.emplace(t.run_key, std::move(t));
    }
    std::vector<Trajectory> out;
    for (const auto& key : keys) out.push_back(existing.at(key));
    return out;
}

std::vector<std::string> ids_of(const std::vector<Trajectory>& ts) {
    std::vector<std::string> out;
    for (const auto& t : ts) out.push_back(t.trajectory_id);
    return out;
}

} // namespace

RoundResult run_round(RunContext& ctx, const RoundPlan& plan, const RoundHooks& hooks) {
    validate(plan);
    std::lock_guard lock(ctx.write_mutex());
    const std::string hash = plan_hash(plan);
    RoundResult result;

    // A finished plan is a no-op; an awaiting one completes once the trainer has registered.
    std::optional<RoundManifest> finished;
    for (const auto& m : ctx.store().manifests()) {
        if (m.plan_hash == hash && m.status != "partial") finished = m;
    }
    if (finished) {
        result.reused = true;
        result.manifest = *finished;
        if (!finished->dataset_ids.empty()) {
            auto dir = finished->config.value("dataset_dir", std::string());
            if (!dir.empty() && std::filesystem::exists(std::filesystem::path(dir) / "manifest.json")) {
                result.dataset = distill::load_dataset(dir).manifest;
            }
        }
        if (finished->status == "awaiting_trainer") {
            if (ctx.store().find_model(plan.handoff.model_tag_out)) {
                RoundManifest done = *finished;
                done.status = "completed";
                done.created_at = utc_timestamp_now();
                done.manifest_id = ctx.store().append(done);
                result.manifest = done;
            } else {
                result.awaiting_trainer = true;
            }
        }
        return result;
    }

    if (!ctx.store().find_model(plan.model_tag_in)) {
        for (const auto& m : ctx.store().manifests()) {
            if (m.model_tag_out == plan.model_tag_in) throw AwaitingModelError(plan.model_tag_in);
        }
    }
    const ModelTag model = ctx.require_model(plan.model_tag_in);
    const auto tasks = select_tasks(ctx, plan);
    const auto task_map = ctx.task_map();

    RoundManifest manifest;
    manifest.round_index = plan.round_index;
    manifest.model_tag_in = plan.model_tag_in;
    manifest.model_tag_out = plan.handoff.model_tag_out;
    manifest.plan_hash = hash;
    manifest.status = "partial";

    const std::string dataset_id = fmt::format("ds-r{}-{}", plan.round_index, hash.substr(0, 8));
    const std::filesystem::path dataset_dir = plan.handoff.dataset_path.empty()
                                                  ? ctx.store().datasets_dir() / dataset_id
                                                  : resolve(ctx, plan.handoff.dataset_path);
    manifest.config = {{"plan", plan_to_json(plan)}, {"dataset_dir", dataset_dir.string()}};

    auto begin_stage = [&](const std::string& name) {
        if (hooks.before_stage) hooks.before_stage(name);
    };
    auto end_stage = [&](const std::string& name) { manifest.stages.push_back(name); };

    distill::DropoutConfig dropout{plan.dropout_p, plan.drop_tool_docs, derive_seed(plan.seed, "dropout")};
    std::vector<distill::DistillSample> samples;
    std::vector<std::string> source_trajectories;
    std::vector<std::string> source_findings;
    std::set<std::string> hint_ids;

    try {
        if (plan.round_index == 1) {
            begin_stage("sample");
            auto rollouts = sample_rollouts(ctx, plan, hash, "sample", tasks, plan.sampling.rollouts_per_task,
                                            ProfileKind::Initial, model);
            manifest.counts["trajectories"] = static_cast<std::int64_t>(rollouts.size());
            std::int64_t steps = 0;
            for (const auto& t : rollouts) steps += static_cast<std::int64_t>(t.steps.size());
            manifest.counts["steps"] = steps;
            source_trajectories = ids_of(rollouts);
            end_stage("sample");

            begin_stage("harvest");
            distill::HarvestOptions ho;
            ho.round_index = 1;
            ho.dropout = {0.0, plan.drop_tool_docs, dropout.seed};
            ho.workers = plan.workers;
            auto harvested = distill::harvest_trajectories(rollouts, task_map, ho);
            for (const auto& s : harvested.skipped) {
                result.warnings.push_back("skipped " + s.trajectory_id + ": " + s.reason);
            }
            manifest.counts["skipped_trajectories"] = static_cast<std::int64_t>(harvested.skipped.size());
            samples = std::move(harvested.samples);
            end_stage("harvest");

            begin_stage("dropout");
            for (auto& s : samples) {
                distill::apply_hint_dropout(s, dropout);
                hint_ids.insert(s.hint_ids.begin(), s.hint_ids.end());
            }
            end_stage("dropout");
        } else {
            begin_stage("sample");
            auto rollouts = sample_rollouts(ctx, plan, hash, "sample", tasks, plan.sampling.rollouts_per_task,
                                            ProfileKind::None, model);
            manifest.counts["trajectories"] = static_cast<std::int64_t>(rollouts.size());
            source_trajectories = ids_of(rollouts);
            end_stage("sample");

            begin_stage("filter");
            auto filters = review::load_filters(resolve(ctx, plan.filter_file).string());
            std::vector<std::string> filter_order;
            for (const auto& f : filters) filter_order.push_back(f.filter_id);
            manifest.filter_ids = filter_order;
            review::ReviewOptions ro;
            ro.round_index = plan.round_index;
            ro.workers = plan.workers;
            ro.judge.failed_only = plan.judge_failed_only;
            ro.judge.seed = derive_seed(plan.seed, "judge");
            ModelTag judge = plan.judge_model.empty() ? model : ctx.require_model(plan.judge_model);
            auto report = review::review_trajectories(filters, rollouts, task_map, &ctx.gateway(), judge, ro);
            std::map<std::pair<std::string, StateRef>, std::string> stored_ids;
            for (const auto& f : ctx.store().findings()) {
                if (f.round_index == plan.round_index) stored_ids[{f.filter_id, f.state}] = f.finding_id;
            }
            for (auto f : report.findings) {
                auto key = std::make_pair(f.filter_id, f.state);
                auto it = stored_ids.find(key);
                source_findings.push_back(it != stored_ids.end() ? it->second : ctx.store().append(f));
            }
            for (const auto& e : report.judge_errors) {
                result.warnings.push_back(fmt::format("judge error: filter {} at {} step {}", e.filter_id,
                                                      e.state.trajectory_id, e.state.step_index));
            }
            manifest.counts["findings"] = static_cast<std::int64_t>(report.findings.size());
            manifest.counts["judge_errors"] = static_cast<std::int64_t>(report.judge_errors.size());
            result.flagged = review::collect_flagged_states(report.findings, plan.cap_per_filter, filter_order);
            manifest.counts["flagged_states"] = static_cast<std::int64_t>(result.flagged.states.size());
            end_stage("filter");

            begin_stage("hint");
            ctx.hints().set_known_filters(std::set<std::string>(filter_order.begin(), filter_order.end()));
            std::vector<std::pair<StateRef, hints::HintSection>> hinted;
            for (const auto& state : result.flagged.states) {
                try {
                    hinted.emplace_back(state, ctx.hints().resolve(state, plan.round_index, result.flagged.attribution));
                } catch (const NotFoundError& e) {
                    result.warnings.push_back(fmt::format("state {} step {} skipped: {}", state.trajectory_id,
                                                          state.step_index, e.what()));
                }
            }
            manifest.counts["hinted_states"] = static_cast<std::int64_t>(hinted.size());
            for (const auto& [state, hint] : hinted) hint_ids.insert(hint.hint_id);
            end_stage("hint");

            begin_stage("sample_corrective");
            std::map<std::string, Trajectory> by_id;
            for (const auto& t : rollouts) by_id.emplace(t.trajectory_id, t);
            agent::SamplingParams sp{plan.sampling.temperature, plan.sampling.max_output_tokens,
                                     plan.sampling.top_k_logprobs};
            auto injected = parallel_map(hinted.size(), static_cast<std::size_t>(plan.workers), [&](std::size_t i) {
                const auto& [state, hint] = hinted[i];
                const auto& t = by_id.at(state.trajectory_id);
                return ctx.runtime().inject_hint_and_continue(
                    t, task_map.at(t.task_id), state.step_index, hint, model, sp, plan.sampling.m_per_state,
                    derive_seed(plan.seed, fmt::format("inject/{}/{}", state.trajectory_id, state.step_index)));
            });
            std::vector<agent::ActionSample> actions;
            std::int64_t malformed = 0;
            for (auto& r : injected) {
                malformed += r.malformed;
                for (auto& a : r.samples) actions.push_back(std::move(a));
            }
            manifest.counts["malformed_actions"] = malformed;
            end_stage("sample_corrective");

            begin_stage("harvest");
            samples = distill::harvest_corrective(actions, by_id, task_map, plan.round_index);
            manifest.counts["corrective_samples"] = static_cast<std::int64_t>(samples.size());
            end_stage("harvest");

            begin_stage("balance");
            std::vector<Trajectory> candidates;
            if (plan.balance.enabled && plan.balance.candidate_rollouts > 0) {
                candidates = sample_rollouts(ctx, plan, hash, "candidate", tasks, plan.balance.candidate_rollouts,
                                             ProfileKind::Initial, model);
            }
            distill::BalanceConfig bc;
            bc.enabled = plan.balance.enabled;
            bc.per_template_floor = plan.balance.per_template_floor;
            bc.per_group_floor = plan.balance.per_group_floor;
            bc.retention_quota = plan.balance.retention_quota;
            bc.seed = derive_seed(plan.seed, "balance");
            bc.dropout = dropout;
            bc.round_index = plan.round_index;
            const std::string own_prefix = fmt::format("r{}/", plan.round_index);
            for (const auto& t : ctx.store().trajectories()) {
                if (t.success == Success::Failed && !starts_with(t.run_key, own_prefix)) ++bc.failure_priority[t.task_id];
            }
            auto balanced = distill::balance_dataset(samples, candidates, task_map, bc);
            for (auto& w : balanced.warnings) result.warnings.push_back(std::move(w));
            for (const auto& sel : balanced.selected) source_trajectories.push_back(sel.trajectory_id);
            manifest.counts["balance_trajectories"] = static_cast<std::int64_t>(balanced.selected.size());
            manifest.counts["balance_samples"] =
                static_cast<std::int64_t>(balanced.samples.size() - samples.size());
            samples = std::move(balanced.samples);
            end_stage("balance");
        }

        begin_stage("export");
        distill::ExportOptions eo;
        eo.dataset_id = dataset_id;
        eo.round_index = plan.round_index;
        eo.mode = plan.mode;
        eo.val_fraction = plan.val_fraction;
        eo.valid_count = plan.valid_count;
        eo.seed = derive_seed(plan.seed, "split");
        eo.dropout = dropout;
        std::sort(source_trajectories.begin(), source_trajectories.end());
        source_trajectories.erase(std::unique(source_trajectories.begin(), source_trajectories.end()),
                                  source_trajectories.end());
        eo.source_trajectory_ids = source_trajectories;
        eo.source_finding_ids = source_findings;
        result.dataset = distill::export_dataset(samples, dataset_dir, eo);
        write_file_atomic((dataset_dir / "handoff.json").string(),
                          nlohmann::json({{"dataset_id", dataset_id},
                                          {"dataset_dir", dataset_dir.string()},
                                          {"mode", distill::to_string(plan.mode)},
                                          {"model_tag_in", plan.model_tag_in},
                                          {"model_tag_out", plan.handoff.model_tag_out},
                                          {"round_index", plan.round_index},
                                          {"trainer", plan.handoff.trainer}})
                                  .dump(2) +
                              "\n");
        manifest.dataset_ids = {dataset_id};
        manifest.counts["samples"] = result.dataset.total;
        manifest.counts["train"] = result.dataset.train_count;
        manifest.counts["valid"] = result.dataset.valid_count;
        manifest.config["dataset_hash"] = result.dataset.content_hash;
        end_stage("export");
    } catch (...) {
        manifest.created_at = utc_timestamp_now();
        manifest.hint_ids.assign(hint_ids.begin(), hint_ids.end());
        manifest.config["warnings"] = result.warnings;
        try {
            ctx.store().append(manifest);
        } catch (...) {
            // The original failure matters more than the bookkeeping one.
        }
        throw;
    }

    manifest.hint_ids.assign(hint_ids.begin(), hint_ids.end());
    manifest.config["warnings"] = result.warnings;
    manifest.created_at = utc_timestamp_now();
    const bool trained = ctx.store().find_model(plan.handoff.model_tag_out).has_value();
    manifest.status = trained ? "completed" : "awaiting_trainer";
    result.awaiting_trainer = !trained;
    manifest.manifest_id = ctx.store().append(manifest);
    result.manifest = manifest;
    return result;
}

ChainCheck verify_chain(const std::vector<RoundManifest>& manifests) {
    ChainCheck check;
    std::map<int, RoundManifest> latest;
    for (const auto& m : manifests) {
        if (m.status == "partial") continue;
        latest[m.round_index] = m;
    }
    int expected = 1;
    std::string previous_out;
    for (const auto& [round, m] : latest) {
        if (round != expected) {
            check.ok = false;
            check.problem = fmt::format("round {} is missing before round {}", expected, round);
            return check;
        }
        if (m.stages != round_stages(round)) {
            check.ok = false;
            check.problem = fmt::format("round {} ran stages [{}], expected [{}]", round, join(m.stages, ", "),
                                        join(round_stages(round), ", "));
            return check;
        }
        if (round > 1 && m.model_tag_in != previous_out) {
            check.ok = false;
            check.problem = fmt::format("round {} starts from '{}' but round {} handed off '{}'", round,
                                        m.model_tag_in, round - 1, previous_out);
            return check;
        }
        check.stages.insert(check.stages.end(), m.stages.begin(), m.stages.end());
        previous_out = m.model_tag_out;
        ++expected;
    }
    return check;
}

} // namespace hintcoach::coach
