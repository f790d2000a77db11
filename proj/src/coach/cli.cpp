// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/coach/cli.hpp"

#include <csignal>
#include <filesystem>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hintcoach/agent/fixtures.hpp"
#include "hintcoach/coach/round.hpp"
#include "hintcoach/coach/service.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/distill/harvest.hpp"
#include "hintcoach/eval/bench.hpp"
#include "hintcoach/review/flagged.hpp"
#include "hintcoach/world/templates.hpp"

namespace hintcoach::coach {

namespace {

/// Options every leaf subcommand accepts.
struct Common {
    std::uint64_t seed = 0;
    std::string config;
    std::string run_dir = ".";
    bool json = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--config", c.config, "JSON configuration file");
    sub->add_option("--run-dir", c.run_dir, "Run directory holding the store");
    sub->add_flag("--json", c.json, "Machine-readable output");
}

std::string escape_message(const std::string& text) {
    std::string out;
    for (char ch : text) {
        if (ch == '"' || ch == '\\') out.push_back('\\');
        if (ch == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(ch);
    }
    return out;
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
    err << "error: code=" << code << " message=\"" << escape_message(message) << "\"\n";
}

/// Appends "--key value" pairs from a JSON config for keys not given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string path;
    bool plan_config = args.size() >= 2 && args[0] == "round" && args[1] == "run";
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") path = args[i + 1];
    for (const auto& a : args)
        if (starts_with(a, "--config=")) path = a.substr(9);
    if (path.empty() || plan_config) return args;

    auto doc = nlohmann::json::parse(read_file(path));
    if (!doc.is_object()) throw ValidationError("config", "configuration file must hold a JSON object");
    std::set<std::string> given;
    for (const auto& a : args) {
        if (!starts_with(a, "--")) continue;
        given.insert(a.substr(0, a.find('=')));
    }
    auto merged = args;
    for (const auto& [key, value] : doc.items()) {
        std::string flag = "--" + replace_all(key, "_", "-");
        if (given.count(flag) || flag == "--config") continue;
        auto push = [&](const nlohmann::json& v) {
            merged.push_back(flag);
            merged.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        };
        if (value.is_boolean()) {
            if (value.get<bool>()) merged.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& v : value) push(v);
        } else {
            push(value);
        }
    }
    return merged;
}

std::vector<Task> select_tasks(RunContext& ctx, const std::vector<std::string>& ids, const std::string& split,
                               const std::string& group) {
    std::vector<Task> out;
    if (!ids.empty()) {
        for (const auto& id : ids) out.push_back(ctx.task(id));
        return out;
    }
    for (const auto& t : ctx.tasks()) {
        if (!split.empty() && split != "all" && to_string(t.split) != split) continue;
        if (!group.empty() && t.group != group) continue;
        out.push_back(t);
    }
    if (out.empty()) throw NotFoundError("no tasks match the selection; run `tasks gen` first");
    return out;
}

void write_report(RunContext& ctx, const std::string& name, const nlohmann::json& doc) {
    auto dir = ctx.run_dir() / kReportsDir;
    std::filesystem::create_directories(dir);
    write_file_atomic((dir / (name + ".json")).string(), doc.dump(2) + "\n");
}

CoachService* g_service = nullptr;

extern "C" void stop_service(int) {
    if (g_service) g_service->stop();
}

} // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coach tool-using agents by turning corrective hints into training data", "hintcoach"};
    app.require_subcommand(1);
    Common c;
    std::function<int()> action;

    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help) {
        auto* sub = parent->add_subcommand(name, help);
        add_common(sub, c);
        return sub;
    };

    // ---- world gen ----
    auto* world_cmd = app.add_subcommand("world", "Synthetic tool world")->require_subcommand(1);
    auto* world_gen = leaf(world_cmd, "gen", "Generate the world tables, graphs and agenda");
    world::WorldSizes sizes;
    world_gen->add_option("--flights", sizes.flights);
    world_gen->add_option("--coffee", sizes.coffee);
    world_gen->add_option("--yelp", sizes.yelp);
    world_gen->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            ctx.set_world(world::generate_world(c.seed, sizes));
            auto w = ctx.world();
            nlohmann::json summary = {{"seed", c.seed}, {"agenda", w->agenda.size()}};
            for (const auto& [name, table] : w->tables) summary["tables"][name] = table->rows.size();
            if (c.json) out << summary.dump() << "\n";
            else out << fmt::format("world generated (seed {}) in {}\n", c.seed, (ctx.run_dir() / kWorldFile).string());
            return kExitOk;
        };
    });

    // ---- tasks gen ----
    auto* tasks_cmd = app.add_subcommand("tasks", "Task instances")->require_subcommand(1);
    auto* tasks_gen = leaf(tasks_cmd, "gen", "Instantiate tasks from the built-in templates");
    int per_template = 3;
    world::SplitRatios ratios;
    std::vector<std::string> template_ids;
    tasks_gen->add_option("--per-template", per_template, "Instances per template");
    tasks_gen->add_option("--train", ratios.train);
    tasks_gen->add_option("--valid", ratios.valid);
    tasks_gen->add_option("--test", ratios.test);
    tasks_gen->add_option("--template", template_ids, "Restrict to these template ids");
    tasks_gen->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            std::vector<world::TaskTemplate> templates;
            if (template_ids.empty()) templates = world::builtin_templates();
            for (const auto& id : template_ids) templates.push_back(world::find_template(id));
            auto result = world::instantiate_tasks(*ctx.world(), templates, per_template, ratios, c.seed);
            ctx.set_tasks(result.tasks, result.reference_cells);
            std::map<std::string, int> per_split;
            for (const auto& t : result.tasks) ++per_split[to_string(t.split)];
            if (c.json) {
                out << nlohmann::json{{"tasks", result.tasks.size()},
                                      {"splits", per_split},
                                      {"redraws", result.redraws},
                                      {"warnings", result.warnings}}
                           .dump()
                    << "\n";
            } else {
                out << fmt::format("{} tasks written", result.tasks.size());
                for (const auto& [split, n] : per_split) out << fmt::format(", {} {}", n, split);
                out << "\n";
                for (const auto& w : result.warnings) out << "warning: " << w << "\n";
            }
            return kExitOk;
        };
    });

    // ---- hints ----
    auto* hints_cmd = app.add_subcommand("hints", "Hint ledger")->require_subcommand(1);
    std::string hint_text, filter_id, author = "cli";
    std::vector<std::string> hint_groups;
    int hint_round = 2;
    auto* hints_init = leaf(hints_cmd, "init", "Add the stock initial hints for the built-in task groups");
    hints_init->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            if (!ctx.hints().all().empty()) throw ConflictError("the hint ledger is not empty");
            for (const auto& [text, groups] : default_initial_hints()) ctx.hints().add_initial(text, groups, "system");
            ctx.save_hints();
            out << fmt::format("{} initial hints added\n", ctx.hints().all().size());
            return kExitOk;
        };
    });
    auto* hints_add = leaf(hints_cmd, "add", "Add an initial hint");
    hints_add->add_option("--text", hint_text)->required();
    hints_add->add_option("--group", hint_groups, "Task groups the hint applies to")->required();
    hints_add->add_option("--author", author);
    hints_add->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            auto h = ctx.hints().add_initial(hint_text, hint_groups, author);
            ctx.save_hints();
            if (c.json) out << nlohmann::json(h).dump() << "\n";
            else out << h.hint_id << "\n";
            return kExitOk;
        };
    });
    auto* hints_bind = leaf(hints_cmd, "bind", "Bind a corrective hint to a filter for a round");
    hints_bind->add_option("--text", hint_text)->required();
    hints_bind->add_option("--filter", filter_id)->required();
    hints_bind->add_option("--round", hint_round)->required();
    hints_bind->add_option("--author", author);
    hints_bind->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            auto h = ctx.hints().bind_corrective(filter_id, hint_text, hint_round, author);
            ctx.save_hints();
            ctx.store().append_audit({{"timestamp", utc_timestamp_now()},
                                      {"author", author},
                                      {"action", "hint.bind"},
                                      {"target", h.hint_id},
                                      {"details", {{"filter_id", filter_id}, {"round", hint_round}}}});
            if (c.json) out << nlohmann::json(h).dump() << "\n";
            else out << h.hint_id << "\n";
            return kExitOk;
        };
    });
    auto* hints_list = leaf(hints_cmd, "list", "Print the hint ledger");
    hints_list->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            if (c.json) {
                out << ctx.hints().to_json().dump(2) << "\n";
            } else {
                for (const auto& h : ctx.hints().all()) {
                    out << fmt::format("{}  {:<10} round {}  {}\n", h.hint_id, hints::to_string(h.kind),
                                       h.round_introduced, h.filter_id.empty() ? join(h.groups, ",") : h.filter_id);
                }
            }
            return kExitOk;
        };
    });

    // ---- model register ----
    auto* model_cmd = app.add_subcommand("model", "Model registry")->require_subcommand(1);
    ModelTag tag;
    std::string backend = "scripted";
    auto* model_register = leaf(model_cmd, "register", "Register a model tag");
    model_register->add_option("--name", tag.name)->required();
    model_register->add_option("--backend", backend, "scripted or http-chat");
    model_register->add_option("--endpoint", tag.endpoint_or_script, "Behaviour script or endpoint URL")->required();
    model_register->add_option("--round", tag.round_index);
    model_register->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            tag.backend_kind = parse_backend_kind(backend);
            ctx.store().register_model(tag);
            ctx.store().append_audit({{"timestamp", utc_timestamp_now()},
                                      {"author", "cli"},
                                      {"action", "model.register"},
                                      {"target", tag.name},
                                      {"details", nlohmann::json(tag)}});
            if (c.json) out << nlohmann::json(tag).dump() << "\n";
            else out << "registered " << tag.name << "\n";
            return kExitOk;
        };
    });

    // ---- fixtures reference ----
    auto* fixtures_cmd = app.add_subcommand("fixtures", "Scripted-backend fixtures")->require_subcommand(1);
    std::string fixture_out = "reference_script.json";
    auto* fixtures_ref = leaf(fixtures_cmd, "reference", "Write a behaviour script that follows the reference solutions");
    fixtures_ref->add_option("--out", fixture_out, "Output path (relative to the run directory)");
    fixtures_ref->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            auto doc = agent::reference_behavior(ctx.tasks(), ctx.reference_cells());
            auto path = std::filesystem::path(fixture_out);
            if (path.is_relative()) path = ctx.run_dir() / path;
            write_file_atomic(path.string(), doc.dump(2) + "\n");
            out << path.string() << "\n";
            return kExitOk;
        };
    });

    // ---- agent run ----
    auto* agent_cmd = app.add_subcommand("agent", "Agent runtime")->require_subcommand(1);
    std::string model_name, profile = "none", split = "all", group;
    std::vector<std::string> task_ids;
    int round = 1, workers = 1, max_steps = 10;
    double temperature = 0.7;
    auto* agent_run = leaf(agent_cmd, "run", "Run and store trajectories");
    agent_run->add_option("--model", model_name)->required();
    agent_run->add_option("--task", task_ids);
    agent_run->add_option("--split", split);
    agent_run->add_option("--group", group);
    agent_run->add_option("--profile", profile, "none, initial or combined");
    agent_run->add_option("--round", round, "Round whose corrective hints the combined profile includes");
    agent_run->add_option("--temperature", temperature);
    agent_run->add_option("--max-steps", max_steps);
    agent_run->add_option("--workers", workers);
    agent_run->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            auto model = ctx.require_model(model_name);
            auto kind = parse_profile_kind(profile);
            std::vector<agent::RunSpec> specs;
            for (const auto& task : select_tasks(ctx, task_ids, split, group)) {
                agent::RunSpec spec;
                spec.task = task;
                spec.model = model;
                spec.profile = build_profile(ctx.hints(), task, kind, round, agent::Budget{max_steps, 12000});
                spec.sampling.temperature = temperature;
                spec.run_key = fmt::format("cli/{}/{}/{}/{}", model.name, profile, c.seed, task.task_id);
                spec.seed = derive_seed(c.seed, spec.run_key);
                specs.push_back(std::move(spec));
            }
            auto results = ctx.runtime().run_batch(specs, workers);
            auto rows = nlohmann::json::array();
            for (auto& t : results) {
                t.trajectory_id = ctx.store().append(t);
                rows.push_back({{"trajectory_id", t.trajectory_id},
                                {"task_id", t.task_id},
                                {"steps", t.steps.size()},
                                {"success", to_string(t.success)},
                                {"outcome", t.outcome}});
                if (!c.json) {
                    out << fmt::format("{}  {}  {} steps  {}\n", t.trajectory_id, t.task_id, t.steps.size(),
                                       to_string(t.success));
                }
            }
            if (c.json) out << rows.dump() << "\n";
            return kExitOk;
        };
    });

    // ---- round run ----
    auto* round_cmd = app.add_subcommand("round", "Coaching rounds")->require_subcommand(1);
    auto* round_run = leaf(round_cmd, "run", "Run one round from a plan given with --config");
    round_run->add_option("--workers", workers);
    round_run->callback([&] {
        action = [&] {
            if (c.config.empty()) throw ValidationError("config", "round run needs --config <plan.json>");
            RunContext ctx(c.run_dir);
            auto plan = load_plan(c.config);
            if (round_run->count("--seed")) plan.seed = c.seed;
            if (round_run->count("--workers")) plan.workers = workers;
            auto result = run_round(ctx, plan);
            if (c.json) {
                out << nlohmann::json{{"manifest", result.manifest},
                                      {"dataset", distill::manifest_to_json(result.dataset)},
                                      {"reused", result.reused},
                                      {"warnings", result.warnings}}
                           .dump()
                    << "\n";
            } else {
                out << fmt::format("round {} {}: manifest {}\n", plan.round_index, result.manifest.status,
                                   result.manifest.manifest_id);
                for (const auto& [k, v] : result.manifest.counts) out << fmt::format("  {:<22} {}\n", k, v);
                for (const auto& w : result.warnings) out << "warning: " << w << "\n";
            }
            if (result.awaiting_trainer) {
                print_error(err, "awaiting_model", "awaiting model_tag_out '" + plan.handoff.model_tag_out + "'");
                return kExitAwaitingModel;
            }
            return kExitOk;
        };
    });

    // ---- review run ----
    auto* review_cmd = app.add_subcommand("review", "Mistake filters")->require_subcommand(1);
    std::string filter_file, judge_model;
    bool failed_only = false;
    int cap = review::kDefaultCapPerFilter;
    std::vector<std::string> trajectory_ids;
    auto* review_run = leaf(review_cmd, "run", "Run filters over stored trajectories and store findings");
    review_run->add_option("--filters", filter_file)->required();
    review_run->add_option("--round", round);
    review_run->add_option("--judge-model", judge_model);
    review_run->add_flag("--failed-only", failed_only);
    review_run->add_option("--cap", cap, "Flagged states kept per filter");
    review_run->add_option("--trajectory", trajectory_ids);
    review_run->add_option("--workers", workers);
    review_run->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            auto filters = review::load_filters(filter_file);
            std::vector<Trajectory> trajectories;
            if (trajectory_ids.empty()) trajectories = ctx.store().trajectories();
            for (const auto& id : trajectory_ids) trajectories.push_back(ctx.store().get_trajectory(id));
            review::ReviewOptions ro;
            ro.round_index = round;
            ro.workers = workers;
            ro.judge.failed_only = failed_only;
            ro.judge.seed = c.seed;
            ModelTag judge;
            if (!judge_model.empty()) judge = ctx.require_model(judge_model);
            auto report = review::review_trajectories(filters, trajectories, ctx.task_map(), &ctx.gateway(), judge, ro);
            std::set<std::pair<std::string, StateRef>> stored;
            for (const auto& f : ctx.store().findings())
                if (f.round_index == round) stored.emplace(f.filter_id, f.state);
            for (const auto& f : report.findings)
                if (!stored.count({f.filter_id, f.state})) ctx.store().append(f);
            std::vector<std::string> order;
            for (const auto& f : filters) order.push_back(f.filter_id);
            auto flagged = review::collect_flagged_states(report.findings, cap, order);
            if (c.json) {
                auto findings = nlohmann::json::array();
                for (const auto& f : report.findings) findings.push_back(f);
                out << nlohmann::json{{"findings", findings},
                                      {"flagged_states", flagged.states},
                                      {"judge_errors", report.judge_errors.size()},
                                      {"trajectories_scanned", report.trajectories_scanned}}
                           .dump()
                    << "\n";
            } else {
                out << fmt::format("{} trajectories scanned, {} findings, {} flagged states, {} judge errors\n",
                                   report.trajectories_scanned, report.findings.size(), flagged.states.size(),
                                   report.judge_errors.size());
                for (const auto& s : flagged.states) {
                    out << fmt::format("  {}@{}  {}\n", s.trajectory_id, s.step_index, flagged.attribution.at(s));
                }
            }
            return kExitOk;
        };
    });

    // ---- dataset build ----
    auto* dataset_cmd = app.add_subcommand("dataset", "Distillation datasets")->require_subcommand(1);
    std::string dataset_id, mode = "kl", out_dir;
    double dropout_p = 0.9, val_fraction = 0.1;
    auto* dataset_build = leaf(dataset_cmd, "build", "Harvest stored hinted trajectories into a dataset");
    dataset_build->add_option("--id", dataset_id)->required();
    dataset_build->add_option("--round", round);
    dataset_build->add_option("--model", model_name, "Only trajectories of this model");
    dataset_build->add_option("--trajectory", trajectory_ids);
    dataset_build->add_option("--mode", mode, "kl or cross-entropy");
    dataset_build->add_option("--dropout", dropout_p);
    dataset_build->add_option("--val-fraction", val_fraction);
    dataset_build->add_option("--out", out_dir, "Output directory (default: <run-dir>/datasets/<id>)");
    dataset_build->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            std::vector<Trajectory> trajectories;
            for (const auto& t : ctx.store().trajectories()) {
                if (!model_name.empty() && t.model_tag != model_name) continue;
                if (!trajectory_ids.empty() &&
                    std::find(trajectory_ids.begin(), trajectory_ids.end(), t.trajectory_id) == trajectory_ids.end()) {
                    continue;
                }
                trajectories.push_back(t);
            }
            distill::HarvestOptions ho;
            ho.round_index = round;
            ho.dropout = {dropout_p, false, derive_seed(c.seed, "dropout")};
            auto harvest = distill::harvest_trajectories(trajectories, ctx.task_map(), ho);
            distill::ExportOptions eo;
            eo.dataset_id = dataset_id;
            eo.round_index = round;
            eo.mode = distill::parse_train_mode(mode);
            eo.val_fraction = val_fraction;
            eo.seed = derive_seed(c.seed, "split");
            eo.dropout = ho.dropout;
            for (const auto& t : trajectories) eo.source_trajectory_ids.push_back(t.trajectory_id);
            auto dir = out_dir.empty() ? ctx.store().datasets_dir() / dataset_id : std::filesystem::path(out_dir);
            auto manifest = distill::export_dataset(harvest.samples, dir, eo);
            if (c.json) {
                out << distill::manifest_to_json(manifest).dump() << "\n";
            } else {
                out << fmt::format("dataset {} written to {} ({} skipped trajectories)\n", dataset_id, dir.string(),
                                   harvest.skipped.size());
            }
            return kExitOk;
        };
    });

    // ---- eval run ----
    auto* eval_cmd = app.add_subcommand("eval", "Benchmark evaluation")->require_subcommand(1);
    int trials = 3;
    std::vector<std::string> compare;
    std::string averaging = "task", report_name;
    bool usage = false;
    std::string eval_split = "test";
    double eval_temperature = 0.0;
    auto* eval_run = leaf(eval_cmd, "run", "Evaluate a model over repeated trials");
    eval_run->add_option("--model", model_name)->required();
    eval_run->add_option("--trials", trials);
    eval_run->add_option("--split", eval_split);
    eval_run->add_option("--group", group);
    eval_run->add_option("--task", task_ids);
    eval_run->add_option("--profile", profile, "none, initial or combined");
    eval_run->add_option("--compare", compare, "Profiles to report side by side")->delimiter(',');
    eval_run->add_option("--round", round);
    eval_run->add_option("--averaging", averaging, "task or group");
    eval_run->add_option("--temperature", eval_temperature);
    eval_run->add_option("--max-steps", max_steps);
    eval_run->add_option("--workers", workers);
    eval_run->add_option("--report", report_name, "Store the report under <run-dir>/reports/<name>.json");
    eval_run->add_flag("--usage", usage, "Also report token usage per profile and backend");
    eval_run->callback([&] {
        action = [&] {
            if (trials < 1) throw ValidationError("trials", "must be at least 1");
            RunContext ctx(c.run_dir);
            auto model = ctx.require_model(model_name);
            auto tasks = select_tasks(ctx, task_ids, eval_split, group);
            std::vector<std::uint64_t> seeds;
            for (int k = 0; k < trials; ++k) seeds.push_back(c.seed + static_cast<std::uint64_t>(k));
            auto profiles = compare.empty() ? std::vector<std::string>{profile} : compare;
            auto mode_avg = averaging == "group" ? eval::Averaging::GroupWeighted : eval::Averaging::TaskWeighted;
            std::vector<eval::Report> reports;
            std::vector<eval::TrialResult> all_trials;
            for (const auto& label : profiles) {
                auto kind = parse_profile_kind(label);
                eval::TrialOptions opts;
                opts.profile_label = label;
                opts.profile_for = [&, kind](const Task& t) {
                    return build_profile(ctx.hints(), t, kind, round, agent::Budget{max_steps, 12000});
                };
                opts.sampling.temperature = eval_temperature;
                opts.workers = workers;
                opts.store = &ctx.store();
                auto results = eval::run_trials(ctx.runtime(), tasks, model, seeds, opts);
                reports.push_back(eval::summarize(results, mode_avg, world::all_groups()));
                all_trials.insert(all_trials.end(), results.begin(), results.end());
            }
            nlohmann::json doc;
            if (reports.size() == 1) {
                doc = eval::to_json(reports.front());
            } else {
                doc = nlohmann::json::array();
                for (const auto& r : reports) doc.push_back(eval::to_json(r));
            }
            auto rows = eval::usage_report(all_trials);
            if (!report_name.empty()) {
                write_report(ctx, report_name, {{"reports", doc}, {"usage", eval::to_json(rows)}});
            }
            if (c.json) {
                out << doc.dump() << "\n";
            } else {
                out << eval::render_markdown(reports);
                if (usage) out << "\n" << eval::render_usage_markdown(rows);
            }
            return kExitOk;
        };
    });

    // ---- serve ----
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = leaf(&app, "serve", "Serve the REST API for the coaching console");
    serve_cmd->add_option("--host", host);
    serve_cmd->add_option("--port", port);
    serve_cmd->callback([&] {
        action = [&] {
            RunContext ctx(c.run_dir);
            CoachService service(ctx);
            int bound = service.bind(host, port);
            out << fmt::format("listening on http://{}:{}\n", host, bound) << std::flush;
            g_service = &service;
            std::signal(SIGINT, stop_service);
            std::signal(SIGTERM, stop_service);
            service.listen();
            g_service = nullptr;
            return kExitOk;
        };
    });

    try {
        auto args = merge_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n";
        const CLI::App* deepest = &app;
        while (!deepest->get_subcommands().empty()) deepest = deepest->get_subcommands().front();
        err << deepest->help();
        return kExitUsage;
    } catch (const Error& e) {
        print_error(err, e.code(), e.what());
        return kExitError;
    } catch (const std::exception& e) {
        print_error(err, "config", e.what());
        return kExitError;
    }

    try {
        return action ? action() : kExitUsage;
    } catch (const AwaitingModelError& e) {
        print_error(err, e.code(), e.what());
        return kExitAwaitingModel;
    } catch (const Error& e) {
        print_error(err, e.code(), e.what());
        return kExitError;
    } catch (const std::exception& e) {
        print_error(err, "internal", e.what());
        return kExitError;
    }
}

} // namespace hintcoach::coach
