// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/eval/bench.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::eval {

std::vector<TrialResult> run_trials(agent::AgentRuntime& runtime, const std::vector<Task>& tasks, const ModelTag& model,
                                    const std::vector<std::uint64_t>& seeds, const TrialOptions& options) {
    if (seeds.empty()) throw ValidationError("seeds", "at least one trial is required");
    std::vector<agent::RunSpec> specs;
    for (auto seed : seeds) {
        for (const auto& task : tasks) {
            agent::RunSpec spec;
            spec.task = task;
            spec.model = model;
            if (options.profile_for) {
                spec.profile = options.profile_for(task);
            } else {
                spec.profile.tool_docs = task.tool_allowlist;
            }
            spec.sampling = options.sampling;
            spec.seed = seed;
            spec.run_key = fmt::format("eval/{}/{}/{}/{}", model.name, options.profile_label, seed, task.task_id);
            specs.push_back(std::move(spec));
        }
    }
    auto trajectories = runtime.run_batch(specs, options.workers);

    std::vector<TrialResult> out;
    std::size_t k = 0;
    for (auto seed : seeds) {
        TrialResult trial;
        trial.model_tag = model.name;
        trial.profile_label = options.profile_label;
        trial.seed = seed;
        for (const auto& task : tasks) {
            auto& t = trajectories[k++];
            TaskOutcome o;
            o.task_id = task.task_id;
            o.group = task.group;
            o.success = t.success == Success::Succeeded;
            o.aborted = t.outcome.kind == OutcomeKind::Aborted;
            for (const auto& s : t.steps) {
                o.input_tokens += s.input_tokens;
                o.output_tokens += s.output_tokens;
            }
            o.usage_source = t.usage_source;
            if (options.store) o.trajectory_id = options.store->append(t);
            if (o.aborted) ++trial.aborted;
            trial.tasks.push_back(std::move(o));
        }
        out.push_back(std::move(trial));
    }
    return out;
}

Cell mean_and_se(const std::vector<double>& values) {
    Cell c;
    if (values.empty()) return c;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    c.mean = mean;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        c.standard_error = sd / std::sqrt(static_cast<double>(values.size()));
    }
    return c;
}

Report summarize(const std::vector<TrialResult>& trials, Averaging averaging, const std::vector<std::string>& groups) {
    Report r;
    r.trials = static_cast<int>(trials.size());
    r.averaging = averaging;
    if (r.trials == 1) r.note = "n=1";

    std::set<std::string> group_names(groups.begin(), groups.end());
    std::set<std::string> models;
    std::set<std::string> labels;
    for (const auto& t : trials) {
        models.insert(t.model_tag);
        labels.insert(t.profile_label);
        for (const auto& o : t.tasks) group_names.insert(o.group);
    }
    r.model_tag = join(std::vector<std::string>(models.begin(), models.end()), ",");
    r.profile_label = join(std::vector<std::string>(labels.begin(), labels.end()), ",");

    std::map<std::string, std::vector<double>> per_group;
    std::vector<double> averages;
    std::int64_t input = 0;
    std::int64_t output = 0;
    std::int64_t task_runs = 0;
    for (const auto& t : trials) {
        std::map<std::string, std::pair<int, int>> tally;  // group -> (successes, tasks)
        int successes = 0;
        for (const auto& o : t.tasks) {
            auto& g = tally[o.group];
            g.first += o.success ? 1 : 0;
            g.second += 1;
            successes += o.success ? 1 : 0;
            input += o.input_tokens;
            output += o.output_tokens;
            ++task_runs;
        }
        r.aborted += t.aborted;
        std::vector<double> group_means;
        for (const auto& [g, st] : tally) {
            double pct = 100.0 * st.first / st.second;
            per_group[g].push_back(pct);
            group_means.push_back(pct);
        }
        if (t.tasks.empty()) continue;
        if (averaging == Averaging::TaskWeighted) {
            averages.push_back(100.0 * successes / static_cast<double>(t.tasks.size()));
        } else {
            double sum = 0.0;
            for (double v : group_means) sum += v;
            averages.push_back(sum / static_cast<double>(group_means.size()));
        }
    }
    for (const auto& g : group_names) {
        Cell c = mean_and_se(per_group[g]);
        int n = 0;
        if (!trials.empty()) {
            for (const auto& o : trials.front().tasks) n += o.group == g ? 1 : 0;
        }
        c.tasks = n;
        r.groups[g] = c;
    }
    r.average = mean_and_se(averages);
    r.average.tasks = trials.empty() ? 0 : static_cast<int>(trials.front().tasks.size());
    if (task_runs > 0) {
        r.mean_input_tokens = static_cast<double>(input) / static_cast<double>(task_runs);
        r.mean_output_tokens = static_cast<double>(output) / static_cast<double>(task_runs);
    }
    return r;
}

std::string format_percent(const std::optional<double>& value) {
    if (!value) return "—";
    return fmt::format("{:.1f}", *value);
}

std::vector<UsageRow> usage_report(const std::vector<TrialResult>& trials) {
    struct Acc {
        std::int64_t input = 0;
        std::int64_t output = 0;
        int n = 0;
    };
    std::map<std::tuple<std::string, std::string, std::string>, Acc> acc;
    for (const auto& t : trials) {
        for (const auto& o : t.tasks) {
            auto& a = acc[{t.profile_label, t.model_tag, o.usage_source}];
            a.input += o.input_tokens;
            a.output += o.output_tokens;
            ++a.n;
        }
    }
    std::vector<UsageRow> rows;
    for (const auto& [key, a] : acc) {
        UsageRow row;
        std::tie(row.profile_label, row.model_tag, row.usage_source) = key;
        row.trajectories = a.n;
        row.mean_input_tokens = static_cast<double>(a.input) / a.n;
        row.mean_output_tokens = static_cast<double>(a.output) / a.n;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

nlohmann::json cell_json(const Cell& c) {
    nlohmann::json j = {{"tasks", c.tasks}, {"standard_error", c.standard_error}, {"display", format_percent(c.mean)},
                        {"se_display", fmt::format("{:.1f}", c.standard_error)}};
    j["mean"] = c.mean ? nlohmann::json(*c.mean) : nlohmann::json(nullptr);
    return j;
}

} // namespace

nlohmann::json to_json(const Report& r) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [g, c] : r.groups) groups[g] = cell_json(c);
    return {{"model_tag", r.model_tag},
            {"profile_label", r.profile_label},
            {"trials", r.trials},
            {"averaging", r.averaging == Averaging::TaskWeighted ? "task-weighted" : "group-weighted"},
            {"groups", groups},
            {"average", cell_json(r.average)},
            {"aborted", r.aborted},
            {"mean_input_tokens", r.mean_input_tokens},
            {"mean_output_tokens", r.mean_output_tokens},
            {"note", r.note}};
}

nlohmann::json to_json(const std::vector<UsageRow>& rows) {
    auto out = nlohmann::json::array();
    for (const auto& r : rows) {
        out.push_back({{"profile_label", r.profile_label},
                       {"model_tag", r.model_tag},
                       {"usage_source", r.usage_source},
                       {"trajectories", r.trajectories},
                       {"mean_input_tokens", r.mean_input_tokens},
                       {"mean_output_tokens", r.mean_output_tokens}});
    }
    return out;
}

nlohmann::json to_json(const TrialResult& t) {
    auto tasks = nlohmann::json::array();
    for (const auto& o : t.tasks) {
        tasks.push_back({{"task_id", o.task_id},
                         {"group", o.group},
                         {"success", o.success},
                         {"aborted", o.aborted},
                         {"input_tokens", o.input_tokens},
                         {"output_tokens", o.output_tokens},
                         {"usage_source", o.usage_source},
                         {"trajectory_id", o.trajectory_id}});
    }
    return {{"model_tag", t.model_tag},
            {"profile_label", t.profile_label},
            {"seed", t.seed},
            {"aborted", t.aborted},
            {"tasks", tasks}};
}

std::string render_markdown(const std::vector<Report>& reports) {
    std::set<std::string> groups;
    for (const auto& r : reports)
        for (const auto& [g, c] : r.groups) groups.insert(g);
    std::string out = "| Model | Hints |";
    std::string rule = "|---|---|";
    for (const auto& g : groups) {
        out += " " + g + " |";
        rule += "---|";
    }
    out += " Avg. |\n" + rule + "---|\n";
    auto cell = [](const Cell& c) {
        if (!c.mean) return std::string("—");
        return format_percent(c.mean) + " ± " + fmt::format("{:.1f}", c.standard_error);
    };
    for (const auto& r : reports) {
        out += "| " + r.model_tag + " | " + r.profile_label + " |";
        for (const auto& g : groups) {
            auto it = r.groups.find(g);
            out += " " + (it == r.groups.end() ? std::string("—") : cell(it->second)) + " |";
        }
        out += " " + cell(r.average) + " |\n";
    }
    for (const auto& r : reports) {
        if (!r.note.empty()) out += "\n" + r.model_tag + "/" + r.profile_label + ": " + r.note + " (standard error not defined)\n";
    }
    return out;
}

std::string render_usage_markdown(const std::vector<UsageRow>& rows) {
    std::string out = "| Hints | Model | Usage source | Trajectories | Mean input tokens | Mean output tokens |\n"
                      "|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += fmt::format("| {} | {} | {} | {} | {:.1f} | {:.1f} |\n", r.profile_label, r.model_tag, r.usage_source,
                           r.trajectories, r.mean_input_tokens, r.mean_output_tokens);
    }
    return out;
}

} // namespace hintcoach::eval
