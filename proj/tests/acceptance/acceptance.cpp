// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit when any criterion fails.
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "balance_scenario.hpp"
#include "filter_oracle.hpp"
#include "hintcoach/action/interpreter.hpp"
#include "hintcoach/action/parser.hpp"
#include "hintcoach/agent/fixtures.hpp"
#include "hintcoach/coach/round.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/distill/dropout.hpp"
#include "hintcoach/distill/kl.hpp"
#include "hintcoach/eval/bench.hpp"
#include "program_gen.hpp"
#include "run_fixture.hpp"

namespace hc = hintcoach;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome ok(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome dropout_statistics() {
    constexpr std::size_t kDraws = 10'000;
    auto mask = hc::distill::draw_keep_mask(kDraws, 0.9, hc::derive_seed(1, "acceptance/dropout"));
    const double dropped = static_cast<double>(std::count(mask.begin(), mask.end(), false)) / kDraws;
    if (std::fabs(dropped - 0.9) > 0.01) return fail(fmt::format("drop rate {:.4f}", dropped));
    auto none = hc::distill::draw_keep_mask(kDraws, 0.0, 1);
    auto all = hc::distill::draw_keep_mask(kDraws, 1.0, 1);
    if (std::count(none.begin(), none.end(), false) != 0) return fail("p=0 dropped a section");
    if (std::count(all.begin(), all.end(), true) != 0) return fail("p=1 kept a section");
    return ok(fmt::format("drop rate {:.4f} over {} draws", dropped, kDraws));
}

Outcome filter_oracle() {
    auto r = hc::testkit::run_filter_oracle(13, 2024, 1000);
    if (r.mismatches != 0) return fail(fmt::format("{} mismatches, first: {}", r.mismatches, r.examples.front()));
    return ok(fmt::format("{} queries, 0 mismatches", r.queries));
}

Outcome round_one() {
    std::vector<std::map<std::string, std::string>> files;
    std::string detail;
    for (const char* tag : {"accept-r1a", "accept-r1b"}) {
        hc::testkit::TempDir dir(tag);
        auto ctx = hc::testkit::make_run(dir.path());
        auto plan = hc::testkit::round1_plan(hc::testkit::pick_tasks(*ctx, 12));
        auto r = hc::coach::run_round(*ctx, plan);
        const auto stored = ctx->store().trajectories().size();
        if (stored != 36) return fail(fmt::format("{} stored trajectories", stored));
        std::int64_t steps = 0;
        for (const auto& t : ctx->store().trajectories()) steps += static_cast<std::int64_t>(t.steps.size());
        if (r.dataset.total != steps) return fail(fmt::format("{} samples for {} steps", r.dataset.total, steps));
        const fs::path ds = r.manifest.config.at("dataset_dir").get<std::string>();
        std::map<std::string, std::string> bytes;
        for (const char* f : {"train.jsonl", "valid.jsonl", "manifest.json"}) bytes[f] = slurp(ds / f);
        files.push_back(std::move(bytes));
        detail = fmt::format("36 trajectories, {} samples = {} steps", r.dataset.total, steps);
    }
    for (const auto& [name, content] : files[0]) {
        if (files[1].at(name) != content) return fail(name + " differs between the two runs");
    }
    return ok(detail + ", byte-identical export");
}

Outcome round_two() {
    hc::testkit::TempDir dir("accept-r2");
    auto ctx = hc::testkit::make_run(dir.path());
    auto tasks = hc::testkit::pick_tasks(*ctx, 12);
    hc::testkit::prepare_round2(*ctx, std::set<std::string>(tasks.begin(), tasks.begin() + 5));
    auto r = hc::coach::run_round(*ctx, hc::testkit::round2_plan(tasks));
    const auto flagged = r.manifest.counts.at("flagged_states");
    const auto corrective = r.manifest.counts.at("corrective_samples");
    if (flagged != 5) return fail(fmt::format("{} flagged states", flagged));
    if (corrective != 15) return fail(fmt::format("{} corrective samples", corrective));

    auto loaded = hc::distill::load_dataset(r.manifest.config.at("dataset_dir").get<std::string>());
    auto lines = loaded.train;
    lines.insert(lines.end(), loaded.valid.begin(), loaded.valid.end());
    for (const auto& line : lines) {
        auto teacher = line.at("teacher_messages").get<std::vector<hc::gateway::ChatMessage>>();
        auto student = line.at("student_messages").get<std::vector<hc::gateway::ChatMessage>>();
        if (hc::distill::remove_messages_with_span(teacher, "hint") != student ||
            hc::distill::removed_message_count(teacher, student) != 1) {
            return fail("sample " + line.at("sample_id").get<std::string>() +
                        " differs by more than the hint message");
        }
    }
    return ok(fmt::format("5 flagged states, {} corrective samples, each minus one hint message", lines.size()));
}

Outcome balancing() {
    hc::testkit::TempDir dir("accept-balance");
    auto ctx = hc::testkit::make_run(dir.path());
    auto sc = hc::testkit::make_balance_scenario(*ctx);
    auto r = hc::distill::balance_dataset(sc.corrected, sc.candidates, ctx->task_map(), sc.config);
    if (auto problem = hc::testkit::check_balance(sc, r); !problem.empty()) return fail(problem);
    auto off = sc.config;
    off.enabled = false;
    if (hc::distill::balance_dataset(sc.corrected, sc.candidates, ctx->task_map(), off).samples != sc.corrected) {
        return fail("disabled balancing changed the samples");
    }
    std::vector<std::string> order;
    for (const auto& s : r.selected) order.push_back(fmt::format("{}/p{}", s.trajectory_id, s.pass));
    return ok("selected " + hc::join(order, " "));
}

Outcome evaluation_math() {
    auto cell = hc::eval::mean_and_se({80, 90, 100});
    if (hc::eval::format_percent(cell.mean) != "90.0" || fmt::format("{:.1f}", cell.standard_error) != "5.8") {
        return fail(fmt::format("mean {} se {}", hc::eval::format_percent(cell.mean), cell.standard_error));
    }

    hc::testkit::TempDir dir("accept-eval");
    auto ctx = hc::testkit::make_run(dir.path());
    std::vector<hc::Task> tasks;
    std::vector<hc::Task> solvable;
    for (const auto& t : ctx->tasks()) {
        if (t.split != hc::Split::Test) continue;
        tasks.push_back(t);
        if (tasks.size() % 3 != 0) solvable.push_back(t);
    }
    hc::testkit::register_script(*ctx, "partial", hc::agent::reference_behavior(solvable, ctx->reference_cells()));
    hc::eval::TrialOptions opts;
    opts.profile_for = [](const hc::Task& t) {
        hc::agent::PromptProfile p;
        p.tool_docs = t.tool_allowlist;
        p.budget.max_steps = 4;
        return p;
    };
    auto trials = hc::eval::run_trials(ctx->runtime(), tasks, ctx->require_model("partial"), {0, 1, 2}, opts);
    auto report = hc::eval::summarize(trials);

    double sum = 0;
    for (const auto& t : trials) {
        int wins = 0;
        for (const auto& o : t.tasks) wins += o.success ? 1 : 0;
        sum += 100.0 * wins / static_cast<double>(t.tasks.size());
    }
    const double recomputed = sum / static_cast<double>(trials.size());
    const auto rendered = hc::eval::to_json(report).at("average").at("display").get<std::string>();
    if (std::fabs(std::stod(rendered) - recomputed) > 0.05) {
        return fail(fmt::format("rendered average {} vs recomputed {:.3f}", rendered, recomputed));
    }
    return ok(fmt::format("90.0 ± 5.8 closed form; rendered {} vs recomputed {:.3f}", rendered, recomputed));
}

Outcome diagnostic_kl() {
    using hc::gateway::TokenLogprob;
    TokenLogprob teacher{"a", std::log(0.9), {{"a", std::log(0.9)}, {"b", std::log(0.1)}}};
    TokenLogprob student{"a", std::log(0.5), {{"a", std::log(0.5)}, {"b", std::log(0.5)}}};
    const double kl = hc::distill::token_kl(teacher, student);
    if (std::fabs(kl - 0.368) > 1e-3) return fail(fmt::format("KL {:.6f}", kl));
    if (std::fabs(hc::distill::token_kl(teacher, teacher)) > 1e-9) return fail("KL(p||p) is not 0");
    hc::SplitMix64 rng(17);
    double lowest = 1.0;
    for (int i = 0; i < 1000; ++i) {
        TokenLogprob t{"x", 0, {}};
        TokenLogprob s{"x", 0, {}};
        for (const char* tok : {"x", "y", "z"}) {
            t.top_k.emplace_back(tok, std::log(rng.uniform01() + 1e-9));
            s.top_k.emplace_back(tok, std::log(rng.uniform01() + 1e-9));
        }
        t.logprob = t.top_k.front().second;
        s.logprob = s.top_k.front().second;
        lowest = std::min(lowest, hc::distill::token_kl(t, s));
    }
    if (lowest < -1e-9) return fail(fmt::format("negative KL {}", lowest));
    return ok(fmt::format("KL {:.4f}, KL(p||p) = 0, min over 1000 random pairs {:.2e}", kl, lowest));
}

Outcome token_footprint() {
    hc::testkit::TempDir dir("accept-tokens");
    auto ctx = hc::testkit::make_run(dir.path());
    std::vector<hc::Task> tasks;
    for (const auto& t : ctx->tasks())
        if (t.split == hc::Split::Test) tasks.push_back(t);
    const auto model = ctx->require_model("base");
    hc::eval::TrialOptions none;
    hc::eval::TrialOptions combined;
    combined.profile_label = "combined";
    combined.profile_for = [&](const hc::Task& t) {
        return hc::coach::build_profile(ctx->hints(), t, hc::coach::ProfileKind::Combined, 2);
    };
    auto a = hc::eval::summarize(hc::eval::run_trials(ctx->runtime(), tasks, model, {0}, none));
    auto b = hc::eval::summarize(hc::eval::run_trials(ctx->runtime(), tasks, model, {0}, combined));
    const auto detail = fmt::format("mean input tokens {:.1f} hint-free vs {:.1f} combined", a.mean_input_tokens,
                                    b.mean_input_tokens);
    return a.mean_input_tokens < b.mean_input_tokens ? ok(detail) : fail(detail);
}

Outcome action_language() {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto code = hc::testkit::random_program(seed);
        hc::action::EmptyRegistry tools;
        hc::action::Environment e1;
        hc::action::Environment e2;
        auto a = hc::action::execute_cell(code, e1, tools);
        auto b = hc::action::execute_cell(code, e2, tools);
        const bool same = a.observation == b.observation && a.bindings_delta == b.bindings_delta &&
                          a.error.has_value() == b.error.has_value() &&
                          (!a.error || a.error->message == b.error->message);
        if (!same) return fail(fmt::format("program {} differs between runs", seed));
    }
    std::string cell;
    for (std::size_t i = 0; i <= hc::action::kMaxStatements; ++i) cell += fmt::format("x{} = {}\n", i, i);
    hc::action::EmptyRegistry tools;
    hc::action::Environment env;
    auto capped = hc::action::execute_cell(cell, env, tools);
    if (!capped.error || capped.error->kind != hc::action::ErrorKind::LimitExceeded) {
        return fail("a 33-statement cell was not rejected");
    }
    auto loud = hc::action::execute_cell("print(join('', split('" + std::string(6000, 'a') + "', 'b')))", env, tools);
    if (hc::action::utf8_length(loud.observation) !=
            hc::action::kMaxObservationChars + hc::action::utf8_length(hc::action::kTruncationSuffix) ||
        !hc::ends_with(loud.observation, hc::action::kTruncationSuffix)) {
        return fail(fmt::format("observation of {} characters", hc::action::utf8_length(loud.observation)));
    }
    return ok(fmt::format("1000 programs identical twice; statement {} rejected; observations capped at {}",
                          hc::action::kMaxStatements + 1, hc::action::kMaxObservationChars));
}

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double limit_seconds;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"dropout-statistics", dropout_statistics, 5},
        {"filter-condition-oracle", filter_oracle, 30},
        {"scripted-round-1", round_one, 60},
        {"scripted-round-2", round_two, 60},
        {"balancing-conformance", balancing, 0},
        {"evaluation-math", evaluation_math, 0},
        {"diagnostic-kl", diagnostic_kl, 0},
        {"token-footprint", token_footprint, 0},
        {"action-language-determinism", action_language, 0},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.pass && c.limit_seconds > 0 && seconds > c.limit_seconds) {
            o = fail(fmt::format("{} but took {:.1f} s (limit {:.0f} s)", o.detail, seconds, c.limit_seconds));
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << fmt::format(" [{:.2f} s]", seconds)
                  << std::endl;
    }
    std::cout << fmt::format("{} of {} criteria passed", criteria.size() - static_cast<std::size_t>(failures),
                             criteria.size())
              << std::endl;
    return failures == 0 ? 0 : 1;
}
