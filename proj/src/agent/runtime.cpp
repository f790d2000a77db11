// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/agent/runtime.hpp"

#include <limits>

#include <fmt/format.h>

#include "hintcoach/action/interpreter.hpp"
#include "hintcoach/core/error.hpp"
#include "hintcoach/core/normalize.hpp"
#include "hintcoach/core/parallel.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/world/tools.hpp"

namespace hintcoach::agent {

namespace {

constexpr const char* kDuplicateCompletion =
    "ToolError: complete_task may be called at most once per cell; the cell was not executed.\n";

StatusSnapshot make_status(const PromptProfile& profile, int step, std::int64_t calls, std::int64_t resources) {
    StatusSnapshot s;
    std::int64_t elapsed = calls * profile.seconds_per_call;
    s.now = add_seconds(profile.project_start, 1 + elapsed);
    s.elapsed = format_elapsed(elapsed);
    s.step_number = step;
    s.resources_spent = resources;
    s.input_tokens_remaining = 0;
    return s;
}

} // namespace

AgentRuntime::AgentRuntime(gateway::Gateway& gateway, std::shared_ptr<const world::World> world)
    : gateway_(gateway), world_(std::move(world)) {
    if (!world_) throw ConfigurationError("agent runtime needs a world");
}

AgentRuntime::SectionResult AgentRuntime::request_section(
    const ModelTag& model, const SamplingParams& sampling, std::uint64_t seed,
    const std::function<std::vector<ChatMessage>(const PromptTail&)>& build, PromptTail tail,
    std::int64_t max_input_tokens, const std::string& ledger_key) {
    SectionResult result;
    const std::string open = opening_tag(tail.phase);
    const std::string close = closing_tag(tail.phase);
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto messages = build(tail);
        std::int64_t prompt_tokens = gateway_.count_prompt(model, messages) + gateway_.count_tokens(model, open);
        if (prompt_tokens > max_input_tokens) {
            result.over_budget = true;
            return result;
        }
        gateway::CompletionParams params;
        params.temperature = sampling.temperature;
        params.max_tokens = sampling.max_output_tokens;
        params.top_k_logprobs = sampling.top_k_logprobs;
        params.seed = seed;
        params.prefill = open;
        auto completion = gateway_.complete(model, messages, params, ledger_key);
        result.input_tokens += completion.usage.input_tokens;
        result.output_tokens += completion.usage.output_tokens;
        auto parsed = parse_section(tail.phase, completion.text, completion.finish_reason);
        if (parsed.ok) {
            result.ok = true;
            result.body = std::move(parsed.body);
            result.logprobs = std::move(completion.tokens);
            return result;
        }
        tail.format_correction = fmt::format(
            "Your previous reply could not be used ({}). Reply again in the required format: the reply continues "
            "after {} and must end with {}.",
            parsed.error, open, close);
    }
    return result;
}

Trajectory AgentRuntime::run_trajectory(const RunSpec& spec) {
    const Task& task = spec.task;
    const PromptProfile& profile = spec.profile;
    validate(task);
    validate(profile);

    Trajectory t;
    t.task_id = task.task_id;
    t.model_tag = spec.model.name;
    t.hint_profile_id = profile.hints.profile_id;
    t.prompt_profile = profile_to_json(profile);
    t.project_start = profile.project_start;
    t.seed = spec.seed;
    t.run_key = spec.run_key;
    t.created_at = utc_timestamp_now();
    t.usage_source = "approximate";
    const std::string ledger_key = spec.run_key.empty() ? fmt::format("{}#{}", task.task_id, spec.seed) : spec.run_key;

    world::WorldTools tools(world_, task.tool_allowlist);
    action::Environment env;
    std::int64_t calls = 0;
    std::int64_t resources = 0;
    std::optional<Outcome> outcome;

    auto out_of_budget = [&] {
        return t.steps.empty() ? Outcome::aborted(kBudgetBeforeFirstStep) : Outcome::budget_exhausted();
    };

    for (int k = 1; k <= profile.budget.max_steps && !outcome; ++k) {
        StatusSnapshot status = make_status(profile, k, calls, resources);
        {
            // Remaining budget reflects the prompt this status block will appear in.
            auto probe = assemble_prompt(task, profile, t.steps, status);
            std::int64_t used = gateway_.count_prompt(spec.model, probe) +
                                gateway_.count_tokens(spec.model, opening_tag(Phase::Monologue));
            status.input_tokens_remaining = std::max<std::int64_t>(0, profile.budget.max_input_tokens - used);
        }
        auto build = [&](const PromptTail& tail) { return assemble_prompt(task, profile, t.steps, status, tail); };

        PromptTail mono_tail;
        auto mono = request_section(spec.model, spec.sampling, spec.seed, build, mono_tail,
                                    profile.budget.max_input_tokens, ledger_key);
        calls += 1;
        if (mono.over_budget) {
            outcome = out_of_budget();
            break;
        }
        if (!mono.ok) {
            outcome = Outcome::aborted(kMalformedOutput);
            break;
        }

        PromptTail code_tail;
        code_tail.phase = Phase::Code;
        code_tail.pending_monologue = mono.body;
        auto code = request_section(spec.model, spec.sampling, spec.seed, build, code_tail,
                                    profile.budget.max_input_tokens, ledger_key);
        calls += 1;
        if (code.over_budget) {
            outcome = out_of_budget();
            break;
        }
        if (!code.ok) {
            outcome = Outcome::aborted(kMalformedOutput);
            break;
        }

        Step step;
        step.index = k;
        step.monologue = mono.body;
        step.code = code.body;
        step.input_tokens = mono.input_tokens + code.input_tokens;
        step.output_tokens = mono.output_tokens + code.output_tokens;
        step.status = status;
        if (count_complete_task_calls(code.body) > 1) {
            step.observation = kDuplicateCompletion;
        } else {
            step.observation = action::execute_cell(code.body, env, tools).observation;
        }
        resources += step.output_tokens;
        t.steps.push_back(std::move(step));

        if (tools.completion()) outcome = Outcome::completed(tools.completion()->report, tools.completion()->answer);
    }
    t.outcome = outcome.value_or(Outcome::step_limit());
    t.success = score_trajectory(t, task) ? Success::Succeeded : Success::Failed;
    validate(t);
    return t;
}

std::vector<Trajectory> AgentRuntime::run_batch(const std::vector<RunSpec>& specs, int workers) {
    return parallel_map(specs.size(), static_cast<std::size_t>(std::max(1, workers)),
                        [&](std::size_t i) { return run_trajectory(specs[i]); });
}

std::vector<ChatMessage> AgentRuntime::state_messages(const Trajectory& trajectory, const Task& task, int step_index,
                                                      const std::optional<std::string>& corrective_hint,
                                                      const PromptProfile* profile_override) {
    if (trajectory.task_id != task.task_id) {
        throw ValidationError("task_id", "trajectory " + trajectory.trajectory_id + " belongs to another task");
    }
    if (step_index < 1 || step_index > static_cast<int>(trajectory.steps.size())) {
        throw NotFoundError(fmt::format("trajectory {} has no step {}", trajectory.trajectory_id, step_index));
    }
    PromptProfile profile = profile_override ? *profile_override : profile_from_json(trajectory.prompt_profile);
    std::vector<Step> history(trajectory.steps.begin(), trajectory.steps.begin() + (step_index - 1));
    PromptTail tail;
    tail.corrective_hint = corrective_hint;
    return assemble_prompt(task, profile, history, trajectory.steps[static_cast<std::size_t>(step_index - 1)].status,
                           tail);
}

InjectResult AgentRuntime::inject_hint_and_continue(const Trajectory& trajectory, const Task& task, int step_index,
                                                    const hints::HintSection& hint, const ModelTag& model,
                                                    const SamplingParams& sampling, int m, std::uint64_t seed) {
    if (hint.kind != hints::HintKind::Corrective || hint.draft) {
        throw ValidationError("hint", "only bound corrective hints can be injected");
    }
    if (m < 1) throw ValidationError("m", "at least one sample is required");
    PromptProfile profile = profile_from_json(trajectory.prompt_profile);
    std::vector<Step> history(trajectory.steps.begin(),
                              trajectory.steps.begin() + std::min<std::ptrdiff_t>(step_index - 1,
                                                                                  static_cast<std::ptrdiff_t>(trajectory.steps.size())));
    auto teacher = state_messages(trajectory, task, step_index, hint.text);
    const StatusSnapshot& status = trajectory.steps[static_cast<std::size_t>(step_index - 1)].status;
    auto build = [&](const PromptTail& tail) { return assemble_prompt(task, profile, history, status, tail); };
    const std::string ledger_key = fmt::format("{}@{}/inject", trajectory.trajectory_id, step_index);
    // Hint injection happens offline; the trajectory budget does not apply.
    const std::int64_t unlimited = std::numeric_limits<std::int64_t>::max();

    InjectResult result;
    for (int j = 0; j < m; ++j) {
        std::uint64_t s = seed + static_cast<std::uint64_t>(j);
        PromptTail mono_tail;
        mono_tail.corrective_hint = hint.text;
        auto mono = request_section(model, sampling, s, build, mono_tail, unlimited, ledger_key);
        if (!mono.ok) {
            ++result.malformed;
            continue;
        }
        PromptTail code_tail;
        code_tail.phase = Phase::Code;
        code_tail.pending_monologue = mono.body;
        code_tail.corrective_hint = hint.text;
        auto code = request_section(model, sampling, s, build, code_tail, unlimited, ledger_key);
        if (!code.ok) {
            ++result.malformed;
            continue;
        }
        ActionSample sample;
        sample.state = {trajectory.trajectory_id, step_index};
        sample.hint_id = hint.hint_id;
        sample.sample_index = j;
        sample.seed = s;
        sample.teacher_messages = teacher;
        sample.monologue = mono.body;
        sample.code = code.body;
        sample.logprobs = std::move(mono.logprobs);
        sample.logprobs.insert(sample.logprobs.end(), code.logprobs.begin(), code.logprobs.end());
        result.samples.push_back(std::move(sample));
    }
    return result;
}

} // namespace hintcoach::agent
