// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/coach/plan.hpp"

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::coach {

void validate(const RoundPlan& p) {
    if (p.round_index < 1) throw ValidationError("round_index", "must be at least 1");
    if (p.model_tag_in.empty()) throw ValidationError("model_tag_in", "must not be empty");
    if (p.round_index == 1 && !p.filter_file.empty()) {
        throw ValidationError("filter_file", "round 1 distils the initial hints and takes no filters");
    }
    if (p.round_index >= 2 && p.filter_file.empty()) throw ValidationError("filter_file", "required from round 2 on");
    if (p.sampling.rollouts_per_task < 1) throw ValidationError("rollouts_per_task", "must be at least 1");
    if (p.sampling.m_per_state < 1) throw ValidationError("m_per_state", "must be at least 1");
    if (p.sampling.temperature < 0.0) throw ValidationError("temperature", "must not be negative");
    if (p.sampling.top_k_logprobs < 0 || p.sampling.top_k_logprobs > 20) {
        throw ValidationError("top_k_logprobs", "must lie in [0, 20]");
    }
    if (p.cap_per_filter < 0) throw ValidationError("cap_per_filter", "must not be negative");
    if (!(p.dropout_p >= 0.0 && p.dropout_p <= 1.0)) throw ValidationError("dropout_p", "must lie in [0, 1]");
    if (!(p.val_fraction >= 0.0 && p.val_fraction < 1.0)) throw ValidationError("val_fraction", "must lie in [0, 1)");
    if (p.balance.candidate_rollouts < 0) throw ValidationError("candidate_rollouts", "must not be negative");
    if (p.max_steps < 1) throw ValidationError("max_steps", "must be at least 1");
    if (p.max_input_tokens < 1) throw ValidationError("max_input_tokens", "must be at least 1");
    if (p.workers < 1) throw ValidationError("workers", "must be at least 1");
    if (p.handoff.model_tag_out.empty()) throw ValidationError("model_tag_out", "must not be empty");
    if (p.handoff.model_tag_out == p.model_tag_in) {
        throw ValidationError("model_tag_out", "must differ from model_tag_in");
    }
}

nlohmann::json plan_to_json(const RoundPlan& p) {
    nlohmann::json balance = {{"enabled", p.balance.enabled},
                              {"candidate_rollouts", p.balance.candidate_rollouts},
                              {"per_template_floor", p.balance.per_template_floor},
                              {"retention_quota", p.balance.retention_quota}};
    balance["per_group_floor"] = p.balance.per_group_floor ? nlohmann::json(*p.balance.per_group_floor) : nlohmann::json(nullptr);
    nlohmann::json j = {
        {"round_index", p.round_index},
        {"model_tag_in", p.model_tag_in},
        {"split", p.split},
        {"task_ids", p.task_ids},
        {"sampling",
         {{"rollouts_per_task", p.sampling.rollouts_per_task},
          {"m_per_state", p.sampling.m_per_state},
          {"temperature", p.sampling.temperature},
          {"max_output_tokens", p.sampling.max_output_tokens},
          {"top_k_logprobs", p.sampling.top_k_logprobs}}},
        {"filter_file", p.filter_file},
        {"judge_model", p.judge_model},
        {"judge_failed_only", p.judge_failed_only},
        {"cap_per_filter", p.cap_per_filter},
        {"dropout_p", p.dropout_p},
        {"drop_tool_docs", p.drop_tool_docs},
        {"balance", balance},
        {"mode", distill::to_string(p.mode)},
        {"val_fraction", p.val_fraction},
        {"handoff",
         {{"dataset_path", p.handoff.dataset_path},
          {"model_tag_out", p.handoff.model_tag_out},
          {"trainer", p.handoff.trainer}}},
        {"max_steps", p.max_steps},
        {"max_input_tokens", p.max_input_tokens},
        {"seed", p.seed},
        {"workers", p.workers},
    };
    j["valid_count"] = p.valid_count ? nlohmann::json(*p.valid_count) : nlohmann::json(nullptr);
    return j;
}

RoundPlan plan_from_json(const nlohmann::json& j) {
    RoundPlan p;
    try {
        p.round_index = j.value("round_index", 1);
        p.model_tag_in = j.value("model_tag_in", std::string());
        p.split = j.value("split", p.split);
        p.task_ids = j.value("task_ids", std::vector<std::string>{});
        if (j.contains("sampling")) {
            const auto& s = j.at("sampling");
            p.sampling.rollouts_per_task = s.value("rollouts_per_task", p.sampling.rollouts_per_task);
            p.sampling.m_per_state = s.value("m_per_state", p.sampling.m_per_state);
            p.sampling.temperature = s.value("temperature", p.sampling.temperature);
            p.sampling.max_output_tokens = s.value("max_output_tokens", p.sampling.max_output_tokens);
            p.sampling.top_k_logprobs = s.value("top_k_logprobs", p.sampling.top_k_logprobs);
        }
        p.filter_file = j.value("filter_file", std::string());
        p.judge_model = j.value("judge_model", std::string());
        p.judge_failed_only = j.value("judge_failed_only", false);
        p.cap_per_filter = j.value("cap_per_filter", p.cap_per_filter);
        p.dropout_p = j.value("dropout_p", p.dropout_p);
        p.drop_tool_docs = j.value("drop_tool_docs", false);
        if (j.contains("balance")) {
            const auto& b = j.at("balance");
            p.balance.enabled = b.value("enabled", true);
            p.balance.candidate_rollouts = b.value("candidate_rollouts", p.balance.candidate_rollouts);
            p.balance.per_template_floor = b.value("per_template_floor", 0);
            if (b.contains("per_group_floor") && !b.at("per_group_floor").is_null()) {
                p.balance.per_group_floor = b.at("per_group_floor").get<int>();
            }
            p.balance.retention_quota = b.value("retention_quota", 0);
        }
        p.mode = distill::parse_train_mode(j.value("mode", std::string("kl")));
        p.val_fraction = j.value("val_fraction", p.val_fraction);
        if (j.contains("valid_count") && !j.at("valid_count").is_null()) p.valid_count = j.at("valid_count").get<int>();
        if (j.contains("handoff")) {
            const auto& h = j.at("handoff");
            p.handoff.dataset_path = h.value("dataset_path", std::string());
            p.handoff.model_tag_out = h.value("model_tag_out", std::string());
            p.handoff.trainer = h.value("trainer", nlohmann::json::object());
        }
        p.max_steps = j.value("max_steps", p.max_steps);
        p.max_input_tokens = j.value("max_input_tokens", p.max_input_tokens);
        p.seed = j.value("seed", std::uint64_t{0});
        p.workers = j.value("workers", 1);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("plan", std::string("malformed round plan: ") + e.what());
    }
    validate(p);
    return p;
}

RoundPlan load_plan(const std::string& path) {
    try {
        return plan_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("plan", "plan file " + path + " is not valid JSON: " + e.what());
    }
}

std::string plan_hash(const RoundPlan& plan) {
    auto j = plan_to_json(plan);
    // Parallelism does not change results, so it does not change identity either.
    j.erase("workers");
    return hex64(fnv1a64(j.dump()));
}

const std::vector<std::string>& round_stages(int round_index) {
    static const std::vector<std::string> first = {"sample", "harvest", "dropout", "export"};
    static const std::vector<std::string> later = {"sample",  "filter",  "hint",  "sample_corrective",
                                                   "harvest", "balance", "export"};
    return round_index <= 1 ? first : later;
}

} // namespace hintcoach::coach
