// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/core/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hintcoach/core/error.hpp"

namespace hintcoach {

using nlohmann::json;

void to_json(json& j, const Task& v) {
    j = json{{"task_id", v.task_id},
             {"group", v.group},
             {"template_id", v.template_id},
             {"description", v.description},
             {"expected_answer", v.expected_answer},
             {"split", to_string(v.split)},
             {"tool_allowlist", v.tool_allowlist}};
}

void from_json(const json& j, Task& v) {
    j.at("task_id").get_to(v.task_id);
    j.at("group").get_to(v.group);
    j.at("template_id").get_to(v.template_id);
    j.at("description").get_to(v.description);
    j.at("expected_answer").get_to(v.expected_answer);
    v.split = parse_split(j.at("split").get<std::string>());
    j.at("tool_allowlist").get_to(v.tool_allowlist);
}

void to_json(json& j, const StatusSnapshot& v) {
    j = json{{"now", v.now},
             {"elapsed", v.elapsed},
             {"step_number", v.step_number},
             {"resources_spent", v.resources_spent},
             {"input_tokens_remaining", v.input_tokens_remaining}};
}

void from_json(const json& j, StatusSnapshot& v) {
    j.at("now").get_to(v.now);
    j.at("elapsed").get_to(v.elapsed);
    j.at("step_number").get_to(v.step_number);
    j.at("resources_spent").get_to(v.resources_spent);
    j.at("input_tokens_remaining").get_to(v.input_tokens_remaining);
}

void to_json(json& j, const Step& v) {
    j = json{{"index", v.index},
             {"monologue", v.monologue},
             {"code", v.code},
             {"observation", v.observation},
             {"input_tokens", v.input_tokens},
             {"output_tokens", v.output_tokens},
             {"status", v.status}};
}

void from_json(const json& j, Step& v) {
    j.at("index").get_to(v.index);
    j.at("monologue").get_to(v.monologue);
    j.at("code").get_to(v.code);
    j.at("observation").get_to(v.observation);
    j.at("input_tokens").get_to(v.input_tokens);
    j.at("output_tokens").get_to(v.output_tokens);
    j.at("status").get_to(v.status);
}

void to_json(json& j, const Outcome& v) {
    j = json{{"kind", to_string(v.kind)}};
    if (v.kind == OutcomeKind::Completed) {
        j["answer"] = v.answer;
        j["report"] = v.report;
    }
    if (v.kind == OutcomeKind::Aborted) j["reason"] = v.reason;
}

void from_json(const json& j, Outcome& v) {
    v = Outcome{};
    v.kind = parse_outcome_kind(j.at("kind").get<std::string>());
    v.answer = j.value("answer", "");
    v.report = j.value("report", "");
    v.reason = j.value("reason", "");
}

void to_json(json& j, const Trajectory& v) {
    j = json{{"trajectory_id", v.trajectory_id},
             {"task_id", v.task_id},
             {"model_tag", v.model_tag},
             {"hint_profile_id", v.hint_profile_id},
             {"prompt_profile", v.prompt_profile},
             {"project_start", v.project_start},
             {"steps", v.steps},
             {"outcome", v.outcome},
             {"success", to_string(v.success)},
             {"usage_source", v.usage_source},
             {"created_at", v.created_at},
             {"seed", v.seed},
             {"run_key", v.run_key}};
}

void from_json(const json& j, Trajectory& v) {
    j.at("trajectory_id").get_to(v.trajectory_id);
    j.at("task_id").get_to(v.task_id);
    j.at("model_tag").get_to(v.model_tag);
    j.at("hint_profile_id").get_to(v.hint_profile_id);
    v.prompt_profile = j.value("prompt_profile", json::object());
    v.project_start = j.value("project_start", "");
    j.at("steps").get_to(v.steps);
    j.at("outcome").get_to(v.outcome);
    v.success = parse_success(j.at("success").get<std::string>());
    v.usage_source = j.value("usage_source", "approximate");
    v.created_at = j.value("created_at", "");
    j.at("seed").get_to(v.seed);
    v.run_key = j.value("run_key", "");
}

void to_json(json& j, const StateRef& v) { j = json{{"trajectory_id", v.trajectory_id}, {"step_index", v.step_index}}; }

void from_json(const json& j, StateRef& v) {
    j.at("trajectory_id").get_to(v.trajectory_id);
    j.at("step_index").get_to(v.step_index);
}

void to_json(json& j, const ModelTag& v) {
    j = json{{"name", v.name},
             {"round_index", v.round_index},
             {"backend_kind", to_string(v.backend_kind)},
             {"endpoint_or_script", v.endpoint_or_script}};
}

void from_json(const json& j, ModelTag& v) {
    j.at("name").get_to(v.name);
    j.at("round_index").get_to(v.round_index);
    v.backend_kind = parse_backend_kind(j.at("backend_kind").get<std::string>());
    j.at("endpoint_or_script").get_to(v.endpoint_or_script);
}

void to_json(json& j, const MistakeFinding& v) {
    j = json{{"finding_id", v.finding_id},
             {"filter_id", v.filter_id},
             {"state", v.state},
             {"verdict_reasoning", v.verdict_reasoning},
             {"round_index", v.round_index}};
}

void from_json(const json& j, MistakeFinding& v) {
    j.at("finding_id").get_to(v.finding_id);
    j.at("filter_id").get_to(v.filter_id);
    j.at("state").get_to(v.state);
    j.at("verdict_reasoning").get_to(v.verdict_reasoning);
    j.at("round_index").get_to(v.round_index);
}

void to_json(json& j, const RoundManifest& v) {
    j = json{{"manifest_id", v.manifest_id},
             {"round_index", v.round_index},
             {"model_tag_in", v.model_tag_in},
             {"model_tag_out", v.model_tag_out},
             {"status", v.status},
             {"stages", v.stages},
             {"dataset_ids", v.dataset_ids},
             {"filter_ids", v.filter_ids},
             {"hint_ids", v.hint_ids},
             {"counts", v.counts},
             {"config", v.config},
             {"plan_hash", v.plan_hash},
             {"created_at", v.created_at}};
}

void from_json(const json& j, RoundManifest& v) {
    j.at("manifest_id").get_to(v.manifest_id);
    j.at("round_index").get_to(v.round_index);
    j.at("model_tag_in").get_to(v.model_tag_in);
    j.at("model_tag_out").get_to(v.model_tag_out);
    j.at("status").get_to(v.status);
    j.at("stages").get_to(v.stages);
    j.at("dataset_ids").get_to(v.dataset_ids);
    j.at("filter_ids").get_to(v.filter_ids);
    j.at("hint_ids").get_to(v.hint_ids);
    j.at("counts").get_to(v.counts);
    v.config = j.value("config", json::object());
    v.plan_hash = j.value("plan_hash", "");
    v.created_at = j.value("created_at", "");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    auto target = fs::path(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw StorageError("cannot create directory '" + target.parent_path().string() + "': " + ec.message());
    }
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw StorageError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw StorageError("cannot rename '" + tmp.string() + "': " + ec.message());
}

std::vector<Task> load_tasks_jsonl(const std::string& path) {
    std::vector<Task> tasks;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Task task = json::parse(line).get<Task>();
        validate(task);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

void save_tasks_jsonl(const std::string& path, const std::vector<Task>& tasks) {
    std::string out;
    for (const auto& task : tasks) {
        json j = task;
        j["schema_version"] = kSchemaVersion;
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

} // namespace hintcoach
