// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/coach/service.hpp"

#include <filesystem>
#include <set>

#include <fmt/format.h>
#include <httplib.h>

#include "hintcoach/agent/prompt.hpp"
#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/distill/export.hpp"
#include "hintcoach/review/flagged.hpp"

namespace hintcoach::coach {

struct CoachService::Server {
    httplib::Server http;
};

namespace {

ServiceResponse error_response(int status, const std::string& code, const std::string& message) {
    return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

int status_for(const Error& e) {
    const auto& code = e.code();
    if (code == "validation" || code == "parse" || code == "configuration") return 400;
    if (code == "not_found") return 404;
    if (code == "conflict") return 409;
    return 500;
}

nlohmann::json parse_body(const ServiceRequest& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        auto j = nlohmann::json::parse(req.body);
        if (!j.is_object()) throw ValidationError("body", "request body must be a JSON object");
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("body", std::string("request body is not valid JSON: ") + e.what());
    }
}

std::string require_author(const nlohmann::json& body) {
    if (!body.contains("author") || !body.at("author").is_string() || trim(body.at("author").get<std::string>()).empty()) {
        throw ValidationError("author", "every write needs a non-empty author");
    }
    return body.at("author").get<std::string>();
}

std::string require_string(const nlohmann::json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string()) {
        throw ValidationError(key, std::string("'") + key + "' is required and must be a string");
    }
    return body.at(key).get<std::string>();
}

int require_int(const nlohmann::json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_number_integer()) {
        throw ValidationError(key, std::string("'") + key + "' is required and must be an integer");
    }
    return body.at(key).get<int>();
}

std::vector<std::string> path_parts(const std::string& path) {
    std::vector<std::string> out;
    for (auto& p : split(path, "/"))
        if (!p.empty()) out.push_back(p);
    return out;
}

nlohmann::json step_view(const Step& s) {
    return {{"index", s.index},
            {"sections",
             {{"status", agent::render_status(s.status)},
              {"monologue", s.monologue},
              {"code", s.code},
              {"observation", s.observation}}},
            {"input_tokens", s.input_tokens},
            {"output_tokens", s.output_tokens}};
}

nlohmann::json trajectory_summary(const Trajectory& t) {
    return {{"trajectory_id", t.trajectory_id},
            {"task_id", t.task_id},
            {"model_tag", t.model_tag},
            {"hint_profile_id", t.hint_profile_id},
            {"steps", t.steps.size()},
            {"outcome", t.outcome},
            {"success", to_string(t.success)},
            {"run_key", t.run_key},
            {"created_at", t.created_at}};
}

std::set<std::string> known_filter_ids(const std::filesystem::path& run_dir) {
    std::set<std::string> ids;
    auto dir = run_dir / "filters";
    if (!std::filesystem::is_directory(dir)) return ids;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        for (const auto& f : review::load_filters(entry.path().string())) ids.insert(f.filter_id);
    }
    return ids;
}

} // namespace

CoachService::CoachService(RunContext& context) : ctx_(context) {}
CoachService::~CoachService() = default;

void CoachService::audit(const std::string& author, const std::string& action, const std::string& target,
                         const nlohmann::json& details) {
    ctx_.store().append_audit({{"timestamp", utc_timestamp_now()},
                               {"author", author},
                               {"action", action},
                               {"target", target},
                               {"details", details}});
}

ServiceResponse CoachService::handle(const ServiceRequest& request) {
    try {
        return route(request);
    } catch (const Error& e) {
        return error_response(status_for(e), e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
        return error_response(400, "validation", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

ServiceResponse CoachService::route(const ServiceRequest& req) {
    const auto parts = path_parts(req.path);
    const auto& m = req.method;
    auto query = [&](const std::string& key) -> std::optional<std::string> {
        auto it = req.query.find(key);
        if (it == req.query.end()) return std::nullopt;
        return it->second;
    };
    if (parts.empty() || parts[0] != "api") throw NotFoundError("no route for " + req.path);
    const std::size_t n = parts.size();
    auto is = [&](std::initializer_list<const char*> pattern) {
        if (pattern.size() != n) return false;
        std::size_t i = 0;
        for (const char* p : pattern) {
            if (std::string(p) != "*" && parts[i] != p) return false;
            ++i;
        }
        return true;
    };

    // ---- reads ----
    if (m == "GET") {
        if (is({"api", "health"})) {
            return {200, {{"status", "ok"}, {"run_dir", ctx_.run_dir().string()}, {"schema_version", kSchemaVersion}}};
        }
        if (is({"api", "tasks"})) {
            auto out = nlohmann::json::array();
            for (const auto& t : ctx_.tasks()) {
                if (auto s = query("split"); s && to_string(t.split) != *s) continue;
                out.push_back(t);
            }
            return {200, {{"tasks", out}}};
        }
        if (is({"api", "trajectories"})) {
            auto out = nlohmann::json::array();
            for (const auto& t : ctx_.store().trajectories()) {
                if (auto q = query("task_id"); q && t.task_id != *q) continue;
                if (auto q = query("model_tag"); q && t.model_tag != *q) continue;
                if (auto q = query("success"); q && to_string(t.success) != *q) continue;
                out.push_back(trajectory_summary(t));
            }
            return {200, {{"trajectories", out}}};
        }
        if (is({"api", "trajectories", "*"})) {
            auto t = ctx_.store().get_trajectory(parts[2]);
            auto body = trajectory_summary(t);
            body["project_start"] = t.project_start;
            body["prompt_profile"] = t.prompt_profile;
            auto steps = nlohmann::json::array();
            for (const auto& s : t.steps) steps.push_back(step_view(s));
            body["steps"] = steps;
            auto findings = nlohmann::json::array();
            for (const auto& f : ctx_.store().findings())
                if (f.state.trajectory_id == t.trajectory_id) findings.push_back(f);
            body["findings"] = findings;
            auto tasks = ctx_.task_map();
            if (auto it = tasks.find(t.task_id); it != tasks.end()) body["task"] = it->second;
            return {200, body};
        }
        if (is({"api", "findings"})) {
            auto out = nlohmann::json::array();
            for (const auto& f : ctx_.store().findings()) {
                if (auto q = query("round"); q && std::to_string(f.round_index) != *q) continue;
                if (auto q = query("filter_id"); q && f.filter_id != *q) continue;
                if (auto q = query("trajectory_id"); q && f.state.trajectory_id != *q) continue;
                out.push_back(f);
            }
            return {200, {{"findings", out}}};
        }
        if (is({"api", "hints"})) {
            auto out = nlohmann::json::array();
            for (const auto& h : ctx_.hints().all()) out.push_back(h);
            return {200, {{"hints", out}}};
        }
        if (is({"api", "hints", "*"})) {
            auto h = ctx_.hints().find(parts[2]);
            if (!h) throw NotFoundError("hint " + parts[2]);
            return {200, nlohmann::json(*h)};
        }
        if (is({"api", "manifests"})) {
            return {200, {{"manifests", ctx_.store().manifests()}}};
        }
        if (is({"api", "manifests", "*"})) {
            for (const auto& man : ctx_.store().manifests())
                if (man.manifest_id == parts[2]) return {200, nlohmann::json(man)};
            throw NotFoundError("manifest " + parts[2]);
        }
        if (is({"api", "datasets", "*"})) {
            auto dir = ctx_.store().datasets_dir() / parts[2];
            for (const auto& man : ctx_.store().manifests()) {
                if (std::find(man.dataset_ids.begin(), man.dataset_ids.end(), parts[2]) != man.dataset_ids.end()) {
                    dir = man.config.value("dataset_dir", dir.string());
                }
            }
            auto loaded = distill::load_dataset(dir);
            return {200, distill::manifest_to_json(loaded.manifest)};
        }
        if (is({"api", "reports"})) {
            auto out = nlohmann::json::array();
            auto dir = ctx_.run_dir() / kReportsDir;
            if (std::filesystem::is_directory(dir)) {
                std::vector<std::string> names;
                for (const auto& e : std::filesystem::directory_iterator(dir))
                    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
                std::sort(names.begin(), names.end());
                for (const auto& name : names) out.push_back(name);
            }
            return {200, {{"reports", out}}};
        }
        if (is({"api", "reports", "*"})) {
            auto path = ctx_.run_dir() / kReportsDir / (parts[2] + ".json");
            if (parts[2].find("..") != std::string::npos || !std::filesystem::exists(path)) {
                throw NotFoundError("report " + parts[2]);
            }
            return {200, nlohmann::json::parse(read_file(path.string()))};
        }
        if (is({"api", "models"})) {
            return {200, {{"models", ctx_.store().models()}}};
        }
        if (is({"api", "audit"})) {
            return {200, {{"audit", ctx_.store().audit_log()}}};
        }
        throw NotFoundError("no route for GET " + req.path);
    }

    // ---- writes ----
    auto body = parse_body(req);
    const std::string author = require_author(body);
    std::lock_guard lock(ctx_.write_mutex());

    if (m == "POST" && is({"api", "hints"})) {
        ctx_.reload_hints();
        auto h = ctx_.hints().create_draft(require_string(body, "text"), author);
        ctx_.save_hints();
        audit(author, "hint.create_draft", h.hint_id, {{"text", h.text}});
        return {201, nlohmann::json(h)};
    }
    if (m == "PUT" && is({"api", "hints", "*"})) {
        ctx_.reload_hints();
        auto h = ctx_.hints().update_draft(parts[2], require_string(body, "text"), author);
        ctx_.save_hints();
        audit(author, "hint.update_draft", h.hint_id, {{"text", h.text}});
        return {200, nlohmann::json(h)};
    }
    if (m == "POST" && is({"api", "hints", "preview"})) {
        auto text = require_string(body, "text");
        hints::validate_hint_text(text);
        auto trajectory_id = require_string(body, "trajectory_id");
        int step = require_int(body, "step_index");
        ctx_.store().check_state({trajectory_id, step});
        auto t = ctx_.store().get_trajectory(trajectory_id);
        const auto& task = ctx_.task(t.task_id);
        auto model = ctx_.require_model(body.value("model_tag", t.model_tag));
        hints::HintSection preview;
        preview.hint_id = "preview";
        preview.text = text;
        preview.kind = hints::HintKind::Corrective;
        preview.author = author;
        agent::SamplingParams sp;
        sp.temperature = body.value("temperature", 0.7);
        auto result = ctx_.runtime().inject_hint_and_continue(t, task, step, preview, model, sp, 1,
                                                              body.value("seed", std::uint64_t{0}));
        audit(author, "hint.preview", fmt::format("{}@{}", trajectory_id, step), {{"text", text}});
        const auto& original = t.steps[static_cast<std::size_t>(step - 1)];
        nlohmann::json out = {{"state", StateRef{trajectory_id, step}},
                              {"original", {{"monologue", original.monologue}, {"code", original.code}}},
                              {"malformed", result.malformed}};
        if (!result.samples.empty()) {
            const auto& s = result.samples.front();
            out["action"] = {{"monologue", s.monologue},
                             {"code", s.code},
                             {"action_text", agent::action_text(s.monologue, s.code)}};
        }
        return {200, out};
    }
    if (m == "POST" && is({"api", "hints", "*", "bind"})) {
        ctx_.reload_hints();
        ctx_.hints().set_known_filters(known_filter_ids(ctx_.run_dir()));
        auto h = ctx_.hints().bind_draft(parts[2], require_string(body, "filter_id"), require_int(body, "round"), author);
        ctx_.save_hints();
        audit(author, "hint.bind", h.hint_id, {{"filter_id", h.filter_id}, {"round", h.round_introduced}});
        return {200, nlohmann::json(h)};
    }
    if (m == "POST" && is({"api", "filters", "run"})) {
        auto path = std::filesystem::path(require_string(body, "filter_file"));
        if (path.is_relative() && !std::filesystem::exists(path)) path = ctx_.run_dir() / path;
        auto filters = review::load_filters(path.string());
        int round = require_int(body, "round");
        std::vector<Trajectory> trajectories;
        if (body.contains("trajectory_ids")) {
            for (const auto& id : body.at("trajectory_ids").get<std::vector<std::string>>())
                trajectories.push_back(ctx_.store().get_trajectory(id));
        } else {
            trajectories = ctx_.store().trajectories();
        }
        review::ReviewOptions ro;
        ro.round_index = round;
        ro.judge.failed_only = body.value("failed_only", false);
        std::optional<ModelTag> judge;
        if (body.contains("judge_model")) judge = ctx_.require_model(body.at("judge_model").get<std::string>());
        auto report = review::review_trajectories(filters, trajectories, ctx_.task_map(), &ctx_.gateway(),
                                                  judge.value_or(ModelTag{}), ro);
        std::set<std::pair<std::string, StateRef>> stored;
        for (const auto& f : ctx_.store().findings())
            if (f.round_index == round) stored.emplace(f.filter_id, f.state);
        int added = 0;
        for (const auto& f : report.findings) {
            if (stored.count({f.filter_id, f.state})) continue;
            ctx_.store().append(f);
            ++added;
        }
        std::vector<std::string> order;
        for (const auto& f : filters) order.push_back(f.filter_id);
        auto flagged = review::collect_flagged_states(report.findings, body.value("cap_per_filter", 16), order);
        auto errors = nlohmann::json::array();
        for (const auto& e : report.judge_errors) {
            errors.push_back({{"filter_id", e.filter_id}, {"state", e.state}});
        }
        audit(author, "filters.run", path.string(), {{"round", round}, {"new_findings", added}});
        return {200,
                {{"findings", report.findings.size()},
                 {"new_findings", added},
                 {"flagged_states", flagged.states},
                 {"judge_errors", errors}}};
    }
    if (m == "POST" && is({"api", "models"})) {
        ModelTag tag;
        tag.name = require_string(body, "name");
        tag.round_index = body.value("round_index", 0);
        tag.backend_kind = parse_backend_kind(require_string(body, "backend_kind"));
        tag.endpoint_or_script = require_string(body, "endpoint_or_script");
        ctx_.store().register_model(tag);
        audit(author, "model.register", tag.name, nlohmann::json(tag));
        return {201, nlohmann::json(tag)};
    }
    if (m == "POST" && is({"api", "rounds", "*", "approve"})) {
        auto stage = require_string(body, "stage");
        audit(author, "round.approve", "round " + parts[2], {{"stage", stage}, {"note", body.value("note", "")}});
        return {200, {{"approved", true}, {"round", parts[2]}, {"stage", stage}}};
    }
    throw NotFoundError("no route for " + m + " " + req.path);
}

int CoachService::bind(const std::string& host, int port) {
    server_ = std::make_unique<Server>();
    auto handler = [this](const httplib::Request& hreq, httplib::Response& hres) {
        ServiceRequest r;
        r.method = hreq.method;
        r.path = hreq.path;
        for (const auto& [k, v] : hreq.params) r.query.emplace(k, v);
        r.body = hreq.body;
        auto out = handle(r);
        hres.status = out.status;
        hres.set_content(out.body.dump(), "application/json");
    };
    const std::string pattern = "/api/.*";
    server_->http.Get(pattern, handler);
    server_->http.Post(pattern, handler);
    server_->http.Put(pattern, handler);
    int bound = port == 0 ? server_->http.bind_to_any_port(host) : (server_->http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw ConfigurationError(fmt::format("cannot listen on {}:{}", host, port));
    return bound;
}

void CoachService::listen() {
    if (!server_) throw ConfigurationError("bind() must be called before listen()");
    server_->http.listen_after_bind();
}

void CoachService::stop() {
    if (server_) server_->http.stop();
}

} // namespace hintcoach::coach
