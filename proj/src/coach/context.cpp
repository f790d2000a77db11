// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/coach/context.hpp"

#include <algorithm>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"

namespace hintcoach::coach {

RunContext::RunContext(std::filesystem::path run_dir) : RunContext(std::move(run_dir), Options{}) {}

RunContext::RunContext(std::filesystem::path run_dir, Options options)
    : run_dir_(std::move(run_dir)),
      store_(run_dir_, RunStore::Options{options.sync_writes}),
      gateway_(options.gateway) {
    auto world_path = run_dir_ / kWorldFile;
    if (std::filesystem::exists(world_path)) {
        world_ = std::make_shared<const world::World>(
            world::import_world(nlohmann::json::parse(read_file(world_path.string()))));
    }
    auto tasks_path = run_dir_ / kTasksFile;
    if (std::filesystem::exists(tasks_path)) tasks_ = load_tasks_jsonl(tasks_path.string());
    auto ref_path = run_dir_ / kReferenceFile;
    if (std::filesystem::exists(ref_path)) {
        reference_ = nlohmann::json::parse(read_file(ref_path.string()))
                         .get<std::map<std::string, std::vector<std::string>>>();
    }
    reload_hints();
}

std::shared_ptr<const world::World> RunContext::world() const {
    if (!world_) throw NotFoundError("no world in " + run_dir_.string() + "; run `world gen` first");
    return world_;
}

void RunContext::set_world(world::World w) {
    write_file_atomic((run_dir_ / kWorldFile).string(), world::export_world(w).dump() + "\n");
    world_ = std::make_shared<const world::World>(std::move(w));
    runtime_.reset();
}

std::map<std::string, Task> RunContext::task_map() const {
    std::map<std::string, Task> out;
    for (const auto& t : tasks_) out.emplace(t.task_id, t);
    return out;
}

const Task& RunContext::task(const std::string& task_id) const {
    auto it = std::find_if(tasks_.begin(), tasks_.end(), [&](const auto& t) { return t.task_id == task_id; });
    if (it == tasks_.end()) throw NotFoundError("task " + task_id);
    return *it;
}

void RunContext::set_tasks(std::vector<Task> tasks, std::map<std::string, std::vector<std::string>> reference_cells) {
    save_tasks_jsonl((run_dir_ / kTasksFile).string(), tasks);
    write_file_atomic((run_dir_ / kReferenceFile).string(), nlohmann::json(reference_cells).dump(2) + "\n");
    tasks_ = std::move(tasks);
    reference_ = std::move(reference_cells);
}

void RunContext::save_hints() { hints_.save((run_dir_ / kHintsFile).string()); }

void RunContext::reload_hints() {
    auto path = run_dir_ / kHintsFile;
    hints_ = std::filesystem::exists(path) ? hints::HintLedger::load(path.string()) : hints::HintLedger();
}

ModelTag RunContext::require_model(const std::string& name) {
    auto tag = store_.find_model(name);
    if (!tag) throw NotFoundError("model '" + name + "' is not registered");
    std::lock_guard lock(models_mu_);
    if (!bound_models_[name]) {
        if (tag->backend_kind == BackendKind::Scripted) {
            std::filesystem::path script(tag->endpoint_or_script);
            if (script.is_relative()) script = run_dir_ / script;
            gateway_.register_backend(name, gateway::ScriptedBackend::from_file(script.string()));
        }
        bound_models_[name] = true;
    }
    return *tag;
}

agent::AgentRuntime& RunContext::runtime() {
    if (!runtime_) runtime_ = std::make_unique<agent::AgentRuntime>(gateway_, world());
    return *runtime_;
}

std::vector<std::pair<std::string, std::vector<std::string>>> default_initial_hints() {
    return {
        {"Work in small steps: print intermediate results and read the observation before deciding on the next "
         "call.",
         {"flights", "coffee", "yelp", "dblp", "agenda"}},
        {"Load the table once with load_db, narrow it with data_filter using the exact column names from the "
         "tool documentation, then read values with get_value. Dates in the tables use the YYYY-MM-DD format.",
         {"flights", "coffee", "yelp"}},
        {"Load PaperNet or AuthorNet with load_graph before checking nodes, neighbours or edges; node names must "
         "match exactly.",
         {"dblp"}},
        {"retrieve_agenda returns the most relevant entries for a keyword query; include the person and the "
         "event in the query and read the returned text carefully.",
         {"agenda"}},
        {"Finish by calling complete_task with a short report and the bare answer, without units or extra words.",
         {"flights", "coffee", "yelp", "dblp", "agenda"}},
    };
}

} // namespace hintcoach::coach
