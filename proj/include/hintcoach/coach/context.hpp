// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hintcoach/agent/runtime.hpp"
#include "hintcoach/core/store.hpp"
#include "hintcoach/gateway/gateway.hpp"
#include "hintcoach/hints/ledger.hpp"
#include "hintcoach/world/world.hpp"

namespace hintcoach::coach {

/// File names inside a run directory, next to the store's own files.
inline constexpr const char* kWorldFile = "world.json";
inline constexpr const char* kTasksFile = "tasks.jsonl";
inline constexpr const char* kReferenceFile = "reference_cells.json";
inline constexpr const char* kHintsFile = "hints.json";
inline constexpr const char* kReportsDir = "reports";

/// Stock initial hints for the built-in task groups (text, groups), used to bootstrap a fresh run.
std::vector<std::pair<std::string, std::vector<std::string>>> default_initial_hints();

/// Everything loaded from one run directory: store, world, tasks, hint ledger and the model gateway.
class RunContext {
public:
    struct Options {
        gateway::GatewayOptions gateway;
        bool sync_writes = true;
    };

    /// Opens (or creates) the run directory. World and tasks are loaded when present.
    explicit RunContext(std::filesystem::path run_dir);
    RunContext(std::filesystem::path run_dir, Options options);

    const std::filesystem::path& run_dir() const { return run_dir_; }
    RunStore& store() { return store_; }
    gateway::Gateway& gateway() { return gateway_; }

    bool has_world() const { return world_ != nullptr; }
    /// Throws NotFoundError when no world was generated yet.
    std::shared_ptr<const world::World> world() const;
    void set_world(world::World world);

    const std::vector<Task>& tasks() const { return tasks_; }
    std::map<std::string, Task> task_map() const;
    const Task& task(const std::string& task_id) const;
    void set_tasks(std::vector<Task> tasks, std::map<std::string, std::vector<std::string>> reference_cells);
    const std::map<std::string, std::vector<std::string>>& reference_cells() const { return reference_; }

    /// The ledger is shared; writers should call save_hints() afterwards.
    hints::HintLedger& hints() { return hints_; }
    void save_hints();
    void reload_hints();

    /// Registered model by name, with its backend bound (scripted paths resolve against the run
    /// directory). Throws NotFoundError when unregistered.
    ModelTag require_model(const std::string& name);

    /// Agent runtime over the loaded world.
    agent::AgentRuntime& runtime();

    /// Serializes mutating operations (rounds, binds) within the process.
    std::mutex& write_mutex() { return write_mu_; }

private:
    std::filesystem::path run_dir_;
    RunStore store_;
    gateway::Gateway gateway_;
    std::shared_ptr<const world::World> world_;
    std::vector<Task> tasks_;
    std::map<std::string, std::vector<std::string>> reference_;
    hints::HintLedger hints_;
    std::unique_ptr<agent::AgentRuntime> runtime_;
    std::mutex models_mu_;
    std::map<std::string, bool> bound_models_;
    std::mutex write_mu_;
};

} // namespace hintcoach::coach
