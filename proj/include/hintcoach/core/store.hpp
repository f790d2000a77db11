// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"

namespace hintcoach {

/// Append-only persistence for one run directory.
///
/// Layout: `trajectories.jsonl`, `findings.jsonl`, `manifests.jsonl`, `models.jsonl`,
/// `audit.jsonl` and `datasets/<id>/...`. Every line is one complete JSON record carrying
/// `schema_version`. Records become visible to readers only once their terminating newline
/// is written; a partial trailing line is ignored.
///
/// Ids are assigned by the store and are monotone per family (`t-000001`, `f-000001`,
/// `m-000001`). Appends are serialized within the process by a mutex and across processes
/// by an advisory file lock.
class RunStore {
public:
    struct Options {
        bool sync_writes = true;
    };

    explicit RunStore(std::filesystem::path root);
    RunStore(std::filesystem::path root, Options options);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path datasets_dir() const { return root_ / "datasets"; }

    /// Validates and appends. Any id on the input is ignored; the assigned id is returned.
    std::string append(Trajectory trajectory);
    /// Also checks that the referenced trajectory exists and the step is in range.
    std::string append(MistakeFinding finding);
    std::string append(RoundManifest manifest);

    /// Registers a model tag. Throws ConflictError when the name is taken.
    void register_model(const ModelTag& tag);
    void append_audit(nlohmann::json entry);

    std::vector<Trajectory> trajectories() const;
    std::optional<Trajectory> find_trajectory(const std::string& trajectory_id) const;
    Trajectory get_trajectory(const std::string& trajectory_id) const;
    std::vector<MistakeFinding> findings() const;
    std::vector<RoundManifest> manifests() const;
    std::vector<ModelTag> models() const;
    std::optional<ModelTag> find_model(const std::string& name) const;
    std::vector<nlohmann::json> audit_log() const;

    /// Throws NotFoundError unless the state names an existing trajectory and in-range step.
    void check_state(const StateRef& state) const;

private:
    struct Family {
        std::string file;
        std::string prefix;
        std::uint64_t last_id = 0;
        std::uintmax_t known_size = 0;
    };

    std::string append_line(Family& family, nlohmann::json record, const std::string& id_field);
    std::vector<nlohmann::json> read_family(const std::string& file) const;
    void rescan(Family& family, const std::string& id_field);
    void refresh_step_index() const;

    std::filesystem::path root_;
    Options options_;
    mutable std::mutex mutex_;
    Family trajectories_{"trajectories.jsonl", "t-"};
    Family findings_{"findings.jsonl", "f-"};
    Family manifests_{"manifests.jsonl", "m-"};
    Family models_{"models.jsonl", ""};
    Family audit_{"audit.jsonl", ""};
    /// trajectory id -> step count, for referential integrity checks.
    mutable std::map<std::string, int> step_counts_;
    mutable std::uintmax_t indexed_size_ = 0;
};

/// Reads a JSON-lines file, skipping blank lines and an unterminated final line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

} // namespace hintcoach
