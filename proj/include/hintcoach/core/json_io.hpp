// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"

namespace hintcoach {

void to_json(nlohmann::json& j, const Task& v);
void from_json(const nlohmann::json& j, Task& v);
void to_json(nlohmann::json& j, const StatusSnapshot& v);
void from_json(const nlohmann::json& j, StatusSnapshot& v);
void to_json(nlohmann::json& j, const Step& v);
void from_json(const nlohmann::json& j, Step& v);
void to_json(nlohmann::json& j, const Outcome& v);
void from_json(const nlohmann::json& j, Outcome& v);
void to_json(nlohmann::json& j, const Trajectory& v);
void from_json(const nlohmann::json& j, Trajectory& v);
void to_json(nlohmann::json& j, const StateRef& v);
void from_json(const nlohmann::json& j, StateRef& v);
void to_json(nlohmann::json& j, const ModelTag& v);
void from_json(const nlohmann::json& j, ModelTag& v);
void to_json(nlohmann::json& j, const MistakeFinding& v);
void from_json(const nlohmann::json& j, MistakeFinding& v);
void to_json(nlohmann::json& j, const RoundManifest& v);
void from_json(const nlohmann::json& j, RoundManifest& v);

/// Reads a whole file. Throws StorageError.
std::string read_file(const std::string& path);
/// Writes via a temporary file and rename so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

std::vector<Task> load_tasks_jsonl(const std::string& path);
void save_tasks_jsonl(const std::string& path, const std::vector<Task>& tasks);

} // namespace hintcoach
