// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/distill/dropout.hpp"
#include "hintcoach/distill/sample.hpp"

namespace hintcoach::distill {

/// Version of the dataset line and manifest layout.
inline constexpr int kDatasetSchemaVersion = 1;

enum class TrainMode { Kl, CrossEntropy };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& text);

struct ExportOptions {
    std::string dataset_id;
    int round_index = 1;
    TrainMode mode = TrainMode::Kl;
    /// Validation share, used unless `valid_count` is given.
    double val_fraction = 0.1;
    std::optional<int> valid_count;
    std::uint64_t seed = 0;
    /// Echoed into the manifest so the trainer can redraw masks per epoch.
    DropoutConfig dropout;
    std::vector<std::string> source_trajectory_ids;
    std::vector<std::string> source_finding_ids;
};

struct DatasetManifest {
    std::string dataset_id;
    int round_index = 1;
    TrainMode mode = TrainMode::Kl;
    int total = 0;
    int train_count = 0;
    int valid_count = 0;
    std::map<std::string, int> counts_by_group;
    std::map<std::string, int> counts_by_hint;
    std::map<std::string, int> counts_by_source;
    DropoutConfig dropout;
    std::uint64_t seed = 0;
    std::vector<std::string> source_trajectory_ids;
    std::vector<std::string> source_finding_ids;
    /// fnv1a64 over train.jsonl, valid.jsonl and the manifest body, hex.
    std::string content_hash;

    bool operator==(const DatasetManifest&) const = default;
};

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Deterministic validation subset: the `valid_count` samples with the smallest
/// fnv1a64(hex64(seed) + ":" + sample_id). Returns the chosen ids.
std::vector<std::string> choose_validation(const std::vector<DistillSample>& samples, int valid_count,
                                           std::uint64_t seed);

/// One dataset line. Cross-entropy lines omit the teacher context and dropout data.
nlohmann::json export_line(const DistillSample& sample, TrainMode mode);

/// Writes `<dir>/train.jsonl`, `<dir>/valid.jsonl` and `<dir>/manifest.json` (sorted keys, one sample
/// per line, input order within each file) and returns the manifest. Identical inputs give identical
/// bytes. Throws ValidationError for invalid samples, duplicate ids, a context that ends in an assistant
/// message (the action must start a new message), or a failure-sourced sample in cross-entropy mode.
DatasetManifest export_dataset(const std::vector<DistillSample>& samples, const std::filesystem::path& dir,
                               const ExportOptions& options);

/// Reads a dataset back: manifest plus all lines of both files.
struct LoadedDataset {
    DatasetManifest manifest;
    std::vector<nlohmann::json> train;
    std::vector<nlohmann::json> valid;
};
LoadedDataset load_dataset(const std::filesystem::path& dir);

} // namespace hintcoach::distill
