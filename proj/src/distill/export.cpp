// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/distill/export.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/store.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::distill {

std::string to_string(TrainMode mode) { return mode == TrainMode::Kl ? "kl" : "cross-entropy"; }

TrainMode parse_train_mode(const std::string& text) {
    if (text == "kl") return TrainMode::Kl;
    if (text == "cross-entropy" || text == "ce") return TrainMode::CrossEntropy;
    throw ValidationError("mode", "expected 'kl' or 'cross-entropy', got '" + text + "'");
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
    return {{"schema_version", kDatasetSchemaVersion},
            {"dataset_id", m.dataset_id},
            {"round_index", m.round_index},
            {"mode", to_string(m.mode)},
            {"total", m.total},
            {"split", {{"train", m.train_count}, {"valid", m.valid_count}}},
            {"counts_by_group", m.counts_by_group},
            {"counts_by_hint", m.counts_by_hint},
            {"counts_by_source", m.counts_by_source},
            {"dropout",
             {{"p", m.dropout.p},
              {"seed", m.dropout.seed},
              {"drop_tool_docs", m.dropout.drop_tool_docs},
              {"stream", "splitmix64(derive_seed(seed, sample_id + '#epoch=' + epoch)); drop when u < p"}}},
            {"seed", m.seed},
            {"source_trajectory_ids", m.source_trajectory_ids},
            {"source_finding_ids", m.source_finding_ids},
            {"files", {{"train", "train.jsonl"}, {"valid", "valid.jsonl"}}},
            {"content_hash", m.content_hash}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
        m.dataset_id = j.at("dataset_id").get<std::string>();
        m.round_index = j.at("round_index").get<int>();
        m.mode = parse_train_mode(j.at("mode").get<std::string>());
        m.total = j.at("total").get<int>();
        m.train_count = j.at("split").at("train").get<int>();
        m.valid_count = j.at("split").at("valid").get<int>();
        m.counts_by_group = j.at("counts_by_group").get<std::map<std::string, int>>();
        m.counts_by_hint = j.at("counts_by_hint").get<std::map<std::string, int>>();
        m.counts_by_source = j.value("counts_by_source", std::map<std::string, int>{});
        m.dropout.p = j.at("dropout").at("p").get<double>();
        m.dropout.seed = j.at("dropout").at("seed").get<std::uint64_t>();
        m.dropout.drop_tool_docs = j.at("dropout").value("drop_tool_docs", false);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.source_trajectory_ids = j.value("source_trajectory_ids", std::vector<std::string>{});
        m.source_finding_ids = j.value("source_finding_ids", std::vector<std::string>{});
        m.content_hash = j.value("content_hash", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest", std::string("malformed dataset manifest: ") + e.what());
    }
    return m;
}

std::vector<std::string> choose_validation(const std::vector<DistillSample>& samples, int valid_count,
                                           std::uint64_t seed) {
    std::vector<std::pair<std::uint64_t, std::string>> keyed;
    const std::string salt = hex64(seed) + ":";
    for (const auto& s : samples) keyed.emplace_back(fnv1a64(salt + s.sample_id), s.sample_id);
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::string> out;
    for (int i = 0; i < valid_count && i < static_cast<int>(keyed.size()); ++i) out.push_back(keyed[i].second);
    return out;
}

nlohmann::json export_line(const DistillSample& s, TrainMode mode) {
    nlohmann::json j = s;
    j["schema_version"] = kDatasetSchemaVersion;
    j["mode"] = to_string(mode);
    // The supervised target is a separate assistant message appended to either context.
    j["action"] = {{"role", "assistant"}, {"content", s.action_text}};
    if (mode == TrainMode::CrossEntropy) {
        j.erase("teacher_messages");
        j.erase("teacher_logprobs");
        j.erase("droppable_sections");
        j.erase("dropout_mask");
    }
    return j;
}

DatasetManifest export_dataset(const std::vector<DistillSample>& samples, const std::filesystem::path& dir,
                               const ExportOptions& options) {
    if (options.dataset_id.empty()) throw ValidationError("dataset_id", "must not be empty");
    if (!(options.val_fraction >= 0.0 && options.val_fraction < 1.0)) {
        throw ValidationError("val_fraction", "must lie in [0, 1)");
    }
    std::set<std::string> ids;
    for (const auto& s : samples) {
        validate(s);
        if (!ids.insert(s.sample_id).second) throw ValidationError("sample_id", "duplicate sample " + s.sample_id);
        if (s.student_messages.empty() || s.student_messages.back().role == "assistant" ||
            s.teacher_messages.back().role == "assistant") {
            throw ValidationError("action", "sample " + s.sample_id + ": the action must begin a new message");
        }
        if (options.mode == TrainMode::CrossEntropy && !s.source_success) {
            throw ValidationError("source_success", "sample " + s.sample_id +
                                                        " comes from a failed trajectory; cross-entropy mode "
                                                        "only accepts successful sources");
        }
    }

    const int n = static_cast<int>(samples.size());
    int valid_count = options.valid_count ? *options.valid_count
                                          : static_cast<int>(std::llround(options.val_fraction * n));
    if (valid_count < 0 || (n > 0 && valid_count >= n) || (n == 0 && valid_count > 0)) {
        throw ValidationError("valid_count", "must leave at least one training sample");
    }
    auto valid_ids = choose_validation(samples, valid_count, options.seed);
    std::set<std::string> valid_set(valid_ids.begin(), valid_ids.end());

    DatasetManifest m;
    m.dataset_id = options.dataset_id;
    m.round_index = options.round_index;
    m.mode = options.mode;
    m.total = n;
    m.dropout = options.dropout;
    m.seed = options.seed;
    m.source_trajectory_ids = options.source_trajectory_ids;
    m.source_finding_ids = options.source_finding_ids;
    std::sort(m.source_trajectory_ids.begin(), m.source_trajectory_ids.end());
    std::sort(m.source_finding_ids.begin(), m.source_finding_ids.end());

    std::string train;
    std::string valid;
    for (const auto& s : samples) {
        auto line = export_line(s, options.mode).dump() + "\n";
        if (valid_set.count(s.sample_id)) {
            valid += line;
            ++m.valid_count;
        } else {
            train += line;
            ++m.train_count;
        }
        ++m.counts_by_group[s.group];
        ++m.counts_by_source[to_string(s.source)];
        for (const auto& h : s.hint_ids) ++m.counts_by_hint[h];
    }

    auto body = manifest_to_json(m);
    m.content_hash = hex64(fnv1a64(train + valid + body.dump()));

    std::filesystem::create_directories(dir);
    write_file_atomic((dir / "train.jsonl").string(), train);
    write_file_atomic((dir / "valid.jsonl").string(), valid);
    write_file_atomic((dir / "manifest.json").string(), manifest_to_json(m).dump(2) + "\n");
    return m;
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
    LoadedDataset d;
    auto path = dir / "manifest.json";
    if (!std::filesystem::exists(path)) throw NotFoundError("dataset manifest " + path.string());
    d.manifest = manifest_from_json(nlohmann::json::parse(read_file(path.string())));
    d.train = read_jsonl(dir / "train.jsonl");
    d.valid = read_jsonl(dir / "valid.jsonl");
    return d;
}

} // namespace hintcoach::distill
