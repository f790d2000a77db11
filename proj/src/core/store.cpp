// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/core/store.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fmt/format.h>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class FileLock {
public:
    explicit FileLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd_ < 0) throw StorageError(fmt::format("cannot open '{}': {}", path.string(), std::strerror(errno)));
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw StorageError(fmt::format("cannot lock '{}': {}", path.string(), std::strerror(errno)));
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

    int fd() const { return fd_; }

private:
    int fd_ = -1;
};

std::uintmax_t file_size_or_zero(const fs::path& path) {
    std::error_code ec;
    auto size = fs::file_size(path, ec);
    return ec ? 0 : size;
}

std::uint64_t parse_id_number(const std::string& id, const std::string& prefix) {
    if (prefix.empty() || !starts_with(id, prefix)) return 0;
    try {
        return std::stoull(id.substr(prefix.size()));
    } catch (const std::exception&) {
        return 0;
    }
}

} // namespace

std::vector<json> read_jsonl(const fs::path& path) {
    std::vector<json> records;
    std::error_code ec;
    if (!fs::exists(path, ec)) return records;
    std::string content = read_file(path.string());
    std::size_t start = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string::npos) break;  // unterminated: still being written
        std::string_view line(content.data() + start, end - start);
        start = end + 1;
        if (trim(line).empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw StorageError(fmt::format("corrupt record in '{}': {}", path.string(), e.what()));
        }
    }
    return records;
}

RunStore::RunStore(fs::path root) : RunStore(std::move(root), Options{}) {}

RunStore::RunStore(fs::path root, Options options) : root_(std::move(root)), options_(options) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw StorageError(fmt::format("cannot create run directory '{}': {}", root_.string(), ec.message()));
    std::lock_guard lock(mutex_);
    rescan(trajectories_, "trajectory_id");
    rescan(findings_, "finding_id");
    rescan(manifests_, "manifest_id");
}

void RunStore::rescan(Family& family, const std::string& id_field) {
    auto path = root_ / family.file;
    family.known_size = file_size_or_zero(path);
    if (family.prefix.empty()) return;
    for (const auto& record : read_jsonl(path)) {
        if (record.contains(id_field)) {
            family.last_id = std::max(family.last_id, parse_id_number(record[id_field].get<std::string>(), family.prefix));
        }
    }
}

std::string RunStore::append_line(Family& family, json record, const std::string& id_field) {
    auto path = root_ / family.file;
    FileLock lock(path);
    if (file_size_or_zero(path) != family.known_size) rescan(family, id_field);

    std::string id;
    if (!family.prefix.empty()) {
        id = fmt::format("{}{:06d}", family.prefix, family.last_id + 1);
        record[id_field] = id;
    }
    record["schema_version"] = kSchemaVersion;
    std::string line = record.dump() + "\n";

    const char* data = line.data();
    std::size_t remaining = line.size();
    while (remaining > 0) {
        ssize_t written = ::write(lock.fd(), data, remaining);
        if (written < 0) {
            if (errno == EINTR) continue;
            throw StorageError(fmt::format("append to '{}' failed: {}", path.string(), std::strerror(errno)));
        }
        data += written;
        remaining -= static_cast<std::size_t>(written);
    }
    if (options_.sync_writes && ::fdatasync(lock.fd()) != 0) {
        throw StorageError(fmt::format("fdatasync on '{}' failed: {}", path.string(), std::strerror(errno)));
    }
    if (!family.prefix.empty()) ++family.last_id;
    family.known_size = file_size_or_zero(path);
    return id;
}

std::string RunStore::append(Trajectory trajectory) {
    validate(trajectory);
    if (trajectory.created_at.empty()) trajectory.created_at = utc_timestamp_now();
    std::lock_guard lock(mutex_);
    auto steps = static_cast<int>(trajectory.steps.size());
    auto id = append_line(trajectories_, json(trajectory), "trajectory_id");
    step_counts_[id] = steps;
    return id;
}

std::string RunStore::append(MistakeFinding finding) {
    validate(finding);
    std::lock_guard lock(mutex_);
    refresh_step_index();
    auto it = step_counts_.find(finding.state.trajectory_id);
    if (it == step_counts_.end()) {
        throw ValidationError("state.trajectory_id", "unknown trajectory '" + finding.state.trajectory_id + "'");
    }
    if (finding.state.step_index > it->second) {
        throw ValidationError("state.step_index", fmt::format("step {} out of range (trajectory has {} steps)",
                                                              finding.state.step_index, it->second));
    }
    return append_line(findings_, json(finding), "finding_id");
}

std::string RunStore::append(RoundManifest manifest) {
    validate(manifest);
    if (manifest.created_at.empty()) manifest.created_at = utc_timestamp_now();
    std::lock_guard lock(mutex_);
    return append_line(manifests_, json(manifest), "manifest_id");
}

void RunStore::register_model(const ModelTag& tag) {
    validate(tag);
    std::lock_guard lock(mutex_);
    for (const auto& record : read_jsonl(root_ / models_.file)) {
        if (record.at("name").get<std::string>() == tag.name) {
            throw ConflictError("model tag '" + tag.name + "' is already registered");
        }
    }
    append_line(models_, json(tag), "name");
}

void RunStore::append_audit(json entry) {
    if (!entry.contains("at")) entry["at"] = utc_timestamp_now();
    std::lock_guard lock(mutex_);
    append_line(audit_, std::move(entry), "");
}

void RunStore::refresh_step_index() const {
    auto path = root_ / trajectories_.file;
    auto size = file_size_or_zero(path);
    if (size == indexed_size_) return;
    step_counts_.clear();
    for (const auto& record : read_jsonl(path)) {
        step_counts_[record.at("trajectory_id").get<std::string>()] = static_cast<int>(record.at("steps").size());
    }
    indexed_size_ = size;
}

std::vector<Trajectory> RunStore::trajectories() const {
    std::vector<Trajectory> out;
    for (const auto& record : read_jsonl(root_ / trajectories_.file)) out.push_back(record.get<Trajectory>());
    return out;
}

std::optional<Trajectory> RunStore::find_trajectory(const std::string& trajectory_id) const {
    for (const auto& record : read_jsonl(root_ / trajectories_.file)) {
        if (record.at("trajectory_id").get<std::string>() == trajectory_id) return record.get<Trajectory>();
    }
    return std::nullopt;
}

Trajectory RunStore::get_trajectory(const std::string& trajectory_id) const {
    auto t = find_trajectory(trajectory_id);
    if (!t) throw NotFoundError("trajectory '" + trajectory_id + "' not found");
    return *t;
}

std::vector<MistakeFinding> RunStore::findings() const {
    std::vector<MistakeFinding> out;
    for (const auto& record : read_jsonl(root_ / findings_.file)) out.push_back(record.get<MistakeFinding>());
    return out;
}

std::vector<RoundManifest> RunStore::manifests() const {
    std::vector<RoundManifest> out;
    for (const auto& record : read_jsonl(root_ / manifests_.file)) out.push_back(record.get<RoundManifest>());
    return out;
}

std::vector<ModelTag> RunStore::models() const {
    std::vector<ModelTag> out;
    for (const auto& record : read_jsonl(root_ / models_.file)) out.push_back(record.get<ModelTag>());
    return out;
}

std::optional<ModelTag> RunStore::find_model(const std::string& name) const {
    for (auto& tag : models()) {
        if (tag.name == name) return tag;
    }
    return std::nullopt;
}

std::vector<json> RunStore::audit_log() const { return read_jsonl(root_ / audit_.file); }

void RunStore::check_state(const StateRef& state) const {
    std::lock_guard lock(mutex_);
    refresh_step_index();
    auto it = step_counts_.find(state.trajectory_id);
    if (it == step_counts_.end()) throw NotFoundError("trajectory '" + state.trajectory_id + "' not found");
    if (state.step_index < 1 || state.step_index > it->second) {
        throw NotFoundError(fmt::format("step {} out of range for trajectory '{}' ({} steps)", state.step_index,
                                        state.trajectory_id, it->second));
    }
}

} // namespace hintcoach
