// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/hints/ledger.hpp"

#include <algorithm>
#include <mutex>

#include <fmt/format.h>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/json_io.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::hints {

std::string to_string(HintKind kind) { return kind == HintKind::Initial ? "initial" : "corrective"; }

HintKind parse_hint_kind(const std::string& text) {
    if (text == "initial") return HintKind::Initial;
    if (text == "corrective") return HintKind::Corrective;
    throw ValidationError("kind", "unknown hint kind '" + text + "'");
}

void validate_hint_text(const std::string& text) {
    if (trim(text).empty()) throw ValidationError("text", "hint text must not be empty");
    for (const auto& line : split(text, "\n")) {
        if (trim(line) == kSeparatorLine) {
            throw ValidationError("text", "hint text must not contain the section separator line");
        }
    }
}

void validate(const HintSection& hint) {
    validate_hint_text(hint.text);
    if (hint.round_introduced < 1) throw ValidationError("round_introduced", "must be at least 1");
    if (hint.kind == HintKind::Initial && hint.groups.empty()) {
        throw ValidationError("groups", "initial hints must bind to at least one group");
    }
    if (hint.kind == HintKind::Corrective && !hint.draft && hint.filter_id.empty()) {
        throw ValidationError("filter_id", "corrective hints must bind to exactly one filter");
    }
}

std::string render_sections(const std::vector<std::string>& sections) { return join(sections, kSectionSeparator); }

std::vector<std::string> parse_sections(const std::string& rendered) {
    if (rendered.empty()) return {};
    return split(rendered, kSectionSeparator);
}

HintLedger::HintLedger(const HintLedger& other) {
    std::shared_lock lock(other.mu_);
    hints_ = other.hints_;
    known_filters_ = other.known_filters_;
    next_seq_ = other.next_seq_;
}

HintLedger& HintLedger::operator=(const HintLedger& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mu_, other.mu_);
    hints_ = other.hints_;
    known_filters_ = other.known_filters_;
    next_seq_ = other.next_seq_;
    return *this;
}

void HintLedger::set_known_filters(std::set<std::string> filter_ids) {
    std::unique_lock lock(mu_);
    known_filters_ = std::move(filter_ids);
}

std::string HintLedger::next_id_locked() { return fmt::format("h-{:04d}", next_seq_++); }

const HintSection& HintLedger::add_initial(const std::string& text, const std::vector<std::string>& groups,
                                           const std::string& author) {
    HintSection h;
    h.text = text;
    h.kind = HintKind::Initial;
    h.round_introduced = 1;
    h.groups = groups;
    h.author = author;
    h.created_at = utc_timestamp_now();
    validate(h);
    std::unique_lock lock(mu_);
    h.hint_id = next_id_locked();
    hints_.push_back(std::move(h));
    return hints_.back();
}

std::optional<HintSection> HintLedger::corrective_for_locked(const std::string& filter_id, int round) const {
    const HintSection* best = nullptr;
    for (const auto& h : hints_) {
        if (h.kind != HintKind::Corrective || h.draft || h.filter_id != filter_id || h.round_introduced > round) continue;
        if (!best || h.round_introduced >= best->round_introduced) best = &h;
    }
    if (!best) return std::nullopt;
    return *best;
}

HintSection HintLedger::bind_locked(HintSection hint, const std::string& filter_id, int round) {
    if (filter_id.empty()) throw ValidationError("filter_id", "corrective hints must bind to a filter");
    if (!known_filters_.empty() && !known_filters_.count(filter_id)) {
        throw NotFoundError("no filter named '" + filter_id + "'");
    }
    if (round < 1) throw ValidationError("round", "round must be at least 1");
    for (const auto& h : hints_) {
        if (h.kind == HintKind::Corrective && !h.draft && h.filter_id == filter_id && h.round_introduced == round) {
            throw ConflictError(fmt::format("filter '{}' already has hint {} in round {}", filter_id, h.hint_id, round));
        }
    }
    hint.kind = HintKind::Corrective;
    hint.filter_id = filter_id;
    hint.round_introduced = round;
    hint.draft = false;
    validate(hint);
    return hint;
}

HintSection HintLedger::bind_corrective(const std::string& filter_id, const std::string& text, int round,
                                        const std::string& author) {
    validate_hint_text(text);
    HintSection h;
    h.text = text;
    h.author = author;
    h.created_at = utc_timestamp_now();
    std::unique_lock lock(mu_);
    h = bind_locked(std::move(h), filter_id, round);
    h.hint_id = next_id_locked();
    hints_.push_back(h);
    return h;
}

HintSection HintLedger::create_draft(const std::string& text, const std::string& author) {
    validate_hint_text(text);
    HintSection h;
    h.text = text;
    h.kind = HintKind::Corrective;
    h.draft = true;
    h.author = author;
    h.created_at = utc_timestamp_now();
    std::unique_lock lock(mu_);
    h.hint_id = next_id_locked();
    hints_.push_back(h);
    return h;
}

HintSection HintLedger::update_draft(const std::string& hint_id, const std::string& text, const std::string& author) {
    validate_hint_text(text);
    std::unique_lock lock(mu_);
    for (auto& h : hints_) {
        if (h.hint_id != hint_id) continue;
        if (!h.draft) throw ConflictError("hint " + hint_id + " is bound and can no longer be edited");
        h.text = text;
        h.author = author;
        return h;
    }
    throw NotFoundError("no hint named '" + hint_id + "'");
}

HintSection HintLedger::bind_draft(const std::string& hint_id, const std::string& filter_id, int round,
                                   const std::string& author) {
    std::unique_lock lock(mu_);
    for (auto& h : hints_) {
        if (h.hint_id != hint_id) continue;
        if (!h.draft) throw ConflictError("hint " + hint_id + " is already bound");
        HintSection bound = bind_locked(h, filter_id, round);
        bound.author = author;
        h = bound;
        return h;
    }
    throw NotFoundError("no hint named '" + hint_id + "'");
}

std::optional<HintSection> HintLedger::find(const std::string& hint_id) const {
    std::shared_lock lock(mu_);
    for (const auto& h : hints_) {
        if (h.hint_id == hint_id) return h;
    }
    return std::nullopt;
}

std::vector<HintSection> HintLedger::all() const {
    std::shared_lock lock(mu_);
    return hints_;
}

HintProfile HintLedger::select_initial(const std::string& group) const {
    std::shared_lock lock(mu_);
    HintProfile p;
    p.profile_id = "initial:" + group;
    for (const auto& h : hints_) {
        if (h.kind != HintKind::Initial) continue;
        if (std::find(h.groups.begin(), h.groups.end(), group) == h.groups.end()) continue;
        p.hint_ids.push_back(h.hint_id);
        p.sections.push_back(h.text);
    }
    return p;
}

HintProfile HintLedger::select_combined(const std::string& group, int round) const {
    HintProfile p = select_initial(group);
    p.profile_id = fmt::format("combined:{}@{}", group, round);
    std::shared_lock lock(mu_);
    std::set<std::string> filters_seen;
    for (const auto& h : hints_) {
        if (h.kind != HintKind::Corrective || h.draft || !filters_seen.insert(h.filter_id).second) continue;
        auto current = corrective_for_locked(h.filter_id, round);
        if (!current) continue;
        p.hint_ids.push_back(current->hint_id);
        p.sections.push_back(current->text);
    }
    return p;
}

HintProfile HintLedger::none() {
    HintProfile p;
    p.profile_id = "none";
    return p;
}

std::optional<HintSection> HintLedger::corrective_for(const std::string& filter_id, int round) const {
    std::shared_lock lock(mu_);
    return corrective_for_locked(filter_id, round);
}

HintSection HintLedger::resolve(const StateRef& state, int round,
                                const std::map<StateRef, std::string>& attribution) const {
    auto it = attribution.find(state);
    if (it == attribution.end()) {
        throw NotFoundError(fmt::format("state {}#{} is not flagged", state.trajectory_id, state.step_index));
    }
    auto hint = corrective_for(it->second, round);
    if (!hint) throw NotFoundError("filter '" + it->second + "' has no corrective hint as of round " + std::to_string(round));
    return *hint;
}

void to_json(nlohmann::json& j, const HintSection& h) {
    j = {{"hint_id", h.hint_id},
         {"text", h.text},
         {"kind", to_string(h.kind)},
         {"round_introduced", h.round_introduced},
         {"draft", h.draft},
         {"author", h.author},
         {"created_at", h.created_at}};
    if (h.kind == HintKind::Initial) j["groups"] = h.groups;
    else j["filter_id"] = h.filter_id;
}

void from_json(const nlohmann::json& j, HintSection& h) {
    h.hint_id = j.at("hint_id").get<std::string>();
    h.text = j.at("text").get<std::string>();
    h.kind = parse_hint_kind(j.at("kind").get<std::string>());
    h.round_introduced = j.value("round_introduced", 1);
    h.draft = j.value("draft", false);
    h.author = j.value("author", "");
    h.created_at = j.value("created_at", "");
    h.groups = j.value("groups", std::vector<std::string>{});
    h.filter_id = j.value("filter_id", "");
}

nlohmann::json HintLedger::to_json() const {
    std::shared_lock lock(mu_);
    return {{"schema_version", kSchemaVersion}, {"hints", hints_}};
}

HintLedger HintLedger::from_json(const nlohmann::json& doc) {
    HintLedger ledger;
    try {
        int max_seq = 0;
        std::set<std::string> ids;
        for (const auto& item : doc.at("hints")) {
            HintSection h = item.get<HintSection>();
            validate(h);
            if (!ids.insert(h.hint_id).second) throw ValidationError("hint_id", "duplicate hint id " + h.hint_id);
            if (starts_with(h.hint_id, "h-")) {
                try {
                    max_seq = std::max(max_seq, std::stoi(h.hint_id.substr(2)));
                } catch (const std::exception&) {
                }
            }
            ledger.hints_.push_back(std::move(h));
        }
        ledger.next_seq_ = max_seq + 1;
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError("hints", std::string("malformed hint registry: ") + ex.what());
    }
    return ledger;
}

void HintLedger::save(const std::string& path) const { write_file_atomic(path, to_json().dump(2) + "\n"); }

HintLedger HintLedger::load(const std::string& path) {
    try {
        return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& ex) {
        throw ValidationError("hints", "cannot parse " + path + ": " + ex.what());
    }
}

std::string HintLedger::export_text() const {
    std::shared_lock lock(mu_);
    std::string out;
    for (const auto& h : hints_) {
        std::string binding = h.kind == HintKind::Initial ? "groups: " + join(h.groups, ", ")
                                                          : (h.draft ? "draft" : "filter: " + h.filter_id);
        out += fmt::format("## {} ({}, round {}, {})\n{}\n{}\n", h.hint_id, to_string(h.kind), h.round_introduced,
                           binding, h.text, kSeparatorLine);
    }
    return out;
}

} // namespace hintcoach::hints
