// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/core/types.hpp"

namespace hintcoach::hints {

/// Line that separates hint sections in a rendered guidelines block.
inline constexpr const char* kSeparatorLine = "-------";
/// Full separator between two rendered sections.
inline constexpr const char* kSectionSeparator = "\n\n-------\n";

enum class HintKind { Initial, Corrective };
std::string to_string(HintKind kind);
HintKind parse_hint_kind(const std::string& text);

struct HintSection {
    std::string hint_id;
    std::string text;
    HintKind kind = HintKind::Initial;
    int round_introduced = 1;
    std::vector<std::string> groups;  // initial hints
    std::string filter_id;            // corrective hints (may be empty while a draft)
    bool draft = false;
    std::string author;
    std::string created_at;

    bool operator==(const HintSection&) const = default;
};

struct HintProfile {
    std::string profile_id;  // "none", "initial:<group>" or "combined:<group>@<round>"
    std::vector<std::string> hint_ids;
    std::vector<std::string> sections;  // texts, same order as hint_ids

    bool empty() const { return hint_ids.empty(); }
};

/// Throws ValidationError for empty text or text containing a separator line.
void validate_hint_text(const std::string& text);
/// Type invariants: corrective bound hints have a filter, initial hints at least one group.
void validate(const HintSection& hint);

/// Joins sections with kSectionSeparator.
std::string render_sections(const std::vector<std::string>& sections);
/// Inverse of render_sections.
std::vector<std::string> parse_sections(const std::string& rendered);

/// Registry of hint sections in insertion order. Reads may run concurrently; writes are serialized.
class HintLedger {
public:
    HintLedger() = default;
    HintLedger(const HintLedger& other);
    HintLedger& operator=(const HintLedger& other);

    /// When set, corrective bindings must name one of these filters (NotFoundError otherwise).
    void set_known_filters(std::set<std::string> filter_ids);

    const HintSection& add_initial(const std::string& text, const std::vector<std::string>& groups,
                                   const std::string& author = "system");

    /// Registers a corrective hint for `filter_id` introduced in `round`. A second hint for the same
    /// filter and round raises ConflictError; a later round supersedes.
    HintSection bind_corrective(const std::string& filter_id, const std::string& text, int round,
                                const std::string& author = "system");

    HintSection create_draft(const std::string& text, const std::string& author);
    HintSection update_draft(const std::string& hint_id, const std::string& text, const std::string& author);
    /// Turns a draft into a bound corrective hint (same conflict rules as bind_corrective).
    HintSection bind_draft(const std::string& hint_id, const std::string& filter_id, int round,
                           const std::string& author);

    std::optional<HintSection> find(const std::string& hint_id) const;
    std::vector<HintSection> all() const;

    /// Initial hints whose binding includes `group`, in insertion order.
    HintProfile select_initial(const std::string& group) const;
    /// Initial hints for `group` followed by the current corrective hint of every filter as of `round`.
    HintProfile select_combined(const std::string& group, int round) const;
    static HintProfile none();

    /// Latest bound corrective hint for `filter_id` with round_introduced <= round.
    std::optional<HintSection> corrective_for(const std::string& filter_id, int round) const;

    /// Hint for a flagged state given the state→filter attribution. Throws NotFoundError when the
    /// state is not flagged or its filter has no hint yet.
    HintSection resolve(const StateRef& state, int round, const std::map<StateRef, std::string>& attribution) const;

    nlohmann::json to_json() const;
    static HintLedger from_json(const nlohmann::json& doc);
    void save(const std::string& path) const;
    static HintLedger load(const std::string& path);
    /// Human-readable listing, one block per hint.
    std::string export_text() const;

private:
    std::string next_id_locked();
    HintSection bind_locked(HintSection hint, const std::string& filter_id, int round);
    std::optional<HintSection> corrective_for_locked(const std::string& filter_id, int round) const;

    mutable std::shared_mutex mu_;
    std::vector<HintSection> hints_;
    std::set<std::string> known_filters_;
    int next_seq_ = 1;
};

void to_json(nlohmann::json& j, const HintSection& h);
void from_json(const nlohmann::json& j, HintSection& h);

} // namespace hintcoach::hints
