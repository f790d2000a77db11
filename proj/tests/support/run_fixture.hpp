// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hintcoach/coach/context.hpp"
#include "hintcoach/coach/plan.hpp"

namespace hintcoach::testkit {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Fills a run directory: world, three instances per built-in template, the stock initial hints and a
/// model "base" that follows the reference solutions.
std::unique_ptr<coach::RunContext> make_run(const std::filesystem::path& dir, std::uint64_t seed = 7);

/// Writes `behavior` next to the store and registers it as a scripted model.
void register_script(coach::RunContext& ctx, const std::string& name, const nlohmann::json& behavior,
                     int round_index = 0);

/// `n` task ids taken round-robin across templates (first instance of every template, then the second...).
std::vector<std::string> pick_tasks(const coach::RunContext& ctx, int n);

inline constexpr const char* kMarker = "MISSTEP";
inline constexpr const char* kCorrectedMonologue = "Corrected plan after the coach's hint";

/// Reference behaviour in which the first step of each `marked` task carries kMarker in its monologue.
/// When a corrective hint is present, step 1 answers with kCorrectedMonologue instead.
nlohmann::json marked_behavior(const coach::RunContext& ctx, const std::set<std::string>& marked);

/// Judge that answers "false" exactly when the judged step contains kMarker.
nlohmann::json marker_judge_behavior();

/// Filter document with one llm-judge filter.
nlohmann::json judge_filter_document(const std::string& filter_id);

/// Round-1 plan over `tasks` with 3 rollouts each.
coach::RoundPlan round1_plan(const std::vector<std::string>& tasks, const std::string& model_out = "r1");

inline constexpr const char* kFilterId = "unchecked-assumption";
inline constexpr const char* kFilterFile = "filters/review.json";
inline constexpr const char* kCorrectiveText = "Before acting on a value, check it against the data you loaded.";

/// Prepares a second round over `tasks`: registers "r1" (reference behaviour with kMarker on the
/// first step of every `marked` task) and "judge", writes the filter file and binds the corrective hint.
void prepare_round2(coach::RunContext& ctx, const std::set<std::string>& marked);

/// Round-2 plan over `tasks`: one hint-free rollout per task, m = 3, balancing off.
coach::RoundPlan round2_plan(const std::vector<std::string>& tasks, const std::string& model_out = "r2");

} // namespace hintcoach::testkit
