// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hintcoach/action/interpreter.hpp"
#include "hintcoach/action/static_kind.hpp"
#include "hintcoach/world/world.hpp"

namespace hintcoach::world {

/// Names of every tool the world provides, in documentation order.
const std::vector<std::string>& all_tool_names();

/// Tool documentation block: one-line description, inputs, output and example calls.
/// Throws NotFoundError for an unknown tool.
std::string tool_documentation(const std::string& name);

/// Static return kinds, for structural review rules.
const action::KindMap& tool_return_kinds();

struct CompletionRecord {
    std::string report;
    std::string answer;
};

/// Tool registry bound to one world and one task's allowlist. Tools outside the allowlist are
/// reported as unknown. Holds per-trajectory state (the completion record), so create one per
/// trajectory.
class WorldTools : public action::ToolRegistry {
public:
    WorldTools(std::shared_ptr<const World> world, std::vector<std::string> allowlist);

    bool has(const std::string& name) const override;
    action::Value call(const std::string& name, const std::vector<action::Value>& args,
                       action::ToolContext& ctx) override;

    const std::optional<CompletionRecord>& completion() const { return completion_; }

private:
    std::shared_ptr<const World> world_;
    std::set<std::string> allowlist_;
    std::optional<CompletionRecord> completion_;
};

} // namespace hintcoach::world
