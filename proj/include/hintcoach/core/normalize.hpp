// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "hintcoach/core/types.hpp"

namespace hintcoach {

struct NormalizeOptions {
    /// Comparison is case-sensitive by default; answers are often entity names.
    bool case_sensitive = true;
};

/// Trims leading/trailing whitespace and collapses internal whitespace runs to one space.
std::string normalize_answer(std::string_view answer, const NormalizeOptions& options = {});

/// True iff the trajectory completed and its normalized answer equals the normalized
/// expected answer. Throws ValidationError when the ids do not match.
bool score_trajectory(const Trajectory& trajectory, const Task& task, const NormalizeOptions& options = {});

} // namespace hintcoach
