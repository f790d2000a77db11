// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/core/normalize.hpp"

#include <cctype>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach {

std::string normalize_answer(std::string_view answer, const NormalizeOptions& options) {
    std::string out;
    out.reserve(answer.size());
    bool pending_space = false;
    for (char ch : answer) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(ch);
    }
    return options.case_sensitive ? out : to_lower(out);
}

bool score_trajectory(const Trajectory& trajectory, const Task& task, const NormalizeOptions& options) {
    if (trajectory.task_id != task.task_id) {
        throw ValidationError("task_id", "trajectory " + trajectory.trajectory_id + " belongs to task '" +
                                             trajectory.task_id + "', not '" + task.task_id + "'");
    }
    if (trajectory.outcome.kind != OutcomeKind::Completed) return false;
    return normalize_answer(trajectory.outcome.answer, options) == normalize_answer(task.expected_answer, options);
}

} // namespace hintcoach
