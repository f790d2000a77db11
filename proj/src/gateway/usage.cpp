// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/gateway/usage.hpp"

namespace hintcoach::gateway {

namespace {

void accumulate(UsageTotals& t, const Usage& u) {
    t.input_tokens += u.input_tokens;
    t.output_tokens += u.output_tokens;
    t.calls += 1;
}

} // namespace

UsageTotals UsageLedger::add(const std::string& trajectory_id, const Usage& usage) {
    std::lock_guard lock(mu_);
    accumulate(run_, usage);
    accumulate(per_source_[usage.source], usage);
    if (trajectory_id.empty()) return {};
    auto& t = per_trajectory_[trajectory_id];
    accumulate(t, usage);
    return t;
}

UsageTotals UsageLedger::trajectory(const std::string& trajectory_id) const {
    std::lock_guard lock(mu_);
    auto it = per_trajectory_.find(trajectory_id);
    return it == per_trajectory_.end() ? UsageTotals{} : it->second;
}

UsageTotals UsageLedger::run_totals() const {
    std::lock_guard lock(mu_);
    return run_;
}

std::map<std::string, UsageTotals> UsageLedger::by_source() const {
    std::lock_guard lock(mu_);
    return per_source_;
}

} // namespace hintcoach::gateway
