// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "hintcoach/gateway/chat.hpp"

namespace hintcoach::gateway {

struct UsageTotals {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t calls = 0;

    bool operator==(const UsageTotals&) const = default;
};

/// Thread-safe per-trajectory and per-run token accounting, tagged by usage source.
class UsageLedger {
public:
    /// Adds one call and returns the trajectory's accumulated totals.
    UsageTotals add(const std::string& trajectory_id, const Usage& usage);

    UsageTotals trajectory(const std::string& trajectory_id) const;
    UsageTotals run_totals() const;
    /// Totals keyed by usage source ("backend", "approximate").
    std::map<std::string, UsageTotals> by_source() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, UsageTotals> per_trajectory_;
    std::map<std::string, UsageTotals> per_source_;
    UsageTotals run_;
};

} // namespace hintcoach::gateway
