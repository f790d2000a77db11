// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hintcoach/distill/sample.hpp"

namespace hintcoach::distill {

struct DropoutConfig {
    /// Probability that each hint section is hidden from the student.
    double p = 0.9;
    /// Treat each tool's documentation block as a droppable section too.
    bool drop_tool_docs = false;
    std::uint64_t seed = 0;

    bool operator==(const DropoutConfig&) const = default;
};

/// Seed of the draw stream for one sample and epoch:
/// derive_seed(seed, sample_id + "#epoch=" + epoch), where derive_seed(s, tag) is the first
/// SplitMix64 output from state s XOR fnv1a64(tag).
std::uint64_t dropout_stream_seed(std::uint64_t seed, const std::string& sample_id, int epoch);

/// One uniform draw u in [0, 1) per section from SplitMix64(stream_seed), in section order; a section
/// is dropped when u < p. Returns true for kept sections.
std::vector<bool> draw_keep_mask(std::size_t sections, double p, std::uint64_t stream_seed);

/// Fills droppable sections, the mask for `epoch`, and the student context. Throws ValidationError
/// unless 0 <= p <= 1.
void apply_hint_dropout(DistillSample& sample, const DropoutConfig& config, int epoch = 0);

} // namespace hintcoach::distill
