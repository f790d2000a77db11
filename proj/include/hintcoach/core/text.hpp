// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hintcoach {

std::string trim(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);
bool ends_with(std::string_view text, std::string_view suffix);
bool contains(std::string_view text, std::string_view needle);
std::vector<std::string> split(std::string_view text, std::string_view separator);
std::string join(const std::vector<std::string>& parts, std::string_view separator);
std::string replace_all(std::string text, std::string_view from, std::string_view to);
std::string to_lower(std::string_view text);

/// 64-bit FNV-1a. Stable across platforms; used for ids, splits and seed derivation.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 14695981039346656037ULL);
std::string hex64(std::uint64_t value);

/// Formats a UTC wall-clock time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp_now();

/// SplitMix64 generator. The sequence is part of the dataset export contract
/// (the trainer re-derives per-epoch dropout masks from it), so it must not change.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01();
    /// Uniform in [0, bound) without modulo bias. `bound` must be > 0.
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Mixes a tag into a seed, e.g. derive_seed(seed, "rollout/3").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

} // namespace hintcoach
