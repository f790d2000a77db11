// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/distill/dropout.hpp"

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"

namespace hintcoach::distill {

std::uint64_t dropout_stream_seed(std::uint64_t seed, const std::string& sample_id, int epoch) {
    return derive_seed(seed, sample_id + "#epoch=" + std::to_string(epoch));
}

std::vector<bool> draw_keep_mask(std::size_t sections, double p, std::uint64_t stream_seed) {
    SplitMix64 rng(stream_seed);
    std::vector<bool> keep(sections);
    for (std::size_t i = 0; i < sections; ++i) keep[i] = !(rng.uniform01() < p);
    return keep;
}

void apply_hint_dropout(DistillSample& sample, const DropoutConfig& config, int epoch) {
    if (!(config.p >= 0.0 && config.p <= 1.0)) throw ValidationError("dropout_p", "must lie in [0, 1]");
    sample.droppable = droppable_sections(sample.teacher_messages, config.drop_tool_docs);
    sample.dropout_p = config.p;
    sample.dropout_seed = config.seed;
    sample.dropout_mask = draw_keep_mask(sample.droppable.size(), config.p,
                                         dropout_stream_seed(config.seed, sample.sample_id, epoch));
    std::vector<SectionRef> dropped;
    for (std::size_t i = 0; i < sample.droppable.size(); ++i)
        if (!sample.dropout_mask[i]) dropped.push_back(sample.droppable[i]);
    sample.student_messages = remove_sections(sample.teacher_messages, dropped);
}

} // namespace hintcoach::distill
