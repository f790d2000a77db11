// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/types.hpp"
#include "hintcoach/distill/sample.hpp"
#include "hintcoach/gateway/gateway.hpp"

namespace hintcoach::distill {

/// Teacher and student token sequences do not line up.
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& message) : Error("alignment", message) {}
};

struct KlResult {
    /// Mean over scored positions.
    double mean = 0.0;
    std::vector<double> per_token;
    /// Positions where teacher and student top-K lists share no token.
    int positions_without_support = 0;
};

/// Forward KL at one position over the tokens present in both top-K lists (the sampled token
/// counts as listed), with both distributions renormalized on that shared support:
/// sum_v pT(v) * (log pT(v) - log pS(v)). Returns 0 when the support is empty.
double token_kl(const gateway::TokenLogprob& teacher, const gateway::TokenLogprob& student, bool* had_support = nullptr);

/// Position-wise KL over an action. Throws AlignmentError when lengths or sampled tokens differ.
KlResult diagnostic_kl(const std::vector<gateway::TokenLogprob>& teacher,
                       const std::vector<gateway::TokenLogprob>& student);

/// Requests the student's distribution over the sample's action from `student_model` (student context,
/// temperature 0, top-K capture) and compares it with the teacher logprobs stored on the sample.
/// Diagnostic only; a student that produces different tokens raises AlignmentError.
KlResult diagnostic_kl(const DistillSample& sample, gateway::Gateway& gateway, const ModelTag& student_model,
                       int top_k = gateway::kMaxTopKLogprobs);

} // namespace hintcoach::distill
