// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/distill/kl.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace hintcoach::distill {

namespace {

std::map<std::string, double> support_of(const gateway::TokenLogprob& t) {
    std::map<std::string, double> out;
    for (const auto& [tok, lp] : t.top_k) out.emplace(tok, lp);
    out.emplace(t.token, t.logprob);
    return out;
}

double log_sum_exp(const std::vector<double>& xs) {
    double hi = *std::max_element(xs.begin(), xs.end());
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

} // namespace

double token_kl(const gateway::TokenLogprob& teacher, const gateway::TokenLogprob& student, bool* had_support) {
    auto pt = support_of(teacher);
    auto ps = support_of(student);
    std::vector<double> lt;
    std::vector<double> ls;
    for (const auto& [tok, lp] : pt) {
        auto it = ps.find(tok);
        if (it == ps.end()) continue;
        lt.push_back(lp);
        ls.push_back(it->second);
    }
    if (had_support) *had_support = !lt.empty();
    if (lt.empty()) return 0.0;
    const double zt = log_sum_exp(lt);
    const double zs = log_sum_exp(ls);
    double kl = 0.0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        const double log_t = lt[i] - zt;
        const double log_s = ls[i] - zs;
        kl += std::exp(log_t) * (log_t - log_s);
    }
    // Rounding can leave a tiny negative value when the distributions coincide.
    return std::max(0.0, kl);
}

KlResult diagnostic_kl(const std::vector<gateway::TokenLogprob>& teacher,
                       const std::vector<gateway::TokenLogprob>& student) {
    if (teacher.size() != student.size()) {
        throw AlignmentError(
            fmt::format("teacher has {} action tokens but student has {}", teacher.size(), student.size()));
    }
    KlResult r;
    double total = 0.0;
    int scored = 0;
    for (std::size_t i = 0; i < teacher.size(); ++i) {
        if (teacher[i].token != student[i].token) {
            throw AlignmentError(fmt::format("action token {} differs: teacher '{}' vs student '{}'", i,
                                             teacher[i].token, student[i].token));
        }
        bool support = false;
        double kl = token_kl(teacher[i], student[i], &support);
        r.per_token.push_back(kl);
        if (!support) {
            ++r.positions_without_support;
            continue;
        }
        total += kl;
        ++scored;
    }
    r.mean = scored > 0 ? total / scored : 0.0;
    return r;
}

KlResult diagnostic_kl(const DistillSample& sample, gateway::Gateway& gateway, const ModelTag& student_model,
                       int top_k) {
    if (sample.teacher_logprobs.empty()) {
        throw ValidationError("teacher_logprobs", "sample " + sample.sample_id + " has no teacher logprobs");
    }
    gateway::CompletionParams params;
    params.temperature = 0.0;
    params.top_k_logprobs = std::clamp(top_k, 1, gateway::kMaxTopKLogprobs);
    params.max_tokens = static_cast<int>(sample.teacher_logprobs.size());
    params.stop.clear();
    params.prefill = "<inner_monologue>";
    auto completion = gateway.complete(student_model, sample.student_messages, params);
    return diagnostic_kl(sample.teacher_logprobs, completion.tokens);
}

} // namespace hintcoach::distill
