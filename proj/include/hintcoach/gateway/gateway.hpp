// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hintcoach/core/types.hpp"
#include "hintcoach/gateway/backend.hpp"
#include "hintcoach/gateway/usage.hpp"

namespace hintcoach::gateway {

struct GatewayOptions {
    /// Concurrent requests allowed per backend.
    int max_in_flight = 4;
    /// Total tries for retryable failures.
    int max_attempts = 3;
    int backoff_ms = 200;
};

/// Routes completions to backends by model tag, caps concurrency, retries transport failures
/// and records usage exactly once per successful call.
class Gateway {
public:
    explicit Gateway(GatewayOptions options = {});

    /// Binds a tag name to a backend, overriding what the tag itself describes.
    void register_backend(const std::string& model_name, std::shared_ptr<Backend> backend);

    /// `ledger_key` names the trajectory to charge; empty means run totals only.
    Completion complete(const ModelTag& model, const std::vector<ChatMessage>& messages,
                        const CompletionParams& params, const std::string& ledger_key = {});

    std::int64_t count_tokens(const ModelTag& model, const std::string& text) const;
    std::int64_t count_prompt(const ModelTag& model, const std::vector<ChatMessage>& messages) const;
    const Tokenizer& tokenizer(const ModelTag& model) const;

    UsageLedger& ledger() { return ledger_; }

private:
    struct Slot {
        std::shared_ptr<Backend> backend;
        std::mutex mu;
        std::condition_variable cv;
        int in_flight = 0;
    };

    std::shared_ptr<Slot> slot_for(const ModelTag& model);

    GatewayOptions options_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
    ApproximateTokenizer tokenizer_;
    UsageLedger ledger_;
};

} // namespace hintcoach::gateway
