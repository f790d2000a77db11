// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/gateway/gateway.hpp"

#include <chrono>
#include <thread>

namespace hintcoach::gateway {

Gateway::Gateway(GatewayOptions options) : options_(options) {
    if (options_.max_in_flight < 1) throw ConfigurationError("max_in_flight must be at least 1");
    if (options_.max_attempts < 1) throw ConfigurationError("max_attempts must be at least 1");
}

void Gateway::register_backend(const std::string& model_name, std::shared_ptr<Backend> backend) {
    auto slot = std::make_shared<Slot>();
    slot->backend = std::move(backend);
    std::lock_guard lock(mu_);
    slots_[model_name] = std::move(slot);
}

std::shared_ptr<Gateway::Slot> Gateway::slot_for(const ModelTag& model) {
    std::lock_guard lock(mu_);
    auto it = slots_.find(model.name);
    if (it != slots_.end()) return it->second;
    auto slot = std::make_shared<Slot>();
    if (model.backend_kind == BackendKind::Scripted) {
        slot->backend = ScriptedBackend::from_file(model.endpoint_or_script);
    } else {
        HttpBackendOptions opts;
        opts.endpoint = model.endpoint_or_script;
        opts.model = model.name;
        slot->backend = std::make_shared<HttpChatBackend>(opts);
    }
    slots_[model.name] = slot;
    return slot;
}

Completion Gateway::complete(const ModelTag& model, const std::vector<ChatMessage>& messages,
                             const CompletionParams& params, const std::string& ledger_key) {
    validate_request(messages, params);
    auto slot = slot_for(model);
    Completion result;
    for (int attempt = 1;; ++attempt) {
        {
            std::unique_lock lock(slot->mu);
            slot->cv.wait(lock, [&] { return slot->in_flight < options_.max_in_flight; });
            ++slot->in_flight;
        }
        try {
            result = slot->backend->complete(messages, params);
            {
                std::lock_guard lock(slot->mu);
                --slot->in_flight;
            }
            slot->cv.notify_one();
            break;
        } catch (const RetryableError& ex) {
            {
                std::lock_guard lock(slot->mu);
                --slot->in_flight;
            }
            slot->cv.notify_one();
            if (attempt >= options_.max_attempts) throw RetryableError(ex.what(), attempt);
            std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms * attempt));
        } catch (...) {
            {
                std::lock_guard lock(slot->mu);
                --slot->in_flight;
            }
            slot->cv.notify_one();
            throw;
        }
    }
    if (result.usage.source != "backend") {
        result.usage.input_tokens = count_prompt_tokens(tokenizer_, messages) + tokenizer_.count(params.prefill);
        result.usage.output_tokens = tokenizer_.count(result.text);
        result.usage.source = "approximate";
    }
    // Usage is recorded once, after the successful attempt, so retries never double-count.
    ledger_.add(ledger_key, result.usage);
    return result;
}

const Tokenizer& Gateway::tokenizer(const ModelTag&) const { return tokenizer_; }

std::int64_t Gateway::count_tokens(const ModelTag& model, const std::string& text) const {
    return tokenizer(model).count(text);
}

std::int64_t Gateway::count_prompt(const ModelTag& model, const std::vector<ChatMessage>& messages) const {
    return count_prompt_tokens(tokenizer(model), messages);
}

} // namespace hintcoach::gateway
