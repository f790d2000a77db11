// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>

#include "hintcoach/core/text.hpp"
#include "hintcoach/gateway/backend.hpp"

namespace hintcoach::gateway {

HttpChatBackend::HttpChatBackend(HttpBackendOptions options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw ConfigurationError("HTTP backend needs an endpoint");
    while (ends_with(options_.endpoint, "/")) options_.endpoint.pop_back();
}

nlohmann::json HttpChatBackend::build_request(const std::vector<ChatMessage>& messages,
                                              const CompletionParams& params) const {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    nlohmann::json body = {
        {"model", options_.model},
        {"messages", msgs},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
        {"seed", params.seed},
    };
    if (!params.stop.empty()) body["stop"] = params.stop;
    if (params.top_k_logprobs > 0) {
        body["logprobs"] = true;
        body["top_logprobs"] = params.top_k_logprobs;
    }
    if (!params.prefill.empty()) {
        // Continue a partial assistant turn, as supported by vLLM-style servers.
        body["messages"].push_back({{"role", "assistant"}, {"content", params.prefill}});
        body["continue_final_message"] = true;
        body["add_generation_prompt"] = false;
    }
    return body;
}

Completion HttpChatBackend::parse_response(const nlohmann::json& body, int top_k_logprobs) {
    try {
        const auto& choice = body.at("choices").at(0);
        Completion c;
        const auto& content = choice.at("message").at("content");
        c.text = content.is_null() ? "" : content.get<std::string>();
        c.finish_reason = choice.value("finish_reason", "stop");
        if (choice.contains("logprobs") && choice["logprobs"].is_object() && choice["logprobs"].contains("content") &&
            choice["logprobs"]["content"].is_array()) {
            for (const auto& tok : choice["logprobs"]["content"]) {
                TokenLogprob t;
                t.token = tok.at("token").get<std::string>();
                t.logprob = tok.at("logprob").get<double>();
                for (const auto& alt : tok.value("top_logprobs", nlohmann::json::array())) {
                    t.top_k.emplace_back(alt.at("token").get<std::string>(), alt.at("logprob").get<double>());
                }
                std::stable_sort(t.top_k.begin(), t.top_k.end(),
                                 [](const auto& a, const auto& b) { return a.second > b.second; });
                if (top_k_logprobs > 0 && static_cast<int>(t.top_k.size()) > top_k_logprobs) {
                    t.top_k.resize(static_cast<std::size_t>(top_k_logprobs));
                }
                c.tokens.push_back(std::move(t));
            }
        } else if (top_k_logprobs > 0) {
            throw ProtocolError("logprobs were requested but the response has none");
        }
        if (body.contains("usage") && body["usage"].is_object()) {
            c.usage.input_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
            c.usage.output_tokens = body["usage"].value("completion_tokens", std::int64_t{0});
            c.usage.source = "backend";
        } else {
            c.usage.source = "approximate";
        }
        if (c.usage.input_tokens < 0 || c.usage.output_tokens < 0) throw ProtocolError("negative token usage");
        return c;
    } catch (const nlohmann::json::exception& ex) {
        throw ProtocolError(std::string("malformed chat completion payload: ") + ex.what());
    }
}

Completion HttpChatBackend::complete(const std::vector<ChatMessage>& messages, const CompletionParams& params) {
    validate_request(messages, params);
    httplib::Client client(options_.endpoint);
    client.set_connection_timeout(10);
    client.set_read_timeout(options_.timeout_seconds);
    httplib::Headers headers;
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto result = client.Post("/v1/chat/completions", headers, build_request(messages, params).dump(),
                              "application/json");
    if (!result) {
        throw RetryableError("request to " + options_.endpoint + " failed: " + httplib::to_string(result.error()), 1);
    }
    if (result->status == 429 || result->status >= 500) {
        throw RetryableError(fmt::format("{} answered HTTP {}", options_.endpoint, result->status), 1);
    }
    if (result->status != 200) {
        throw ProtocolError(fmt::format("{} answered HTTP {}: {}", options_.endpoint, result->status,
                                        result->body.substr(0, 200)));
    }
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& ex) {
        throw ProtocolError(std::string("response is not JSON: ") + ex.what());
    }
    return parse_response(body, params.top_k_logprobs);
}

} // namespace hintcoach::gateway
