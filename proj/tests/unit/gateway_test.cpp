// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "hintcoach/core/text.hpp"
#include "hintcoach/gateway/gateway.hpp"
#include "hintcoach/gateway/tokenizer.hpp"

namespace hintcoach::gateway {
namespace {

std::vector<ChatMessage> user(const std::string& text) { return {{"user", text, {}}}; }

ModelTag model(const std::string& name) { return {name, 0, BackendKind::Scripted, ""}; }

TEST(Tokenizer, CountsWordsAndPunctuation) {
    ApproximateTokenizer tok;
    EXPECT_EQ(tok.count("hello world"), 2);
    EXPECT_EQ(tok.count("x = f(1)"), 6);
    EXPECT_EQ(tok.count(""), 0);
    EXPECT_EQ(join(tok.pieces("a  b,c"), ""), "a  b,c");
    EXPECT_EQ(count_prompt_tokens(tok, user("hello world")), 2 + kMessageOverheadTokens);
}

TEST(Scripted, FirstMatchingRuleWinsAndDefaultCatchesTheRest) {
    ScriptedBackend backend(nlohmann::json{{"rules",
                              {{{"when", {{{"contains", "weather"}}}}, {"response", "sunny"}},
                               {{"when", {{{"contains", "weather"}}}}, {"response", "never"}}}},
                             {"default", {{"response", "fallback"}}}});
    CompletionParams p;
    EXPECT_EQ(backend.complete(user("the weather?"), p).text, "sunny");
    EXPECT_EQ(backend.complete(user("other"), p).text, "fallback");
}

TEST(Scripted, NoMatchAndNoDefaultIsAConfigurationError) {
    ScriptedBackend backend(nlohmann::json{{"rules", nlohmann::json::array()}});
    EXPECT_THROW(backend.complete(user("x"), {}), ConfigurationError);
    EXPECT_THROW(ScriptedBackend(nlohmann::json{{"rules", {{{"response", "x"}}}}}), ConfigurationError);
}

TEST(Scripted, HonoursStopSequencesAndTokenLimit) {
    ScriptedBackend backend(nlohmann::json{{"default", {{"response", "plan here</inner_monologue> trailing"}}}});
    CompletionParams p;
    auto c = backend.complete(user("x"), p);
    EXPECT_EQ(c.text, "plan here");
    EXPECT_EQ(c.finish_reason, "stop");
    p.stop.clear();
    p.max_tokens = 1;
    c = backend.complete(user("x"), p);
    EXPECT_EQ(c.text, "plan");
    EXPECT_EQ(c.finish_reason, "length");
}

TEST(Scripted, SeedSelectsAmongResponses) {
    ScriptedBackend backend(nlohmann::json{{"default", {{"responses", {"a", "b", "c"}}}}});
    CompletionParams p;
    p.seed = 4;
    EXPECT_EQ(backend.complete(user("x"), p).text, "b");
}

TEST(Scripted, TagAndPrefillPredicates) {
    ScriptedBackend backend(nlohmann::json{{"rules",
                              {{{"when", {{{"tag", "hint"}, {"contains", "check"}}, {{"prefill", "<x>"}}}},
                                {"response", "hinted"}}}},
                             {"default", {{"response", "plain"}}}});
    ChatMessage m{"user", "<hint>check units</hint>", {{"hint", 0, 24}}};
    CompletionParams p;
    p.prefill = "<x>";
    EXPECT_EQ(backend.complete({m}, p).text, "hinted");
    p.prefill.clear();
    EXPECT_EQ(backend.complete({m}, p).text, "plain");
}

class FlakyBackend : public Backend {
public:
    explicit FlakyBackend(int failures) : failures_(failures) {}
    Completion complete(const std::vector<ChatMessage>&, const CompletionParams&) override {
        ++calls;
        if (calls <= failures_) throw RetryableError("transient", 1);
        Completion c;
        c.text = "ok";
        return c;
    }
    BackendKind kind() const override { return BackendKind::Scripted; }
    std::atomic<int> calls{0};

private:
    int failures_;
};

TEST(Gateway, RetriesTransientFailuresAndRecordsUsageOnce) {
    Gateway gw({2, 3, 1});
    auto flaky = std::make_shared<FlakyBackend>(2);
    gw.register_backend("m", flaky);
    auto c = gw.complete(model("m"), user("hello world"), {}, "t-1");
    EXPECT_EQ(c.text, "ok");
    EXPECT_EQ(flaky->calls, 3);
    auto totals = gw.ledger().trajectory("t-1");
    EXPECT_EQ(totals.calls, 1);
    EXPECT_EQ(totals.input_tokens, 2 + kMessageOverheadTokens);
    EXPECT_EQ(totals.output_tokens, 1);
    EXPECT_EQ(c.usage.source, "approximate");
}

TEST(Gateway, GivesUpAfterMaxAttempts) {
    Gateway gw({1, 2, 1});
    gw.register_backend("m", std::make_shared<FlakyBackend>(5));
    EXPECT_THROW(gw.complete(model("m"), user("x"), {}), RetryableError);
    EXPECT_EQ(gw.ledger().run_totals().calls, 0);
}

TEST(Gateway, RejectsInvalidRequests) {
    Gateway gw;
    gw.register_backend("m", std::make_shared<FlakyBackend>(0));
    CompletionParams p;
    p.top_k_logprobs = kMaxTopKLogprobs + 1;
    EXPECT_THROW(gw.complete(model("m"), user("x"), p), ValidationError);
    EXPECT_THROW(gw.complete(model("m"), {}, {}), ValidationError);
}

TEST(UsageLedger, SumsPerTrajectoryAndSource) {
    UsageLedger ledger;
    ledger.add("a", {10, 2, "approximate"});
    ledger.add("a", {5, 1, "approximate"});
    ledger.add("b", {7, 7, "backend"});
    EXPECT_EQ(ledger.trajectory("a"), (UsageTotals{15, 3, 2}));
    EXPECT_EQ(ledger.run_totals(), (UsageTotals{22, 10, 3}));
    EXPECT_EQ(ledger.by_source().size(), 2u);
}

TEST(Http, ParsesOpenAiStyleResponses) {
    nlohmann::json body = {
        {"choices",
         {{{"message", {{"content", "hi"}}},
           {"finish_reason", "stop"},
           {"logprobs",
            {{"content",
              {{{"token", "hi"},
                {"logprob", -0.1},
                {"top_logprobs", {{{"token", "yo"}, {"logprob", -3.0}}, {{"token", "hi"}, {"logprob", -0.1}}}}}}}}}}}},
        {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 1}}}};
    auto c = HttpChatBackend::parse_response(body, 1);
    EXPECT_EQ(c.text, "hi");
    ASSERT_EQ(c.tokens.size(), 1u);
    ASSERT_EQ(c.tokens[0].top_k.size(), 1u);
    EXPECT_EQ(c.tokens[0].top_k[0].first, "hi");
    EXPECT_EQ(c.usage.source, "backend");
    EXPECT_EQ(c.usage.input_tokens, 12);
    EXPECT_THROW(HttpChatBackend::parse_response({{"choices", nlohmann::json::array()}}, 0), ProtocolError);
    EXPECT_THROW(HttpChatBackend::parse_response({{"choices", {{{"message", {{"content", "x"}}}}}}}, 2),
                 ProtocolError);
}

TEST(Http, TalksToAnOpenAiCompatibleServer) {
    httplib::Server server;
    std::atomic<int> hits{0};
    nlohmann::json last_request;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (hits++ == 0) {
            res.status = 503;
            return;
        }
        last_request = nlohmann::json::parse(req.body);
        nlohmann::json out = {{"choices", {{{"message", {{"content", "\nanswer\n"}}}, {"finish_reason", "stop"}}}},
                              {"usage", {{"prompt_tokens", 9}, {"completion_tokens", 2}}}};
        res.set_content(out.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    Gateway gw({1, 3, 1});
    ModelTag tag{"served", 0, BackendKind::HttpChat, "http://127.0.0.1:" + std::to_string(port)};
    CompletionParams p;
    p.prefill = "<inner_monologue>";
    auto c = gw.complete(tag, user("question"), p, "t-9");
    server.stop();
    thread.join();

    EXPECT_EQ(c.text, "\nanswer\n");
    EXPECT_EQ(hits, 2);
    EXPECT_EQ(last_request["model"], "served");
    EXPECT_EQ(last_request["messages"].back()["content"], "<inner_monologue>");
    EXPECT_EQ(last_request["continue_final_message"], true);
    EXPECT_EQ(gw.ledger().trajectory("t-9"), (UsageTotals{9, 2, 1}));
}

} // namespace
} // namespace hintcoach::gateway
