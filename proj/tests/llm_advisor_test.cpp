#include "repauc/llm_advisor.hpp"
#include "repauc/llm_http.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <string>
#include <thread>

using namespace repauc;

namespace {

PromptContext first_episode() {
  PromptContext ctx;
  ctx.valuation_per_channel = 2.5;
  ctx.remaining_budget = 15.0;
  ctx.demand = 1;
  ctx.episodes_total = 20;
  ctx.episodes_remaining = 20;
  ctx.budget_mode = BudgetMode::Refill;
  return ctx;
}

class CannedTransport final : public ChatTransport {
public:
  explicit CannedTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string post_json(const std::string& body) override {
    bodies.push_back(body);
    if (next_ >= replies_.size()) throw TransportError("connection refused");
    return replies_[next_++];
  }
  std::vector<std::string> bodies;

private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

std::string openai_reply(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
}

} // namespace

TEST(build_prompt, first_episode_marks_histories_empty) {
  const auto p = build_prompt(first_episode());
  EXPECT_NE(p.find("Given the following network and economic context:"), std::string::npos);
  EXPECT_NE(p.find("- Your true valuation for the BS spectrum: 2.5000"), std::string::npos);
  EXPECT_NE(p.find("- Your budget: 15.0000"), std::string::npos);
  EXPECT_NE(p.find("- Number of sub-channels required: 1"), std::string::npos);
  EXPECT_NE(p.find("- Previous clearing prices: none"), std::string::npos);
  EXPECT_NE(p.find("- Previous own bids and auction outcomes: none"), std::string::npos);
  EXPECT_NE(p.find("1. Recommended bid value for the spectrum."), std::string::npos);
  EXPECT_NE(p.find("2. A brief explanation of your reasoning."), std::string::npos);
  EXPECT_NE(p.find("Bid value: [value]"), std::string::npos);
  EXPECT_EQ(p.find(kPacingInstruction), std::string::npos);
}

TEST(build_prompt, static_budget_adds_pacing_sentence) {
  auto ctx = first_episode();
  ctx.budget_mode = BudgetMode::Static;
  const auto p = build_prompt(ctx);
  EXPECT_NE(p.find("maximize cumulative utility while never exhausting the budget before the last episode"),
            std::string::npos);
}

TEST(build_prompt, histories_and_determinism) {
  auto ctx = first_episode();
  ctx.clearing_price_history = {1.2, 1.85};
  ctx.own_bid_history = {{1, 2.1, true, 1.2}, {2, std::nullopt, false, 0.0}, {3, 1.9, false, 0.0}};
  ctx.episodes_remaining = 17;
  const auto p = build_prompt(ctx);
  EXPECT_NE(p.find("- Previous clearing prices: 1.2000, 1.8500"), std::string::npos);
  EXPECT_NE(p.find("episode 1: bid 2.1000, won (paid 1.2000); episode 2: no bid; episode 3: bid 1.9000, lost"),
            std::string::npos);
  EXPECT_NE(p.find("remaining: 17 of 20"), std::string::npos);
  EXPECT_EQ(p, build_prompt(ctx));
}

TEST(parse_reply, format_exemplar) {
  const auto r = parse_reply("Bid value: 2.40\nExplanation: \"pacing for later rounds\"");
  EXPECT_DOUBLE_EQ(r.bid_value, 2.40);
  EXPECT_EQ(r.explanation, "pacing for later rounds");
}

TEST(parse_reply, tolerant_extraction) {
  const auto r = parse_reply("I think... Bid value: 3\nExplanation: aggressive");
  EXPECT_DOUBLE_EQ(r.bid_value, 3.0);
  EXPECT_EQ(r.explanation, "aggressive");
  EXPECT_DOUBLE_EQ(parse_reply("**bid VALUE:**   1.75").bid_value, 1.75);
  EXPECT_TRUE(parse_reply("Bid value: 0.5").explanation.empty());
}

TEST(parse_reply, failures) {
  EXPECT_THROW(parse_reply("no bid today"), ReplyParseError);
  EXPECT_THROW(parse_reply("Bid value: soon"), ReplyParseError);
  EXPECT_THROW(parse_reply("Bid value: -2"), ReplyParseError);
  EXPECT_THROW(parse_reply("Bid value: inf"), ReplyParseError);
  EXPECT_THROW(parse_reply("Bid value: nan"), ReplyParseError);
  EXPECT_THROW(parse_reply("Bid value: 1e999"), ReplyParseError);
  EXPECT_THROW(parse_reply(""), ReplyParseError);
}

TEST(parse_reply, arbitrary_bytes_never_crash) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> byte(0, 255), len(0, 64);
  const std::string seeds[] = {"Bid value:", "Bid value: ", "Explanation:", "1.5", "-", "."};
  for (int t = 0; t < 20000; ++t) {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      if (byte(rng) < 20) s += seeds[static_cast<std::size_t>(byte(rng)) % 6];
      else s += static_cast<char>(byte(rng));
    }
    try {
      const auto r = parse_reply(s);
      ASSERT_TRUE(std::isfinite(r.bid_value));
      ASSERT_GE(r.bid_value, 0.0);
    } catch (const ReplyParseError&) {
    }
  }
}

TEST(scripted_advisor, policies) {
  auto ctx = first_episode();
  ScriptedAdvisor echo{EchoValuation{}};
  EXPECT_DOUBLE_EQ(echo.advise(ctx).bid_value, 2.5);
  ScriptedAdvisor frac{FixedFraction{0.8}};
  EXPECT_DOUBLE_EQ(frac.advise(ctx).bid_value, 2.0);
  ScriptedAdvisor replay{Replay{{1.5, 2.0}}};
  EXPECT_DOUBLE_EQ(replay.advise(ctx).bid_value, 1.5);
  EXPECT_DOUBLE_EQ(replay.advise(ctx).bid_value, 2.0);
  EXPECT_THROW(replay.advise(ctx), AdvisorError);
  EXPECT_THROW(ScriptedAdvisor{FixedFraction{-1.0}}, AdvisorError);
}

TEST(scripted_advisor, raw_response_parses_back) {
  ScriptedAdvisor frac{FixedFraction{0.85}};
  const auto r = frac.advise(first_episode());
  EXPECT_DOUBLE_EQ(parse_reply(r.raw_response).bid_value, r.bid_value);
}

TEST(request_bid, echo_returns_valuation) {
  ScriptedAdvisor echo{EchoValuation{}};
  const auto d = request_bid(echo, first_episode(), 1.3);
  EXPECT_DOUBLE_EQ(d.bid, 2.5);
  EXPECT_FALSE(d.fallback_used);
}

TEST(request_bid, failing_endpoint_falls_back) {
  EndpointConfig ep;
  ep.max_retries = 2;
  auto transport = std::make_unique<CannedTransport>(std::vector<std::string>{});
  auto* raw = transport.get();
  ChatCompletionAdvisor advisor(ep, std::move(transport));
  const auto d = request_bid(advisor, first_episode(), 1.7);
  EXPECT_TRUE(d.fallback_used);
  EXPECT_DOUBLE_EQ(d.bid, 1.7);
  EXPECT_EQ(advisor.attempts(), 3);
  EXPECT_EQ(raw->bodies.size(), 3u);
  EXPECT_FALSE(d.error.empty());
}

TEST(request_bid, retries_past_unparseable_reply) {
  EndpointConfig ep;
  ep.max_retries = 1;
  ChatCompletionAdvisor advisor(ep, std::make_unique<CannedTransport>(std::vector<std::string>{
                                        openai_reply("I would rather not say"), openai_reply("Bid value: 1.9")}));
  const auto d = request_bid(advisor, first_episode(), 1.3);
  EXPECT_FALSE(d.fallback_used);
  EXPECT_DOUBLE_EQ(d.bid, 1.9);
  EXPECT_EQ(advisor.attempts(), 2);
}

TEST(request_bid, caps_to_valuation_and_budget) {
  auto ctx = first_episode();
  ctx.valuation_per_channel = 3.0;
  ScriptedAdvisor big{Replay{{10.0, 10.0}}};
  EXPECT_DOUBLE_EQ(request_bid(big, ctx, 1.2).bid, 3.0);
  EXPECT_DOUBLE_EQ(request_bid(big, ctx, 1.2, /*clamp_to_valuation=*/false).bid, 10.0);

  ctx.remaining_budget = 4.0;
  ctx.demand = 2;
  ScriptedAdvisor echo{EchoValuation{}};
  EXPECT_DOUBLE_EQ(request_bid(echo, ctx, 1.2).bid, 2.0);
}

TEST(request_bid, cap_safety_on_random_replies) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> val(0.0, 5.0), bud(0.0, 20.0), reply(0.0, 50.0);
  std::uniform_int_distribution<int> dem(1, 3);
  for (int t = 0; t < 2000; ++t) {
    auto ctx = first_episode();
    ctx.valuation_per_channel = val(rng);
    ctx.remaining_budget = bud(rng);
    ctx.demand = dem(rng);
    ScriptedAdvisor a{Replay{{reply(rng)}}};
    const auto d = request_bid(a, ctx, 0.0);
    ASSERT_LE(d.bid, ctx.valuation_per_channel);
    ASSERT_LE(ctx.demand * d.bid, ctx.remaining_budget + 1e-12);
  }
}

TEST(chat_request, wire_shape) {
  EndpointConfig ep;
  ep.model_name = "test-model";
  ep.temperature = 0.0;
  const auto j = make_chat_request("hello", ep);
  EXPECT_EQ(j["model"], "test-model");
  EXPECT_EQ(j["temperature"], 0.0);
  ASSERT_EQ(j["messages"].size(), 1u);
  EXPECT_EQ(j["messages"][0]["role"], "user");
  EXPECT_EQ(j["messages"][0]["content"], "hello");

  EXPECT_EQ(extract_reply_text(nlohmann::json::parse(openai_reply("Bid value: 2"))), "Bid value: 2");
  EXPECT_EQ(extract_reply_text({{"content", {{{"type", "text"}, {"text", "Bid value: 3"}}}}}), "Bid value: 3");
  EXPECT_THROW(extract_reply_text({{"choices", nlohmann::json::array()}}), ReplyParseError);
}

TEST(http_transport, round_trip_against_local_server) {
  httplib::Server server;
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    res.set_content(openai_reply("Bid value: 2.25\nExplanation: \"steady\""), "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("busy", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  EndpointConfig ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  ep.api_key = "secret";
  ep.timeout = std::chrono::milliseconds(2000);
  auto advisor = make_http_advisor(ep);
  const auto reply = advisor->advise(first_episode());
  EXPECT_DOUBLE_EQ(reply.bid_value, 2.25);
  EXPECT_EQ(reply.explanation, "steady");
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_body["messages"][0]["content"], build_prompt(first_episode()));
  EXPECT_EQ(seen_body["model"], "gpt-5-mini");

  ep.path = "/broken";
  ep.max_retries = 1;
  auto broken = make_http_advisor(ep);
  const auto d = request_bid(*broken, first_episode(), 1.4);
  EXPECT_TRUE(d.fallback_used);
  EXPECT_NE(d.error.find("503"), std::string::npos);

  server.stop();
  worker.join();
}

TEST(endpoint_from_env, requires_variables) {
  ::unsetenv(kEnvLlmUrl);
  ::unsetenv(kEnvLlmApiKey);
  try {
    endpoint_from_env();
    FAIL() << "expected an error";
  } catch (const AdvisorError& e) {
    EXPECT_NE(std::string(e.what()).find(kEnvLlmUrl), std::string::npos);
  }
  ::setenv(kEnvLlmUrl, "http://localhost:1", 1);
  ::setenv(kEnvLlmApiKey, "k", 1);
  ::setenv(kEnvLlmModel, "other", 1);
  const auto ep = endpoint_from_env();
  EXPECT_EQ(ep.base_url, "http://localhost:1");
  EXPECT_EQ(ep.model_name, "other");
  ::unsetenv(kEnvLlmUrl);
  ::unsetenv(kEnvLlmApiKey);
  ::unsetenv(kEnvLlmModel);
}
