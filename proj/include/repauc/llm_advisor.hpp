#pragma once

// Prompt construction, reply parsing and advisor implementations for
// LLM-assisted bidding. The transport is abstract; see llm_http.hpp for the
// HTTP client.

#include "repauc/core_model.hpp"
#include "repauc/detail/format.hpp"
#include "repauc/strategies.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace repauc {

class AdvisorError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ReplyParseError : public AdvisorError {
public:
  using AdvisorError::AdvisorError;
};

class TransportError : public AdvisorError {
public:
  using AdvisorError::AdvisorError;
};

struct PastBid {
  int episode = 0;
  std::optional<double> bid; // nullopt: no bid submitted (abstained or blocked)
  bool won = false;
  double payment = 0.0;
};

struct PromptContext {
  double valuation_per_channel = 0.0;
  double remaining_budget = 0.0;
  int demand = 1;
  std::vector<double> clearing_price_history;
  std::vector<PastBid> own_bid_history;
  int episodes_total = 0;
  int episodes_remaining = 0;
  BudgetMode budget_mode = BudgetMode::Refill;
};

struct AdvisorReply {
  double bid_value = 0.0;
  std::string explanation;
  std::string raw_response;
};

inline constexpr std::string_view kPacingInstruction =
    "Your objective: maximize cumulative utility while never exhausting the budget before the last episode.";

inline std::string build_prompt(const PromptContext& ctx) {
  using detail::format_fixed;
  std::string p;
  p += "Given the following network and economic context:\n";
  p += "- Your true valuation for the BS spectrum: " + format_fixed(ctx.valuation_per_channel, 4) +
       " per sub-channel\n";
  p += "- Your budget: " + format_fixed(ctx.remaining_budget, 4) + "\n";
  p += "- Number of sub-channels required: " + std::to_string(ctx.demand) + "\n";

  p += "- Previous clearing prices: ";
  if (ctx.clearing_price_history.empty()) {
    p += "none (first episode)";
  } else {
    for (std::size_t i = 0; i < ctx.clearing_price_history.size(); ++i) {
      if (i) p += ", ";
      p += format_fixed(ctx.clearing_price_history[i], 4);
    }
  }
  p += "\n";

  p += "- Previous own bids and auction outcomes: ";
  if (ctx.own_bid_history.empty()) {
    p += "none (first episode)";
  } else {
    for (std::size_t i = 0; i < ctx.own_bid_history.size(); ++i) {
      const auto& h = ctx.own_bid_history[i];
      if (i) p += "; ";
      p += "episode " + std::to_string(h.episode) + ": ";
      if (!h.bid) {
        p += "no bid";
      } else {
        p += "bid " + format_fixed(*h.bid, 4) + ", ";
        p += h.won ? "won (paid " + format_fixed(h.payment, 4) + ")" : "lost";
      }
    }
  }
  p += "\n";
  p += "- Auction episodes remaining: " + std::to_string(ctx.episodes_remaining) + " of " +
       std::to_string(ctx.episodes_total) + "\n";
  if (ctx.budget_mode == BudgetMode::Static) {
    p += kPacingInstruction;
    p += "\n";
  }
  p += "Please analyze and provide:\n";
  p += "1. Recommended bid value for the spectrum.\n";
  p += "2. A brief explanation of your reasoning.\n";
  p += "Expected response format:\n";
  p += "Bid value: [value]\n";
  p += "Explanation: \"[Short textual reasoning]\"\n";
  return p;
}

namespace detail {

inline bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
        std::tolower(static_cast<unsigned char>(word[i])))
      return false;
  }
  return true;
}

inline std::size_t ifind(std::string_view text, std::string_view word, std::size_t from = 0) {
  for (std::size_t i = from; i + word.size() <= text.size(); ++i)
    if (iequals_at(text, i, word)) return i;
  return std::string_view::npos;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

} // namespace detail

/// Extracts the number after "Bid value:" and the text after "Explanation:".
inline AdvisorReply parse_reply(std::string_view raw) {
  constexpr std::string_view kBidLabel = "bid value:";
  constexpr std::string_view kExplLabel = "explanation:";

  const auto label = detail::ifind(raw, kBidLabel);
  if (label == std::string_view::npos) throw ReplyParseError("reply has no 'Bid value:' label");

  std::size_t pos = label + kBidLabel.size();
  while (pos < raw.size() && (raw[pos] == ' ' || raw[pos] == '\t' || raw[pos] == '*')) ++pos;
  const bool negative = pos < raw.size() && raw[pos] == '-';
  if (pos < raw.size() && (raw[pos] == '-' || raw[pos] == '+')) ++pos;

  double value = 0.0;
  const char* first = raw.data() + pos;
  const char* last = raw.data() + raw.size();
  // only plain decimals; from_chars would otherwise accept "inf" and "nan"
  if (first == last || !(std::isdigit(static_cast<unsigned char>(*first)) || *first == '.'))
    throw ReplyParseError("bid value is not numeric");
  auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (ec != std::errc{}) throw ReplyParseError("bid value is not numeric");
  if (negative && value != 0.0) throw ReplyParseError("bid value is negative");
  if (!std::isfinite(value)) throw ReplyParseError("bid value is not finite");

  AdvisorReply reply;
  reply.bid_value = value;
  reply.raw_response = std::string(raw);

  const auto expl = detail::ifind(raw, kExplLabel, static_cast<std::size_t>(ptr - raw.data()));
  if (expl != std::string_view::npos) {
    auto text = detail::trim(raw.substr(expl + kExplLabel.size()));
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
    reply.explanation = std::string(text);
  }
  return reply;
}

struct EndpointConfig {
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::string model_name = "gpt-5-mini";
  std::chrono::milliseconds timeout{30'000};
  int max_retries = 2;
  double temperature = 0.0;

  void validate() const {
    if (max_retries < 0) throw AdvisorError("max_retries must be nonnegative");
    if (timeout.count() <= 0) throw AdvisorError("timeout must be positive");
    if (!std::isfinite(temperature) || temperature < 0.0) throw AdvisorError("temperature must be >= 0");
  }
};

/// Request body: model, temperature and the prompt as one user message.
inline nlohmann::json make_chat_request(std::string_view prompt, const EndpointConfig& endpoint) {
  return {
      {"model", endpoint.model_name},
      {"temperature", endpoint.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
  };
}

/// First text block of a chat-completion response. Accepts the
/// choices[0].message.content shape and the content[0].text shape.
inline std::string extract_reply_text(const nlohmann::json& response) {
  if (response.contains("choices") && response["choices"].is_array() && !response["choices"].empty()) {
    const auto& msg = response["choices"][0].value("message", nlohmann::json::object());
    if (msg.contains("content") && msg["content"].is_string()) return msg["content"].get<std::string>();
  }
  if (response.contains("content") && response["content"].is_array()) {
    for (const auto& block : response["content"])
      if (block.is_object() && block.contains("text") && block["text"].is_string())
        return block["text"].get<std::string>();
  }
  throw ReplyParseError("response carries no text content");
}

class ChatTransport {
public:
  virtual ~ChatTransport() = default;
  // Posts a JSON body and returns the raw response body; throws TransportError.
  virtual std::string post_json(const std::string& body) = 0;
};

class BidAdvisor {
public:
  virtual ~BidAdvisor() = default;
  virtual AdvisorReply advise(const PromptContext& ctx) = 0;
};

struct EchoValuation {};
struct FixedFraction {
  double fraction = 1.0;
};
struct Replay {
  std::vector<double> bids;
};
using ScriptPolicy = std::variant<EchoValuation, FixedFraction, Replay>;

/// Deterministic offline advisor.
class ScriptedAdvisor final : public BidAdvisor {
public:
  explicit ScriptedAdvisor(ScriptPolicy policy) : policy_(std::move(policy)) {
    if (auto* f = std::get_if<FixedFraction>(&policy_); f && !(f->fraction >= 0.0 && std::isfinite(f->fraction)))
      throw AdvisorError("fixed fraction must be finite and nonnegative");
  }

  AdvisorReply advise(const PromptContext& ctx) override {
    AdvisorReply r;
    if (std::holds_alternative<EchoValuation>(policy_)) {
      r.bid_value = ctx.valuation_per_channel;
      r.explanation = "echo valuation";
    } else if (auto* f = std::get_if<FixedFraction>(&policy_)) {
      r.bid_value = f->fraction * ctx.valuation_per_channel;
      r.explanation = "fixed fraction " + detail::format_shortest(f->fraction);
    } else {
      auto& replay = std::get<Replay>(policy_);
      if (next_ >= replay.bids.size()) throw AdvisorError("replay script exhausted");
      r.bid_value = replay.bids[next_++];
      r.explanation = "replay";
    }
    r.raw_response = "Bid value: " + detail::format_shortest(r.bid_value) + "\nExplanation: \"" + r.explanation + "\"";
    return r;
  }

private:
  ScriptPolicy policy_;
  std::size_t next_ = 0;
};

/// Sends the prompt to a chat-completion endpoint, retrying on transport or
/// parse failures up to max_retries times.
class ChatCompletionAdvisor final : public BidAdvisor {
public:
  ChatCompletionAdvisor(EndpointConfig endpoint, std::unique_ptr<ChatTransport> transport)
      : endpoint_(std::move(endpoint)), transport_(std::move(transport)) {
    endpoint_.validate();
    if (!transport_) throw AdvisorError("transport is required");
  }

  AdvisorReply advise(const PromptContext& ctx) override {
    const std::string body = make_chat_request(build_prompt(ctx), endpoint_).dump();
    std::string last_error;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
      ++attempts_;
      try {
        const auto response = nlohmann::json::parse(transport_->post_json(body));
        return parse_reply(extract_reply_text(response));
      } catch (const AdvisorError& e) {
        last_error = e.what();
      } catch (const nlohmann::json::exception& e) {
        last_error = std::string("malformed response: ") + e.what();
      }
    }
    throw AdvisorError("advisor failed after " + std::to_string(endpoint_.max_retries + 1) +
                       " attempts: " + last_error);
  }

  [[nodiscard]] int attempts() const { return attempts_; }

private:
  EndpointConfig endpoint_;
  std::unique_ptr<ChatTransport> transport_;
  int attempts_ = 0;
};

struct BidDecision {
  double bid = 0.0;                      // after valuation clamp and budget cap
  std::optional<double> suggested;       // advisor's raw suggestion
  std::string explanation;
  bool fallback_used = false;
  std::string error;
};

/// Asks the advisor for a bid, degrading any failure to `fallback_bid`.
/// The result is clamped to [0, v] when `clamp_to_valuation` is set, then
/// budget-capped so N * bid never exceeds the remaining budget.
inline BidDecision request_bid(BidAdvisor& advisor, const PromptContext& ctx, double fallback_bid,
                               bool clamp_to_valuation = true) {
  BidDecision d;
  double bid = fallback_bid;
  try {
    auto reply = advisor.advise(ctx);
    d.suggested = reply.bid_value;
    d.explanation = std::move(reply.explanation);
    bid = reply.bid_value;
  } catch (const AdvisorError& e) {
    d.fallback_used = true;
    d.error = e.what();
  }
  if (clamp_to_valuation || d.fallback_used) bid = std::clamp(bid, 0.0, ctx.valuation_per_channel);
  d.bid = budget_cap(std::max(0.0, bid), ctx.demand, ctx.remaining_budget);
  return d;
}

} // namespace repauc
