#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mmfc/explain.hpp"
#include "mmfc/random.hpp"

namespace mmfc::explain {

StubClient::StubClient(std::optional<std::string> zero_shot_reply)
    : zero_shot_reply_(std::move(zero_shot_reply)) {}

std::string StubClient::complete(const CompletionRequest& req) {
  calls_.fetch_add(1);
  if (req.kind == RequestKind::zero_shot) {
    if (zero_shot_reply_) return *zero_shot_reply_;
    return std::string(label_word(label_from_code(static_cast<int>(fnv1a64(req.claim) % 3))));
  }
  const auto word = req.label ? label_word(*req.label) : std::string_view("none");
  return "STUB[" + std::string(word) + "]: " + req.claim;
}

OpenAiClient::OpenAiClient(OpenAiOptions opts) : opts_(std::move(opts)) {
  const char* key = std::getenv(opts_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw ClientError(opts_.api_key_env + " is not set");
  api_key_ = key;
  if (const char* base = std::getenv("OPENAI_BASE_URL"); base != nullptr && *base != '\0')
    opts_.base_url = base;
}

std::string OpenAiClient::complete(const CompletionRequest& req) {
  nlohmann::json body = {
      {"model", req.model},
      {"temperature", opts_.temperature},
      {"messages",
       {{{"role", "system"}, {"content", req.prompt.system}},
        {{"role", "user"}, {"content", req.prompt.user}}}},
  };

  httplib::Client http(opts_.base_url);
  http.set_connection_timeout(opts_.timeout);
  http.set_read_timeout(opts_.timeout);
  http.set_bearer_token_auth(api_key_);

  auto res = http.Post("/v1/chat/completions", body.dump(), "application/json");
  if (!res) throw TransientClientError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransientClientError("http " + std::to_string(res->status));
  if (res->status != 200) throw ClientError("http " + std::to_string(res->status) + ": " + res->body);

  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ClientError(std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace mmfc::explain
