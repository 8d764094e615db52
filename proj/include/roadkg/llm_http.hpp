#pragma once

// HTTP client for a chat-style completion service. Kept out of explain.hpp so
// translation units that never talk to a remote model skip the httplib
// dependency.

#include <cstdlib>
#include <string>

#include "roadkg/common.hpp"
#include "roadkg/explain.hpp"

#include "httplib.h"
#include "json.hpp"

namespace roadkg {

inline constexpr const char* kLlmTokenEnvVar = "ROADKG_LLM_TOKEN";

// POSTs {model, messages:[system, user]} as JSON to `endpoint` + `path` with
// bearer-token auth read from ROADKG_LLM_TOKEN, and extracts the plain-text
// completion from choices[0].message.content.
class HttpBackend : public LlmBackend {
 public:
  HttpBackend(std::string endpoint, std::string model,
              std::string path = "/v1/chat/completions", int timeout_s = 30)
      : endpoint_(std::move(endpoint)), model_(std::move(model)), path_(std::move(path)),
        timeout_s_(timeout_s) {}

  std::string complete(const PromptBundle& bundle) override {
    nlohmann::json payload = {
        {"model", model_},
        {"messages",
         {{{"role", "system"}, {"content", bundle.system_prompt}},
          {{"role", "user"}, {"content", bundle.augmented_user_message()}}}}};

    httplib::Client client(endpoint_);
    client.set_connection_timeout(timeout_s_, 0);
    client.set_read_timeout(timeout_s_, 0);
    httplib::Headers headers;
    if (const char* token = std::getenv(kLlmTokenEnvVar))
      headers.emplace("Authorization", std::string("Bearer ") + token);

    auto res = client.Post(path_, headers, payload.dump(), "application/json");
    if (!res) fail("LLM backend unreachable at " + endpoint_);
    if (res->status != 200)
      fail("LLM backend returned HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed LLM response: ") + e.what());
    }
  }

 private:
  std::string endpoint_;
  std::string model_;
  std::string path_;
  int timeout_s_;
};

}  // namespace roadkg
