#include "bsm/remote_backend.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include <httplib.h>

#include "bsm/errors.hpp"

namespace bsm {

using json = nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  auto delay = base_delay * (1LL << std::clamp(attempt - 1, 0, 20));
  return std::min<std::chrono::milliseconds>(delay, max_delay);
}

json wire_payload(const CompletionRequest& request) {
  json body = {{"model", request.model_id},
               {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
               {"max_tokens", request.max_new_tokens}};
  if (const auto* s = std::get_if<Sample>(&request.decoding)) {
    body["temperature"] = s->temperature;
    body["seed"] = s->seed;
  } else {
    body["temperature"] = 0.0;
  }
  return body;
}

CompletionRequest request_from_wire(const json& payload) {
  CompletionRequest r;
  r.model_id = payload.at("model").get<std::string>();
  r.prompt = payload.at("messages").at(0).at("content").get<std::string>();
  r.max_new_tokens = payload.at("max_tokens").get<int>();
  auto temperature = payload.value("temperature", 0.0);
  if (temperature > 0.0) {
    r.decoding = Sample{temperature, payload.at("seed").get<std::int64_t>()};
  }
  return r;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  const auto& url = config_.endpoint_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint url lacks a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.rfind("https", 0) == 0) throw ConfigError("https endpoints need a TLS-enabled build");
#endif
}

CompletionResult RemoteBackend::complete(const CompletionRequest& request) {
  request.validate();
  const auto body = wire_payload(request).dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::string last_error;
  const int attempts = std::max(1, config_.retry.max_attempts);

  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      auto delay = config_.retry.backoff(attempt - 1);
      auto jittered = delay.count() * (1.0 + config_.retry.jitter * unit(rng));
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(std::max(0.0, jittered))));
    }

    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    auto start = std::chrono::steady_clock::now();
    auto res = client.Post(path_, headers, body, "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      continue;
    }
    if (res->status < 200 || res->status >= 300) throw BackendRefusal(res->status, res->body);

    try {
      auto reply = json::parse(res->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      return {content.is_null() ? std::string{} : content.get<std::string>(), id(), false, elapsed.count()};
    } catch (const json::exception& e) {
      throw BackendRefusal(res->status, "malformed completion payload (" + std::string(e.what()) + "): " + res->body);
    }
  }
  throw TransportError(last_error + " (after " + std::to_string(attempts) + " attempts)", attempts);
}

}  // namespace bsm
