#pragma once

#include <chrono>
#include <string>

#include "bsm/backend.hpp"

namespace bsm {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};
  /// Fraction of each delay that is randomized, in [0, 1].
  double jitter = 0.2;

  /// Delay before retry number `attempt` (1-based), without jitter.
  std::chrono::milliseconds backoff(int attempt) const;
};

struct RemoteConfig {
  /// Full URL of a chat-completions endpoint, e.g.
  /// "https://host/v1/chat/completions".
  std::string endpoint_url;
  std::string model_id;
  std::string api_key;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

/// Chat-completion payload for a request: one user message carrying the
/// prompt plus decoding parameters.
nlohmann::json wire_payload(const CompletionRequest& request);

/// Inverse of wire_payload.
CompletionRequest request_from_wire(const nlohmann::json& payload);

/// HTTP chat-completion client. Network failures, 429 and 5xx responses are
/// retried with exponential backoff; other non-2xx statuses surface
/// immediately as BackendRefusal.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return "remote:" + config_.model_id; }

 private:
  RemoteConfig config_;
  std::string origin_;
  std::string path_;
};

}  // namespace bsm
