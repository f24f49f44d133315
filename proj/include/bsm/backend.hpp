#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

namespace bsm {

struct Greedy {
  bool operator==(const Greedy&) const = default;
};

struct Sample {
  double temperature = 0.7;  // (0, 2]
  std::int64_t seed = 0;
  bool operator==(const Sample&) const = default;
};

using Decoding = std::variant<Greedy, Sample>;

struct CompletionRequest {
  std::string prompt;
  Decoding decoding = Greedy{};
  int max_new_tokens = 1024;
  std::string model_id;

  bool operator==(const CompletionRequest&) const = default;

  /// Throws EmptyPrompt or InvalidRequest when an invariant does not hold.
  void validate() const;

  bool is_greedy() const { return std::holds_alternative<Greedy>(decoding); }
};

struct CompletionResult {
  std::string text;
  std::string backend_id;
  bool cached = false;
  std::int64_t latency_ms = 0;
};

/// Canonical serialization. Used both as the cache key preimage and as the
/// source of the remote wire payload.
nlohmann::json request_to_json(const CompletionRequest& request);
CompletionRequest request_from_json(const nlohmann::json& j);

/// Text-completion service. Implementations must be safe to call from
/// several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
  virtual std::string id() const = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

/// Validates the request, then forwards to the backend.
CompletionResult complete(Backend& backend, const CompletionRequest& request);

}  // namespace bsm
