#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "bsm/backend.hpp"

namespace bsm {

/// One scripted reply. A rule fires when every `contains` substring occurs in
/// the prompt, the optional regex matches somewhere in it, and (if set) the
/// request is sampled with the given seed.
struct MockRule {
  std::vector<std::string> contains;
  std::optional<std::string> regex;
  std::optional<std::int64_t> seed;
  std::string response;
  /// When set the rule raises instead of replying: "transport" or "refusal".
  std::optional<std::string> fail;
};

struct MockScript {
  std::vector<MockRule> rules;
  std::string default_response;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Deterministic scripted backend; first matching rule wins. Holds no mutable
/// state apart from a call counter, so replies never depend on call order.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockScript script, std::string id = "mock");

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return id_; }

  /// Index of the rule that would answer, or nullopt for the default reply.
  std::optional<std::size_t> match(const CompletionRequest& request) const;

  std::size_t call_count() const { return calls_.load(); }

 private:
  MockScript script_;
  std::vector<std::optional<std::regex>> compiled_;
  std::string id_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace bsm
