#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace bsm {

/// Base of every error raised by the engine. `kind()` is the stable class
/// name written into run manifests ("ScoreParseFailure", "TransportError", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define BSM_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// llm_backend
BSM_DEFINE_ERROR(EmptyPrompt);
BSM_DEFINE_ERROR(CacheCorrupt);
BSM_DEFINE_ERROR(InvalidRequest);
BSM_DEFINE_ERROR(ConfigError);

class TransportError : public Error {
 public:
  TransportError(const std::string& message, int attempts)
      : Error("TransportError", message), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class BackendRefusal : public Error {
 public:
  BackendRefusal(int status, std::string body)
      : Error("BackendRefusal", "backend refused request with status " + std::to_string(status)),
        status_(status),
        body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

// program_core
class MissingPlaceholder : public Error {
 public:
  explicit MissingPlaceholder(std::string name)
      : Error("MissingPlaceholder", "unbound placeholder {" + name + "}"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownPlaceholder : public Error {
 public:
  explicit UnknownPlaceholder(std::string name)
      : Error("UnknownPlaceholder", "undeclared placeholder {" + name + "}"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

BSM_DEFINE_ERROR(TemplateError);
BSM_DEFINE_ERROR(BranchEmpty);

// judge_bsm / judge_baselines
BSM_DEFINE_ERROR(ParseFailure);
BSM_DEFINE_ERROR(ScoreParseFailure);
BSM_DEFINE_ERROR(ScoreOutOfRange);
BSM_DEFINE_ERROR(VerdictParseFailure);
BSM_DEFINE_ERROR(EmptyJudgments);

// metrics
BSM_DEFINE_ERROR(EmptyDenominator);
BSM_DEFINE_ERROR(EmptySubset);

// storygen
BSM_DEFINE_ERROR(PlanParseFailure);
BSM_DEFINE_ERROR(PreconditionViolation);
BSM_DEFINE_ERROR(EmptyInput);

// harness
BSM_DEFINE_ERROR(JoinError);
BSM_DEFINE_ERROR(IoError);

class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : Error("SchemaError", line ? "line " + std::to_string(*line) + ": " + message : message),
        line_(line) {}
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

#undef BSM_DEFINE_ERROR

}  // namespace bsm
