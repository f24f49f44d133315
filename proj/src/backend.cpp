#include "bsm/backend.hpp"

#include "bsm/errors.hpp"

namespace bsm {

using json = nlohmann::json;

void CompletionRequest::validate() const {
  if (prompt.empty()) throw EmptyPrompt("completion request has an empty prompt");
  if (max_new_tokens <= 0) throw InvalidRequest("max_new_tokens must be positive");
  if (const auto* s = std::get_if<Sample>(&decoding)) {
    if (!(s->temperature > 0.0 && s->temperature <= 2.0)) {
      throw InvalidRequest("sampling temperature must lie in (0, 2]");
    }
  }
}

json request_to_json(const CompletionRequest& request) {
  json decoding;
  if (const auto* s = std::get_if<Sample>(&request.decoding)) {
    decoding = {{"mode", "sample"}, {"temperature", s->temperature}, {"seed", s->seed}};
  } else {
    decoding = {{"mode", "greedy"}};
  }
  return {{"model_id", request.model_id},
          {"prompt", request.prompt},
          {"decoding", std::move(decoding)},
          {"max_new_tokens", request.max_new_tokens}};
}

CompletionRequest request_from_json(const json& j) {
  CompletionRequest r;
  r.model_id = j.at("model_id").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.max_new_tokens = j.at("max_new_tokens").get<int>();
  const auto& d = j.at("decoding");
  if (d.at("mode").get<std::string>() == "sample") {
    r.decoding = Sample{d.at("temperature").get<double>(), d.at("seed").get<std::int64_t>()};
  } else {
    r.decoding = Greedy{};
  }
  return r;
}

CompletionResult complete(Backend& backend, const CompletionRequest& request) {
  request.validate();
  return backend.complete(request);
}

}  // namespace bsm
