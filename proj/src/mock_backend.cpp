#include "bsm/mock_backend.hpp"

#include <fstream>

#include "bsm/errors.hpp"

namespace bsm {

using json = nlohmann::json;

MockScript MockScript::from_json(const json& j) {
  MockScript script;
  script.default_response = j.value("default", std::string{});
  for (const auto& r : j.value("rules", json::array())) {
    MockRule rule;
    if (auto it = r.find("contains"); it != r.end()) {
      if (it->is_string()) {
        rule.contains.push_back(it->get<std::string>());
      } else {
        rule.contains = it->get<std::vector<std::string>>();
      }
    }
    if (r.contains("regex")) rule.regex = r.at("regex").get<std::string>();
    if (r.contains("seed")) rule.seed = r.at("seed").get<std::int64_t>();
    if (r.contains("fail")) rule.fail = r.at("fail").get<std::string>();
    rule.response = r.value("response", std::string{});
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("malformed mock script " + path.string() + ": " + e.what());
  }
}

json MockScript::to_json() const {
  json rules = json::array();
  for (const auto& r : this->rules) {
    json o;
    if (!r.contains.empty()) o["contains"] = r.contains;
    if (r.regex) o["regex"] = *r.regex;
    if (r.seed) o["seed"] = *r.seed;
    if (r.fail) o["fail"] = *r.fail;
    o["response"] = r.response;
    rules.push_back(std::move(o));
  }
  return {{"rules", std::move(rules)}, {"default", default_response}};
}

MockBackend::MockBackend(MockScript script, std::string id)
    : script_(std::move(script)), id_(std::move(id)) {
  compiled_.reserve(script_.rules.size());
  for (const auto& rule : script_.rules) {
    if (rule.regex) {
      try {
        compiled_.emplace_back(std::regex(*rule.regex, std::regex::ECMAScript));
      } catch (const std::regex_error& e) {
        throw ConfigError("invalid mock regex '" + *rule.regex + "': " + e.what());
      }
    } else {
      compiled_.emplace_back(std::nullopt);
    }
  }
}

std::optional<std::size_t> MockBackend::match(const CompletionRequest& request) const {
  const auto* sample = std::get_if<Sample>(&request.decoding);
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const auto& rule = script_.rules[i];
    if (rule.seed && (sample == nullptr || sample->seed != *rule.seed)) continue;
    bool ok = true;
    for (const auto& needle : rule.contains) {
      if (request.prompt.find(needle) == std::string::npos) {
        ok = false;
        break;
      }
    }
    if (ok && compiled_[i] && !std::regex_search(request.prompt, *compiled_[i])) ok = false;
    if (ok) return i;
  }
  return std::nullopt;
}

CompletionResult MockBackend::complete(const CompletionRequest& request) {
  request.validate();
  ++calls_;
  auto idx = match(request);
  if (!idx) return {script_.default_response, id_, false, 0};
  const auto& rule = script_.rules[*idx];
  if (rule.fail) {
    if (*rule.fail == "refusal") throw BackendRefusal(400, rule.response);
    throw TransportError("scripted transport failure: " + rule.response, 1);
  }
  return {rule.response, id_, false, 0};
}

}  // namespace bsm
