#include "bsm/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "bsm/errors.hpp"

namespace bsm {

using json = nlohmann::json;

std::string HumanJudgment::sample_id() const {
  return question_id + ":" + model_a + ":" + model_b + ":t" + std::to_string(turn);
}

AgreementResult agreement(const Predictions& predictions, const std::vector<HumanJudgment>& humans,
                          AgreementMode mode) {
  AgreementResult r;
  if (mode == AgreementMode::PerVote) {
    for (const auto& h : humans) {
      auto it = predictions.find(h.sample_id());
      if (it == predictions.end()) {
        ++r.votes_without_prediction;
        continue;
      }
      ++r.denominator;
      if (it->second == h.vote) ++r.agreeing;
    }
  } else {
    std::map<std::string, std::array<std::size_t, 3>> tallies;
    for (const auto& h : humans) {
      if (!predictions.count(h.sample_id())) {
        ++r.votes_without_prediction;
        continue;
      }
      ++tallies[h.sample_id()][static_cast<std::size_t>(h.vote)];
    }
    for (const auto& [id, counts] : tallies) {
      auto top = std::max_element(counts.begin(), counts.end());
      if (std::count(counts.begin(), counts.end(), *top) > 1) {
        ++r.tied_samples;
        continue;
      }
      ++r.denominator;
      if (predictions.at(id) == static_cast<Verdict>(top - counts.begin())) ++r.agreeing;
    }
  }
  if (r.denominator == 0) throw EmptyDenominator("agreement has no scorable votes");
  r.value = static_cast<double>(r.agreeing) / static_cast<double>(r.denominator);
  return r;
}

double position_bias(const RunPreferences& runs) {
  if (runs.empty()) throw EmptyDenominator("position bias over zero samples");
  std::size_t changed = 0;
  for (const auto& [_, pair] : runs) {
    if (pair.first != pair.second) ++changed;
  }
  return 100.0 * static_cast<double>(changed) / static_cast<double>(runs.size());
}

LengthBiasResult length_bias(const Predictions& predictions, const std::vector<HumanJudgment>& humans,
                             const ResponseLengths& lengths) {
  LengthBiasResult r;
  for (const auto& h : humans) {
    if (h.vote == Verdict::Tie) continue;
    auto id = h.sample_id();
    auto len = lengths.find(id);
    auto pred = predictions.find(id);
    if (len == lengths.end() || pred == predictions.end()) continue;
    auto [len_a, len_b] = len->second;
    if (len_a == len_b) continue;
    Verdict shorter = len_a < len_b ? Verdict::A : Verdict::B;
    if (h.vote != shorter) continue;
    ++r.denominator;
    if (pred->second == Verdict::Tie) {
      ++r.chose_tie;
    } else if (pred->second != shorter) {
      ++r.chose_longer;
    }
  }
  if (r.denominator == 0) throw EmptyDenominator("no human vote preferred a strictly shorter response");
  auto den = static_cast<double>(r.denominator);
  r.percent = 100.0 * static_cast<double>(r.chose_longer) / den;
  r.percent_with_ties = 100.0 * static_cast<double>(r.chose_longer + r.chose_tie) / den;
  return r;
}

SelfEnhancementResult self_enhancement_subset(const std::vector<EvalSample>& samples,
                                              const Predictions& predictions,
                                              const std::vector<HumanJudgment>& humans,
                                              const std::string& judge_model_id) {
  SelfEnhancementResult r;
  std::set<std::string> ids;
  for (const auto& s : samples) {
    if (s.model_a == judge_model_id || s.model_b == judge_model_id) {
      r.sample_ids.push_back(s.id());
      ids.insert(s.id());
    }
  }
  if (ids.empty()) throw EmptySubset("no sample involves judge model " + judge_model_id);
  std::vector<HumanJudgment> subset;
  for (const auto& h : humans) {
    if (ids.count(h.sample_id())) subset.push_back(h);
  }
  Predictions restricted;
  for (const auto& id : ids) {
    if (auto it = predictions.find(id); it != predictions.end()) restricted.insert(*it);
  }
  r.agreement = agreement(restricted, subset, AgreementMode::PerVote);
  return r;
}

std::size_t whitespace_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

ResponseLengths response_lengths(const std::vector<EvalSample>& samples) {
  ResponseLengths out;
  for (const auto& s : samples) {
    out[s.id()] = {whitespace_tokens(s.judged_response_a()), whitespace_tokens(s.judged_response_b())};
  }
  return out;
}

namespace {

template <class Fn>
auto optional_metric(Fn&& fn) -> std::optional<decltype(fn())> {
  try {
    return fn();
  } catch (const EmptyDenominator&) {
    return std::nullopt;
  }
}

SliceMetrics slice(const std::vector<EvalSample>& samples, const Predictions& predictions, const RunPreferences& runs,
                   const std::vector<HumanJudgment>& humans, std::optional<int> turn) {
  std::vector<EvalSample> s;
  for (const auto& x : samples) {
    if (!turn || x.turn == *turn) s.push_back(x);
  }
  std::vector<HumanJudgment> h;
  for (const auto& x : humans) {
    if (!turn || x.turn == *turn) h.push_back(x);
  }
  RunPreferences r;
  for (const auto& x : s) {
    if (auto it = runs.find(x.id()); it != runs.end()) r.insert(*it);
  }
  auto lengths = response_lengths(s);

  SliceMetrics m;
  m.samples = s.size();
  m.votes = h.size();
  for (const auto& v : h) {
    if (predictions.count(v.sample_id())) {
      ++m.matched_votes;
    } else {
      ++m.unmatched_votes;
    }
  }
  m.agreement = optional_metric([&] { return agreement(predictions, h, AgreementMode::PerVote).value; });
  m.agreement_majority = optional_metric([&] { return agreement(predictions, h, AgreementMode::Majority).value; });
  m.position_bias = optional_metric([&] { return position_bias(r); });
  auto lb = optional_metric([&] { return length_bias(predictions, h, lengths); });
  if (lb) {
    m.length_bias = lb->percent;
    m.length_bias_with_ties = lb->percent_with_ties;
  }
  return m;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

json slice_json(const SliceMetrics& m) {
  return {{"ag", opt(m.agreement)},
          {"ag_majority", opt(m.agreement_majority)},
          {"pb", opt(m.position_bias)},
          {"lb", opt(m.length_bias)},
          {"lb_with_ties", opt(m.length_bias_with_ties)},
          {"samples", m.samples},
          {"votes", m.votes},
          {"matched_votes", m.matched_votes},
          {"unmatched_votes", m.unmatched_votes}};
}

SliceMetrics slice_from(const json& j) {
  SliceMetrics m;
  m.agreement = opt_from(j, "ag");
  m.agreement_majority = opt_from(j, "ag_majority");
  m.position_bias = opt_from(j, "pb");
  m.length_bias = opt_from(j, "lb");
  m.length_bias_with_ties = opt_from(j, "lb_with_ties");
  m.samples = j.at("samples").get<std::size_t>();
  m.votes = j.at("votes").get<std::size_t>();
  m.matched_votes = j.at("matched_votes").get<std::size_t>();
  m.unmatched_votes = j.at("unmatched_votes").get<std::size_t>();
  return m;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<EvalSample>& samples, const Predictions& predictions,
                              const RunPreferences& runs, const std::vector<HumanJudgment>& humans,
                              const std::optional<std::string>& judge_model_id) {
  MetricsReport report;
  report.overall = slice(samples, predictions, runs, humans, std::nullopt);
  report.turn1 = slice(samples, predictions, runs, humans, 1);
  report.turn2 = slice(samples, predictions, runs, humans, 2);
  if (judge_model_id) {
    SelfEnhancementBlock sb;
    sb.judge_model = *judge_model_id;
    try {
      auto r = self_enhancement_subset(samples, predictions, humans, *judge_model_id);
      sb.subset_size = r.sample_ids.size();
      sb.agreement = r.agreement.value;
    } catch (const EmptySubset&) {
    } catch (const EmptyDenominator&) {
    }
    report.self_enhancement = sb;
  }
  return report;
}

json to_json(const MetricsReport& report) {
  json j = {{"overall", slice_json(report.overall)},
            {"turn1", slice_json(report.turn1)},
            {"turn2", slice_json(report.turn2)}};
  if (report.self_enhancement) {
    const auto& sb = *report.self_enhancement;
    j["self_enhancement"] = {{"judge_model", sb.judge_model}, {"subset_size", sb.subset_size}, {"ag", opt(sb.agreement)}};
  }
  return j;
}

MetricsReport metrics_report_from_json(const json& j) {
  MetricsReport r;
  r.overall = slice_from(j.at("overall"));
  r.turn1 = slice_from(j.at("turn1"));
  r.turn2 = slice_from(j.at("turn2"));
  if (auto it = j.find("self_enhancement"); it != j.end()) {
    SelfEnhancementBlock sb;
    sb.judge_model = it->at("judge_model").get<std::string>();
    sb.subset_size = it->at("subset_size").get<std::size_t>();
    sb.agreement = opt_from(*it, "ag");
    r.self_enhancement = sb;
  }
  return r;
}

}  // namespace bsm
