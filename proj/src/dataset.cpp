#include "bsm/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "bsm/errors.hpp"

namespace bsm {

using json = nlohmann::json;

const std::vector<std::string>& benchmark_categories() {
  static const std::vector<std::string> names = {"writing", "roleplay", "reasoning", "math",
                                                 "coding",  "extraction", "stem",   "humanities"};
  return names;
}

bool uses_reference(std::string_view category) {
  return category == "math" || category == "reasoning" || category == "coding";
}

namespace {

// Calls fn(json, line_number) for every non-blank line.
template <class Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(path.filename().string() + ": invalid JSON (" + e.what() + ")", n);
    }
    fn(j, n);
  }
}

const json& field(const json& j, const char* key, std::size_t line, const std::filesystem::path& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw SchemaError(path.filename().string() + ": missing field '" + key + "'", line);
  }
  return *it;
}

std::string string_field(const json& j, const char* key, std::size_t line, const std::filesystem::path& path) {
  const auto& v = field(j, key, line, path);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw SchemaError(path.filename().string() + ": field '" + key + "' must be a string", line);
}

std::vector<std::string> string_list(const json& v, const char* key, std::size_t line,
                                     const std::filesystem::path& path) {
  if (!v.is_array()) throw SchemaError(path.filename().string() + ": field '" + key + "' must be a list", line);
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) {
      throw SchemaError(path.filename().string() + ": field '" + key + "' must hold strings", line);
    }
    out.push_back(x.get<std::string>());
  }
  return out;
}

struct Question {
  std::string category;
  std::vector<std::string> turns;
  std::vector<std::string> reference;
};

Verdict parse_winner(std::string w, std::size_t line, const std::filesystem::path& path) {
  std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
  if (w == "model_a" || w == "a") return Verdict::A;
  if (w == "model_b" || w == "b") return Verdict::B;
  if (w.rfind("tie", 0) == 0) return Verdict::Tie;
  throw SchemaError(path.filename().string() + ": unknown winner '" + w + "'", line);
}

}  // namespace

EvalDataset load_eval_dataset(const std::filesystem::path& questions_path,
                              const std::filesystem::path& responses_path,
                              const std::optional<std::filesystem::path>& humans_path) {
  std::map<std::string, Question> questions;
  std::vector<std::string> question_order;
  for_each_record(questions_path, [&](const json& j, std::size_t line) {
    auto id = string_field(j, "question_id", line, questions_path);
    Question q;
    q.category = string_field(j, "category", line, questions_path);
    q.turns = string_list(field(j, "turns", line, questions_path), "turns", line, questions_path);
    if (q.turns.empty() || q.turns.size() > 2) {
      throw SchemaError(questions_path.filename().string() + ": question " + id + " must have one or two turns", line);
    }
    if (auto it = j.find("reference"); it != j.end() && !it->is_null()) {
      q.reference = string_list(*it, "reference", line, questions_path);
    }
    if (!questions.emplace(id, std::move(q)).second) {
      throw SchemaError(questions_path.filename().string() + ": duplicate question " + id, line);
    }
    question_order.push_back(id);
  });

  EvalDataset data;
  // question id -> model -> turns
  std::map<std::string, std::map<std::string, std::vector<std::string>>> answers;
  for_each_record(responses_path, [&](const json& j, std::size_t line) {
    auto qid = string_field(j, "question_id", line, responses_path);
    std::string model = j.contains("model") ? string_field(j, "model", line, responses_path)
                                            : string_field(j, "model_id", line, responses_path);
    std::vector<std::string> turns;
    if (j.contains("turns")) {
      turns = string_list(j.at("turns"), "turns", line, responses_path);
    } else {
      const auto& choices = field(j, "choices", line, responses_path);
      if (!choices.is_array() || choices.empty()) {
        throw SchemaError(responses_path.filename().string() + ": 'choices' must be a non-empty list", line);
      }
      turns = string_list(field(choices[0], "turns", line, responses_path), "turns", line, responses_path);
    }
    auto q = questions.find(qid);
    if (q == questions.end()) {
      throw JoinError(responses_path.filename().string() + " line " + std::to_string(line) +
                      ": response references unknown question " + qid);
    }
    if (turns.size() != q->second.turns.size()) {
      throw SchemaError(responses_path.filename().string() + ": model " + model + " answers " +
                            std::to_string(turns.size()) + " turns of question " + qid + ", expected " +
                            std::to_string(q->second.turns.size()),
                        line);
    }
    if (std::find(data.models.begin(), data.models.end(), model) == data.models.end()) data.models.push_back(model);
    if (!answers[qid].emplace(model, std::move(turns)).second) {
      throw SchemaError(responses_path.filename().string() + ": duplicate response of " + model + " to " + qid, line);
    }
  });

  std::map<std::string, std::size_t> model_rank;
  for (std::size_t i = 0; i < data.models.size(); ++i) model_rank[data.models[i]] = i;

  for (const auto& qid : question_order) {
    const auto& q = questions.at(qid);
    auto a = answers.find(qid);
    if (a == answers.end()) continue;
    std::vector<std::string> present;
    for (const auto& m : data.models) {
      if (a->second.count(m)) present.push_back(m);
    }
    for (int turn = 1; turn <= static_cast<int>(q.turns.size()); ++turn) {
      for (std::size_t i = 0; i < present.size(); ++i) {
        for (std::size_t k = i + 1; k < present.size(); ++k) {
          const auto& ta = a->second.at(present[i]);
          const auto& tb = a->second.at(present[k]);
          EvalSample s;
          s.question_id = qid;
          s.category = q.category;
          s.turn = turn;
          s.q1 = q.turns[0];
          s.r1_a = ta[0];
          s.r1_b = tb[0];
          if (q.turns.size() > 1) {
            s.q2 = q.turns[1];
            s.r2_a = ta[1];
            s.r2_b = tb[1];
          }
          s.model_a = present[i];
          s.model_b = present[k];
          if (uses_reference(q.category) && q.reference.size() >= static_cast<std::size_t>(turn)) {
            s.reference_answer = q.reference[turn - 1];
          }
          s.validate();
          ++data.samples_per_category[s.category];
          data.samples.push_back(std::move(s));
        }
      }
    }
  }

  if (humans_path) {
    for_each_record(*humans_path, [&](const json& j, std::size_t line) {
      HumanJudgment h;
      h.question_id = string_field(j, "question_id", line, *humans_path);
      if (!questions.count(h.question_id)) {
        throw JoinError(humans_path->filename().string() + " line " + std::to_string(line) +
                        ": vote references unknown question " + h.question_id);
      }
      h.model_a = string_field(j, "model_a", line, *humans_path);
      h.model_b = string_field(j, "model_b", line, *humans_path);
      h.vote = parse_winner(string_field(j, "winner", line, *humans_path), line, *humans_path);
      const auto& t = field(j, "turn", line, *humans_path);
      if (!t.is_number_integer() || (t.get<int>() != 1 && t.get<int>() != 2)) {
        throw SchemaError(humans_path->filename().string() + ": 'turn' must be 1 or 2", line);
      }
      h.turn = t.get<int>();
      if (auto it = j.find("judge"); it != j.end() && it->is_string()) h.annotator_id = it->get<std::string>();
      auto ra = model_rank.find(h.model_a);
      auto rb = model_rank.find(h.model_b);
      if (ra != model_rank.end() && rb != model_rank.end() && ra->second > rb->second) {
        std::swap(h.model_a, h.model_b);
        if (h.vote != Verdict::Tie) h.vote = h.vote == Verdict::A ? Verdict::B : Verdict::A;
      }
      data.humans.push_back(std::move(h));
    });
  }
  return data;
}

EvalDataset filter_category(const EvalDataset& data, const std::string& category) {
  EvalDataset out;
  out.models = data.models;
  std::set<std::string> kept_questions;
  for (const auto& s : data.samples) {
    if (s.category != category) continue;
    kept_questions.insert(s.question_id);
    out.samples.push_back(s);
  }
  if (!out.samples.empty()) out.samples_per_category[category] = out.samples.size();
  for (const auto& h : data.humans) {
    if (kept_questions.count(h.question_id)) out.humans.push_back(h);
  }
  return out;
}

ConceptSetFile load_concept_sets(const std::filesystem::path& path) {
  ConceptSetFile out;
  std::size_t index = 0;
  for_each_record(path, [&](const json& j, std::size_t line) {
    const json* list = &j;
    ConceptSet set;
    set.id = std::to_string(index);
    if (j.is_object()) {
      list = &field(j, "concepts", line, path);
      if (auto it = j.find("id"); it != j.end() && !it->is_null()) set.id = string_field(j, "id", line, path);
    }
    std::set<std::string> seen;
    for (auto c : string_list(*list, "concepts", line, path)) {
      std::transform(c.begin(), c.end(), c.begin(), [](unsigned char ch) { return std::tolower(ch); });
      auto b = c.find_first_not_of(" \t");
      auto e = c.find_last_not_of(" \t");
      c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
      if (c.empty()) throw SchemaError(path.filename().string() + ": empty concept", line);
      if (!seen.insert(c).second) {
        ++out.duplicate_warnings;
        continue;
      }
      set.concepts.push_back(std::move(c));
    }
    if (set.concepts.empty()) throw SchemaError(path.filename().string() + ": empty concept list", line);
    out.sets.push_back(std::move(set));
    ++index;
  });
  return out;
}

}  // namespace bsm
