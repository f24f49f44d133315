#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bsm/baselines.hpp"
#include "bsm/errors.hpp"
#include "bsm/harness.hpp"
#include "bsm/judge.hpp"
#include "bsm/metrics.hpp"
#include "bsm/mock_backend.hpp"
#include "bsm/porter_stemmer.hpp"
#include "bsm/story.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

bsm::MockScript script_from(const py::object& script) {
  if (py::isinstance<py::str>(script)) return bsm::MockScript::load(script.cast<std::string>());
  return bsm::MockScript::from_json(from_py(script));
}

bsm::EvalSample sample_from(const json& j) {
  bsm::EvalSample s;
  s.question_id = j.at("question_id").get<std::string>();
  s.category = j.value("category", std::string("writing"));
  s.turn = j.value("turn", 1);
  s.q1 = j.at("q1").get<std::string>();
  s.r1_a = j.at("r1_a").get<std::string>();
  s.r1_b = j.at("r1_b").get<std::string>();
  s.model_a = j.value("model_a", std::string("model_a"));
  s.model_b = j.value("model_b", std::string("model_b"));
  auto opt = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
  };
  s.q2 = opt("q2");
  s.r2_a = opt("r2_a");
  s.r2_b = opt("r2_b");
  s.reference_answer = opt("reference_answer");
  return s;
}

json verdict_json(const bsm::RunVerdict& v) {
  json j = {{"verdict", bsm::to_string(v.verdict)}};
  j["total_first"] = v.total_first ? json(*v.total_first) : json(nullptr);
  j["total_second"] = v.total_second ? json(*v.total_second) : json(nullptr);
  return j;
}

json run_json(const bsm::RunOutcome& r) {
  json j = verdict_json(r.verdict);
  j["order"] = bsm::to_string(r.order);
  j["preference"] = bsm::to_string(r.preference());
  if (r.plan) {
    json criteria = json::array();
    for (const auto& c : r.plan->criteria) criteria.push_back({{"title", c.title}, {"description", c.description}});
    j["criteria"] = std::move(criteria);
  }
  json scores = json::array();
  for (const auto& c : r.judgments) scores.push_back({c.criterion.title, c.score_first, c.score_second});
  for (const auto& c : r.averaged) scores.push_back({c.criterion.title, c.mean_first, c.mean_second});
  j["scores"] = std::move(scores);
  j["trace"] = r.trace.to_json();
  return j;
}

bsm::Verdict verdict_from(const std::string& s) { return bsm::verdict_from_string(s); }

}  // namespace

PYBIND11_MODULE(_bsm, m) {
  m.doc() = "Branch-solve-merge judging and constrained story generation";

  // Leaked on purpose: the type must outlive interpreter finalization.
  static PyObject* error_type = (new py::exception<bsm::Error>(m, "BsmError"))->ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const bsm::Error& e) {
      py::object inst = py::handle(error_type)(e.kind(), e.what());
      inst.attr("kind") = e.kind();
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  m.def("porter_stem", [](const std::string& w) { return bsm::porter_stem(w); }, py::arg("word"));
  m.def("word_tokens", [](const std::string& t) { return bsm::word_tokens(t); }, py::arg("text"));
  m.def("concept_present", [](const std::string& c, const std::string& s) { return bsm::concept_present(c, s); },
        py::arg("concept"), py::arg("story"));
  m.def("missing_concepts", &bsm::missing_concepts, py::arg("concepts"), py::arg("story"));

  m.def(
      "parse_criteria",
      [](const std::string& text, std::size_t max_k) {
        py::list out;
        for (const auto& c : bsm::parse_criteria(text, max_k)) {
          py::dict d;
          d["title"] = c.title;
          d["description"] = c.description;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), py::arg("max_k") = 5);
  m.def(
      "parse_scores", [](const std::string& text, int lo, int hi) { return bsm::parse_scores(text, {lo, hi}); },
      py::arg("text"), py::arg("lo") = 1, py::arg("hi") = 5);
  m.def("parse_verdict", [](const std::string& text) { return bsm::to_string(bsm::parse_verdict(text)); },
        py::arg("text"));
  m.def(
      "combine_runs",
      [](const std::string& in_order, const std::string& swapped) {
        return bsm::to_string(
            bsm::combine_runs(bsm::position_from_string(in_order), bsm::position_from_string(swapped)));
      },
      py::arg("in_order"), py::arg("swapped"));
  m.def(
      "merge_sum",
      [](const std::vector<std::pair<double, double>>& pairs) { return to_py(verdict_json(bsm::merge_sum(pairs))); },
      py::arg("score_pairs"));
  m.def(
      "parse_story_plan",
      [](const std::string& text, const std::vector<std::string>& concepts) {
        return to_py(bsm::to_json(bsm::parse_story_plan(text, concepts)));
      },
      py::arg("text"), py::arg("concepts"));

  m.def(
      "judge",
      [](const py::dict& sample, const py::object& script, const std::string& method, std::pair<int, int> scale,
         std::size_t max_k, bool share_branch_plan, const std::string& merge, std::size_t n_samples,
         double temperature, std::int64_t seed, std::size_t parallelism) {
        auto s = sample_from(from_py(sample));
        bsm::MockBackend backend(script_from(script));
        bsm::JudgeConfig cfg;
        cfg.scale = {scale.first, scale.second};
        cfg.max_k = max_k;
        cfg.share_branch_plan = share_branch_plan;
        if (merge != "sum" && merge != "neural") throw bsm::ConfigError("unknown merge variant '" + merge + "'");
        cfg.merge = merge == "neural" ? bsm::MergeVariant::Neural : bsm::MergeVariant::Sum;
        cfg.parallelism = parallelism;
        bsm::BaselineConfig bc{bsm::judge_method_from_string(method), n_samples, temperature, seed};
        json out;
        {
          py::gil_scoped_release release;
          auto pj = bsm::judge_with(s, cfg, bc, backend);
          out = {{"verdict", bsm::to_string(pj.verdict)}, {"run1", run_json(pj.run1)}, {"run2", run_json(pj.run2)}};
        }
        return to_py(out);
      },
      py::arg("sample"), py::arg("script"), py::arg("method") = "bsm", py::arg("scale") = std::pair<int, int>{1, 5},
      py::arg("max_k") = 5, py::arg("share_branch_plan") = false, py::arg("merge") = "sum", py::arg("n_samples") = 5,
      py::arg("temperature") = 0.7, py::arg("seed") = 0, py::arg("parallelism") = 1);

  m.def(
      "generate_story",
      [](const std::vector<std::string>& concepts, const py::object& script, const std::string& method,
         const std::string& id) {
        bsm::MockBackend backend(script_from(script));
        bsm::ConceptSet set{id, concepts};
        json out;
        {
          py::gil_scoped_release release;
          if (method == "bsm") {
            out = bsm::to_json(bsm::generate_story(set, backend, {}));
          } else if (method == "zeroshot") {
            out = bsm::to_json(bsm::generate_story_zeroshot(set, backend, {}));
          } else {
            throw bsm::ConfigError("storygen method must be bsm or zeroshot, got '" + method + "'");
          }
        }
        return to_py(out);
      },
      py::arg("concepts"), py::arg("script"), py::arg("method") = "bsm", py::arg("id") = "0");

  m.def(
      "agreement",
      [](const std::map<std::string, std::string>& predictions, const py::list& humans, const std::string& mode) {
        bsm::Predictions p;
        for (const auto& [id, v] : predictions) p[id] = verdict_from(v);
        std::vector<bsm::HumanJudgment> hs;
        for (const auto& h : from_py(humans)) {
          hs.push_back({h.at("question_id").get<std::string>(), h.value("turn", 1), h.at("model_a").get<std::string>(),
                        h.at("model_b").get<std::string>(), verdict_from(h.at("vote").get<std::string>()),
                        h.value("annotator", std::string())});
        }
        if (mode != "per_vote" && mode != "majority") throw bsm::ConfigError("unknown agreement mode '" + mode + "'");
        auto r = bsm::agreement(p, hs, mode == "majority" ? bsm::AgreementMode::Majority : bsm::AgreementMode::PerVote);
        return to_py({{"value", r.value},
                      {"agreeing", r.agreeing},
                      {"denominator", r.denominator},
                      {"votes_without_prediction", r.votes_without_prediction},
                      {"tied_samples", r.tied_samples}});
      },
      py::arg("predictions"), py::arg("humans"), py::arg("mode") = "per_vote");
  m.def(
      "position_bias",
      [](const std::map<std::string, std::pair<std::string, std::string>>& runs) {
        bsm::RunPreferences r;
        for (const auto& [id, v] : runs) r[id] = {verdict_from(v.first), verdict_from(v.second)};
        return bsm::position_bias(r);
      },
      py::arg("runs"));

  m.def(
      "run_suite",
      [](const py::dict& config) {
        auto cfg = bsm::run_config_from_json(from_py(config));
        json out;
        {
          py::gil_scoped_release release;
          auto manifest = bsm::run_suite(cfg);
          out = bsm::to_json(manifest);
          out["report"] = bsm::to_json(manifest.report);
        }
        return to_py(out);
      },
      py::arg("config"));
  m.def(
      "load_report", [](const std::string& path) { return to_py(bsm::to_json(bsm::load_report(path))); },
      py::arg("path"));
  m.def(
      "render_table", [](const std::string& path) { return bsm::render_table(bsm::load_report(path)); },
      py::arg("report_path"));
}
