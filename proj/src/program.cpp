#include "bsm/program.hpp"

namespace bsm {

using json = nlohmann::json;

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

CompletionResult ModuleContext::complete(const CompletionRequest& request) {
  CallRecord rec;
  rec.request = request;
  rec.started_ms = now_ms();
  try {
    auto result = bsm::complete(backend_, request);
    rec.result = result;
    rec.finished_ms = now_ms();
    std::lock_guard lock(mutex_);
    sink_.push_back(std::move(rec));
    return result;
  } catch (const Error& e) {
    rec.error_kind = e.kind();
    rec.error_message = e.what();
    rec.finished_ms = now_ms();
    std::lock_guard lock(mutex_);
    sink_.push_back(std::move(rec));
    throw;
  }
}

std::size_t ProgramTrace::call_count() const {
  std::size_t n = branch_calls.size() + merge_calls.size();
  for (const auto& [_, calls] : solve_calls) n += calls.size();
  return n;
}

namespace {

json record_json(const CallRecord& r) {
  json j = {{"request", request_to_json(r.request)}, {"started_ms", r.started_ms}, {"finished_ms", r.finished_ms}};
  if (r.result) {
    j["text"] = r.result->text;
    j["backend_id"] = r.result->backend_id;
    j["cached"] = r.result->cached;
    j["latency_ms"] = r.result->latency_ms;
  } else {
    j["error"] = {{"kind", r.error_kind}, {"message", r.error_message}};
  }
  return j;
}

json records_json(const std::vector<CallRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(record_json(r));
  return arr;
}

}  // namespace

json ProgramTrace::to_json() const {
  json solves = json::array();
  for (const auto& [index, calls] : solve_calls) {
    solves.push_back({{"branch_index", index}, {"calls", records_json(calls)}});
  }
  return {{"branch", records_json(branch_calls)},
          {"solve", std::move(solves)},
          {"merge", records_json(merge_calls)},
          {"branch_count", branch_count},
          {"started_ms", started_ms},
          {"finished_ms", finished_ms},
          {"complete", complete}};
}

namespace detail {

void raise_module_error(std::exception_ptr error, const std::string& stage, std::optional<std::size_t> branch_index,
                        const ProgramTrace& trace) {
  auto snapshot = std::make_shared<ProgramTrace>(trace);
  snapshot->finished_ms = now_ms();
  try {
    std::rethrow_exception(error);
  } catch (const ProgramError&) {
    throw;
  } catch (const Error& e) {
    throw ProgramError(e.kind(), stage, branch_index, e.what(), std::move(snapshot));
  } catch (const std::exception& e) {
    throw ProgramError("InternalError", stage, branch_index, e.what(), std::move(snapshot));
  }
}

}  // namespace detail

}  // namespace bsm
