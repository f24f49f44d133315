#include "bsm/cache.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "bsm/errors.hpp"

namespace bsm {

using json = nlohmann::json;

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("HashError", "EVP_Digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string cache_key(const CompletionRequest& request) {
  return sha256_hex(request_to_json(request).dump());
}

namespace {

std::string record_digest(const std::string& key, const std::string& text) {
  return sha256_hex(key + "\n" + text);
}

}  // namespace

CallCache::CallCache(const std::filesystem::path& dir) : file_(dir / "calls.jsonl") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create cache directory " + dir.string() + ": " + ec.message());

  if (std::ifstream in(file_); in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto where = file_.string() + ":" + std::to_string(lineno);
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception&) {
        throw CacheCorrupt("unparseable cache record at " + where);
      }
      try {
        auto key = rec.at("key").get<std::string>();
        auto text = rec.at("text").get<std::string>();
        auto request = request_from_json(rec.at("request"));
        if (cache_key(request) != key) throw CacheCorrupt("key does not match request at " + where);
        if (record_digest(key, text) != rec.at("digest").get<std::string>()) {
          throw CacheCorrupt("digest mismatch at " + where);
        }
        entries_.try_emplace(key, Entry{std::move(text), rec.value("backend_id", std::string{})});
      } catch (const json::exception& e) {
        throw CacheCorrupt("incomplete cache record at " + where + ": " + e.what());
      }
    }
  }

  out_.open(file_, std::ios::app);
  if (!out_) throw IoError("cannot open cache file " + file_.string() + " for append");
}

std::optional<CompletionResult> CallCache::get(const CompletionRequest& request) const {
  auto key = cache_key(request);
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return CompletionResult{it->second.text, it->second.backend_id, true, 0};
}

std::string CallCache::put(const CompletionRequest& request, const CompletionResult& result) {
  auto key = cache_key(request);
  std::unique_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second.text;
  json rec = {{"key", key},
              {"request", request_to_json(request)},
              {"text", result.text},
              {"backend_id", result.backend_id},
              {"digest", record_digest(key, result.text)}};
  out_ << rec.dump() << '\n';
  out_.flush();
  if (!out_) throw IoError("failed writing cache record to " + file_.string());
  entries_.emplace(std::move(key), Entry{result.text, result.backend_id});
  return result.text;
}

std::size_t CallCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

CompletionResult cached_complete(CallCache& cache, Backend& backend, const CompletionRequest& request) {
  request.validate();
  if (auto hit = cache.get(request)) return *hit;
  auto result = backend.complete(request);
  result.text = cache.put(request, result);
  result.cached = false;
  return result;
}

CachedBackend::CachedBackend(BackendPtr inner, std::shared_ptr<CallCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

CompletionResult CachedBackend::complete(const CompletionRequest& request) {
  ++total_;
  if (!cache_) return bsm::complete(*inner_, request);
  auto result = cached_complete(*cache_, *inner_, request);
  if (result.cached) ++cached_;
  return result;
}

}  // namespace bsm
