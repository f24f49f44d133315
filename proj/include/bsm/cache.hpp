#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "bsm/backend.hpp"

namespace bsm {

/// Hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Stable cache key: SHA-256 over the canonical request serialization, which
/// covers model id, prompt, decoding (including temperature and seed) and
/// max_new_tokens.
std::string cache_key(const CompletionRequest& request);

/// Append-only call cache. One JSON record per line in `<dir>/calls.jsonl`,
/// each carrying a digest over its key and text. The whole file is verified
/// on open; a damaged record raises CacheCorrupt rather than being refetched.
class CallCache {
 public:
  explicit CallCache(const std::filesystem::path& dir);

  std::optional<CompletionResult> get(const CompletionRequest& request) const;

  /// Stores the completion unless the key is already present. Returns the
  /// text that is now authoritative for the key.
  std::string put(const CompletionRequest& request, const CompletionResult& result);

  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  struct Entry {
    std::string text;
    std::string backend_id;
  };

  std::filesystem::path file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Entry> entries_;
  std::ofstream out_;
};

/// Lookup-or-call through the cache.
CompletionResult cached_complete(CallCache& cache, Backend& backend, const CompletionRequest& request);

struct CallCounts {
  std::size_t total = 0;
  std::size_t cached = 0;
};

/// Backend decorator that routes every request through an optional cache and
/// counts calls.
class CachedBackend final : public Backend {
 public:
  CachedBackend(BackendPtr inner, std::shared_ptr<CallCache> cache);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string id() const override { return inner_->id(); }

  CallCounts counts() const { return {total_.load(), cached_.load()}; }

 private:
  BackendPtr inner_;
  std::shared_ptr<CallCache> cache_;
  std::atomic<std::size_t> total_{0};
  std::atomic<std::size_t> cached_{0};
};

}  // namespace bsm
