#pragma once

// Persistent query cache for any Predictor.
//
// Store file layout: a header line followed by one record per line,
//   <first 16 hex of sha256(payload)> TAB <payload json {"k": key, "v": value}>
// A record that fails its checksum makes the whole store untrusted.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "clozefix/predictor.hpp"

namespace clozefix {

class CacheStore {
 public:
  // Throws StoreCorrupt if the file exists and any record is damaged.
  explicit CacheStore(std::filesystem::path file);
  // Discards whatever the file holds and starts an empty store.
  static std::unique_ptr<CacheStore> rebuild(std::filesystem::path file);

  std::optional<nlohmann::json> get(const std::string& key) const;
  void put(const std::string& key, const nlohmann::json& value);
  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  struct Fresh {};
  CacheStore(std::filesystem::path file, Fresh);
  void open_for_append();

  std::filesystem::path file_;
  std::unordered_map<std::string, nlohmann::json> entries_;
  std::unique_ptr<std::ofstream> out_;
  mutable std::mutex mutex_;
};

class CachedPredictor final : public Predictor {
 public:
  // A corrupt store is reported through rebuilt() and replaced by an empty one.
  CachedPredictor(std::shared_ptr<const Predictor> inner, const std::filesystem::path& store_file);

  TokenDistribution predict(const PredictorQuery& query) const override;
  double score_token(std::span<const Token> tokens, std::size_t mask_index,
                     std::string_view target) const override;
  PredictorInfo info() const override { return info_; }

  bool rebuilt() const { return rebuilt_; }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  nlohmann::json lookup(const std::string& key,
                        const std::function<nlohmann::json()>& compute) const;
  std::string key_for(std::string_view kind, std::span<const Token> tokens, std::size_t index,
                      std::string_view extra) const;

  std::shared_ptr<const Predictor> inner_;
  PredictorInfo info_;
  std::unique_ptr<CacheStore> store_;
  bool rebuilt_ = false;
  mutable std::mutex inflight_mutex_;
  mutable std::unordered_map<std::string, std::shared_future<nlohmann::json>> inflight_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

// Environment variable naming the cache directory.
inline constexpr const char* kCacheDirEnv = "CLOZEFIX_CACHE_DIR";

// Store file used for `model` inside `dir`.
std::filesystem::path cache_file_for(const std::filesystem::path& dir, std::string_view model);

std::shared_ptr<const Predictor> cached(std::shared_ptr<const Predictor> inner,
                                        const std::filesystem::path& store_file);

}  // namespace clozefix
