#include "clozefix/cache.hpp"

#include <spdlog/spdlog.h>

#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"

namespace clozefix {

namespace {

constexpr std::string_view kHeader = "clozefix-cache/1";

std::string checksum(std::string_view payload) { return sha256_hex(payload).substr(0, 16); }

}  // namespace

CacheStore::CacheStore(std::filesystem::path file) : file_(std::move(file)) {
  if (std::filesystem::exists(file_)) {
    const std::string text = read_file(file_);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      if (nl == std::string::npos) throw StoreCorrupt("truncated record in " + file_.string());
      const std::string_view line(text.data() + pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (line_no == 1) {
        if (line != kHeader) throw StoreCorrupt("bad cache header in " + file_.string());
        continue;
      }
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos || line.substr(0, tab) != checksum(line.substr(tab + 1))) {
        throw StoreCorrupt("checksum mismatch at record " + std::to_string(line_no - 1) + " of " +
                           file_.string());
      }
      auto record = nlohmann::json::parse(line.substr(tab + 1), nullptr, false);
      if (record.is_discarded() || !record.contains("k") || !record.contains("v")) {
        throw StoreCorrupt("malformed record in " + file_.string());
      }
      entries_[record["k"].get<std::string>()] = std::move(record["v"]);
    }
    if (line_no == 0) throw StoreCorrupt("empty cache file " + file_.string());
  }
  open_for_append();
}

CacheStore::CacheStore(std::filesystem::path file, Fresh) : file_(std::move(file)) {
  std::filesystem::remove(file_);
  open_for_append();
}

std::unique_ptr<CacheStore> CacheStore::rebuild(std::filesystem::path file) {
  return std::unique_ptr<CacheStore>(new CacheStore(std::move(file), Fresh{}));
}

void CacheStore::open_for_append() {
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  const bool fresh = !std::filesystem::exists(file_);
  out_ = std::make_unique<std::ofstream>(file_, std::ios::binary | std::ios::app);
  if (!*out_) throw StoreCorrupt("cannot open cache store " + file_.string());
  if (fresh) {
    *out_ << kHeader << '\n';
    out_->flush();
  }
}

std::optional<nlohmann::json> CacheStore::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CacheStore::put(const std::string& key, const nlohmann::json& value) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(key, value).second) return;
  const std::string payload = nlohmann::json{{"k", key}, {"v", value}}.dump();
  *out_ << checksum(payload) << '\t' << payload << '\n';
  out_->flush();
}

std::size_t CacheStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

CachedPredictor::CachedPredictor(std::shared_ptr<const Predictor> inner,
                                 const std::filesystem::path& store_file)
    : inner_(std::move(inner)), info_(inner_->info()) {
  try {
    store_ = std::make_unique<CacheStore>(store_file);
  } catch (const StoreCorrupt& e) {
    spdlog::warn("{}; rebuilding the query cache", e.what());
    store_ = CacheStore::rebuild(store_file);
    rebuilt_ = true;
  }
}

std::string CachedPredictor::key_for(std::string_view kind, std::span<const Token> tokens,
                                     std::size_t index, std::string_view extra) const {
  std::string material;
  material.append(info_.model).push_back('\x1e');
  material.append(kind).push_back('\x1e');
  for (const Token& t : tokens) {
    material.push_back(t.kind == TokenKind::mask_sentinel ? '\x01' : '\x02');
    material.append(t.text).push_back('\x1f');
  }
  material.push_back('\x1e');
  material.append(std::to_string(index)).push_back('\x1e');
  material.append(extra);
  return sha256_hex(material);
}

nlohmann::json CachedPredictor::lookup(const std::string& key,
                                       const std::function<nlohmann::json()>& compute) const {
  if (auto hit = store_->get(key)) {
    ++hits_;
    return *hit;
  }
  std::promise<nlohmann::json> promise;
  std::shared_future<nlohmann::json> future;
  bool owner = false;
  {
    std::lock_guard lock(inflight_mutex_);
    auto it = inflight_.find(key);
    if (it != inflight_.end()) {
      future = it->second;
    } else {
      // Re-check under the lock: another caller may have just finished.
      if (auto hit = store_->get(key)) {
        ++hits_;
        return *hit;
      }
      future = promise.get_future().share();
      inflight_.emplace(key, future);
      owner = true;
    }
  }
  if (!owner) {
    ++hits_;
    return future.get();
  }
  ++misses_;
  try {
    nlohmann::json value = compute();
    store_->put(key, value);
    promise.set_value(value);
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(key);
    return value;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(key);
    throw;
  }
}

TokenDistribution CachedPredictor::predict(const PredictorQuery& query) const {
  check_query(query.tokens, query.mask_index, query.top_k);
  const auto key = key_for("predict", query.tokens, query.mask_index, std::to_string(query.top_k));
  const auto value = lookup(key, [&] {
    nlohmann::json arr = nlohmann::json::array();
    for (const Candidate& c : inner_->predict(query).candidates) arr.push_back({c.token, c.logprob});
    return arr;
  });
  TokenDistribution dist;
  for (const auto& c : value) dist.candidates.push_back({c.at(0), c.at(1)});
  return dist;
}

double CachedPredictor::score_token(std::span<const Token> tokens, std::size_t mask_index,
                                    std::string_view target) const {
  check_query(tokens, mask_index);
  const auto key = key_for("score", tokens, mask_index, target);
  return lookup(key, [&] { return nlohmann::json(inner_->score_token(tokens, mask_index, target)); })
      .get<double>();
}

std::filesystem::path cache_file_for(const std::filesystem::path& dir, std::string_view model) {
  std::string name;
  for (char c : model) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '-' || c == '_' || c == '.';
    name.push_back(safe ? c : '_');
  }
  return dir / (name + ".cache");
}

std::shared_ptr<const Predictor> cached(std::shared_ptr<const Predictor> inner,
                                        const std::filesystem::path& store_file) {
  return std::make_shared<CachedPredictor>(std::move(inner), store_file);
}

}  // namespace clozefix
