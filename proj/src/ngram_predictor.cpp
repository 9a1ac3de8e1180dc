#include "clozefix/ngram_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"

namespace clozefix {

namespace {

constexpr std::string_view kFormat = "clozefix-ngram/1";

using Entry = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint64_t>;

}  // namespace

NgramPredictor::NgramPredictor(TokenizerConfig config) : config_(std::move(config)) {}

NgramPredictor NgramPredictor::train(std::span<const std::string> corpus,
                                     const TokenizerConfig& config) {
  if (corpus.empty()) throw EmptyCorpus();
  std::vector<std::vector<Token>> sequences;
  sequences.reserve(corpus.size());
  std::set<std::string> words;
  for (const std::string& doc : corpus) {
    auto toks = tokenize(doc, config);
    std::erase_if(toks, [](const Token& t) { return t.kind == TokenKind::mask_sentinel; });
    for (const Token& t : toks) words.insert(t.text);
    sequences.push_back(std::move(toks));
  }

  NgramPredictor model(config);
  model.vocab_.assign(words.begin(), words.end());
  for (std::uint32_t i = 0; i < model.vocab_.size(); ++i) model.ids_.emplace(model.vocab_[i], i);

  for (const auto& seq : sequences) {
    std::vector<std::uint32_t> ids;
    ids.reserve(seq.size() + 4);
    ids.push_back(model.bos());
    ids.push_back(model.bos());
    for (const Token& t : seq) ids.push_back(model.ids_.at(t.text));
    ids.push_back(model.eos());
    ids.push_back(model.eos());
    for (std::size_t i = 2; i + 2 < ids.size(); ++i) {
      Row& l = model.left_[model.context_key(ids[i - 2], ids[i - 1])];
      ++l.total;
      ++l.counts[ids[i]];
      Row& r = model.right_[model.context_key(ids[i + 1], ids[i + 2])];
      ++r.total;
      ++r.counts[ids[i]];
    }
  }
  model.fingerprint_ = sha256_hex(model.to_json().dump()).substr(0, 16);
  return model;
}

std::uint32_t NgramPredictor::id_of(std::string_view text) const {
  auto it = ids_.find(std::string(text));
  return it == ids_.end() ? unk() : it->second;
}

std::uint32_t NgramPredictor::id_of(const Token& t) const {
  if (t.kind == TokenKind::mask_sentinel) return unk();
  return id_of(t.text);
}

std::pair<const NgramPredictor::Row*, const NgramPredictor::Row*> NgramPredictor::rows_for(
    std::span<const Token> tokens, std::size_t index) const {
  auto at = [&](std::ptrdiff_t i) -> std::uint32_t {
    if (i < 0) return bos();
    if (i >= static_cast<std::ptrdiff_t>(tokens.size())) return eos();
    return id_of(tokens[static_cast<std::size_t>(i)]);
  };
  const auto i = static_cast<std::ptrdiff_t>(index);
  auto find = [](const std::unordered_map<std::uint64_t, Row>& table, std::uint64_t key) {
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };
  return {find(left_, context_key(at(i - 2), at(i - 1))),
          find(right_, context_key(at(i + 1), at(i + 2)))};
}

double NgramPredictor::logprob(const Row* left, const Row* right, std::uint32_t word) const {
  const double v = static_cast<double>(vocab_.size());
  auto estimate = [&](const Row* row) {
    std::uint64_t count = 0;
    std::uint64_t total = 0;
    if (row != nullptr) {
      total = row->total;
      auto it = row->counts.find(word);
      if (it != row->counts.end()) count = it->second;
    }
    return (static_cast<double>(count) + 1.0) / (static_cast<double>(total) + v);
  };
  return std::log(0.5 * estimate(left) + 0.5 * estimate(right));
}

TokenDistribution NgramPredictor::predict(const PredictorQuery& query) const {
  check_query(query.tokens, query.mask_index, query.top_k);
  if (vocab_.empty()) throw EmptyVocabulary();
  const auto [left, right] = rows_for(query.tokens, query.mask_index);
  // Words unseen in both rows share one value, so only the seen words and the
  // first top_k unseen ones (vocab_ is sorted) can make the cut.
  std::vector<std::uint32_t> seen;
  for (const Row* row : {left, right}) {
    if (row == nullptr) continue;
    for (const auto& [w, count] : row->counts) seen.push_back(w);
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());

  TokenDistribution dist;
  dist.candidates.reserve(seen.size() + query.top_k);
  for (std::uint32_t w : seen) dist.candidates.push_back({vocab_[w], logprob(left, right, w)});
  std::size_t unseen = 0;
  auto next_seen = seen.begin();
  for (std::uint32_t w = 0; w < vocab_.size() && unseen < query.top_k; ++w) {
    while (next_seen != seen.end() && *next_seen < w) ++next_seen;
    if (next_seen != seen.end() && *next_seen == w) continue;
    dist.candidates.push_back({vocab_[w], logprob(left, right, w)});
    ++unseen;
  }
  sort_candidates(dist.candidates);
  if (dist.candidates.size() > query.top_k) dist.candidates.resize(query.top_k);
  return dist;
}

double NgramPredictor::score_token(std::span<const Token> tokens, std::size_t mask_index,
                                   std::string_view target) const {
  check_query(tokens, mask_index);
  if (vocab_.empty()) throw EmptyVocabulary();
  const auto [left, right] = rows_for(tokens, mask_index);
  return logprob(left, right, id_of(target));
}

PredictorInfo NgramPredictor::info() const {
  return {"reference-ngram/" + (fingerprint_.empty() ? std::string("untrained") : fingerprint_),
          config_.mask_sentinel, config_.max_sequence_tokens};
}

nlohmann::json NgramPredictor::to_json() const {
  auto dump_table = [](const std::unordered_map<std::uint64_t, Row>& table, std::uint64_t width) {
    std::vector<Entry> entries;
    for (const auto& [key, row] : table) {
      for (const auto& [word, count] : row.counts) {
        entries.emplace_back(static_cast<std::uint32_t>(key / width),
                             static_cast<std::uint32_t>(key % width), word, count);
      }
    }
    std::sort(entries.begin(), entries.end());
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [a, b, w, c] : entries) arr.push_back({a, b, w, c});
    return arr;
  };
  const std::uint64_t width = vocab_.size() + 3;
  return {{"format", kFormat},
          {"vocab", vocab_},
          {"left", dump_table(left_, width)},
          {"right", dump_table(right_, width)}};
}

NgramPredictor NgramPredictor::from_json(const nlohmann::json& j, TokenizerConfig config) {
  if (!j.is_object() || j.value("format", std::string{}) != kFormat) {
    throw ConfigError("not a reference predictor state");
  }
  NgramPredictor model(std::move(config));
  model.vocab_ = j.at("vocab").get<std::vector<std::string>>();
  if (!std::is_sorted(model.vocab_.begin(), model.vocab_.end())) {
    throw ConfigError("predictor vocabulary is not sorted");
  }
  for (std::uint32_t i = 0; i < model.vocab_.size(); ++i) model.ids_.emplace(model.vocab_[i], i);
  const std::uint32_t limit = model.unk();
  auto load_table = [&](const nlohmann::json& arr, std::unordered_map<std::uint64_t, Row>& table) {
    for (const auto& e : arr) {
      const auto a = e.at(0).get<std::uint32_t>();
      const auto b = e.at(1).get<std::uint32_t>();
      const auto w = e.at(2).get<std::uint32_t>();
      const auto c = e.at(3).get<std::uint64_t>();
      if (a >= limit || b >= limit || w >= model.vocab_.size()) {
        throw ConfigError("predictor state references an unknown token id");
      }
      Row& row = table[model.context_key(a, b)];
      row.total += c;
      row.counts[w] += c;
    }
  };
  load_table(j.at("left"), model.left_);
  load_table(j.at("right"), model.right_);
  if (!model.vocab_.empty()) model.fingerprint_ = sha256_hex(model.to_json().dump()).substr(0, 16);
  return model;
}

void NgramPredictor::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump() + "\n");
}

NgramPredictor NgramPredictor::load(const std::filesystem::path& path, TokenizerConfig config) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)), std::move(config));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot read predictor state " + path.string() + ": " + e.what());
  }
}

}  // namespace clozefix
