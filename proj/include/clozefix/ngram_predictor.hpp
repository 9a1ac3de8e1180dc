#pragma once

// Reference predictor: an interpolated bidirectional trigram model.
//
//   P(w | ...) = 1/2 * (c(u, v, w) + 1) / (c(u, v) + |V|)        left, u v = x[i-2] x[i-1]
//              + 1/2 * (c(w; v', u') + 1) / (c(v', u') + |V|)    right, v' u' = x[i+1] x[i+2]
//
// Sequences are padded with begin/end markers. Masks and out-of-vocabulary
// tokens in a context map to an unknown symbol that never occurs in training,
// so a context containing them falls back to the uniform add-one estimate.

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "clozefix/predictor.hpp"

namespace clozefix {

class NgramPredictor final : public Predictor {
 public:
  // Untrained: every query throws EmptyVocabulary.
  explicit NgramPredictor(TokenizerConfig config = {});

  // Each corpus string is one training sequence. Throws EmptyCorpus.
  static NgramPredictor train(std::span<const std::string> corpus, const TokenizerConfig& config);

  TokenDistribution predict(const PredictorQuery& query) const override;
  double score_token(std::span<const Token> tokens, std::size_t mask_index,
                     std::string_view target) const override;
  PredictorInfo info() const override;

  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const TokenizerConfig& tokenizer_config() const { return config_; }

  // Canonical, order-independent serialization of the count tables.
  nlohmann::json to_json() const;
  static NgramPredictor from_json(const nlohmann::json& j, TokenizerConfig config);
  void save(const std::filesystem::path& path) const;
  static NgramPredictor load(const std::filesystem::path& path, TokenizerConfig config);

 private:
  struct Row {
    std::uint64_t total = 0;
    std::unordered_map<std::uint32_t, std::uint64_t> counts;
  };

  std::uint32_t bos() const { return static_cast<std::uint32_t>(vocab_.size()); }
  std::uint32_t eos() const { return bos() + 1; }
  std::uint32_t unk() const { return bos() + 2; }
  std::uint64_t context_key(std::uint32_t a, std::uint32_t b) const {
    return static_cast<std::uint64_t>(a) * (vocab_.size() + 3) + b;
  }
  std::uint32_t id_of(const Token& t) const;
  std::uint32_t id_of(std::string_view text) const;

  // Both context rows for position `index` of `tokens`; either may be null.
  std::pair<const Row*, const Row*> rows_for(std::span<const Token> tokens,
                                             std::size_t index) const;
  double logprob(const Row* left, const Row* right, std::uint32_t word) const;

  TokenizerConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::unordered_map<std::uint64_t, Row> left_;
  std::unordered_map<std::uint64_t, Row> right_;
  std::string fingerprint_;
};

}  // namespace clozefix
