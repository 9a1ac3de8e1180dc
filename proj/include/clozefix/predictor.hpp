#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clozefix/tokenizer.hpp"

namespace clozefix {

// A masked sequence with the one mask position being resolved.
// `tokens` is borrowed; it must outlive the call.
struct PredictorQuery {
  std::span<const Token> tokens;
  std::size_t mask_index = 0;
  std::size_t top_k = 1;
};

struct Candidate {
  std::string token;
  double logprob = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Sorted by logprob descending, ties by token ascending (byte order).
struct TokenDistribution {
  std::vector<Candidate> candidates;

  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;
};

struct PredictorInfo {
  std::string model;
  std::string mask_sentinel = "<mask>";
  std::size_t max_tokens = 512;
};

// Masked-token oracle: P(token at mask_index | the rest of the sequence).
// Implementations must be safe for concurrent const calls.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual TokenDistribution predict(const PredictorQuery& query) const = 0;

  // log P(target at mask_index | tokens). For any candidate returned by
  // predict() on the same sequence the value is identical.
  virtual double score_token(std::span<const Token> tokens, std::size_t mask_index,
                             std::string_view target) const = 0;

  virtual PredictorInfo info() const = 0;
};

// Throws InvalidQuery unless tokens[mask_index] is a mask sentinel and top_k > 0.
void check_query(std::span<const Token> tokens, std::size_t mask_index, std::size_t top_k = 1);

// Stable candidate order used everywhere: logprob desc, then token asc.
void sort_candidates(std::vector<Candidate>& candidates);

}  // namespace clozefix
