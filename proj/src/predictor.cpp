#include "clozefix/predictor.hpp"

#include <algorithm>

#include "clozefix/errors.hpp"

namespace clozefix {

void check_query(std::span<const Token> tokens, std::size_t mask_index, std::size_t top_k) {
  if (mask_index >= tokens.size()) throw InvalidQuery("mask index outside the token sequence");
  if (tokens[mask_index].kind != TokenKind::mask_sentinel) {
    throw InvalidQuery("queried position is not a mask sentinel");
  }
  if (top_k == 0) throw InvalidQuery("top_k must be positive");
}

void sort_candidates(std::vector<Candidate>& candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.token < b.token;
  });
}

}  // namespace clozefix
