#pragma once

// Stub predictors, oracles and fixtures shared by the unit and acceptance
// suites.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "clozefix/context.hpp"
#include "clozefix/digest.hpp"
#include "clozefix/mask.hpp"
#include "clozefix/patch_engine.hpp"
#include "clozefix/predictor.hpp"

namespace clozefix::testing {

using Strings = std::vector<std::string>;

// Puts the directory holding minirun first on PATH; returns false on failure.
inline bool put_tools_on_path() {
  static const bool done = [] {
    const char* old = std::getenv("PATH");
    const std::string path = std::string(CLOZEFIX_TOOLS_DIR) + ":" + (old ? old : "");
    return ::setenv("PATH", path.c_str(), 1) == 0;
  }();
  return done;
}

// Relative path -> content digest for every file under `root`.
inline std::map<std::string, std::string> tree_digests(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[std::filesystem::relative(e.path(), root).string()] = sha256_hex(read_file(e.path()));
    }
  }
  return out;
}

inline std::size_t count_strategy(const std::vector<MaskLine>& lines, Strategy s) {
  std::size_t n = 0;
  for (const auto& l : lines) n += l.strategy == s ? 1 : 0;
  return n;
}

// Brute-force enumeration of every (kept, masks) pair a partial strategy may
// emit for a line of L tokens: keep 1..L-1 tokens, 1+ masks, total <= L+10.
inline std::size_t enumerate_partial(std::size_t L) {
  std::size_t n = 0;
  for (std::size_t kept = 0; kept <= L; ++kept) {
    for (std::size_t masks = 0; masks <= L + 20; ++masks) {
      const bool proper = kept >= 1 && kept < L;
      if (proper && masks >= 1 && kept + masks <= L + 10) ++n;
    }
  }
  return n;
}

inline std::size_t closed_form_partial(std::size_t L) {
  std::size_t n = 0;
  for (std::size_t k = 1; k < L; ++k) n += L + 10 - k;
  return n;
}

inline std::vector<Token> line_of(std::size_t L) {
  std::vector<Token> toks;
  for (std::size_t i = 0; i < L; ++i) toks.push_back({"t" + std::to_string(i), TokenKind::word});
  return toks;
}

// Predictor scripted by the generated prefix of the mask region.
class ScriptedPredictor final : public Predictor {
 public:
  using Dist = std::vector<std::pair<std::string, double>>;  // token, probability

  ScriptedPredictor(std::vector<std::size_t> positions) : positions_(std::move(positions)) {}

  void on_prefix(const Strings& prefix, Dist dist) { predict_[prefix] = std::move(dist); }
  void on_score(const Strings& patch, std::vector<double> logprobs) {
    score_[patch] = std::move(logprobs);
  }

  TokenDistribution predict(const PredictorQuery& q) const override {
    Strings prefix;
    for (std::size_t p : positions_) {
      if (p >= q.mask_index) break;
      prefix.push_back(q.tokens[p].text);
    }
    TokenDistribution out;
    auto it = predict_.find(prefix);
    if (it == predict_.end()) return out;
    for (const auto& [tok, prob] : it->second) out.candidates.push_back({tok, std::log(prob)});
    sort_candidates(out.candidates);
    if (out.candidates.size() > q.top_k) out.candidates.resize(q.top_k);
    return out;
  }

  double score_token(std::span<const Token> tokens, std::size_t mask_index,
                     std::string_view target) const override {
    Strings patch;
    std::size_t which = 0;
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      const std::size_t p = positions_[i];
      if (p == mask_index) {
        which = i;
        patch.push_back(std::string(target));
      } else {
        patch.push_back(tokens[p].text);
      }
    }
    return score_.at(patch).at(which);
  }

  PredictorInfo info() const override { return {"scripted", "<mask>", 512}; }

 private:
  std::vector<std::size_t> positions_;
  std::map<Strings, Dist> predict_;
  std::map<Strings, std::vector<double>> score_;
};

inline std::shared_ptr<PredictorInput> make_input(const std::string& before, std::size_t masks,
                                           const std::string& after,
                                           const std::string& buggy = "") {
  auto input = std::make_shared<PredictorInput>();
  MaskLine ml;
  ml.strategy = Strategy::complete_replace;
  ml.mask_count = masks;
  ml.kept_prefix = ref_tokens(before);
  ml.kept_suffix = ref_tokens(after);
  input->provenance = ml;
  input->buggy_tokens = ref_tokens(buggy);
  input->tokens = ml.render({});
  input->mask_region_begin = 0;
  for (std::size_t i = 0; i < masks; ++i) input->mask_positions.push_back(ml.kept_prefix.size() + i);
  return input;
}

// Independent oracle: every assignment of vocabulary tokens to the masks,
// scored by the running-mean definition with later masks still masked.
inline std::vector<std::pair<Strings, double>> enumerate_fills(const PredictorInput& input,
                                                        const Strings& vocab,
                                                        const Predictor& predictor) {
  const std::size_t n = input.mask_positions.size();
  std::vector<std::pair<Strings, double>> out;
  std::vector<std::size_t> digits(n, 0);
  while (true) {
    Strings fill;
    for (std::size_t d : digits) fill.push_back(vocab[d]);
    std::vector<Token> seq = input.tokens;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += predictor.score_token(seq, input.mask_positions[i], fill[i]);
      seq[input.mask_positions[i]] = make_token(fill[i], {});
    }
    out.emplace_back(fill, sum / static_cast<double>(n));
    std::size_t k = 0;
    while (k < n && ++digits[k] == vocab.size()) digits[k++] = 0;
    if (k == n) break;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace clozefix::testing
