#include "clozefix/patch_engine.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

#include "clozefix/errors.hpp"

namespace clozefix {

namespace {

struct BracketShape {
  std::array<std::size_t, 3> unmatched_close{};
  std::array<std::size_t, 3> unmatched_open{};

  friend bool operator==(const BracketShape&, const BracketShape&) = default;
};

BracketShape shape_of(std::span<const Token> line) {
  static constexpr std::array<std::string_view, 3> kOpen = {"(", "[", "{"};
  static constexpr std::array<std::string_view, 3> kClose = {")", "]", "}"};
  BracketShape shape;
  for (const Token& t : line) {
    if (t.kind == TokenKind::string_literal) continue;
    for (std::size_t k = 0; k < 3; ++k) {
      if (t.text == kOpen[k]) {
        ++shape.unmatched_open[k];
      } else if (t.text == kClose[k]) {
        if (shape.unmatched_open[k] > 0) --shape.unmatched_open[k];
        else ++shape.unmatched_close[k];
      }
    }
  }
  return shape;
}

}  // namespace

std::vector<Token> CandidatePatch::line_tokens(const TokenizerConfig& config) const {
  if (!source) throw std::logic_error("patch has no source input");
  const MaskLine& ml = source->provenance;
  std::vector<Token> out(ml.kept_prefix);
  for (const std::string& g : generated) out.push_back(make_token(g, config));
  out.insert(out.end(), ml.kept_suffix.begin(), ml.kept_suffix.end());
  return out;
}

bool same_bracket_shape(std::span<const Token> line, std::span<const Token> reference) {
  return shape_of(line) == shape_of(reference);
}

std::vector<CandidatePatch> beam_fill(std::shared_ptr<const PredictorInput> input,
                                      std::size_t beam_width, const Predictor& predictor,
                                      const TokenizerConfig& config, const BeamOptions& options) {
  if (!input || input->mask_positions.empty()) {
    throw InvalidQuery("beam_fill needs at least one mask position");
  }
  if (beam_width == 0) throw InvalidQuery("beam width must be at least 1");
  const auto& positions = input->mask_positions;
  const std::size_t n = positions.size();

  // Expansions are ranked as light (parent, candidate) pairs; only the
  // survivors are materialized.
  struct Expansion {
    std::size_t parent;
    Candidate candidate;
    double logprob_sum;
    double temp_joint_score;
  };
  std::vector<BeamState> beams(1);
  std::vector<std::vector<Token>> beam_tokens(1);  // beams[i].filled as tokens
  std::vector<Token> seq = input->tokens;
  std::vector<Expansion> expansions;
  for (std::size_t step = 0; step < n; ++step) {
    expansions.clear();
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const BeamState& state = beams[b];
      for (std::size_t i = 0; i < step; ++i) seq[positions[i]] = beam_tokens[b][i];
      const PredictorQuery query{seq, positions[step], beam_width};
      if (options.observer) options.observer(query, step);
      TokenDistribution dist = predictor.predict(query);
      for (Candidate& c : dist.candidates) {
        const double sum = state.logprob_sum + c.logprob;
        expansions.push_back({b, std::move(c), sum, sum / static_cast<double>(step + 1)});
      }
    }
    auto before = [&](const Expansion& x, const Expansion& y) {
      if (x.temp_joint_score != y.temp_joint_score) return x.temp_joint_score > y.temp_joint_score;
      if (x.parent != y.parent) {
        const auto& fx = beams[x.parent].filled;
        const auto& fy = beams[y.parent].filled;
        if (fx != fy) return fx < fy;
      }
      return x.candidate.token < y.candidate.token;
    };
    const std::size_t keep = std::min(beam_width, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep),
                      expansions.end(), before);
    std::vector<BeamState> next(keep);
    std::vector<std::vector<Token>> next_tokens(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      Expansion& e = expansions[i];
      next_tokens[i].reserve(step + 1);
      next_tokens[i] = beam_tokens[e.parent];
      next_tokens[i].push_back(make_token(e.candidate.token, config));
      next[i].filled.reserve(step + 1);
      next[i].filled = beams[e.parent].filled;
      next[i].filled.push_back(std::move(e.candidate.token));
      next[i].logprob_sum = e.logprob_sum;
      next[i].temp_joint_score = e.temp_joint_score;
    }
    beams = std::move(next);
    beam_tokens = std::move(next_tokens);
    if (beams.empty()) return {};
  }

  const MaskLine& ml = input->provenance;
  const std::vector<Token> reference =
      ml.insertion == Insertion::replace ? input->buggy_tokens : std::vector<Token>{};
  std::vector<CandidatePatch> out;
  out.reserve(beams.size());
  for (BeamState& state : beams) {
    CandidatePatch patch;
    patch.inserted = ml.insertion;
    patch.strategy = ml.strategy;
    patch.temp_joint_score = state.temp_joint_score;
    patch.generated = std::move(state.filled);
    patch.source = input;
    const auto line = patch.line_tokens(config);
    if (options.well_formed_filter && !same_bracket_shape(line, reference)) continue;
    try {
      patch.rendered_line = detokenize(line);
    } catch (const MaskStillPresent&) {
      continue;  // the predictor proposed the sentinel itself
    }
    out.push_back(std::move(patch));
  }
  return out;
}

std::vector<Token> filled_sequence(const CandidatePatch& patch, const TokenizerConfig& config) {
  if (!patch.source) throw std::logic_error("patch has no source input");
  const auto& positions = patch.source->mask_positions;
  if (positions.size() != patch.generated.size()) {
    throw std::logic_error("patch is not fully generated");
  }
  std::vector<Token> seq = patch.source->tokens;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    seq[positions[i]] = make_token(patch.generated[i], config);
  }
  return seq;
}

double joint_score(const CandidatePatch& patch, const Predictor& predictor,
                   const TokenizerConfig& config) {
  std::vector<Token> seq = filled_sequence(patch, config);
  const auto& positions = patch.source->mask_positions;
  double sum = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Token kept = std::move(seq[positions[i]]);
    seq[positions[i]] = {config.mask_sentinel, TokenKind::mask_sentinel};
    sum += predictor.score_token(seq, positions[i], patch.generated[i]);
    seq[positions[i]] = std::move(kept);
  }
  return sum / static_cast<double>(positions.size());
}

bool ranks_before(const CandidatePatch& a, const CandidatePatch& b) {
  const double ja = a.joint_score.value_or(a.temp_joint_score);
  const double jb = b.joint_score.value_or(b.temp_joint_score);
  if (ja != jb) return ja > jb;
  if (a.temp_joint_score != b.temp_joint_score) return a.temp_joint_score > b.temp_joint_score;
  if (a.rendered_line != b.rendered_line) return a.rendered_line < b.rendered_line;
  return a.inserted < b.inserted;
}

std::vector<CandidatePatch> rerank(std::vector<CandidatePatch> patches, const Predictor& predictor,
                                   const TokenizerConfig& config) {
  for (CandidatePatch& p : patches) p.joint_score = joint_score(p, predictor, config);
  std::stable_sort(patches.begin(), patches.end(), ranks_before);
  for (std::size_t i = 0; i < patches.size(); ++i) patches[i].rank = i + 1;
  return patches;
}

std::vector<CandidatePatch> aggregate(std::vector<std::vector<CandidatePatch>> per_mask_line,
                                      std::size_t max_patches) {
  std::vector<CandidatePatch> merged;
  std::map<std::pair<Insertion, std::string>, std::size_t> index;
  for (auto& list : per_mask_line) {
    for (CandidatePatch& p : list) {
      const auto key = std::make_pair(p.inserted, p.rendered_line);
      auto it = index.find(key);
      if (it == index.end()) {
        index.emplace(key, merged.size());
        merged.push_back(std::move(p));
      } else if (p.joint_score.value_or(p.temp_joint_score) >
                 merged[it->second].joint_score.value_or(merged[it->second].temp_joint_score)) {
        merged[it->second] = std::move(p);
      }
    }
  }
  std::stable_sort(merged.begin(), merged.end(), ranks_before);
  if (merged.size() > max_patches) merged.resize(max_patches);
  for (std::size_t i = 0; i < merged.size(); ++i) merged[i].rank = i + 1;
  return merged;
}

}  // namespace clozefix
