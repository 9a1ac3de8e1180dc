#pragma once

// Grouped-mask filling and patch ranking.
//
// beam_fill resolves the masks of one PredictorInput strictly left to right.
// A beam state with p tokens generated carries
//     temp joint score = (1/p) * sum_i log C*(t_i)
// where C*(t_i) was the predictor's probability for t_i when it was
// generated, i.e. with every later mask still masked.
//
// rerank re-scores each completed patch with leave-one-out queries:
//     joint score = (1/n) * sum_i log C(t_i)
// where C(t_i) masks only position i of the fully filled sequence.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clozefix/context.hpp"
#include "clozefix/mask.hpp"
#include "clozefix/predictor.hpp"

namespace clozefix {

struct BeamState {
  std::vector<std::string> filled;
  double logprob_sum = 0.0;
  double temp_joint_score = 0.0;
};

struct CandidatePatch {
  std::string rendered_line;
  Insertion inserted = Insertion::replace;
  Strategy strategy = Strategy::complete_replace;
  double temp_joint_score = 0.0;
  std::optional<double> joint_score;
  std::optional<std::size_t> rank;

  // Tokens generated for the masks, in mask order, and the input they fill.
  std::vector<std::string> generated;
  std::shared_ptr<const PredictorInput> source;

  // Rendered line as tokens (kept prefix, generated tokens, kept suffix).
  std::vector<Token> line_tokens(const TokenizerConfig& config) const;
};

struct BeamOptions {
  // Drop fills whose bracket shape differs from the line they replace.
  bool well_formed_filter = true;
  // Called with every query before it is sent; used by tests to observe
  // the beam.
  std::function<void(const PredictorQuery&, std::size_t step)> observer;
};

// True when `line` has the same unmatched openers/closers for (), [] and {}
// as `reference`.
bool same_bracket_shape(std::span<const Token> line, std::span<const Token> reference);

// Resolves every mask of `input`; returns up to `beam_width` completed
// patches sorted by temp joint score (ties: generated tokens ascending).
std::vector<CandidatePatch> beam_fill(std::shared_ptr<const PredictorInput> input,
                                      std::size_t beam_width, const Predictor& predictor,
                                      const TokenizerConfig& config,
                                      const BeamOptions& options = {});

// Sequence of `patch.source` with every mask replaced by its generated token.
std::vector<Token> filled_sequence(const CandidatePatch& patch, const TokenizerConfig& config);

// Leave-one-out joint score of one completed patch.
double joint_score(const CandidatePatch& patch, const Predictor& predictor,
                   const TokenizerConfig& config);

// Ordering used for ranked lists: joint desc, temp desc, rendered line asc.
bool ranks_before(const CandidatePatch& a, const CandidatePatch& b);

// Assigns joint scores and ranks 1..count; returns the patches re-sorted.
std::vector<CandidatePatch> rerank(std::vector<CandidatePatch> patches, const Predictor& predictor,
                                   const TokenizerConfig& config);

// Merges per-mask-line results, keeps the best of identical
// (rendered_line, inserted) pairs, sorts globally and truncates to
// `max_patches`. Ranks are reassigned 1..count.
std::vector<CandidatePatch> aggregate(std::vector<std::vector<CandidatePatch>> per_mask_line,
                                      std::size_t max_patches);

}  // namespace clozefix
