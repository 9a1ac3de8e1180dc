#pragma once

// Predictor input layout for one (buggy line, mask line) pair:
//
//   [context before] /* buggy line */ [mask line] [context after]
//
// Context is added one whole source line at a time, alternating before and
// after and starting next to the buggy line, until the next line would not
// fit the token budget. For insertions the buggy line itself is context: it
// follows the mask line for insert-before and precedes it for insert-after.

#include <cstddef>
#include <span>
#include <vector>

#include "clozefix/mask.hpp"
#include "clozefix/task.hpp"
#include "clozefix/tokenizer.hpp"

namespace clozefix {

struct PredictorInput {
  std::vector<Token> tokens;
  std::vector<std::size_t> mask_positions;
  MaskLine provenance;
  // Buggy line tokens; patches are checked for bracket shape against them.
  std::vector<Token> buggy_tokens;
  std::size_t mask_region_begin = 0;  // first token of the rendered mask line
  std::size_t context_lines_before = 0;
  std::size_t context_lines_after = 0;
};

// ["/*"] + buggy tokens + ["*/"]; an interior "*/" becomes "*​/".
std::vector<Token> wrap_as_comment(std::span<const Token> buggy_tokens);

// Throws CoreTooLarge when the comment plus mask line alone exceed the budget.
PredictorInput build_input(const RepairTask& task, const MaskLine& mask_line,
                           const TokenizerConfig& config);

}  // namespace clozefix
