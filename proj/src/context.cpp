#include "clozefix/context.hpp"

#include <string>

#include "clozefix/errors.hpp"

namespace clozefix {

std::vector<Token> wrap_as_comment(std::span<const Token> buggy_tokens) {
  std::vector<Token> out;
  out.reserve(buggy_tokens.size() + 2);
  out.push_back({"/*", TokenKind::comment_delim});
  for (const Token& t : buggy_tokens) {
    if (t.text == "*/") {
      out.push_back({"*" + std::string(kZeroWidthSpace) + "/", TokenKind::punctuation});
    } else {
      out.push_back(t);
    }
  }
  out.push_back({"*/", TokenKind::comment_delim});
  return out;
}

PredictorInput build_input(const RepairTask& task, const MaskLine& mask_line,
                           const TokenizerConfig& config) {
  task.check();
  const std::size_t budget = config.max_sequence_tokens;
  const std::size_t bug = task.buggy_line_index;
  auto line_tokens = [&](std::size_t index) {
    return escape_sentinels(tokenize(task.source_lines[index], config));
  };

  PredictorInput input;
  input.provenance = mask_line;
  input.buggy_tokens = line_tokens(bug);
  const auto comment = wrap_as_comment(input.buggy_tokens);
  const auto masked = mask_line.render(config);
  const std::size_t core = comment.size() + masked.size();
  if (core > budget) throw CoreTooLarge(core, budget);

  // Candidate context lines, nearest first.
  std::vector<std::size_t> before;
  std::vector<std::size_t> after;
  const bool bug_is_before = mask_line.insertion == Insertion::after;
  const bool bug_is_after = mask_line.insertion == Insertion::before;
  for (std::size_t i = bug_is_before ? bug + 1 : bug; i-- > 0;) before.push_back(i);
  for (std::size_t i = bug_is_after ? bug : bug + 1; i < task.source_lines.size(); ++i) {
    after.push_back(i);
  }

  std::vector<std::vector<Token>> taken_before;
  std::vector<std::vector<Token>> taken_after;
  std::size_t used = core;
  std::size_t next_before = 0;
  std::size_t next_after = 0;
  bool before_turn = true;
  while (next_before < before.size() || next_after < after.size()) {
    const bool take_before =
        next_after >= after.size() || (before_turn && next_before < before.size());
    const std::size_t line = take_before ? before[next_before] : after[next_after];
    auto toks = line_tokens(line);
    if (used + toks.size() > budget) break;
    used += toks.size();
    if (take_before) {
      taken_before.push_back(std::move(toks));
      ++next_before;
    } else {
      taken_after.push_back(std::move(toks));
      ++next_after;
    }
    before_turn = !take_before;
  }

  input.tokens.reserve(used);
  for (auto it = taken_before.rbegin(); it != taken_before.rend(); ++it) {
    input.tokens.insert(input.tokens.end(), it->begin(), it->end());
  }
  input.tokens.insert(input.tokens.end(), comment.begin(), comment.end());
  input.mask_region_begin = input.tokens.size();
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (masked[i].kind == TokenKind::mask_sentinel) {
      input.mask_positions.push_back(input.mask_region_begin + i);
    }
  }
  input.tokens.insert(input.tokens.end(), masked.begin(), masked.end());
  for (const auto& toks : taken_after) {
    input.tokens.insert(input.tokens.end(), toks.begin(), toks.end());
  }
  input.context_lines_before = taken_before.size();
  input.context_lines_after = taken_after.size();
  return input;
}

}  // namespace clozefix
