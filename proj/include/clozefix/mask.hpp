#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clozefix/tokenizer.hpp"

namespace clozefix {

enum class Strategy {
  complete_replace,
  complete_insert_before,
  complete_insert_after,
  partial_before,
  partial_after,
  template_method_replace,
  template_param_replace_all,
  template_param_replace_one,
  template_param_append,
  template_bool_replace,
  template_bool_append,
  template_operator_replace,
};

enum class Insertion { replace, before, after };

// Coarse strategy families, used to enable/disable groups of strategies.
enum class StrategyFamily { complete, partial, template_ };

std::string_view to_string(Strategy s);
std::string_view to_string(Insertion i);
Strategy strategy_from_string(std::string_view s);
Insertion insertion_from_string(std::string_view s);
StrategyFamily family_of(Strategy s);

struct StrategySet {
  bool complete = true;
  bool partial = true;
  bool template_ = true;

  bool contains(Strategy s) const;
  // Comma-separated family names, e.g. "complete,partial".
  static StrategySet parse(std::string_view list);
  std::string to_string() const;

  friend bool operator==(const StrategySet&, const StrategySet&) = default;
};

struct MaskLine {
  Strategy strategy = Strategy::complete_replace;
  std::vector<Token> kept_prefix;
  std::vector<Token> kept_suffix;
  std::size_t mask_count = 1;
  Insertion insertion = Insertion::replace;

  std::size_t rendered_length() const {
    return kept_prefix.size() + mask_count + kept_suffix.size();
  }
  // kept_prefix, mask_count sentinels, kept_suffix.
  std::vector<Token> render(const TokenizerConfig& config) const;
};

// Half-open token range [begin, end) within a line.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct MethodCall {
  Span name;
  std::size_t open_paren = 0;
  std::size_t close_paren = 0;
  std::vector<Span> arguments;
};

struct OperatorSite {
  Span span;
  std::string text;
};

struct LineSyntax {
  std::vector<MethodCall> method_calls;
  std::optional<Span> boolean_condition;
  std::vector<OperatorSite> operators;

  bool empty() const {
    return method_calls.empty() && !boolean_condition && operators.empty();
  }
};

// Operators eligible for single-token replacement.
bool is_template_operator(std::string_view text);

LineSyntax analyze_line(std::span<const Token> buggy);

// All mask lines for one buggy line, deduplicated on (insertion, rendering).
// Order: complete, partial-before, partial-after, then templates in
// Strategy declaration order.
std::vector<MaskLine> generate_mask_lines(std::span<const Token> buggy,
                                          const StrategySet& enabled = {});

// Mask-count sweep bound: rendered lines never exceed L + kExtraTokens.
inline constexpr std::size_t kExtraTokens = 10;
inline constexpr std::size_t kMaxMethodNameMasks = 10;

}  // namespace clozefix
