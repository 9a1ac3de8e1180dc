#include "clozefix/mask.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>

#include "clozefix/errors.hpp"

namespace clozefix {

namespace {

struct StrategyName {
  Strategy strategy;
  std::string_view name;
};

constexpr std::array<StrategyName, 12> kStrategyNames = {{
    {Strategy::complete_replace, "complete-replace"},
    {Strategy::complete_insert_before, "complete-insert-before"},
    {Strategy::complete_insert_after, "complete-insert-after"},
    {Strategy::partial_before, "partial-before"},
    {Strategy::partial_after, "partial-after"},
    {Strategy::template_method_replace, "template-method-replace"},
    {Strategy::template_param_replace_all, "template-param-replace-all"},
    {Strategy::template_param_replace_one, "template-param-replace-one"},
    {Strategy::template_param_append, "template-param-append"},
    {Strategy::template_bool_replace, "template-bool-replace"},
    {Strategy::template_bool_append, "template-bool-append"},
    {Strategy::template_operator_replace, "template-operator-replace"},
}};

bool is_opener(std::string_view t) { return t == "(" || t == "[" || t == "{"; }
bool is_closer(std::string_view t) { return t == ")" || t == "]" || t == "}"; }

std::string_view closer_for(std::string_view opener) {
  if (opener == "(") return ")";
  if (opener == "[") return "]";
  return "}";
}

// Index of the bracket closing the one at `open`, if the line contains it.
std::optional<std::size_t> matching_close(std::span<const Token> toks, std::size_t open) {
  std::vector<std::string_view> stack;
  for (std::size_t i = open; i < toks.size(); ++i) {
    const std::string_view t = toks[i].text;
    if (toks[i].kind == TokenKind::string_literal) continue;
    if (is_opener(t)) {
      stack.push_back(closer_for(t));
    } else if (is_closer(t)) {
      if (stack.empty() || stack.back() != t) return std::nullopt;
      stack.pop_back();
      if (stack.empty()) return i;
    }
  }
  return std::nullopt;
}

// Splits (begin, end) at commas that are not nested in brackets.
std::vector<Span> split_top_level(std::span<const Token> toks, std::size_t begin, std::size_t end,
                                  std::string_view separator) {
  std::vector<Span> parts;
  if (begin >= end) return parts;
  int depth = 0;
  std::size_t start = begin;
  for (std::size_t i = begin; i < end; ++i) {
    const std::string_view t = toks[i].text;
    if (toks[i].kind == TokenKind::string_literal) continue;
    if (is_opener(t)) ++depth;
    else if (is_closer(t)) --depth;
    else if (depth == 0 && t == separator) {
      parts.push_back({start, i});
      start = i + 1;
    }
  }
  parts.push_back({start, end});
  return parts;
}

bool is_control_keyword(std::string_view w) {
  static constexpr std::array<std::string_view, 12> kWords = {
      "if",     "while", "for",   "switch", "catch", "synchronized",
      "return", "assert", "throw", "case",  "do",    "else"};
  return std::find(kWords.begin(), kWords.end(), w) != kWords.end();
}

bool is_boolean_operator(std::string_view t) {
  return t == "<" || t == ">" || t == "<=" || t == ">=" || t == "==" || t == "!=" || t == "&&" ||
         t == "||" || t == "!";
}

std::optional<Span> find_condition(std::span<const Token> toks) {
  std::size_t i = 0;
  while (i < toks.size() && (toks[i].text == "}" || toks[i].text == "else")) ++i;
  if (i >= toks.size()) return std::nullopt;
  const std::string_view head = toks[i].text;

  if ((head == "if" || head == "while" || head == "for") && i + 1 < toks.size() &&
      toks[i + 1].text == "(") {
    const auto close = matching_close(toks, i + 1);
    if (!close) return std::nullopt;
    if (head == "for") {
      const auto parts = split_top_level(toks, i + 2, *close, ";");
      if (parts.size() != 3 || parts[1].empty()) return std::nullopt;
      return parts[1];
    }
    if (*close == i + 2) return std::nullopt;
    return Span{i + 2, *close};
  }

  if (head == "return") {
    std::size_t end = toks.size();
    if (end > i + 1 && toks[end - 1].text == ";") --end;
    if (end <= i + 1) return std::nullopt;
    for (std::size_t k = i + 1; k < end; ++k) {
      if (toks[k].kind == TokenKind::op && is_boolean_operator(toks[k].text)) {
        return Span{i + 1, end};
      }
    }
  }
  return std::nullopt;
}

std::vector<Token> slice(std::span<const Token> toks, std::size_t begin, std::size_t end) {
  return {toks.begin() + static_cast<std::ptrdiff_t>(begin),
          toks.begin() + static_cast<std::ptrdiff_t>(end)};
}

class Emitter {
 public:
  Emitter(std::size_t line_length, const StrategySet& enabled)
      : bound_(line_length + kExtraTokens), enabled_(enabled) {}

  // Sweeps mask_count from 1 while the rendered length stays within bound,
  // and below `max_masks` when given.
  void sweep(Strategy strategy, std::vector<Token> prefix, std::vector<Token> suffix,
             Insertion insertion = Insertion::replace,
             std::size_t max_masks = static_cast<std::size_t>(-1)) {
    if (!enabled_.contains(strategy)) return;
    const std::size_t kept = prefix.size() + suffix.size();
    if (kept >= bound_) return;
    const std::size_t limit = std::min(bound_ - kept, max_masks);
    for (std::size_t m = 1; m <= limit; ++m) {
      emit({strategy, prefix, suffix, m, insertion});
    }
  }

  void single(Strategy strategy, std::vector<Token> prefix, std::vector<Token> suffix) {
    if (!enabled_.contains(strategy)) return;
    emit({strategy, std::move(prefix), std::move(suffix), 1, Insertion::replace});
  }

  std::vector<MaskLine> take() { return std::move(lines_); }

 private:
  void emit(MaskLine line) {
    std::string key(1, static_cast<char>('0' + static_cast<int>(line.insertion)));
    for (const Token& t : line.kept_prefix) (key += '\x1f') += t.text;
    key += '\x1e' + std::to_string(line.mask_count) + '\x1e';
    for (const Token& t : line.kept_suffix) (key += '\x1f') += t.text;
    if (seen_.insert(std::move(key)).second) lines_.push_back(std::move(line));
  }

  std::size_t bound_;
  StrategySet enabled_;
  std::set<std::string> seen_;
  std::vector<MaskLine> lines_;
};

}  // namespace

std::string_view to_string(Strategy s) {
  for (const auto& entry : kStrategyNames) {
    if (entry.strategy == s) return entry.name;
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view s) {
  for (const auto& entry : kStrategyNames) {
    if (entry.name == s) return entry.strategy;
  }
  throw ConfigError("unknown strategy: " + std::string(s));
}

std::string_view to_string(Insertion i) {
  switch (i) {
    case Insertion::replace: return "replace";
    case Insertion::before: return "before";
    case Insertion::after: return "after";
  }
  return "unknown";
}

Insertion insertion_from_string(std::string_view s) {
  if (s == "replace") return Insertion::replace;
  if (s == "before") return Insertion::before;
  if (s == "after") return Insertion::after;
  throw ConfigError("unknown insertion: " + std::string(s));
}

StrategyFamily family_of(Strategy s) {
  switch (s) {
    case Strategy::complete_replace:
    case Strategy::complete_insert_before:
    case Strategy::complete_insert_after: return StrategyFamily::complete;
    case Strategy::partial_before:
    case Strategy::partial_after: return StrategyFamily::partial;
    default: return StrategyFamily::template_;
  }
}

bool StrategySet::contains(Strategy s) const {
  switch (family_of(s)) {
    case StrategyFamily::complete: return complete;
    case StrategyFamily::partial: return partial;
    case StrategyFamily::template_: return template_;
  }
  return false;
}

StrategySet StrategySet::parse(std::string_view list) {
  StrategySet set{false, false, false};
  while (!list.empty()) {
    const auto comma = list.find(',');
    std::string_view item = list.substr(0, comma);
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "complete") set.complete = true;
    else if (item == "partial") set.partial = true;
    else if (item == "template") set.template_ = true;
    else if (item == "all") set = StrategySet{};
    else if (!item.empty()) throw ConfigError("unknown strategy family: " + std::string(item));
  }
  return set;
}

std::string StrategySet::to_string() const {
  std::string out;
  auto add = [&](bool on, std::string_view name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(complete, "complete");
  add(partial, "partial");
  add(template_, "template");
  return out;
}

std::vector<Token> MaskLine::render(const TokenizerConfig& config) const {
  std::vector<Token> out;
  out.reserve(rendered_length());
  out.insert(out.end(), kept_prefix.begin(), kept_prefix.end());
  for (std::size_t i = 0; i < mask_count; ++i) {
    out.push_back({config.mask_sentinel, TokenKind::mask_sentinel});
  }
  out.insert(out.end(), kept_suffix.begin(), kept_suffix.end());
  return out;
}

bool is_template_operator(std::string_view t) {
  return t == "<" || t == ">" || t == "<=" || t == ">=" || t == "==" || t == "!=" || t == "&&" ||
         t == "||" || t == "+" || t == "-" || t == "*" || t == "/" || t == "%" || t == "+=" ||
         t == "-=" || t == "*=" || t == "/=";
}

LineSyntax analyze_line(std::span<const Token> toks) {
  LineSyntax syntax;
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::word || toks[i + 1].text != "(" ||
        is_control_keyword(toks[i].text)) {
      continue;
    }
    const auto close = matching_close(toks, i + 1);
    if (!close) continue;
    MethodCall call;
    call.name = {i, i + 1};
    call.open_paren = i + 1;
    call.close_paren = *close;
    for (const Span& arg : split_top_level(toks, i + 2, *close, ",")) {
      if (!arg.empty()) call.arguments.push_back(arg);
    }
    syntax.method_calls.push_back(std::move(call));
  }
  syntax.boolean_condition = find_condition(toks);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind == TokenKind::op && is_template_operator(toks[i].text)) {
      syntax.operators.push_back({{i, i + 1}, toks[i].text});
    }
  }
  return syntax;
}

std::vector<MaskLine> generate_mask_lines(std::span<const Token> buggy_in,
                                          const StrategySet& enabled) {
  const std::vector<Token> buggy = escape_sentinels({buggy_in.begin(), buggy_in.end()});
  const std::span<const Token> toks(buggy);
  const std::size_t L = toks.size();
  Emitter out(L, enabled);

  out.sweep(Strategy::complete_replace, {}, {}, Insertion::replace);
  out.sweep(Strategy::complete_insert_before, {}, {}, Insertion::before);
  out.sweep(Strategy::complete_insert_after, {}, {}, Insertion::after);

  // Partial-before keeps a proper suffix, partial-after a proper prefix.
  for (std::size_t kept = 1; kept < L; ++kept) {
    out.sweep(Strategy::partial_before, {}, slice(toks, L - kept, L));
  }
  for (std::size_t kept = 1; kept < L; ++kept) {
    out.sweep(Strategy::partial_after, slice(toks, 0, kept), {});
  }

  if (L == 0) return out.take();
  const LineSyntax syntax = analyze_line(toks);

  for (const MethodCall& call : syntax.method_calls) {
    out.sweep(Strategy::template_method_replace, slice(toks, 0, call.name.begin),
              slice(toks, call.name.end, L), Insertion::replace, kMaxMethodNameMasks);
  }
  for (const MethodCall& call : syntax.method_calls) {
    out.sweep(Strategy::template_param_replace_all, slice(toks, 0, call.open_paren + 1),
              slice(toks, call.close_paren, L));
  }
  for (const MethodCall& call : syntax.method_calls) {
    for (const Span& arg : call.arguments) {
      out.sweep(Strategy::template_param_replace_one, slice(toks, 0, arg.begin),
                slice(toks, arg.end, L));
    }
  }
  for (const MethodCall& call : syntax.method_calls) {
    auto prefix = slice(toks, 0, call.close_paren);
    if (!call.arguments.empty()) prefix.push_back({",", TokenKind::punctuation});
    out.sweep(Strategy::template_param_append, std::move(prefix), slice(toks, call.close_paren, L));
  }
  if (syntax.boolean_condition) {
    const Span cond = *syntax.boolean_condition;
    out.sweep(Strategy::template_bool_replace, slice(toks, 0, cond.begin),
              slice(toks, cond.end, L));
    for (std::string_view connective : {"&&", "||"}) {
      auto prefix = slice(toks, 0, cond.end);
      prefix.push_back({std::string(connective), TokenKind::op});
      out.sweep(Strategy::template_bool_append, std::move(prefix), slice(toks, cond.end, L));
    }
  }
  for (const OperatorSite& op : syntax.operators) {
    out.single(Strategy::template_operator_replace, slice(toks, 0, op.span.begin),
               slice(toks, op.span.end, L));
  }
  return out.take();
}

}  // namespace clozefix
