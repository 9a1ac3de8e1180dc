#include "clozefix/tokenizer.hpp"

#include <algorithm>
#include <array>

#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"

namespace clozefix {

namespace {

// Longest-match operator table; order matters only within equal lengths.
constexpr std::array<std::string_view, 25> kMultiOps = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=", "&&", "||",
    "++",   "--",  "+=",  "-=",  "*=",  "/=", "%=", "&=", "|=", "^=", "<<", ">>"};

constexpr std::string_view kSingleOps = "+-*/%=<>!&|^~?:";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

void lex_segment(std::string_view text, std::vector<Token>& out) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < n && text[j] != '\n') {
        if (text[j] == '\\' && j + 1 < n && text[j + 1] != '\n') {
          j += 2;
          continue;
        }
        if (text[j] == c) {
          ++j;
          break;
        }
        ++j;
      }
      out.push_back({std::string(text.substr(i, j - i)), TokenKind::string_literal});
      i = j;
      continue;
    }
    const std::string_view rest = text.substr(i);
    if (rest.starts_with("/*") || rest.starts_with("*/") || rest.starts_with("//")) {
      out.push_back({std::string(rest.substr(0, 2)), TokenKind::comment_delim});
      i += 2;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_char(text[j])) ++j;
      out.push_back({std::string(text.substr(i, j - i)), TokenKind::word});
      i = j;
      continue;
    }
    if (is_digit(c)) {
      const bool hex = rest.starts_with("0x") || rest.starts_with("0X");
      std::size_t j = i;
      while (j < n) {
        const char d = text[j];
        if (is_ident_char(d) && static_cast<unsigned char>(d) < 0x80) {
          ++j;
        } else if (d == '.' && j + 1 < n && is_digit(text[j + 1])) {
          ++j;
        } else if ((d == '+' || d == '-') && !hex && (text[j - 1] == 'e' || text[j - 1] == 'E') &&
                   j + 1 < n && is_digit(text[j + 1])) {
          ++j;
        } else {
          break;
        }
      }
      out.push_back({std::string(text.substr(i, j - i)), TokenKind::number});
      i = j;
      continue;
    }
    bool matched = false;
    for (std::string_view op : kMultiOps) {
      if (rest.starts_with(op)) {
        out.push_back({std::string(op), TokenKind::op});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kSingleOps.find(c) != std::string_view::npos) {
      out.push_back({std::string(1, c), TokenKind::op});
      ++i;
      continue;
    }
    // Punctuation, plus any other stray byte sequence (one code point).
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(c)), n - i);
    out.push_back({std::string(text.substr(i, len)), TokenKind::punctuation});
    i += len;
  }
}

// Reference lexer. Every occurrence of `sentinel` (when non-empty) becomes one
// token, wherever it appears; the text between occurrences is lexed normally.
std::vector<Token> lex(std::string_view text, std::string_view sentinel) {
  std::vector<Token> out;
  while (!sentinel.empty()) {
    const auto at = text.find(sentinel);
    if (at == std::string_view::npos) break;
    lex_segment(text.substr(0, at), out);
    out.push_back({std::string(sentinel), TokenKind::mask_sentinel});
    text.remove_prefix(at + sentinel.size());
  }
  lex_segment(text, out);
  return out;
}

std::vector<std::string> split_code_points(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(s[i])), s.size() - i);
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

void apply_merges(std::vector<std::string>& symbols, const MergeTable& table) {
  while (symbols.size() > 1) {
    std::size_t best = MergeTable::npos;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      best = std::min(best, table.rank(symbols[i], symbols[i + 1]));
    }
    if (best == MergeTable::npos) return;
    const auto& [left, right] = table.merges()[best];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        merged.push_back(symbols[i] + symbols[i + 1]);
        ++i;
      } else {
        merged.push_back(std::move(symbols[i]));
      }
    }
    symbols = std::move(merged);
  }
}

bool participates_in_subwords(const Token& t) {
  return t.kind != TokenKind::string_literal && t.kind != TokenKind::mask_sentinel;
}

bool is_keyword_before_paren(std::string_view w) {
  static constexpr std::array<std::string_view, 14> kKeywords = {
      "if",     "for",  "while", "switch", "catch", "return", "synchronized",
      "assert", "throw", "case", "else",   "do",    "try",    "new"};
  return std::find(kKeywords.begin(), kKeywords.end(), w) != kKeywords.end();
}

bool unterminated_literal(const Token& t) {
  if (t.kind != TokenKind::string_literal) return false;
  const std::string& s = t.text;
  if (s.size() < 2 || s.back() != s.front()) return true;
  std::size_t backslashes = 0;
  for (std::size_t i = s.size() - 1; i > 1 && s[i - 1] == '\\'; --i) ++backslashes;
  return backslashes % 2 == 1;
}

// Spacing table: true when the canonical rendering puts no space between
// `prev` and `next`.
bool prefers_glue(const Token& prev, const Token& next) {
  const std::string_view p = prev.text;
  const std::string_view x = next.text;
  if (x == ";" || x == "," || x == ")" || x == "]" || x == ".") return true;
  if (p == "(" || p == "[" || p == "." || p == "!" || p == "~" || p == "@") return true;
  const bool prev_operand = (prev.kind == TokenKind::word && !is_keyword_before_paren(p)) ||
                            p == ")" || p == "]";
  if ((x == "(" || x == "[") && prev_operand) return true;
  if ((x == "++" || x == "--") && prev_operand) return true;
  return false;
}

// Gluing `next` onto the current space-free run is only allowed when the
// glued text re-lexes to exactly the run's tokens followed by `next`.
bool glue_is_safe(const std::vector<std::string>& run, const std::string& run_text,
                  const Token& next) {
  const auto relexed = lex(run_text + next.text, "<mask>");
  if (relexed.size() != run.size() + 1) return false;
  for (std::size_t i = 0; i < run.size(); ++i) {
    if (relexed[i].text != run[i]) return false;
  }
  return relexed.back().text == next.text;
}

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::number: return "number";
    case TokenKind::op: return "operator";
    case TokenKind::punctuation: return "punctuation";
    case TokenKind::mask_sentinel: return "mask-sentinel";
    case TokenKind::comment_delim: return "comment-delim";
    case TokenKind::string_literal: return "string-literal";
  }
  return "unknown";
}

MergeTable::MergeTable(std::vector<std::pair<std::string, std::string>> merges)
    : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    ranks_.try_emplace(merges_[i].first + '\x1f' + merges_[i].second, i);
  }
}

std::size_t MergeTable::rank(std::string_view left, std::string_view right) const {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left).push_back('\x1f');
  key.append(right);
  auto it = ranks_.find(key);
  return it == ranks_.end() ? npos : it->second;
}

std::string MergeTable::serialize() const {
  std::string out;
  for (const auto& [l, r] : merges_) {
    out += l;
    out += ' ';
    out += r;
    out += '\n';
  }
  return out;
}

MergeTable MergeTable::parse(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> merges;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos || sp == 0 || sp + 1 >= line.size() ||
        line.find(' ', sp + 1) != std::string_view::npos) {
      throw ConfigError("malformed merge table line " + std::to_string(line_no));
    }
    merges.emplace_back(std::string(line.substr(0, sp)), std::string(line.substr(sp + 1)));
  }
  return MergeTable(std::move(merges));
}

void MergeTable::save(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

MergeTable MergeTable::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void TokenizerConfig::check() const {
  if (mask_sentinel.empty()) throw ConfigError("mask sentinel must be non-empty");
  for (char c : mask_sentinel) {
    if (is_space(c)) throw ConfigError("mask sentinel must not contain whitespace");
  }
  if (max_sequence_tokens < 16) throw ConfigError("max_sequence_tokens must be at least 16");
  if (mode == Mode::subword && !subword_vocab) {
    throw ConfigError("subword mode requires a merge table");
  }
}

std::vector<Token> tokenize(std::string_view text, const TokenizerConfig& config) {
  auto pre = lex(text, config.mask_sentinel);
  if (config.mode == TokenizerConfig::Mode::reference || !config.subword_vocab) return pre;

  std::vector<Token> out;
  out.reserve(pre.size());
  for (auto& t : pre) {
    if (!participates_in_subwords(t)) {
      out.push_back(std::move(t));
      continue;
    }
    auto symbols = split_code_points(t.text);
    apply_merges(symbols, *config.subword_vocab);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      out.push_back({i == 0 ? std::move(symbols[i])
                            : std::string(kContinuationPrefix) + symbols[i],
                     t.kind});
    }
  }
  return out;
}

std::string detokenize(std::span<const Token> tokens) {
  // Re-join subword continuations into whole pre-tokens first.
  std::vector<Token> words;
  words.reserve(tokens.size());
  for (const Token& t : tokens) {
    if (t.kind == TokenKind::mask_sentinel) throw MaskStillPresent();
    const bool continuation = t.text.size() > kContinuationPrefix.size() &&
                              t.text.starts_with(kContinuationPrefix) &&
                              t.kind != TokenKind::string_literal;
    if (continuation) {
      const auto piece = std::string_view(t.text).substr(kContinuationPrefix.size());
      if (words.empty()) {
        words.push_back({std::string(piece), t.kind});
      } else {
        words.back().text += piece;
      }
    } else {
      words.push_back(t);
    }
  }

  std::string out;
  std::vector<std::string> run;
  std::string run_text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) {
      const Token& prev = words[i - 1];
      if (unterminated_literal(prev)) {
        out += '\n';
        run.clear();
        run_text.clear();
      } else if (!(prefers_glue(prev, words[i]) && glue_is_safe(run, run_text, words[i]))) {
        out += ' ';
        run.clear();
        run_text.clear();
      }
    }
    out += words[i].text;
    run.push_back(words[i].text);
    run_text += words[i].text;
  }
  return out;
}

Token make_token(std::string text, const TokenizerConfig& config) {
  if (text == config.mask_sentinel) return {std::move(text), TokenKind::mask_sentinel};
  std::string_view body = text;
  if (config.mode == TokenizerConfig::Mode::subword && body.size() > kContinuationPrefix.size() &&
      body.starts_with(kContinuationPrefix)) {
    body.remove_prefix(kContinuationPrefix.size());
  }
  const auto lexed = lex(body, {});
  const TokenKind kind = lexed.empty() ? TokenKind::punctuation : lexed.front().kind;
  return {std::move(text), kind};
}

std::vector<std::string> token_texts(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.text);
  return out;
}

std::vector<Token> escape_sentinels(std::vector<Token> tokens) {
  for (Token& t : tokens) {
    if (t.kind != TokenKind::mask_sentinel) continue;
    t.text.insert(t.text.empty() ? 0 : 1, kZeroWidthSpace);
    t.kind = TokenKind::word;
  }
  return tokens;
}

TokenizerConfig train_subword(std::span<const std::string> corpus, std::size_t merges,
                              TokenizerConfig base) {
  if (corpus.empty()) throw EmptyCorpus();

  // word (as symbol sequence) -> frequency; std::map keeps iteration stable.
  std::map<std::vector<std::string>, long long> words;
  for (const std::string& doc : corpus) {
    for (const Token& t : lex(doc, base.mask_sentinel)) {
      if (participates_in_subwords(t)) ++words[split_code_points(t.text)];
    }
  }

  std::vector<std::pair<std::string, std::string>> learned;
  for (std::size_t m = 0; m < merges; ++m) {
    std::map<std::pair<std::string, std::string>, long long> pair_counts;
    for (const auto& [symbols, freq] : words) {
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        pair_counts[{symbols[i], symbols[i + 1]}] += freq;
      }
    }
    if (pair_counts.empty()) break;
    // Highest count wins; the map's ordering makes the smallest pair win ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto chosen = best->first;
    learned.push_back(chosen);

    std::map<std::vector<std::string>, long long> next;
    for (const auto& [symbols, freq] : words) {
      std::vector<std::string> merged;
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i + 1 < symbols.size() && symbols[i] == chosen.first &&
            symbols[i + 1] == chosen.second) {
          merged.push_back(symbols[i] + symbols[i + 1]);
          ++i;
        } else {
          merged.push_back(symbols[i]);
        }
      }
      next[std::move(merged)] += freq;
    }
    words = std::move(next);
  }

  base.mode = TokenizerConfig::Mode::subword;
  base.subword_vocab = std::make_shared<const MergeTable>(std::move(learned));
  return base;
}

}  // namespace clozefix
