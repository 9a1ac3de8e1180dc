#pragma once

// Deterministic source tokenization shared by every stage of the engine.
//
// Reference mode is a rule-based lexer for C-family code: it splits on
// whitespace and on boundaries between identifier, number, operator and
// punctuation classes, keeps string/char literals intact and always emits the
// mask sentinel as a single token.
//
// Subword mode runs the reference lexer first and then splits every
// non-literal pre-token into characters that are re-joined with a learned
// byte-pair merge table. Pieces after the first one inside a pre-token carry
// the continuation prefix "##" so detokenization can glue them back.
//
// detokenize() renders tokens with a fixed spacing table (see
// detokenize()). The rendering is the canonical whitespace form: for any
// text s, detokenize(tokenize(s)) is a fixed point of detokenize∘tokenize.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clozefix {

enum class TokenKind {
  word,
  number,
  op,
  punctuation,
  mask_sentinel,
  comment_delim,
  string_literal,
};

std::string_view to_string(TokenKind kind);

struct Token {
  std::string text;
  TokenKind kind = TokenKind::word;

  friend bool operator==(const Token&, const Token&) = default;
};

// Ordered merge table; index in `merges` is the merge priority.
class MergeTable {
 public:
  MergeTable() = default;
  explicit MergeTable(std::vector<std::pair<std::string, std::string>> merges);

  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  std::size_t size() const { return merges_.size(); }

  // Priority of merging (left, right), or npos when the pair is unknown.
  std::size_t rank(std::string_view left, std::string_view right) const;

  // One "left right" pair per line, in priority order.
  std::string serialize() const;
  static MergeTable parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static MergeTable load(const std::filesystem::path& path);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::string, std::size_t, std::less<>> ranks_;
};

struct TokenizerConfig {
  enum class Mode { reference, subword };

  Mode mode = Mode::reference;
  std::string mask_sentinel = "<mask>";
  std::shared_ptr<const MergeTable> subword_vocab;
  std::size_t max_sequence_tokens = 512;

  // Throws ConfigError when an invariant is violated.
  void check() const;
};

inline constexpr std::string_view kContinuationPrefix = "##";

std::vector<Token> tokenize(std::string_view text, const TokenizerConfig& config);

// Throws MaskStillPresent if any token is a mask sentinel.
std::string detokenize(std::span<const Token> tokens);

// Classifies a single token text the way tokenize() would have labelled it.
Token make_token(std::string text, const TokenizerConfig& config);

std::vector<std::string> token_texts(std::span<const Token> tokens);

// Zero-width space, used to defuse delimiters that must not act as such.
inline constexpr std::string_view kZeroWidthSpace = "\u200B";

// Rewrites mask-sentinel tokens found in source text into inert words so that
// only engine-placed masks reach the predictor.
std::vector<Token> escape_sentinels(std::vector<Token> tokens);

// Byte-pair merge learning over the reference pre-tokens of `corpus`.
// Throws EmptyCorpus when `corpus` is empty.
TokenizerConfig train_subword(std::span<const std::string> corpus, std::size_t merges,
                              TokenizerConfig base = {});

}  // namespace clozefix
