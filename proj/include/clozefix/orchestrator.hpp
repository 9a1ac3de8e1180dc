#pragma once

// End-to-end repair: suspicious locations in, ranked and validated patches out.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "clozefix/corpus.hpp"
#include "clozefix/mask.hpp"
#include "clozefix/predictor.hpp"
#include "clozefix/task.hpp"
#include "clozefix/tokenizer.hpp"
#include "clozefix/validation.hpp"

namespace clozefix {

// Exit codes of the repair command.
inline constexpr int kExitPlausible = 0;
inline constexpr int kExitNoPlausible = 10;
inline constexpr int kExitNoLocations = 11;
inline constexpr int kExitConfigError = 20;
inline constexpr int kExitBackendUnavailable = 30;

// Beam widths used when the config does not set one.
inline constexpr std::size_t kPerfectLocalizationBeam = 25;
inline constexpr std::size_t kRankedLocalizationBeam = 5;

// "250ms", "90s", "5m", "5h" or a bare number of seconds.
std::chrono::milliseconds parse_duration(std::string_view text);
std::string format_duration(std::chrono::milliseconds d);

struct PredictorConfig {
  std::string backend = "reference";  // reference | remote
  // Training text for the reference model: files, or directories whose
  // regular files are used in name order. One file is one sequence.
  std::vector<std::filesystem::path> training;
  std::optional<std::filesystem::path> model_file;
  std::string endpoint;
  std::size_t max_in_flight = 4;
  // Query cache directory; falls back to the environment variable.
  std::optional<std::filesystem::path> cache_dir;
};

struct RepairConfig {
  std::filesystem::path project_dir;
  std::filesystem::path source_file;  // relative to project_dir
  std::optional<std::size_t> buggy_line;  // 0-based; perfect localization
  std::optional<std::filesystem::path> suspicious_file;
  std::size_t top_suspicious = 40;
  CommandSpec build_command;
  CommandSpec test_command;
  std::optional<std::size_t> beam_width;
  std::size_t max_patches = 5000;
  std::chrono::milliseconds timeout = std::chrono::hours(5);
  StrategySet strategies;
  bool well_formed_filter = true;
  std::size_t workers = 1;  // concurrent mask-line beams
  std::optional<std::filesystem::path> report_dir;
  TokenizerConfig tokenizer;
  std::optional<std::filesystem::path> merges_file;
  PredictorConfig predictor;
  ValidationConfig validation;

  // Reads a JSON config; relative paths resolve against the file's directory.
  static RepairConfig load(const std::filesystem::path& file);
  // Overrides the fields present in `j`. Throws ConfigError on unknown keys.
  void apply(const nlohmann::json& j, const std::filesystem::path& base_dir);
  nlohmann::json to_json() const;

  std::size_t effective_beam_width() const;
  // Throws ConfigError.
  void check() const;
};

struct SuspiciousLocation {
  std::filesystem::path file;
  std::size_t line_index = 0;
  double suspiciousness = 1.0;
};

// One `path<TAB>line<TAB>score` per line, line numbers 1-based. Returns the
// `top_n` most suspicious, highest first (file order breaks ties).
std::vector<SuspiciousLocation> load_suspicious(const std::filesystem::path& file,
                                                std::size_t top_n);

// Locations named by the config: its suspicious file or its single line.
std::vector<SuspiciousLocation> locations_of(const RepairConfig& config);

// Builds the configured predictor (training the reference model if needed)
// and wraps it in the query cache when a cache directory is known.
std::shared_ptr<const Predictor> make_predictor(const RepairConfig& config);

inline constexpr std::string_view kUnattempted = "unattempted";

struct PatchRecord {
  std::size_t location = 0;  // index into RepairReport::locations
  std::string rendered_line;
  std::string inserted;
  std::string strategy;
  double temp_joint_score = 0.0;
  double joint_score = 0.0;
  std::size_t rank = 0;  // within its location
  std::string status = std::string(kUnattempted);
  std::vector<std::string> failing_tests;
  std::string tool_output_digest;
  std::string patched_file_digest;

  friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

struct LocationSummary {
  std::string file;
  std::size_t line_index = 0;
  double suspiciousness = 0.0;
  std::string buggy_line;
  std::size_t mask_lines = 0;
  std::size_t skipped_mask_lines = 0;  // core too large for the budget
  std::size_t patch_budget = 0;
  std::size_t generated = 0;

  friend bool operator==(const LocationSummary&, const LocationSummary&) = default;
};

struct RepairReport {
  std::string task_digest;
  nlohmann::json config;
  std::vector<LocationSummary> locations;
  std::vector<PatchRecord> patches;
  // Indices into `patches`, best joint score first.
  std::vector<std::size_t> plausible;
  bool timed_out = false;
  // Wall-clock measurements; stored apart from the deterministic files.
  nlohmann::json timing = nlohmann::json::object();

  int exit_code() const;

  // report.jsonl, summary.json and timing.json, each written atomically.
  void write(const std::filesystem::path& dir) const;
  static RepairReport read(const std::filesystem::path& dir);

  friend bool operator==(const RepairReport&, const RepairReport&) = default;
};

// Runs the whole pipeline for every location of `config`. Writes the report
// when config.report_dir is set (also when an error interrupts the run).
RepairReport run_repair(const RepairConfig& config, const Predictor& predictor,
                        ValidationMemo* memo = nullptr);

struct EvalOptions {
  std::vector<StrategySet> strategy_sets = {StrategySet{true, false, false},
                                            StrategySet{true, true, false},
                                            StrategySet{true, true, true}};
  // Per-bug reports go to <out_dir>/<bug>/<set>/ when set.
  std::optional<std::filesystem::path> out_dir;
};

struct BugResult {
  std::string id;
  BugClass bug_class = BugClass::operator_flip;
  std::vector<bool> plausible;  // per strategy set
  std::vector<bool> exact;
  std::vector<std::optional<std::size_t>> exact_rank;
  std::string error;
};

struct EvalResult {
  std::vector<std::string> set_names;
  std::vector<BugResult> bugs;

  std::vector<std::size_t> plausible_counts() const;
  std::vector<std::size_t> exact_counts() const;
  nlohmann::json to_json() const;
  std::string table() const;
};

// Repairs every bug of a corpus once per strategy set. A bug counts as an
// exact fix when a replacement equal to its fixed line validates as
// plausible. Bug errors are recorded and the run continues.
EvalResult evaluate_corpus(const std::filesystem::path& corpus_dir, const RepairConfig& base,
                           const Predictor& predictor, const EvalOptions& options = {});

}  // namespace clozefix
