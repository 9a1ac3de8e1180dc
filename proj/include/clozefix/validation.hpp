#pragma once

// Patch validation in throwaway copies of the project.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "clozefix/patch_engine.hpp"
#include "clozefix/task.hpp"

namespace clozefix {

enum class ValidationStatus { compile_error, test_failure, plausible, timeout };

std::string_view to_string(ValidationStatus status);
ValidationStatus parse_validation_status(std::string_view text);

struct ValidationOutcome {
  ValidationStatus status = ValidationStatus::compile_error;
  CandidatePatch patch;
  // Non-empty iff status is test_failure.
  std::vector<std::string> failing_tests;
  // sha256 of the build output followed by the test output.
  std::string tool_output_digest;
  // sha256 of the patched file as read back from the sandbox.
  std::string patched_file_digest;
  bool build_succeeded = false;
  bool memoized = false;
  std::chrono::milliseconds elapsed{0};
};

enum class ValidationMode { all, first_plausible };

std::string_view to_string(ValidationMode mode);
ValidationMode parse_validation_mode(std::string_view text);

struct ValidationConfig {
  ValidationMode mode = ValidationMode::all;
  std::size_t workers = 1;
  std::chrono::milliseconds per_patch_timeout = std::chrono::minutes(5);
  // Applied to every line of the test output; group 1 is the test name.
  std::string failing_test_pattern = R"(^FAIL:?\s+([^\s:]+))";

  void check() const;
};

// Name recorded when the test command fails without a parsable test name.
inline constexpr std::string_view kUnnamedFailure = "<unnamed>";

// Source text of the task's file with `patch` applied. Replacements keep the
// buggy line's indentation; insertions copy it.
std::string apply_patch(const RepairTask& task, const CandidatePatch& patch);

// Private copy of a project tree, deleted on destruction.
class Sandbox {
 public:
  // Throws SandboxSetupFailed.
  explicit Sandbox(std::filesystem::path project_dir);
  ~Sandbox();
  Sandbox(const Sandbox&) = delete;
  Sandbox& operator=(const Sandbox&) = delete;

  const std::filesystem::path& root() const { return root_; }
  // Discards every change and recopies the original tree.
  void reset();

 private:
  std::filesystem::path origin_;
  std::filesystem::path base_;
  std::filesystem::path root_;
};

// Outcomes keyed by the patched file and the commands; lets repeated runs on
// the same task skip identical validations.
class ValidationMemo {
 public:
  struct Entry {
    ValidationStatus status;
    std::vector<std::string> failing_tests;
    std::string tool_output_digest;
    bool build_succeeded;
  };

  std::optional<Entry> find(const std::string& key) const;
  void store(const std::string& key, Entry entry);
  std::size_t size() const;

  static std::string key_for(const RepairTask& task, std::string_view patched_digest);

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Entry> entries_;
};

using Deadline = std::chrono::steady_clock::time_point;

// Writes the patched file into `sandbox`, runs build then tests and resets
// the sandbox. The time slice is the smaller of the per-patch timeout and
// what is left before `deadline`.
ValidationOutcome validate(const RepairTask& task, const CandidatePatch& patch, Sandbox& sandbox,
                           const ValidationConfig& config, Deadline deadline,
                           ValidationMemo* memo = nullptr);

struct RankedValidation {
  // Outcomes for a prefix of the ranked list, in rank order.
  std::vector<ValidationOutcome> outcomes;
  std::size_t unattempted = 0;
};

// Validates `patches` in rank order with up to config.workers sandboxes.
// Stops at the deadline, or after the first plausible patch in
// first_plausible mode. `on_outcome` sees outcomes in rank order.
RankedValidation validate_ranked(const RepairTask& task, const std::vector<CandidatePatch>& patches,
                                 const ValidationConfig& config, Deadline deadline,
                                 ValidationMemo* memo = nullptr,
                                 const std::function<void(const ValidationOutcome&)>& on_outcome = {});

}  // namespace clozefix
