#include "clozefix/validation.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <regex>
#include <thread>

#include <spdlog/spdlog.h>

#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"
#include "clozefix/process.hpp"

namespace clozefix {

namespace fs = std::filesystem;

std::string_view to_string(ValidationStatus status) {
  switch (status) {
    case ValidationStatus::compile_error: return "compile_error";
    case ValidationStatus::test_failure: return "test_failure";
    case ValidationStatus::plausible: return "plausible";
    case ValidationStatus::timeout: return "timeout";
  }
  return "?";
}

ValidationStatus parse_validation_status(std::string_view text) {
  for (auto s : {ValidationStatus::compile_error, ValidationStatus::test_failure,
                 ValidationStatus::plausible, ValidationStatus::timeout}) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("unknown validation status '" + std::string(text) + "'");
}

std::string_view to_string(ValidationMode mode) {
  return mode == ValidationMode::all ? "all" : "first-plausible";
}

ValidationMode parse_validation_mode(std::string_view text) {
  if (text == "all") return ValidationMode::all;
  if (text == "first-plausible" || text == "first_plausible") return ValidationMode::first_plausible;
  throw ConfigError("validation mode must be 'all' or 'first-plausible', got '" +
                    std::string(text) + "'");
}

void ValidationConfig::check() const {
  if (workers == 0) throw ConfigError("validation workers must be at least 1");
  if (per_patch_timeout.count() <= 0) throw ConfigError("per-patch timeout must be positive");
  try {
    std::regex re(failing_test_pattern);
    if (re.mark_count() < 1) throw ConfigError("failing-test pattern needs a capture group");
  } catch (const std::regex_error& e) {
    throw ConfigError("bad failing-test pattern: " + std::string(e.what()));
  }
}

namespace {

std::string leading_whitespace(const std::string& line) {
  return line.substr(0, line.find_first_not_of(" \t"));
}

std::vector<std::string> failing_tests_in(const std::string& output, const std::string& pattern) {
  const std::regex re(pattern);
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (pos < output.size()) {
    auto nl = output.find('\n', pos);
    if (nl == std::string::npos) nl = output.size();
    std::smatch m;
    const std::string line = output.substr(pos, nl - pos);
    if (std::regex_search(line, m, re) && m.size() > 1 && m[1].length() > 0) {
      names.push_back(m[1].str());
    }
    pos = nl + 1;
  }
  return names;
}

}  // namespace

std::string apply_patch(const RepairTask& task, const CandidatePatch& patch) {
  std::vector<std::string> lines = task.source_lines;
  const std::size_t at = task.buggy_line_index;
  const std::string indented = leading_whitespace(lines.at(at)) + patch.rendered_line;
  switch (patch.inserted) {
    case Insertion::replace: lines[at] = indented; break;
    case Insertion::before: lines.insert(lines.begin() + static_cast<long>(at), indented); break;
    case Insertion::after: lines.insert(lines.begin() + static_cast<long>(at) + 1, indented); break;
  }
  return join_lines(lines, task.trailing_newline);
}

Sandbox::Sandbox(fs::path project_dir) : origin_(std::move(project_dir)) {
  std::error_code ec;
  if (!fs::is_directory(origin_, ec)) {
    throw SandboxSetupFailed("project directory " + origin_.string() + " does not exist");
  }
  std::random_device rd;
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto candidate = fs::temp_directory_path(ec) /
                     ("clozefix-sandbox-" + std::to_string(rd()) + std::to_string(rd()));
    if (fs::create_directory(candidate, ec)) {
      base_ = candidate;
      break;
    }
  }
  if (base_.empty()) throw SandboxSetupFailed("cannot create a sandbox directory");
  root_ = base_ / "project";
  reset();
}

Sandbox::~Sandbox() {
  std::error_code ec;
  fs::remove_all(base_, ec);
}

void Sandbox::reset() {
  std::error_code ec;
  fs::remove_all(root_, ec);
  fs::copy(origin_, root_, fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
  if (ec) {
    throw SandboxSetupFailed("cannot copy " + origin_.string() + " into sandbox: " + ec.message());
  }
}

std::optional<ValidationMemo::Entry> ValidationMemo::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ValidationMemo::store(const std::string& key, Entry entry) {
  std::lock_guard lock(mutex_);
  entries_.emplace(key, std::move(entry));
}

std::size_t ValidationMemo::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string ValidationMemo::key_for(const RepairTask& task, std::string_view patched_digest) {
  std::string material = fs::absolute(task.project_dir).lexically_normal().string();
  material.push_back('\x1e');
  material.append(task.source_file.string()).push_back('\x1e');
  for (const auto* cmd : {&task.build_command, &task.test_command}) {
    for (const auto& a : cmd->argv) material.append(a).push_back('\x1f');
    material.push_back('\x1e');
  }
  material.append(patched_digest);
  return sha256_hex(material);
}

ValidationOutcome validate(const RepairTask& task, const CandidatePatch& patch, Sandbox& sandbox,
                           const ValidationConfig& config, Deadline deadline,
                           ValidationMemo* memo) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  ValidationOutcome out;
  out.patch = patch;

  const std::string patched = apply_patch(task, patch);
  const std::string expected_digest = sha256_hex(patched);
  const std::string memo_key = memo ? ValidationMemo::key_for(task, expected_digest) : "";
  if (memo) {
    if (auto hit = memo->find(memo_key)) {
      out.status = hit->status;
      out.failing_tests = hit->failing_tests;
      out.tool_output_digest = hit->tool_output_digest;
      out.build_succeeded = hit->build_succeeded;
      out.patched_file_digest = expected_digest;
      out.memoized = true;
      return out;
    }
  }

  struct ResetOnExit {
    Sandbox& sandbox;
    ~ResetOnExit() {
      try {
        sandbox.reset();
      } catch (const std::exception& e) {
        spdlog::error("sandbox reset failed: {}", e.what());
      }
    }
  } reset_on_exit{sandbox};

  const fs::path target = sandbox.root() / task.source_file;
  write_file_atomic(target, patched);
  out.patched_file_digest = sha256_hex(read_file(target));
  if (out.patched_file_digest != expected_digest) {
    throw SandboxSetupFailed("patched file in sandbox does not match the patch");
  }

  auto slice = [&] {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    const auto used = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start);
    return std::min(left, config.per_patch_timeout - used);
  };

  std::string outputs;
  bool timed_out = false;
  const ProcessResult build = run_process(task.build_command, sandbox.root(), slice());
  outputs += build.output;
  if (build.timed_out) {
    timed_out = true;
  } else if (build.exit_code != 0) {
    out.status = ValidationStatus::compile_error;
  } else {
    out.build_succeeded = true;
    const ProcessResult test = run_process(task.test_command, sandbox.root(), slice());
    outputs += test.output;
    if (test.timed_out) {
      timed_out = true;
    } else if (test.exit_code != 0) {
      out.status = ValidationStatus::test_failure;
      out.failing_tests = failing_tests_in(test.output, config.failing_test_pattern);
      if (out.failing_tests.empty()) out.failing_tests.emplace_back(kUnnamedFailure);
    } else {
      out.status = ValidationStatus::plausible;
    }
  }
  if (timed_out) out.status = ValidationStatus::timeout;
  out.tool_output_digest = sha256_hex(outputs);
  out.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start);
  // A timeout depends on the remaining budget, so it is not memoized.
  if (memo && !timed_out) {
    memo->store(memo_key, {out.status, out.failing_tests, out.tool_output_digest,
                           out.build_succeeded});
  }
  return out;
}

RankedValidation validate_ranked(const RepairTask& task, const std::vector<CandidatePatch>& patches,
                                 const ValidationConfig& config, Deadline deadline,
                                 ValidationMemo* memo,
                                 const std::function<void(const ValidationOutcome&)>& on_outcome) {
  RankedValidation result;
  if (patches.empty()) return result;

  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, patches.size());
  std::vector<std::optional<ValidationOutcome>> slots(patches.size());
  std::mutex mutex;
  std::size_t next = 0;
  std::size_t emitted = 0;
  std::size_t stop_at = patches.size();  // index after the first plausible in rank order
  std::exception_ptr failure;

  auto emit_prefix = [&] {
    // Caller holds `mutex`.
    while (emitted < stop_at && slots[emitted]) {
      if (on_outcome) on_outcome(*slots[emitted]);
      ++emitted;
    }
  };

  auto work = [&] {
    try {
      Sandbox sandbox(task.project_dir);
      while (true) {
        std::size_t index;
        {
          std::lock_guard lock(mutex);
          if (failure || next >= stop_at || std::chrono::steady_clock::now() >= deadline) return;
          index = next++;
        }
        ValidationOutcome outcome = validate(task, patches[index], sandbox, config, deadline, memo);
        std::lock_guard lock(mutex);
        if (config.mode == ValidationMode::first_plausible &&
            outcome.status == ValidationStatus::plausible) {
          stop_at = std::min(stop_at, index + 1);
        }
        slots[index] = std::move(outcome);
        emit_prefix();
      }
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < stop_at && slots[i]; ++i) result.outcomes.push_back(std::move(*slots[i]));
  result.unattempted = patches.size() - result.outcomes.size();
  return result;
}

}  // namespace clozefix
