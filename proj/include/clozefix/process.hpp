#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "clozefix/task.hpp"

namespace clozefix {

struct ProcessResult {
  // Exit status; 128 + signal for a signalled child, 127 when the program
  // could not be started.
  int exit_code = 0;
  bool timed_out = false;
  // stdout and stderr, interleaved as the child wrote them.
  std::string output;
  std::chrono::milliseconds elapsed{0};

  bool ok() const { return exit_code == 0 && !timed_out; }
};

// Runs `command` in `cwd` inside its own process group. On timeout the whole
// group is killed.
ProcessResult run_process(const CommandSpec& command, const std::filesystem::path& cwd,
                          std::chrono::milliseconds timeout);

}  // namespace clozefix
