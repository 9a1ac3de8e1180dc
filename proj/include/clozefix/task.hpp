#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace clozefix {

// argv of an external command; argv[0] is resolved through PATH.
struct CommandSpec {
  std::vector<std::string> argv;

  bool empty() const { return argv.empty(); }
  friend bool operator==(const CommandSpec&, const CommandSpec&) = default;
};

struct Budgets {
  std::size_t beam_width = 25;
  std::size_t max_patches = 5000;
  std::chrono::milliseconds wall_clock_limit = std::chrono::hours(5);
};

// One bug-fixing job: a single buggy line inside one file of a project.
struct RepairTask {
  std::filesystem::path project_dir;
  std::filesystem::path source_file;  // relative to project_dir
  std::vector<std::string> source_lines;
  bool trailing_newline = true;
  std::size_t buggy_line_index = 0;
  CommandSpec build_command;
  CommandSpec test_command;
  Budgets budgets;

  const std::string& buggy_line() const { return source_lines.at(buggy_line_index); }

  // Throws ConfigError when an invariant does not hold.
  void check() const;

  // Splits `text` on '\n'; a final newline is remembered, not kept as a line.
  static RepairTask from_source(std::string_view text, std::size_t buggy_line_index);
  // Reads project_dir / source_file.
  static RepairTask load(const std::filesystem::path& project_dir,
                         const std::filesystem::path& source_file, std::size_t buggy_line_index);
};

std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline);

}  // namespace clozefix
