#include "clozefix/task.hpp"

#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"

namespace clozefix {

void RepairTask::check() const {
  if (buggy_line_index >= source_lines.size()) {
    throw ConfigError("buggy line index " + std::to_string(buggy_line_index) +
                      " outside file of " + std::to_string(source_lines.size()) + " lines");
  }
  if (budgets.beam_width < 1) throw ConfigError("beam width must be at least 1");
  if (budgets.max_patches < 1) throw ConfigError("max_patches must be at least 1");
}

RepairTask RepairTask::from_source(std::string_view text, std::size_t buggy_line_index) {
  RepairTask task;
  task.trailing_newline = !text.empty() && text.back() == '\n';
  if (task.trailing_newline) text.remove_suffix(1);
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    task.source_lines.emplace_back(text.substr(start, nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  task.buggy_line_index = buggy_line_index;
  return task;
}

RepairTask RepairTask::load(const std::filesystem::path& project_dir,
                            const std::filesystem::path& source_file,
                            std::size_t buggy_line_index) {
  std::string text;
  try {
    text = read_file(project_dir / source_file);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  RepairTask task = from_source(text, buggy_line_index);
  task.project_dir = project_dir;
  task.source_file = source_file;
  task.check();
  return task;
}

std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  if (trailing_newline) out += '\n';
  return out;
}

}  // namespace clozefix
