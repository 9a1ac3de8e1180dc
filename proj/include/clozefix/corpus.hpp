#pragma once

// Seeded synthetic bug corpus over the mini language.
//
// Layout of a corpus directory:
//   corpus.json                  seed, count and bug ids
//   training/<program>.mini      the bug-free programs
//   bug_NNN/project/main.mini    the buggy program
//   bug_NNN/bug.json             bug class, location, buggy and fixed line
//   bug_NNN/task.json            repair config (paths relative to bug_NNN)

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace clozefix {

struct BaseProgram {
  std::string name;
  std::string source;
};

const std::vector<BaseProgram>& base_programs();

enum class BugClass { operator_flip, wrong_identifier, off_by_one, dropped_conjunct, wrong_callee };

std::string_view to_string(BugClass c);
BugClass parse_bug_class(std::string_view text);

struct InjectedBug {
  std::string id;       // bug_NNN
  std::string program;  // base program name
  BugClass bug_class = BugClass::operator_flip;
  std::size_t line_index = 0;   // 0-based
  std::size_t token_index = 0;  // token of the fixed line that was changed
  std::string buggy_line;
  std::string fixed_line;
  std::string buggy_source;
};

// Deterministic for a given seed. Every bug compiles and fails at least one
// test; the fixed program passes all of them. Classes rotate in declaration
// order.
std::vector<InjectedBug> generate_bugs(std::uint64_t seed, std::size_t count);

// Writes a full corpus into `dir`, which must be missing or empty.
void write_corpus(const std::filesystem::path& dir, std::uint64_t seed, std::size_t count);

struct CorpusEntry {
  std::filesystem::path dir;  // bug_NNN
  InjectedBug bug;            // buggy_source left empty
};

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);
std::vector<std::filesystem::path> training_files(const std::filesystem::path& dir);

// True when both lines render to the same canonical token text, ignoring
// indentation.
bool same_code_line(std::string_view a, std::string_view b);

}  // namespace clozefix
