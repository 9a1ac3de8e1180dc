#pragma once

// A miniature imperative language for self-testing programs.
//
//   fn name(a, b) { ... }       functions over ints, bools and arrays
//   test name { ... }           a test; it fails on check(false) or a runtime error
//
// Statements: let, assignment (=, +=, -=, *=) to variables or array elements,
// if / else if / else, while, for (init; cond; step), return, break, continue
// and call statements. Builtins: len, push, check, array, min, max, abs.
// Names are resolved statically: every variable must be declared before use
// and every call must match the arity of its callee.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "clozefix/errors.hpp"

namespace clozefix::mini {

class CompileError : public Error {
 public:
  CompileError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line(line) {}

  std::size_t line;  // 1-based
};

struct FunctionInfo {
  std::string name;
  std::size_t arity = 0;
  std::size_t first_line = 0;  // 0-based line of the header
  std::size_t last_line = 0;   // 0-based line of the closing brace
};

class Program;

struct TestResult {
  std::string name;
  bool passed = false;
  std::string reason;  // why it failed
};

// Parses and checks `source`. Throws CompileError.
std::shared_ptr<const Program> compile(std::string_view source);

std::vector<FunctionInfo> functions(const Program& program);
std::vector<FunctionInfo> tests(const Program& program);

// Runs every test in declaration order. Each test may execute at most
// `step_limit` statements and loop iterations.
std::vector<TestResult> run_tests(const Program& program, std::size_t step_limit = 200000);

// "PASS name" / "FAIL name: reason" lines.
std::string format_results(const std::vector<TestResult>& results);

}  // namespace clozefix::mini
