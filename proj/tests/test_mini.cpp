#include "doctest.h"
#include "clozefix/corpus.hpp"
#include "clozefix/mini.hpp"
#include "clozefix/task.hpp"
#include "clozefix/tokenizer.hpp"

using namespace clozefix;

namespace {

std::vector<mini::TestResult> run(std::string_view src) {
  return mini::run_tests(*mini::compile(src), 10000);
}

}  // namespace

TEST_CASE("mini: evaluation basics") {
  const auto results = run(R"(fn f(xs, k) {
  let total = 0;
  for (let i = 0; i < len(xs); i += 1) {
    if (i == k) {
      continue;
    }
    total += xs[i] * 2;
  }
  return total;
}

test ok {
  check(f([1, 2, 3], 1) == 8);
  let a = [1];
  push(a, 5);
  a[0] -= 3;
  check(a == [0 - 2, 5]);
  check(min(3, 4) == 3 && max(3, 4) == 4 && abs(0 - 7) == 7);
  check(len(array(3, true)) == 3);
  check(7 / 2 == 3 && 7 % 2 == 1);
}

test fails {
  check(1 > 2);
}

test out_of_range {
  let a = [1];
  check(a[1] == 1);
}

test divides_by_zero {
  check(1 / 0 == 0);
}
)");
  REQUIRE(results.size() == 4);
  CHECK(results[0].passed);
  CHECK(!results[1].passed);
  CHECK(results[1].reason == "check failed at line 24");
  CHECK(!results[2].passed);
  CHECK(results[2].reason.find("out of range") != std::string::npos);
  CHECK(results[3].reason.find("division by zero") != std::string::npos);
}

TEST_CASE("mini: static errors") {
  CHECK_THROWS_AS(mini::compile("fn f(a) {\n  return b;\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f(a) {\n  return g(a);\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f(a) {\n  return min(a);\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f(a) {\n  return a\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f(a) {\n  break;\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f(a) {\n  let x = 1;\n  let x = 2;\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f(a) {\n  a + 1;\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f() {\n}\nfn f() {\n}\n"), mini::CompileError);
  CHECK_THROWS_AS(mini::compile("fn f() {\n  return \"s\";\n}\n"), mini::CompileError);
  try {
    mini::compile("fn f() {\n  let x = 1;\n  return y;\n}\n");
  } catch (const mini::CompileError& e) {
    CHECK(e.line == 3);
  }
  // Scopes end with their block.
  CHECK_THROWS_AS(mini::compile("fn f() {\n  if (true) {\n    let x = 1;\n  }\n  return x;\n}\n"),
                  mini::CompileError);
}

TEST_CASE("mini: step limit stops runaway loops and recursion") {
  const auto results = run("fn r(n) {\n  return r(n + 1);\n}\n\ntest spin {\n  while (true) {\n  }\n}\n\ntest deep {\n  r(0);\n}\n");
  REQUIRE(results.size() == 2);
  CHECK(results[0].reason.find("step limit") != std::string::npos);
  CHECK(results[1].reason.find("recursion") != std::string::npos);
}

TEST_CASE("mini: base programs pass and are written canonically") {
  for (const auto& p : base_programs()) {
    CAPTURE(p.name);
    const auto program = mini::compile(p.source);
    const auto results = mini::run_tests(*program);
    CHECK(results.size() >= 2);
    for (const auto& r : results) {
      CAPTURE(r.name);
      CHECK(r.passed);
    }
    for (const auto& line : RepairTask::from_source(p.source, 0).source_lines) {
      const auto body = line.substr(std::min(line.size(), line.find_first_not_of(' ')));
      CHECK(detokenize(tokenize(body, {})) == body);
    }
  }
}
