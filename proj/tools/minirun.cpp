// minirun check FILE   parse and name-check a mini program
// minirun test FILE    run its tests
//
// Exit status: 0 all good, 1 a test failed, 2 the program does not compile
// or the command line is wrong.

#include <cstdio>
#include <iostream>
#include <string_view>

#include "clozefix/digest.hpp"
#include "clozefix/mini.hpp"

int main(int argc, char** argv) {
  if (argc != 3 || (std::string_view(argv[1]) != "check" && std::string_view(argv[1]) != "test")) {
    std::cerr << "usage: minirun check|test FILE\n";
    return 2;
  }
  std::shared_ptr<const clozefix::mini::Program> program;
  try {
    program = clozefix::mini::compile(clozefix::read_file(argv[2]));
  } catch (const std::exception& e) {
    std::cerr << argv[2] << ": " << e.what() << "\n";
    return 2;
  }
  if (std::string_view(argv[1]) == "check") return 0;

  const auto results = clozefix::mini::run_tests(*program);
  std::cout << clozefix::mini::format_results(results);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - failed << " passed, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}
