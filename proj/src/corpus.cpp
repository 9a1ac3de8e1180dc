#include "clozefix/corpus.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "json.hpp"
#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"
#include "clozefix/mini.hpp"
#include "clozefix/task.hpp"
#include "clozefix/tokenizer.hpp"

namespace clozefix {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(BugClass c) {
  switch (c) {
    case BugClass::operator_flip: return "operator_flip";
    case BugClass::wrong_identifier: return "wrong_identifier";
    case BugClass::off_by_one: return "off_by_one";
    case BugClass::dropped_conjunct: return "dropped_conjunct";
    case BugClass::wrong_callee: return "wrong_callee";
  }
  return "?";
}

BugClass parse_bug_class(std::string_view text) {
  for (auto c : {BugClass::operator_flip, BugClass::wrong_identifier, BugClass::off_by_one,
                 BugClass::dropped_conjunct, BugClass::wrong_callee}) {
    if (to_string(c) == text) return c;
  }
  throw ConfigError("unknown bug class '" + std::string(text) + "'");
}

bool same_code_line(std::string_view a, std::string_view b) {
  const TokenizerConfig cfg;
  return detokenize(tokenize(a, cfg)) == detokenize(tokenize(b, cfg));
}

namespace {

struct Mutation {
  std::size_t line;
  std::size_t token;
  std::string text;  // mutated line without indentation

  auto key() const { return std::tie(line, token, text); }
};

std::string indentation(const std::string& line) {
  return line.substr(0, line.find_first_not_of(" \t"));
}

std::string render_with(std::vector<Token> tokens, std::size_t at, std::string replacement) {
  tokens[at] = make_token(std::move(replacement), {});
  return detokenize(tokens);
}

// Mutations of one class over every body line of the program's functions.
std::vector<Mutation> candidate_sites(const std::vector<std::string>& lines,
                                      const mini::Program& program, BugClass cls) {
  static const std::map<std::string, std::string> flips = {
      {"<", "<="}, {"<=", "<"}, {">", ">="}, {">=", ">"}, {"==", "!="}, {"!=", "=="},
      {"+", "-"},  {"-", "+"},  {"*", "/"},  {"/", "*"},  {"&&", "||"}, {"||", "&&"},
      {"+=", "-="}, {"-=", "+="}};
  std::map<std::string, std::size_t> callables = {{"min", 2}, {"max", 2}, {"abs", 1}, {"len", 1}};
  for (const auto& f : mini::functions(program)) callables[f.name] = f.arity;

  std::vector<Mutation> out;
  for (const auto& fn : mini::functions(program)) {
    // Variables of this function: parameters and let-bound names.
    std::set<std::string> vars;
    for (std::size_t l = fn.first_line; l <= fn.last_line; ++l) {
      const auto toks = tokenize(lines[l], {});
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const bool header_param = l == fn.first_line && i > 2 && toks[i].kind == TokenKind::word;
        const bool let_name = i > 0 && toks[i - 1].text == "let";
        if (header_param || let_name) vars.insert(toks[i].text);
      }
    }

    for (std::size_t l = fn.first_line + 1; l < fn.last_line; ++l) {
      const auto toks = tokenize(lines[l], {});
      auto add = [&](std::size_t token, std::string text) {
        out.push_back({l, token, std::move(text)});
      };
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        const bool is_call = i + 1 < toks.size() && toks[i + 1].text == "(";
        switch (cls) {
          case BugClass::operator_flip:
            if (t.kind == TokenKind::op) {
              if (auto it = flips.find(t.text); it != flips.end()) add(i, render_with(toks, i, it->second));
            }
            break;
          case BugClass::wrong_identifier:
            if (t.kind == TokenKind::word && !is_call && vars.count(t.text) &&
                !(i > 0 && toks[i - 1].text == "let")) {
              for (const auto& v : vars) {
                if (v != t.text) add(i, render_with(toks, i, v));
              }
            }
            break;
          case BugClass::off_by_one:
            if (t.kind == TokenKind::number) {
              const long long n = std::stoll(t.text);
              add(i, render_with(toks, i, std::to_string(n + 1)));
              if (n > 0) add(i, render_with(toks, i, std::to_string(n - 1)));
            }
            break;
          case BugClass::wrong_callee:
            if (t.kind == TokenKind::word && is_call) {
              auto self = callables.find(t.text);
              if (self == callables.end()) break;
              for (const auto& [name, arity] : callables) {
                if (name != t.text && arity == self->second) add(i, render_with(toks, i, name));
              }
            }
            break;
          case BugClass::dropped_conjunct:
            break;
        }
      }

      if (cls == BugClass::dropped_conjunct) {
        // Condition region: inside if(...)/while(...), or a return expression.
        std::size_t begin = 0, end = 0;
        std::size_t k = 0;
        while (k < toks.size() && (toks[k].text == "}" || toks[k].text == "else")) ++k;
        if (k + 1 < toks.size() && (toks[k].text == "if" || toks[k].text == "while") &&
            toks[k + 1].text == "(") {
          int depth = 0;
          for (std::size_t j = k + 1; j < toks.size(); ++j) {
            if (toks[j].text == "(") ++depth;
            if (toks[j].text == ")" && --depth == 0) {
              begin = k + 2;
              end = j;
              break;
            }
          }
        } else if (!toks.empty() && toks[0].text == "return" && toks.back().text == ";") {
          begin = 1;
          end = toks.size() - 1;
        }
        std::vector<std::size_t> ands;
        bool has_or = false;
        int depth = 0;
        for (std::size_t j = begin; j < end; ++j) {
          const auto& x = toks[j].text;
          if (x == "(" || x == "[") ++depth;
          if (x == ")" || x == "]") --depth;
          if (depth == 0 && x == "&&") ands.push_back(j);
          if (depth == 0 && x == "||") has_or = true;
        }
        if (has_or || ands.empty()) continue;
        // Drop conjunct c together with one adjacent "&&".
        std::vector<std::size_t> bounds = {begin};
        for (std::size_t a : ands) bounds.push_back(a);
        bounds.push_back(end);
        for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
          std::size_t from, to, and_tok;  // erase [from, to)
          if (c + 2 < bounds.size()) {
            from = bounds[c] + (c == 0 ? 0 : 1);
            to = bounds[c + 1] + 1;
            and_tok = bounds[c + 1];
          } else {
            from = bounds[c];
            to = bounds[c + 1];
            and_tok = bounds[c];
          }
          auto mutated = toks;
          mutated.erase(mutated.begin() + static_cast<long>(from),
                        mutated.begin() + static_cast<long>(to));
          add(and_tok, detokenize(mutated));
        }
      }
    }
  }
  return out;
}

bool is_valid_bug(const std::vector<std::string>& lines, const Mutation& m,
                  bool trailing_newline) {
  auto mutated = lines;
  mutated[m.line] = indentation(lines[m.line]) + m.text;
  try {
    const auto program = mini::compile(join_lines(mutated, trailing_newline));
    for (const auto& r : mini::run_tests(*program)) {
      if (!r.passed) return true;
    }
  } catch (const mini::CompileError&) {
  }
  return false;
}

std::string bug_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "bug_%03zu", i + 1);
  return buf;
}

}  // namespace

std::vector<InjectedBug> generate_bugs(std::uint64_t seed, std::size_t count) {
  const auto& programs = base_programs();
  std::mt19937_64 rng(seed);
  // Modulo keeps the sequence identical across standard libraries.
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  std::set<std::tuple<std::string, std::size_t, std::size_t, std::string>> used;
  std::vector<InjectedBug> bugs;
  const BugClass classes[] = {BugClass::operator_flip, BugClass::wrong_identifier,
                              BugClass::off_by_one, BugClass::dropped_conjunct,
                              BugClass::wrong_callee};
  for (std::size_t i = 0; i < count; ++i) {
    const BugClass cls = classes[i % 5];
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      const BaseProgram& base = programs[pick(programs.size())];
      const RepairTask parsed = RepairTask::from_source(base.source, 0);
      const auto program = mini::compile(base.source);
      auto sites = candidate_sites(parsed.source_lines, *program, cls);
      while (!sites.empty()) {
        const std::size_t s = pick(sites.size());
        const Mutation m = sites[s];
        sites.erase(sites.begin() + static_cast<long>(s));
        const auto key = std::make_tuple(base.name, m.line, m.token, m.text);
        if (used.count(key) || !is_valid_bug(parsed.source_lines, m, parsed.trailing_newline)) {
          continue;
        }
        used.insert(key);
        InjectedBug bug;
        bug.id = bug_id(i);
        bug.program = base.name;
        bug.bug_class = cls;
        bug.line_index = m.line;
        bug.token_index = m.token;
        const std::string& original = parsed.source_lines[m.line];
        bug.fixed_line = original;
        bug.buggy_line = indentation(original) + m.text;
        auto lines = parsed.source_lines;
        lines[m.line] = bug.buggy_line;
        bug.buggy_source = join_lines(lines, parsed.trailing_newline);
        bugs.push_back(std::move(bug));
        placed = true;
        break;
      }
    }
    if (!placed) throw Error("could not place a " + std::string(to_string(cls)) + " bug");
  }
  return bugs;
}

namespace {

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json bug_to_json(const InjectedBug& b) {
  return {{"id", b.id},
          {"program", b.program},
          {"class", std::string(to_string(b.bug_class))},
          {"line_index", b.line_index},
          {"token_index", b.token_index},
          {"buggy_line", b.buggy_line},
          {"fixed_line", b.fixed_line}};
}

}  // namespace

void write_corpus(const fs::path& dir, std::uint64_t seed, std::size_t count) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    throw ConfigError("corpus directory " + dir.string() + " is not empty");
  }
  const auto bugs = generate_bugs(seed, count);
  fs::create_directories(dir / "training");
  for (const auto& p : base_programs()) write_file_atomic(dir / "training" / (p.name + ".mini"), p.source);

  json ids = json::array();
  for (const auto& b : bugs) {
    const fs::path bug_dir = dir / b.id;
    fs::create_directories(bug_dir / "project");
    write_file_atomic(bug_dir / "project" / "main.mini", b.buggy_source);
    write_json(bug_dir / "bug.json", bug_to_json(b));
    write_json(bug_dir / "task.json",
               {{"project_dir", "project"},
                {"source_file", "main.mini"},
                {"buggy_line", b.line_index},
                {"build_command", {"minirun", "check", "main.mini"}},
                {"test_command", {"minirun", "test", "main.mini"}}});
    ids.push_back(b.id);
  }
  write_json(dir / "corpus.json",
             {{"format", "clozefix-corpus/1"}, {"seed", seed}, {"count", count}, {"bugs", ids}});
}

std::vector<CorpusEntry> load_corpus(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "corpus.json"));
  } catch (const std::exception& e) {
    throw ConfigError("cannot read corpus manifest in " + dir.string() + ": " + e.what());
  }
  std::vector<CorpusEntry> out;
  for (const auto& id : manifest.at("bugs")) {
    CorpusEntry e;
    e.dir = dir / id.get<std::string>();
    const json j = json::parse(read_file(e.dir / "bug.json"));
    e.bug.id = j.at("id");
    e.bug.program = j.at("program");
    e.bug.bug_class = parse_bug_class(j.at("class").get<std::string>());
    e.bug.line_index = j.at("line_index");
    e.bug.token_index = j.at("token_index");
    e.bug.buggy_line = j.at("buggy_line");
    e.bug.fixed_line = j.at("fixed_line");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<fs::path> training_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir / "training")) return out;
  for (const auto& entry : fs::directory_iterator(dir / "training")) {
    if (entry.is_regular_file()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace clozefix
