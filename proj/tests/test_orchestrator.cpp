#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "test_support.hpp"
#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"
#include "clozefix/ngram_predictor.hpp"
#include "clozefix/orchestrator.hpp"
#include "clozefix/process.hpp"

using namespace clozefix;
using namespace clozefix::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFixed = R"(fn max_of(xs) {
  let best = xs[0];
  for (let i = 1; i < len(xs); i += 1) {
    if (xs[i] > best) {
      best = xs[i];
    }
  }
  return best;
}

fn min_of(xs) {
  let best = xs[0];
  for (let i = 1; i < len(xs); i += 1) {
    if (xs[i] < best) {
      best = xs[i];
    }
  }
  return best;
}

test picks_largest {
  check(max_of([3, 9, 2]) == 9);
}

test picks_smallest {
  check(min_of([3, 1, 2]) == 1);
}
)";

std::string buggy_source() {
  std::string s = kFixed;
  const auto at = s.find("xs[i] > best");
  s.replace(at, 12, "xs[i] < best");
  return s;
}

// Project with the flipped comparison on 0-based line 3, a reference model
// trained on the fixed program, and a config file pointing at both.
struct Fixture {
  TempDir dir;
  fs::path config_file;

  explicit Fixture(const json& extra = json::object()) {
    REQUIRE(put_tools_on_path());
    fs::create_directories(dir / "project");
    fs::create_directories(dir / "training");
    write_file_atomic(dir / "project" / "main.mini", buggy_source());
    write_file_atomic(dir / "training" / "fixed.mini", kFixed);
    json cfg = {{"project_dir", "project"},
                {"source_file", "main.mini"},
                {"buggy_line", 3},
                {"build_command", {"minirun", "check", "main.mini"}},
                {"test_command", {"minirun", "test", "main.mini"}},
                {"predictor", {{"training", {"training"}}}}};
    cfg.update(extra);
    config_file = dir / "task.json";
    write_file_atomic(config_file, cfg.dump(2));
  }

  RepairConfig config() const { return RepairConfig::load(config_file); }
};

}  // namespace

TEST_CASE("durations") {
  CHECK(parse_duration("250ms") == std::chrono::milliseconds(250));
  CHECK(parse_duration("90s") == std::chrono::seconds(90));
  CHECK(parse_duration("90") == std::chrono::seconds(90));
  CHECK(parse_duration("5m") == std::chrono::minutes(5));
  CHECK(parse_duration("5h") == std::chrono::hours(5));
  CHECK(parse_duration("1.5s") == std::chrono::milliseconds(1500));
  for (const char* bad : {"", "h", "5x", "-1s", "0s", "1..2s"}) {
    CHECK_THROWS_AS(parse_duration(bad), ConfigError);
  }
  for (const char* text : {"250ms", "90s", "5m", "5h", "1500ms"}) {
    CHECK(format_duration(parse_duration(text)) == text);
  }
}

TEST_CASE("config loading, defaults and validation") {
  Fixture fx;
  RepairConfig cfg = fx.config();
  CHECK(cfg.project_dir == (fx.dir.path() / "project").lexically_normal());
  CHECK(cfg.predictor.training == std::vector<fs::path>{(fx.dir.path() / "training").lexically_normal()});
  CHECK(cfg.effective_beam_width() == 25);
  CHECK(cfg.max_patches == 5000);
  CHECK(cfg.timeout == std::chrono::hours(5));
  CHECK(cfg.top_suspicious == 40);
  CHECK(cfg.validation.mode == ValidationMode::all);
  CHECK_NOTHROW(cfg.check());

  cfg.suspicious_file = fx.dir / "s.tsv";
  CHECK(cfg.effective_beam_width() == 5);
  cfg.beam_width = 7;
  CHECK(cfg.effective_beam_width() == 7);

  cfg = fx.config();
  cfg.apply({{"strategies", "complete,template"},
             {"timeout", "90s"},
             {"validation", {{"mode", "first-plausible"}, {"per_patch_timeout", "2s"}}}},
            fx.dir.path());
  CHECK(cfg.strategies == StrategySet{true, false, true});
  CHECK(cfg.timeout == std::chrono::seconds(90));
  CHECK(cfg.validation.mode == ValidationMode::first_plausible);
  CHECK(cfg.validation.per_patch_timeout == std::chrono::seconds(2));

  CHECK_THROWS_AS(cfg.apply({{"beam_wdith", 3}}, "."), ConfigError);
  CHECK_THROWS_AS(cfg.apply({{"validation", {{"modes", "all"}}}}, "."), ConfigError);
  CHECK_THROWS_AS(cfg.apply({{"max_patches", "many"}}, "."), ConfigError);
  CHECK_THROWS_AS(cfg.apply({{"strategies", "everything"}}, "."), ConfigError);

  auto broken = [&](const json& j) {
    RepairConfig c = fx.config();
    c.apply(j, fx.dir.path());
    return c;
  };
  CHECK_THROWS_AS(broken({{"beam_width", 0}}).check(), ConfigError);
  CHECK_THROWS_AS(broken({{"max_patches", 0}}).check(), ConfigError);
  CHECK_THROWS_AS(broken({{"buggy_line", nullptr}}).check(), ConfigError);
  CHECK_THROWS_AS(broken({{"predictor", {{"backend", "remote"}}}}).check(), ConfigError);
  CHECK_THROWS_AS(broken({{"validation", {{"failing_test_pattern", "no group"}}}}).check(), ConfigError);
  CHECK_THROWS_AS(RepairConfig::load(fx.dir / "missing.json"), ConfigError);

  // The snapshot reloads to the same snapshot.
  RepairConfig again;
  again.apply(cfg.to_json(), "/");
  CHECK(again.to_json() == cfg.to_json());
}

TEST_CASE("suspicious-location file") {
  TempDir dir;
  write_file_atomic(dir / "s.tsv",
                    "# file\tline\tscore\n"
                    "a.mini\t3\t0.2\n"
                    "b.mini\t1\t0.9\n"
                    "\n"
                    "a.mini\t7\t0.9\n"
                    "c.mini\t2\t0.5\n");
  const auto all = load_suspicious(dir / "s.tsv", 40);
  REQUIRE(all.size() == 4);
  CHECK(all[0].file == "b.mini");
  CHECK(all[0].line_index == 0);
  CHECK(all[1].file == "a.mini");  // equal scores keep file order
  CHECK(all[1].line_index == 6);
  CHECK(all[2].suspiciousness == 0.5);
  CHECK(all[3].line_index == 2);
  CHECK(load_suspicious(dir / "s.tsv", 2).size() == 2);

  for (const char* bad : {"a.mini\t0\t0.5\n", "a.mini\t2\t1.5\n", "a.mini 2 0.5\n", "a\tx\t0.1\n"}) {
    write_file_atomic(dir / "bad.tsv", bad);
    CHECK_THROWS_AS(load_suspicious(dir / "bad.tsv", 40), ConfigError);
  }
  CHECK_THROWS_AS(load_suspicious(dir / "none.tsv", 40), ConfigError);
}

TEST_CASE("run_repair: plausible fix, report contents and round trip") {
  Fixture fx;
  RepairConfig cfg = fx.config();
  cfg.report_dir = fx.dir / "report";
  const auto predictor = make_predictor(cfg);
  const RepairReport report = run_repair(cfg, *predictor);

  CHECK(report.exit_code() == kExitPlausible);
  REQUIRE(report.locations.size() == 1);
  CHECK(report.locations[0].buggy_line == "    if (xs[i] < best) {");
  CHECK(report.locations[0].patch_budget == 5000);
  CHECK(report.patches.size() <= cfg.max_patches);
  CHECK(report.patches.size() == report.locations[0].generated);
  REQUIRE(!report.plausible.empty());
  bool ground_truth = false;
  for (std::size_t i : report.plausible) {
    ground_truth |= report.patches[i].rendered_line == "if (xs[i] > best) {" &&
                    report.patches[i].inserted == "replace";
  }
  CHECK(ground_truth);
  for (std::size_t i = 0; i < report.patches.size(); ++i) {
    CHECK(report.patches[i].rank == i + 1);
    CHECK(report.patches[i].status != kUnattempted);  // validate-all
    if (i > 0) CHECK(report.patches[i - 1].joint_score >= report.patches[i].joint_score);
  }
  for (std::size_t k = 1; k < report.plausible.size(); ++k) {
    CHECK(report.patches[report.plausible[k - 1]].joint_score >=
          report.patches[report.plausible[k]].joint_score);
  }

  const RepairReport back = RepairReport::read(fx.dir / "report");
  CHECK(back.task_digest == report.task_digest);
  CHECK(back.config == report.config);
  CHECK(back.plausible == report.plausible);
  REQUIRE(back.patches.size() == report.patches.size());
  for (std::size_t i = 0; i < back.patches.size(); ++i) {
    CHECK(back.patches[i].joint_score == report.patches[i].joint_score);
    CHECK(back.patches[i].temp_joint_score == report.patches[i].temp_joint_score);
    CHECK(back.patches[i].failing_tests == report.patches[i].failing_tests);
    CHECK(back.patches[i].patched_file_digest == report.patches[i].patched_file_digest);
  }
  back.write(fx.dir / "again");
  CHECK(read_file(fx.dir / "again" / "report.jsonl") == read_file(fx.dir / "report" / "report.jsonl"));
  CHECK(read_file(fx.dir / "again" / "summary.json") == read_file(fx.dir / "report" / "summary.json"));

  // Reproducibility: a second run writes byte-identical deterministic files.
  cfg.report_dir = fx.dir / "second";
  run_repair(cfg, *make_predictor(cfg));
  CHECK(read_file(fx.dir / "second" / "report.jsonl") == read_file(fx.dir / "report" / "report.jsonl"));
  CHECK(read_file(fx.dir / "second" / "summary.json") == read_file(fx.dir / "report" / "summary.json"));
}

TEST_CASE("run_repair: budgets, first-plausible mode and exit codes") {
  Fixture fx(json{{"max_patches", 40}, {"validation", {{"mode", "first-plausible"}}}});
  RepairConfig cfg = fx.config();
  const auto predictor = make_predictor(cfg);
  const RepairReport first = run_repair(cfg, *predictor);
  CHECK(first.patches.size() <= 40);
  std::size_t plausible = 0, unattempted = 0;
  for (const auto& p : first.patches) {
    plausible += p.status == "plausible";
    unattempted += p.status == kUnattempted;
  }
  CHECK(plausible <= 1);
  if (plausible == 1) CHECK(first.patches[first.plausible[0]].rank + unattempted == first.patches.size());

  // Every patch fails when the tests cannot pass.
  RepairConfig failing = cfg;
  failing.test_command = {{"false"}};
  failing.max_patches = 10;
  const RepairReport none = run_repair(failing, *predictor);
  CHECK(none.plausible.empty());
  CHECK(none.exit_code() == kExitNoPlausible);

  // Several locations split the budget evenly.
  write_file_atomic(fx.dir / "s.tsv", "main.mini\t4\t0.9\nmain.mini\t14\t0.4\nmain.mini\t2\t0.1\n");
  RepairConfig ranked = cfg;
  ranked.buggy_line.reset();
  ranked.suspicious_file = fx.dir / "s.tsv";
  ranked.max_patches = 20;
  const RepairReport multi = run_repair(ranked, *predictor);
  REQUIRE(multi.locations.size() == 3);
  CHECK(multi.locations[0].line_index == 3);
  CHECK(multi.locations[2].line_index == 1);
  for (const auto& l : multi.locations) {
    CHECK(l.patch_budget == 6);
    CHECK(l.generated <= 6);
  }
  CHECK(multi.patches.size() <= 20);

  // An empty suspicious list is its own outcome.
  write_file_atomic(fx.dir / "empty.tsv", "# nothing\n");
  ranked.suspicious_file = fx.dir / "empty.tsv";
  ranked.report_dir = fx.dir / "empty-report";
  const RepairReport empty = run_repair(ranked, *predictor);
  CHECK(empty.locations.empty());
  CHECK(empty.patches.empty());
  CHECK(empty.exit_code() == kExitNoLocations);
  CHECK(fs::exists(fx.dir / "empty-report" / "summary.json"));
}

TEST_CASE("run_repair: errors carry the location") {
  Fixture fx(json{{"buggy_line", 500}});
  RepairConfig cfg = fx.config();
  cfg.report_dir = fx.dir / "report";
  const auto predictor = make_predictor(cfg);
  try {
    run_repair(cfg, *predictor);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("main.mini:501") != std::string::npos);
  }
  // The partial report is still flushed.
  CHECK(fs::exists(fx.dir / "report" / "summary.json"));

  RepairConfig no_training = fx.config();
  no_training.predictor.training.clear();
  CHECK_THROWS_AS(make_predictor(no_training), ConfigError);
}

TEST_CASE("evaluate_corpus: counts, ablation order and empty corpus") {
  REQUIRE(put_tools_on_path());
  TempDir dir;
  write_corpus(dir / "corpus", 3, 4);
  RepairConfig base;
  base.apply({{"predictor", {{"training", {"corpus/training"}}}},
              {"validation", {{"mode", "first-plausible"}}},
              {"max_patches", 300}},
             dir.path());
  const auto predictor = make_predictor(base);
  EvalOptions options;
  options.out_dir = dir / "eval";
  const EvalResult result = evaluate_corpus(dir / "corpus", base, *predictor, options);
  REQUIRE(result.bugs.size() == 4);
  REQUIRE(result.set_names == Strings{"complete", "complete,partial", "complete,partial,template"});
  const auto exact = result.exact_counts();
  const auto plausible = result.plausible_counts();
  for (std::size_t s = 0; s < 3; ++s) CHECK(exact[s] <= plausible[s]);
  CHECK(exact[0] <= exact[1]);
  CHECK(exact[1] <= exact[2]);
  for (const auto& b : result.bugs) {
    CHECK(b.error.empty());
    for (std::size_t s = 0; s < 3; ++s) {
      if (b.exact[s]) CHECK(b.plausible[s]);
      if (b.exact[s]) CHECK(b.exact_rank[s].has_value());
    }
  }
  CHECK(fs::exists(dir / "eval" / result.bugs[0].id / "complete" / "summary.json"));
  const json j = result.to_json();
  CHECK(j.at("exact") == json(exact));
  CHECK(result.table().find("operator_flip") != std::string::npos);

  fs::create_directories(dir / "empty");
  write_file_atomic(dir / "empty" / "corpus.json",
                    R"({"format": "clozefix-corpus/1", "seed": 1, "count": 0, "bugs": []})");
  const EvalResult none = evaluate_corpus(dir / "empty", base, *predictor, options);
  CHECK(none.bugs.empty());
  CHECK(none.exact_counts() == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("command line: exit codes") {
  Fixture fx(json{{"validation", {{"mode", "first-plausible"}}}});
  const std::string cli = (fs::path(CLOZEFIX_TOOLS_DIR) / "clozefix").string();
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), cli);
    return run_process({args}, fx.dir.path(), std::chrono::minutes(2));
  };
  const std::string task = fx.config_file.string();

  const auto found = run({"repair", "--task", task, "--report-dir", "out"});
  CHECK(found.exit_code == kExitPlausible);
  CHECK(fs::exists(fx.dir / "out" / "report.jsonl"));
  CHECK(found.output.find("if (xs[i] > best) {") != std::string::npos);

  CHECK(run({"repair", "--task", task, "--strategies", "complete", "--max-patches", "3"}).exit_code ==
        kExitNoPlausible);
  CHECK(run({"repair", "--task", task, "--beam-width", "0"}).exit_code == kExitConfigError);
  CHECK(run({"repair", "--task", task, "--validate", "sometimes"}).exit_code == kExitConfigError);
  CHECK(run({"repair", "--task", task, "--timeout", "soon"}).exit_code == kExitConfigError);
  CHECK(run({"repair", "--task", "missing.json"}).exit_code == kExitConfigError);
  CHECK(run({"repair", "--task", task, "--predictor", "remote", "--remote-endpoint",
             "http://127.0.0.1:1"}).exit_code == kExitBackendUnavailable);

  write_file_atomic(fx.dir / "empty.tsv", "");
  write_file_atomic(fx.dir / "ranked.json",
                    json{{"project_dir", "project"},
                         {"suspicious_file", "empty.tsv"},
                         {"build_command", {"minirun", "check", "main.mini"}},
                         {"test_command", {"minirun", "test", "main.mini"}},
                         {"predictor", {{"training", {"training"}}}}}
                        .dump());
  CHECK(run({"repair", "--task", (fx.dir / "ranked.json").string()}).exit_code == kExitNoLocations);

  CHECK(run({"corpus", "gen", "--seed", "2", "--count", "3", "--out", "c"}).exit_code == 0);
  CHECK(load_corpus(fx.dir / "c").size() == 3);
  CHECK(run({"corpus", "gen", "--seed", "2", "--count", "3", "--out", "c"}).exit_code == kExitConfigError);
}
