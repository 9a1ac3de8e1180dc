// clozefix repair --task FILE [overrides]
// clozefix corpus gen --seed S --count C --out DIR
// clozefix corpus eval --dir DIR --task-template FILE [--out DIR]
//
// Exit status for repair: 0 plausible patch found, 10 none found,
// 11 no suspicious locations, 20 configuration error, 30 backend unavailable.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "clozefix/corpus.hpp"
#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"
#include "clozefix/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace clozefix;

namespace {

// Lets task commands such as `minirun` resolve to the binary shipped next
// to this one.
void prepend_own_dir_to_path(const char* argv0) {
  std::error_code ec;
  fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (ec) self = fs::absolute(argv0, ec);
  if (ec || !self.has_parent_path()) return;
  std::string path = self.parent_path().string();
  if (const char* old = std::getenv("PATH"); old && *old) path += std::string(":") + old;
  ::setenv("PATH", path.c_str(), 1);
}

struct RepairArgs {
  std::string task;
  std::optional<std::size_t> beam_width, max_patches, top_suspicious;
  std::optional<std::string> timeout, predictor, endpoint, validate, strategies, report_dir;
};

void apply_overrides(RepairConfig& config, const RepairArgs& a) {
  if (a.beam_width) config.beam_width = *a.beam_width;
  if (a.max_patches) config.max_patches = *a.max_patches;
  if (a.top_suspicious) config.top_suspicious = *a.top_suspicious;
  if (a.timeout) config.timeout = parse_duration(*a.timeout);
  if (a.predictor) config.predictor.backend = *a.predictor;
  if (a.endpoint) config.predictor.endpoint = *a.endpoint;
  if (a.validate) config.validation.mode = parse_validation_mode(*a.validate);
  if (a.strategies) config.strategies = StrategySet::parse(*a.strategies);
  if (a.report_dir) config.report_dir = fs::absolute(*a.report_dir);
}

int run_repair_command(const RepairArgs& args) {
  RepairConfig config = RepairConfig::load(args.task);
  apply_overrides(config, args);
  config.check();
  const auto predictor = make_predictor(config);
  const RepairReport report = run_repair(config, *predictor);

  if (report.locations.empty()) {
    std::cout << "no suspicious locations\n";
  } else {
    std::cout << report.patches.size() << " patches over " << report.locations.size()
              << " location(s), " << report.plausible.size() << " plausible"
              << (report.timed_out ? " (timed out)" : "") << "\n";
    for (std::size_t i : report.plausible) {
      const PatchRecord& r = report.patches[i];
      const auto& loc = report.locations[r.location];
      std::cout << "  " << loc.file << ":" << loc.line_index + 1 << " [" << r.inserted << "] "
                << r.rendered_line << "  (joint " << r.joint_score << ")\n";
    }
  }
  if (config.report_dir) std::cout << "report written to " << config.report_dir->string() << "\n";
  return report.exit_code();
}

int run_eval_command(const fs::path& dir, const fs::path& template_file,
                     const std::optional<std::string>& out) {
  RepairConfig base = RepairConfig::load(template_file);
  if (base.predictor.backend == "reference" && base.predictor.training.empty() &&
      !base.predictor.model_file) {
    base.predictor.training = training_files(dir);
  }
  const auto predictor = make_predictor(base);
  EvalOptions options;
  if (out) options.out_dir = fs::absolute(*out);
  const EvalResult result = evaluate_corpus(dir, base, *predictor, options);
  std::cout << result.table();
  if (options.out_dir) {
    fs::create_directories(*options.out_dir);
    write_file_atomic(*options.out_dir / "eval.json", result.to_json().dump(2) + "\n");
    write_file_atomic(*options.out_dir / "eval.txt", result.table());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  prepend_own_dir_to_path(argv[0]);
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Cloze-style program repair"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress");

  RepairArgs repair;
  auto* repair_cmd = app.add_subcommand("repair", "Repair one task");
  repair_cmd->add_option("--task", repair.task, "Task config file")->required()->check(CLI::ExistingFile);
  repair_cmd->add_option("--beam-width", repair.beam_width);
  repair_cmd->add_option("--max-patches", repair.max_patches);
  repair_cmd->add_option("--top-suspicious", repair.top_suspicious);
  repair_cmd->add_option("--timeout", repair.timeout, "e.g. 90s, 5m, 5h");
  repair_cmd->add_option("--predictor", repair.predictor)->check(CLI::IsMember({"reference", "remote"}));
  repair_cmd->add_option("--remote-endpoint", repair.endpoint);
  repair_cmd->add_option("--validate", repair.validate)->check(CLI::IsMember({"all", "first-plausible"}));
  repair_cmd->add_option("--strategies", repair.strategies, "e.g. complete,partial,template");
  repair_cmd->add_option("--report-dir", repair.report_dir);

  auto* corpus_cmd = app.add_subcommand("corpus", "Synthetic bug corpus");
  corpus_cmd->require_subcommand(1);
  std::uint64_t seed = 1;
  std::size_t count = 50;
  std::string gen_out;
  auto* gen_cmd = corpus_cmd->add_subcommand("gen", "Generate a corpus");
  gen_cmd->add_option("--seed", seed)->required();
  gen_cmd->add_option("--count", count)->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen_out)->required();

  std::string eval_dir, eval_template;
  std::optional<std::string> eval_out;
  auto* eval_cmd = corpus_cmd->add_subcommand("eval", "Evaluate repair over a corpus");
  eval_cmd->add_option("--dir", eval_dir)->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--task-template", eval_template)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "Directory for per-bug reports and tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*repair_cmd) return run_repair_command(repair);
    if (*gen_cmd) {
      write_corpus(gen_out, seed, count);
      std::cout << "wrote " << count << " bugs to " << gen_out << "\n";
      return 0;
    }
    if (*eval_cmd) return run_eval_command(eval_dir, eval_template, eval_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const BackendUnavailable& e) {
    std::cerr << "backend unavailable: " << e.what() << "\n";
    return kExitBackendUnavailable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
