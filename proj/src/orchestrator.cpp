#include "clozefix/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "clozefix/cache.hpp"
#include "clozefix/context.hpp"
#include "clozefix/digest.hpp"
#include "clozefix/errors.hpp"
#include "clozefix/ngram_predictor.hpp"
#include "clozefix/patch_engine.hpp"
#include "clozefix/remote_predictor.hpp"

namespace clozefix {

namespace fs = std::filesystem;
using nlohmann::json;
using clock_type = std::chrono::steady_clock;

std::chrono::milliseconds parse_duration(std::string_view text) {
  std::string_view digits = text;
  std::string_view unit;
  const auto split = text.find_first_not_of("0123456789.");
  if (split != std::string_view::npos) {
    digits = text.substr(0, split);
    unit = text.substr(split);
  }
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(std::string(digits), &used);
    if (used != digits.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("bad duration '" + std::string(text) + "'");
  }
  double ms;
  if (unit == "ms") ms = value;
  else if (unit.empty() || unit == "s") ms = value * 1e3;
  else if (unit == "m" || unit == "min") ms = value * 60e3;
  else if (unit == "h") ms = value * 3600e3;
  else throw ConfigError("bad duration unit in '" + std::string(text) + "'");
  if (ms <= 0) throw ConfigError("duration must be positive: '" + std::string(text) + "'");
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::string format_duration(std::chrono::milliseconds d) {
  const auto ms = d.count();
  if (ms % 3600000 == 0) return std::to_string(ms / 3600000) + "h";
  if (ms % 60000 == 0) return std::to_string(ms / 60000) + "m";
  if (ms % 1000 == 0) return std::to_string(ms / 1000) + "s";
  return std::to_string(ms) + "ms";
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::chrono::milliseconds duration_from(const json& j) {
  if (j.is_number()) return parse_duration(std::to_string(j.get<double>()));
  return parse_duration(j.get<std::string>());
}

CommandSpec command_from(const json& j) {
  CommandSpec c;
  for (const auto& a : j) c.argv.push_back(a.get<std::string>());
  return c;
}

template <typename F>
void for_each_key(const json& j, std::string_view section, F&& f) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!f(key, value)) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(section));
    }
  }
}

}  // namespace

void RepairConfig::apply(const json& j, const fs::path& base) {
  try {
    for_each_key(j, "config", [&](const std::string& k, const json& v) {
      // null clears an optional setting, as written in report snapshots.
      if (v.is_null()) {
        if (k == "buggy_line") buggy_line.reset();
        else if (k == "suspicious_file") suspicious_file.reset();
        else if (k == "beam_width") beam_width.reset();
        else if (k == "report_dir") report_dir.reset();
        else return false;
        return true;
      }
      if (k == "project_dir") project_dir = resolve(base, v.get<std::string>());
      else if (k == "source_file") source_file = v.get<std::string>();
      else if (k == "buggy_line") buggy_line = v.get<std::size_t>();
      else if (k == "suspicious_file") suspicious_file = resolve(base, v.get<std::string>());
      else if (k == "top_suspicious") top_suspicious = v.get<std::size_t>();
      else if (k == "build_command") build_command = command_from(v);
      else if (k == "test_command") test_command = command_from(v);
      else if (k == "beam_width") beam_width = v.get<std::size_t>();
      else if (k == "max_patches") max_patches = v.get<std::size_t>();
      else if (k == "timeout") timeout = duration_from(v);
      else if (k == "strategies") strategies = StrategySet::parse(v.get<std::string>());
      else if (k == "well_formed_filter") well_formed_filter = v.get<bool>();
      else if (k == "workers") workers = v.get<std::size_t>();
      else if (k == "report_dir") report_dir = resolve(base, v.get<std::string>());
      else if (k == "tokenizer") {
        for_each_key(v, "tokenizer", [&](const std::string& tk, const json& tv) {
          if (tk == "mode") {
            const auto mode = tv.get<std::string>();
            if (mode == "reference") tokenizer.mode = TokenizerConfig::Mode::reference;
            else if (mode == "subword") tokenizer.mode = TokenizerConfig::Mode::subword;
            else throw ConfigError("tokenizer mode must be 'reference' or 'subword'");
          } else if (tk == "mask_sentinel") tokenizer.mask_sentinel = tv.get<std::string>();
          else if (tk == "max_sequence_tokens") tokenizer.max_sequence_tokens = tv.get<std::size_t>();
          else if (tk == "merges_file" && tv.is_null()) {
            merges_file.reset();
            tokenizer.subword_vocab.reset();
          } else if (tk == "merges_file") {
            merges_file = resolve(base, tv.get<std::string>());
            tokenizer.subword_vocab = std::make_shared<MergeTable>(MergeTable::load(*merges_file));
          } else return false;
          return true;
        });
      } else if (k == "predictor") {
        for_each_key(v, "predictor", [&](const std::string& pk, const json& pv) {
          if (pk == "backend") predictor.backend = pv.get<std::string>();
          else if (pk == "training") {
            predictor.training.clear();
            for (const auto& t : pv) predictor.training.push_back(resolve(base, t.get<std::string>()));
          } else if (pk == "model_file" && pv.is_null()) predictor.model_file.reset();
          else if (pk == "model_file") predictor.model_file = resolve(base, pv.get<std::string>());
          else if (pk == "endpoint") predictor.endpoint = pv.get<std::string>();
          else if (pk == "max_in_flight") predictor.max_in_flight = pv.get<std::size_t>();
          else if (pk == "cache_dir") predictor.cache_dir = resolve(base, pv.get<std::string>());
          else return false;
          return true;
        });
      } else if (k == "validation") {
        for_each_key(v, "validation", [&](const std::string& vk, const json& vv) {
          if (vk == "mode") validation.mode = parse_validation_mode(vv.get<std::string>());
          else if (vk == "workers") validation.workers = vv.get<std::size_t>();
          else if (vk == "per_patch_timeout") validation.per_patch_timeout = duration_from(vv);
          else if (vk == "failing_test_pattern") validation.failing_test_pattern = vv.get<std::string>();
          else return false;
          return true;
        });
      } else {
        return false;
      }
      return true;
    });
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

RepairConfig RepairConfig::load(const fs::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + file.string() + ": " + e.what());
  }
  RepairConfig config;
  config.apply(j, file.parent_path().empty() ? fs::path(".") : file.parent_path());
  return config;
}

json RepairConfig::to_json() const {
  auto opt_path = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
  json training = json::array();
  for (const auto& t : predictor.training) training.push_back(t.string());
  return {
      {"project_dir", project_dir.string()},
      {"source_file", source_file.string()},
      {"buggy_line", buggy_line ? json(*buggy_line) : json(nullptr)},
      {"suspicious_file", opt_path(suspicious_file)},
      {"top_suspicious", top_suspicious},
      {"build_command", build_command.argv},
      {"test_command", test_command.argv},
      {"beam_width", effective_beam_width()},
      {"max_patches", max_patches},
      {"timeout", format_duration(timeout)},
      {"strategies", strategies.to_string()},
      {"well_formed_filter", well_formed_filter},
      {"workers", workers},
      {"tokenizer",
       {{"mode", tokenizer.mode == TokenizerConfig::Mode::reference ? "reference" : "subword"},
        {"mask_sentinel", tokenizer.mask_sentinel},
        {"max_sequence_tokens", tokenizer.max_sequence_tokens},
        {"merges_file", opt_path(merges_file)}}},
      {"predictor",
       {{"backend", predictor.backend},
        {"training", training},
        {"model_file", opt_path(predictor.model_file)},
        {"endpoint", predictor.endpoint}}},
      {"validation",
       {{"mode", std::string(to_string(validation.mode))},
        {"workers", validation.workers},
        {"per_patch_timeout", format_duration(validation.per_patch_timeout)},
        {"failing_test_pattern", validation.failing_test_pattern}}},
  };
}

std::size_t RepairConfig::effective_beam_width() const {
  if (beam_width) return *beam_width;
  return suspicious_file ? kRankedLocalizationBeam : kPerfectLocalizationBeam;
}

void RepairConfig::check() const {
  if (project_dir.empty()) throw ConfigError("project_dir is not set");
  if (!buggy_line && !suspicious_file) {
    throw ConfigError("config needs buggy_line or suspicious_file");
  }
  if (buggy_line && source_file.empty()) throw ConfigError("buggy_line needs source_file");
  if (build_command.empty() || test_command.empty()) {
    throw ConfigError("build_command and test_command must be set");
  }
  if (effective_beam_width() == 0) throw ConfigError("beam_width must be at least 1");
  if (max_patches == 0) throw ConfigError("max_patches must be at least 1");
  if (top_suspicious == 0) throw ConfigError("top_suspicious must be at least 1");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (!strategies.complete && !strategies.partial && !strategies.template_) {
    throw ConfigError("no mask strategy enabled");
  }
  if (predictor.backend != "reference" && predictor.backend != "remote") {
    throw ConfigError("predictor backend must be 'reference' or 'remote'");
  }
  if (predictor.backend == "remote" && predictor.endpoint.empty()) {
    throw ConfigError("remote predictor needs an endpoint");
  }
  tokenizer.check();
  validation.check();
}

std::vector<SuspiciousLocation> load_suspicious(const fs::path& file, std::size_t top_n) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read suspicious-location file " + file.string());
  std::vector<SuspiciousLocation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    if (fields.size() != 3) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": expected path<TAB>line<TAB>score");
    }
    SuspiciousLocation loc;
    loc.file = fields[0];
    try {
      const long long n = std::stoll(fields[1]);
      if (n < 1) throw std::out_of_range("line");
      loc.line_index = static_cast<std::size_t>(n - 1);
      loc.suspiciousness = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": bad line number or score");
    }
    if (loc.suspiciousness < 0.0 || loc.suspiciousness > 1.0) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": score outside [0, 1]");
    }
    out.push_back(std::move(loc));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.suspiciousness > b.suspiciousness;
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

std::vector<SuspiciousLocation> locations_of(const RepairConfig& config) {
  if (config.suspicious_file) return load_suspicious(*config.suspicious_file, config.top_suspicious);
  return {{config.source_file, *config.buggy_line, 1.0}};
}

std::shared_ptr<const Predictor> make_predictor(const RepairConfig& config) {
  std::shared_ptr<const Predictor> inner;
  if (config.predictor.backend == "remote") {
    RemotePredictor::Options opts;
    opts.max_in_flight = config.predictor.max_in_flight;
    inner = std::make_shared<RemotePredictor>(config.predictor.endpoint, opts);
  } else if (config.predictor.model_file) {
    inner = std::make_shared<NgramPredictor>(
        NgramPredictor::load(*config.predictor.model_file, config.tokenizer));
  } else {
    std::vector<fs::path> files;
    for (const auto& t : config.predictor.training) {
      if (fs::is_directory(t)) {
        std::vector<fs::path> in_dir;
        for (const auto& e : fs::directory_iterator(t)) {
          if (e.is_regular_file()) in_dir.push_back(e.path());
        }
        std::sort(in_dir.begin(), in_dir.end());
        files.insert(files.end(), in_dir.begin(), in_dir.end());
      } else if (fs::is_regular_file(t)) {
        files.push_back(t);
      } else {
        throw ConfigError("training path " + t.string() + " does not exist");
      }
    }
    if (files.empty()) throw ConfigError("reference predictor needs training files or a model file");
    std::vector<std::string> corpus;
    for (const auto& f : files) corpus.push_back(read_file(f));
    inner = std::make_shared<NgramPredictor>(NgramPredictor::train(corpus, config.tokenizer));
  }

  std::optional<fs::path> cache_dir = config.predictor.cache_dir;
  if (!cache_dir) {
    if (const char* env = std::getenv(kCacheDirEnv); env && *env) cache_dir = fs::path(env);
  }
  if (cache_dir) return cached(inner, cache_file_for(*cache_dir, inner->info().model));
  return inner;
}

// ------------------------------------------------------------------ reports

int RepairReport::exit_code() const {
  if (locations.empty()) return kExitNoLocations;
  return plausible.empty() ? kExitNoPlausible : kExitPlausible;
}

namespace {

json record_to_json(const PatchRecord& r) {
  return {{"location", r.location},
          {"rank", r.rank},
          {"rendered_line", r.rendered_line},
          {"inserted", r.inserted},
          {"strategy", r.strategy},
          {"temp_joint_score", r.temp_joint_score},
          {"joint_score", r.joint_score},
          {"status", r.status},
          {"failing_tests", r.failing_tests},
          {"tool_output_digest", r.tool_output_digest},
          {"patched_file_digest", r.patched_file_digest}};
}

PatchRecord record_from_json(const json& j) {
  PatchRecord r;
  r.location = j.at("location");
  r.rank = j.at("rank");
  r.rendered_line = j.at("rendered_line");
  r.inserted = j.at("inserted");
  r.strategy = j.at("strategy");
  r.temp_joint_score = j.at("temp_joint_score");
  r.joint_score = j.at("joint_score");
  r.status = j.at("status");
  r.failing_tests = j.at("failing_tests").get<std::vector<std::string>>();
  r.tool_output_digest = j.at("tool_output_digest");
  r.patched_file_digest = j.at("patched_file_digest");
  return r;
}

}  // namespace

void RepairReport::write(const fs::path& dir) const {
  fs::create_directories(dir);
  std::string lines;
  for (const auto& r : patches) lines += record_to_json(r).dump() + "\n";
  write_file_atomic(dir / "report.jsonl", lines);
  json locs = json::array();
  for (const auto& l : locations) {
    locs.push_back({{"file", l.file},
                    {"line_index", l.line_index},
                    {"suspiciousness", l.suspiciousness},
                    {"buggy_line", l.buggy_line},
                    {"mask_lines", l.mask_lines},
                    {"skipped_mask_lines", l.skipped_mask_lines},
                    {"patch_budget", l.patch_budget},
                    {"generated", l.generated}});
  }
  const json summary = {{"format", "clozefix-report/1"},
                        {"task_digest", task_digest},
                        {"config", config},
                        {"locations", locs},
                        {"patch_count", patches.size()},
                        {"plausible", plausible},
                        {"timed_out", timed_out}};
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  write_file_atomic(dir / "timing.json", timing.dump(2) + "\n");
}

RepairReport RepairReport::read(const fs::path& dir) {
  RepairReport r;
  try {
    const json summary = json::parse(read_file(dir / "summary.json"));
    if (summary.at("format") != "clozefix-report/1") throw ConfigError("unknown report format");
    r.task_digest = summary.at("task_digest");
    r.config = summary.at("config");
    for (const auto& l : summary.at("locations")) {
      r.locations.push_back({l.at("file"), l.at("line_index"), l.at("suspiciousness"),
                             l.at("buggy_line"), l.at("mask_lines"), l.at("skipped_mask_lines"),
                             l.at("patch_budget"), l.at("generated")});
    }
    r.plausible = summary.at("plausible").get<std::vector<std::size_t>>();
    r.timed_out = summary.at("timed_out");
    const std::string lines = read_file(dir / "report.jsonl");
    std::istringstream in(lines);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) r.patches.push_back(record_from_json(json::parse(line)));
    }
    if (r.patches.size() != summary.at("patch_count").get<std::size_t>()) {
      throw ConfigError("report.jsonl does not match summary.json");
    }
    if (fs::exists(dir / "timing.json")) r.timing = json::parse(read_file(dir / "timing.json"));
  } catch (const json::exception& e) {
    throw ConfigError("malformed report in " + dir.string() + ": " + e.what());
  }
  return r;
}

// ----------------------------------------------------------------- pipeline

namespace {

// Calls f(i) for i in [0, n) on up to `workers` threads.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < n;) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

[[noreturn]] void rethrow_with_context(const std::string& where) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  } catch (const BackendUnavailable& e) {
    throw BackendUnavailable(where + e.what());
  } catch (const RemoteError& e) {
    throw RemoteError(e.code, where + e.what());
  } catch (const SandboxSetupFailed& e) {
    throw SandboxSetupFailed(where + e.what());
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
}

std::string task_digest_of(const RepairConfig& config, const std::vector<SuspiciousLocation>& locs) {
  std::string material = config.to_json().dump();
  for (const auto& l : locs) {
    material += "\x1e" + l.file.string() + "\x1f" + std::to_string(l.line_index);
    std::error_code ec;
    const fs::path path = config.project_dir / l.file;
    if (fs::is_regular_file(path, ec)) material += "\x1f" + sha256_hex(read_file(path));
  }
  return sha256_hex(material);
}

long long ms_since(clock_type::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(clock_type::now() - t).count();
}

}  // namespace

RepairReport run_repair(const RepairConfig& config, const Predictor& predictor,
                        ValidationMemo* memo) {
  config.check();
  const auto start = clock_type::now();
  const Deadline deadline = start + config.timeout;
  const auto locations = locations_of(config);

  RepairReport report;
  report.config = config.to_json();
  report.task_digest = task_digest_of(config, locations);
  report.timing["locations"] = json::array();

  auto finish = [&] {
    report.timing["total_ms"] = ms_since(start);
    if (config.report_dir) report.write(*config.report_dir);
  };

  try {
    const std::size_t budget =
        locations.empty() ? 0 : std::max<std::size_t>(1, config.max_patches / locations.size());
    const std::size_t beam = config.effective_beam_width();
    BeamOptions beam_options;
    beam_options.well_formed_filter = config.well_formed_filter;

    for (std::size_t li = 0; li < locations.size(); ++li) {
      const SuspiciousLocation& loc = locations[li];
      const std::string where =
          loc.file.string() + ":" + std::to_string(loc.line_index + 1) + ": ";
      if (clock_type::now() >= deadline) {
        report.timed_out = true;
        break;
      }
      try {
        const auto loc_start = clock_type::now();
        RepairTask task = RepairTask::load(config.project_dir, loc.file, loc.line_index);
        task.build_command = config.build_command;
        task.test_command = config.test_command;
        task.budgets = {beam, budget, config.timeout};

        LocationSummary summary;
        summary.file = loc.file.string();
        summary.line_index = loc.line_index;
        summary.suspiciousness = loc.suspiciousness;
        summary.buggy_line = task.buggy_line();
        summary.patch_budget = budget;

        const auto buggy = escape_sentinels(tokenize(task.buggy_line(), config.tokenizer));
        const auto mask_lines = generate_mask_lines(buggy, config.strategies);
        summary.mask_lines = mask_lines.size();

        std::vector<std::vector<CandidatePatch>> per_line(mask_lines.size());
        std::atomic<std::size_t> skipped{0};
        std::atomic<bool> out_of_time{false};
        parallel_for(mask_lines.size(), config.workers, [&](std::size_t m) {
          if (clock_type::now() >= deadline) {
            out_of_time = true;
            return;
          }
          std::shared_ptr<const PredictorInput> input;
          try {
            input = std::make_shared<PredictorInput>(build_input(task, mask_lines[m], config.tokenizer));
          } catch (const CoreTooLarge&) {
            ++skipped;
            return;
          }
          per_line[m] = rerank(beam_fill(input, beam, predictor, config.tokenizer, beam_options),
                               predictor, config.tokenizer);
        });
        if (out_of_time) report.timed_out = true;
        summary.skipped_mask_lines = skipped;

        const auto ranked = aggregate(std::move(per_line), budget);
        summary.generated = ranked.size();
        const auto generation_ms = ms_since(loc_start);

        const auto val_start = clock_type::now();
        const RankedValidation validation =
            validate_ranked(task, ranked, config.validation, deadline, memo);
        if (validation.unattempted > 0 && clock_type::now() >= deadline) report.timed_out = true;

        for (std::size_t i = 0; i < ranked.size(); ++i) {
          const CandidatePatch& p = ranked[i];
          PatchRecord r;
          r.location = li;
          r.rendered_line = p.rendered_line;
          r.inserted = std::string(to_string(p.inserted));
          r.strategy = std::string(to_string(p.strategy));
          r.temp_joint_score = p.temp_joint_score;
          r.joint_score = p.joint_score.value_or(p.temp_joint_score);
          r.rank = p.rank.value_or(i + 1);
          if (i < validation.outcomes.size()) {
            const ValidationOutcome& o = validation.outcomes[i];
            r.status = std::string(to_string(o.status));
            r.failing_tests = o.failing_tests;
            r.tool_output_digest = o.tool_output_digest;
            r.patched_file_digest = o.patched_file_digest;
          }
          report.patches.push_back(std::move(r));
        }
        report.locations.push_back(std::move(summary));
        report.timing["locations"].push_back(
            {{"generation_ms", generation_ms}, {"validation_ms", ms_since(val_start)}});
        spdlog::debug("{}{} mask lines, {} patches, {} validated", where,
                      report.locations.back().mask_lines, ranked.size(),
                      validation.outcomes.size());
      } catch (const Error&) {
        rethrow_with_context(where);
      }
    }
  } catch (...) {
    finish();
    throw;
  }

  for (std::size_t i = 0; i < report.patches.size(); ++i) {
    if (report.patches[i].status == to_string(ValidationStatus::plausible)) report.plausible.push_back(i);
  }
  std::stable_sort(report.plausible.begin(), report.plausible.end(), [&](std::size_t a, std::size_t b) {
    const PatchRecord& x = report.patches[a];
    const PatchRecord& y = report.patches[b];
    if (x.joint_score != y.joint_score) return x.joint_score > y.joint_score;
    if (x.temp_joint_score != y.temp_joint_score) return x.temp_joint_score > y.temp_joint_score;
    return x.rendered_line < y.rendered_line;
  });
  finish();
  return report;
}

// --------------------------------------------------------------- evaluation

std::vector<std::size_t> EvalResult::plausible_counts() const {
  std::vector<std::size_t> out(set_names.size(), 0);
  for (const auto& b : bugs) {
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += b.plausible[s] ? 1 : 0;
  }
  return out;
}

std::vector<std::size_t> EvalResult::exact_counts() const {
  std::vector<std::size_t> out(set_names.size(), 0);
  for (const auto& b : bugs) {
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += b.exact[s] ? 1 : 0;
  }
  return out;
}

json EvalResult::to_json() const {
  json bug_rows = json::array();
  for (const auto& b : bugs) {
    json ranks = json::array();
    for (const auto& r : b.exact_rank) ranks.push_back(r ? json(*r) : json(nullptr));
    bug_rows.push_back({{"id", b.id},
                        {"class", std::string(to_string(b.bug_class))},
                        {"plausible", b.plausible},
                        {"exact", b.exact},
                        {"exact_rank", ranks},
                        {"error", b.error}});
  }
  return {{"strategy_sets", set_names},
          {"plausible", plausible_counts()},
          {"exact", exact_counts()},
          {"bugs", bug_rows}};
}

std::string EvalResult::table() const {
  std::ostringstream out;
  const auto plausible = plausible_counts();
  const auto exact = exact_counts();
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %9s %6s %9s\n", "strategies", "plausible", "exact", "new exact");
  out << buf;
  for (std::size_t s = 0; s < set_names.size(); ++s) {
    std::size_t added = 0;
    for (const auto& b : bugs) added += (b.exact[s] && (s == 0 || !b.exact[s - 1])) ? 1 : 0;
    std::snprintf(buf, sizeof buf, "%-28s %9zu %6zu %9zu\n", set_names[s].c_str(), plausible[s],
                  exact[s], added);
    out << buf;
  }
  out << "\nexact fixes by bug class (" << (set_names.empty() ? "" : set_names.back()) << ")\n";
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_class;
  for (const auto& b : bugs) {
    auto& [fixed, total] = by_class[std::string(to_string(b.bug_class))];
    ++total;
    if (!b.exact.empty() && b.exact.back()) ++fixed;
  }
  for (const auto& [cls, counts] : by_class) {
    std::snprintf(buf, sizeof buf, "  %-20s %3zu / %zu\n", cls.c_str(), counts.first, counts.second);
    out << buf;
  }
  std::size_t errors = 0;
  for (const auto& b : bugs) errors += b.error.empty() ? 0 : 1;
  if (errors > 0) out << "\n" << errors << " bug(s) failed with an error\n";
  return out.str();
}

EvalResult evaluate_corpus(const fs::path& corpus_dir, const RepairConfig& base,
                           const Predictor& predictor, const EvalOptions& options) {
  EvalResult result;
  for (const auto& s : options.strategy_sets) result.set_names.push_back(s.to_string());
  ValidationMemo memo;

  for (const CorpusEntry& entry : load_corpus(corpus_dir)) {
    BugResult bug;
    bug.id = entry.bug.id;
    bug.bug_class = entry.bug.bug_class;
    for (std::size_t s = 0; s < options.strategy_sets.size(); ++s) {
      bool plausible = false, exact = false;
      std::optional<std::size_t> exact_rank;
      try {
        RepairConfig config = base;
        config.apply(json::parse(read_file(entry.dir / "task.json")), entry.dir);
        config.strategies = options.strategy_sets[s];
        config.report_dir.reset();
        if (options.out_dir) config.report_dir = *options.out_dir / entry.bug.id / result.set_names[s];
        const RepairReport report = run_repair(config, predictor, &memo);
        plausible = !report.plausible.empty();

        for (const PatchRecord& r : report.patches) {
          const auto& loc = report.locations[r.location];
          if (r.inserted != to_string(Insertion::replace) ||
              loc.line_index != entry.bug.line_index || !same_code_line(r.rendered_line, entry.bug.fixed_line)) {
            continue;
          }
          exact_rank = r.rank;
          if (r.status == kUnattempted) {
            // Validation stopped before reaching it; settle it now.
            RepairTask task = RepairTask::load(config.project_dir, loc.file, loc.line_index);
            task.build_command = config.build_command;
            task.test_command = config.test_command;
            Sandbox sandbox(task.project_dir);
            CandidatePatch patch;
            patch.rendered_line = r.rendered_line;
            const auto outcome = validate(task, patch, sandbox, config.validation,
                                          clock_type::now() + config.validation.per_patch_timeout, &memo);
            exact = outcome.status == ValidationStatus::plausible;
          } else {
            exact = r.status == to_string(ValidationStatus::plausible);
          }
          break;
        }
      } catch (const std::exception& e) {
        bug.error = e.what();
        spdlog::warn("{}: {}", entry.bug.id, e.what());
      }
      bug.plausible.push_back(plausible);
      bug.exact.push_back(exact);
      bug.exact_rank.push_back(exact_rank);
    }
    result.bugs.push_back(std::move(bug));
  }
  return result;
}

}  // namespace clozefix
