#include "artex/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "artex/csv.hpp"
#include "artex/error.hpp"

namespace artex {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kTrialHeader =
    "trial_id,run_id,strategy,round,predicted,correct,train_acc,mean_variance,mean_entropy,touched_platform";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string trial_file(StrategyKind s, const std::string& id, int run) {
  return "trials/" + std::string(to_string(s)) + "/" + id + "_run" + std::to_string(run) + ".csv";
}

ordered_json manifest_json(const ExperimentConfig& config, const std::vector<TrialSpec>& trials,
                           const std::string& status, const std::string& started) {
  ordered_json m;
  m["format"] = "artex-manifest";
  m["format_version"] = 1;
  m["software_version"] = ARTEX_VERSION;
  m["status"] = status;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config_entries(config)) cfg[k] = v;
  m["config"] = cfg;
  m["conventions"] = {{"summary_std", "sample (n-1)"},
                      {"acquisition_variance", "population"},
                      {"js", "square root of base-2 Jensen-Shannon divergence"},
                      {"n_mc", config.engine.n_mc},
                      {"seed_derivation", "cell seed = derive_seed(experiment.seed, {trial, run}); shared by strategies"}};
  ordered_json list = ordered_json::array();
  for (std::size_t t = 0; t < trials.size(); ++t) {
    ordered_json seeds = ordered_json::array();
    for (int r = 0; r < config.runs; ++r) seeds.push_back(std::to_string(cell_seed(config.seed, t, r)));
    list.push_back({{"id", trial_id(t)},
                    {"reference", trials[t].reference_fabric},
                    {"comparisons", trials[t].comparison_fabrics},
                    {"reference_platform", trials[t].reference_platform()},
                    {"run_seeds", seeds}});
  }
  m["trials"] = list;
  if (config.timestamps) {
    m["started_at"] = started;
    if (status != "running") m["finished_at"] = utc_now();
  }
  return m;
}

std::string summary_text(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  write_summary_csv(out, rows);
  return out.str();
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t master, std::size_t trial, int run) noexcept {
  return derive_seed(master, {static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(run)});
}

std::string trial_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial%03zu", index);
  return buf;
}

fs::path resolve_output_dir(const fs::path& dir) {
  const char* root = std::getenv("ARTEX_OUTPUT_ROOT");
  if (root && *root && dir.is_relative()) return fs::path(root) / dir;
  return dir;
}

std::vector<TrialResult> ExperimentResult::flatten(std::size_t strategy_index) const {
  std::vector<TrialResult> out;
  for (const auto& runs : results[strategy_index])
    for (const TrialResult& r : runs) out.push_back(r);
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

void write_trial_csv(std::ostream& out, const TrialResult& result, const std::string& id, int run) {
  out << kTrialHeader << '\n';
  CsvWriter w(out);
  auto emit = [&](const RoundMetrics& m) {
    w.row({id, std::to_string(run), std::string(to_string(result.strategy)), std::to_string(m.round),
           std::to_string(m.predicted_platform), m.correct ? "1" : "0", format_double(m.train_accuracy),
           format_double(m.mean_variance), format_double(m.mean_entropy), std::to_string(m.touched_platform)});
  };
  emit(result.baseline);
  for (const RoundMetrics& m : result.rounds) emit(m);
}

TrialResult read_trial_csv(std::istream& in, const TrialSpec& spec, StrategyKind strategy) {
  auto fail = [](std::size_t line, const std::string& what) -> Error {
    return Error(ErrorCode::ManifestError, "trial file line " + std::to_string(line) + ": " + what);
  };
  std::string text;
  if (!std::getline(in, text) || text != kTrialHeader) throw fail(1, "unexpected header");
  TrialResult result;
  result.spec = spec;
  result.strategy = strategy;
  result.touch_counts.fill(1);
  std::vector<std::string> f;
  std::size_t line = 1;
  bool have_baseline = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    if (!split_csv_line(text, f) || f.size() != 10) throw fail(line, "expected 10 fields");
    RoundMetrics m;
    try {
      m.round = std::stoi(f[3]);
      m.predicted_platform = std::stoi(f[4]);
      m.correct = f[5] == "1";
      m.train_accuracy = std::stod(f[6]);
      m.mean_variance = std::stod(f[7]);
      m.mean_entropy = std::stod(f[8]);
      m.touched_platform = std::stoi(f[9]);
    } catch (const std::exception&) {
      throw fail(line, "malformed number");
    }
    if (f[2] != to_string(strategy)) throw fail(line, "strategy '" + f[2] + "' does not match");
    if (m.predicted_platform < 1 || m.predicted_platform > kComparisonPlatforms ||
        m.touched_platform < 0 || m.touched_platform > kComparisonPlatforms)
      throw fail(line, "platform out of range");
    if (m.round == 0) {
      result.baseline = m;
      have_baseline = true;
    } else {
      if (m.round != static_cast<int>(result.rounds.size()) + 1) throw fail(line, "rounds out of order");
      if (m.touched_platform > 0) ++result.touch_counts[m.touched_platform];
      result.rounds.push_back(m);
    }
  }
  if (!have_baseline) throw fail(line, "missing baseline row");
  const RoundMetrics& last = result.rounds.empty() ? result.baseline : result.rounds.back();
  result.predicted_platform = last.predicted_platform;
  result.correct = last.correct;
  return result;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "step,mean,std\n";
  for (const SummaryRow& r : rows) out << r.step << ',' << format_double(r.mean) << ',' << format_double(r.std) << '\n';
}

Summary summarize_by_trial(const std::vector<std::vector<TrialResult>>& by_trial) {
  std::map<int, std::array<std::vector<double>, 3>> by_round;
  for (const auto& runs : by_trial) {
    std::map<int, std::array<std::vector<double>, 3>> per_trial;
    for (const TrialResult& r : runs) {
      for (const RoundMetrics& m : r.rounds) {
        auto& cols = per_trial[m.round];
        cols[0].push_back(m.correct ? 1.0 : 0.0);
        cols[1].push_back(m.mean_variance);
        cols[2].push_back(m.mean_entropy);
      }
    }
    for (const auto& [round, cols] : per_trial)
      for (int i = 0; i < 3; ++i) by_round[round][i].push_back(mean_std(cols[i]).mean);
  }
  Summary s;
  for (const auto& [round, cols] : by_round) {
    s.accuracy.push_back(mean_std(cols[0], round));
    s.variance.push_back(mean_std(cols[1], round));
    s.entropy.push_back(mean_std(cols[2], round));
  }
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  config.validate();
  const std::string started = utc_now();
  const Dataset dataset = resolve_dataset(config.dataset);

  ExperimentResult out;
  out.config = config;
  out.trials = build_trials(config.trials, dataset, config.max_rounds);
  out.output_dir = resolve_output_dir(config.output_dir);
  ClassifierConfig classifier = config.classifier;
  classifier.input = dataset.shape();

  const std::size_t n_strat = config.strategies.size();
  const std::size_t n_trials = out.trials.size();
  const auto n_runs = static_cast<std::size_t>(config.runs);
  out.results.assign(n_strat, std::vector<std::vector<TrialResult>>(n_trials, std::vector<TrialResult>(n_runs)));

  const fs::path dir = out.output_dir;
  if (options.write_files) {
    fs::create_directories(dir);
    if (!config.resume)
      for (const char* sub : {"trials", "summary", "confusion"}) fs::remove_all(dir / sub);
    fs::remove(dir / "FAILED");
    write_file_atomic(dir / "manifest.json", manifest_json(config, out.trials, "running", started).dump(2) + "\n");
  }

  // Cells in (strategy, trial, run) order; workers pull the next index.
  const std::size_t n_cells = n_strat * n_trials * n_runs;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t done = 0;
  std::size_t failed_cell = n_cells;
  std::string failure;
  ErrorCode failure_code = ErrorCode::InternalError;

  auto work = [&] {
    while (!stop.load()) {
      const std::size_t cell = next.fetch_add(1);
      if (cell >= n_cells) return;
      const std::size_t s = cell / (n_trials * n_runs);
      const std::size_t t = (cell / n_runs) % n_trials;
      const int r = static_cast<int>(cell % n_runs);
      const StrategyKind strategy = config.strategies[s];
      const std::string id = trial_id(t);
      const fs::path file = dir / trial_file(strategy, id, r);
      try {
        TrialSpec spec = out.trials[t];
        spec.seed = cell_seed(config.seed, t, r);
        TrialResult result;
        bool loaded = false;
        if (options.write_files && config.resume && fs::exists(file)) {
          std::ifstream in(file);
          result = read_trial_csv(in, spec, strategy);
          loaded = static_cast<int>(result.rounds.size()) == spec.max_rounds;
        }
        if (!loaded) {
          result = run_trial(spec, dataset, strategy, classifier, config.engine,
                             options.hooks.on_probabilities || options.hooks.on_trained ? &options.hooks : nullptr);
          if (options.write_files) {
            std::ostringstream csv;
            write_trial_csv(csv, result, id, r);
            write_file_atomic(file, csv.str());
          }
        }
        out.results[s][t][r] = std::move(result);
        std::lock_guard lock(mu);
        ++done;
        if (options.progress)
          *options.progress << "[" << done << "/" << n_cells << "] " << to_string(strategy) << " " << id << " run "
                            << r << (loaded ? " (resumed)" : "") << "\n";
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        if (cell < failed_cell) {
          failed_cell = cell;
          failure = std::string(to_string(strategy)) + " " + id + " run " + std::to_string(r) + ": " + e.what();
          const auto* err = dynamic_cast<const Error*>(&e);
          failure_code = err ? err->code() : ErrorCode::InternalError;
        }
        stop = true;
      }
    }
  };

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_cells, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }

  if (failed_cell < n_cells) {
    if (options.write_files) {
      write_file_atomic(dir / "FAILED", failure + "\n");
      write_file_atomic(dir / "manifest.json", manifest_json(config, out.trials, "failed", started).dump(2) + "\n");
    }
    throw Error(failure_code, failure);
  }
  if (!options.write_files) return out;

  std::vector<std::string> index{"manifest.json", "final_accuracy.csv"};
  std::ostringstream final_csv;
  final_csv << "strategy,mean,std,cells,mean_by_trial,std_by_trial\n";
  for (std::size_t s = 0; s < n_strat; ++s) {
    const std::string name(to_string(config.strategies[s]));
    const std::vector<TrialResult> all = out.flatten(s);
    for (std::size_t t = 0; t < n_trials; ++t)
      for (int r = 0; r < config.runs; ++r) index.push_back(trial_file(config.strategies[s], trial_id(t), r));

    const Summary cells = summarize(all);
    const Summary trials = summarize_by_trial(out.results[s]);
    const std::pair<const char*, const std::vector<SummaryRow>*> files[] = {
        {"accuracy", &cells.accuracy},  {"variance", &cells.variance},  {"entropy", &cells.entropy}};
    const std::pair<const char*, const std::vector<SummaryRow>*> by_trial[] = {
        {"accuracy", &trials.accuracy}, {"variance", &trials.variance}, {"entropy", &trials.entropy}};
    for (const auto& [metric, rows] : files) {
      const std::string rel = "summary/" + name + "_" + metric + ".csv";
      write_file_atomic(dir / rel, summary_text(*rows));
      index.push_back(rel);
    }
    for (const auto& [metric, rows] : by_trial) {
      const std::string rel = "summary/" + name + "_" + metric + "_by_trial.csv";
      write_file_atomic(dir / rel, summary_text(*rows));
      index.push_back(rel);
    }

    std::ostringstream cm;
    confusion_matrix(all, dataset.fabric_ids()).write_csv(cm);
    const std::string rel = "confusion/" + name + ".csv";
    write_file_atomic(dir / rel, cm.str());
    index.push_back(rel);

    std::vector<double> finals;
    std::vector<double> trial_means;
    for (const auto& runs : out.results[s]) {
      std::vector<double> per_run;
      for (const TrialResult& r : runs) {
        finals.push_back(r.correct ? 1.0 : 0.0);
        per_run.push_back(r.correct ? 1.0 : 0.0);
      }
      trial_means.push_back(mean_std(per_run).mean);
    }
    const SummaryRow fc = mean_std(finals);
    const SummaryRow ft = mean_std(trial_means);
    final_csv << name << ',' << format_double(fc.mean) << ',' << format_double(fc.std) << ',' << fc.count << ','
              << format_double(ft.mean) << ',' << format_double(ft.std) << '\n';
  }
  write_file_atomic(dir / "final_accuracy.csv", final_csv.str());

  std::sort(index.begin(), index.end());
  std::ostringstream idx;
  idx << "path\n";
  for (const std::string& p : index) idx << p << '\n';
  write_file_atomic(dir / "index.csv", idx.str());
  write_file_atomic(dir / "manifest.json", manifest_json(config, out.trials, "complete", started).dump(2) + "\n");
  return out;
}

std::pair<std::string, ExperimentConfig> sweep_setting(const ExperimentConfig& base, const std::string& value) {
  ExperimentConfig c = base;
  std::string label;
  if (base.sweep.axis == SweepAxis::DropoutRate) {
    apply_setting(c, "classifier.dropout_rate", value);
    label = "dr=" + format_double(c.classifier.dropout_rate);
  } else {
    apply_setting(c, "augmentation.enabled", value);
    label = std::string("da=") + (c.engine.augmentation ? "on" : "off");
  }
  c.output_dir = base.output_dir / label;
  return {label, c};
}

SweepResult ablation_sweep(const ExperimentConfig& base, const ExperimentOptions& options) {
  if (base.sweep.values.empty()) throw Error(ErrorCode::ConfigError, "field 'sweep.values': no values");
  std::vector<std::pair<std::string, ExperimentConfig>> settings;
  for (const std::string& v : base.sweep.values) {
    auto setting = sweep_setting(base, v);
    for (const auto& [label, cfg] : settings)
      if (label == setting.first) throw Error(ErrorCode::ConfigError, "field 'sweep.values': duplicate " + label);
    setting.second.validate();
    settings.push_back(std::move(setting));
  }

  SweepResult result;
  for (const auto& [label, cfg] : settings) {
    const ExperimentResult er = run_experiment(cfg, options);
    result.settings.push_back(label);
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
      std::vector<double> finals;
      for (const TrialResult& r : er.flatten(s)) finals.push_back(r.correct ? 1.0 : 0.0);
      result.rows.push_back({label, cfg.strategies[s], mean_std(finals)});
    }
  }

  if (options.write_files) {
    const fs::path dir = resolve_output_dir(base.output_dir);
    std::ostringstream lng;
    lng << "setting,strategy,mean,std,cells\n";
    for (const SweepRow& r : result.rows)
      lng << r.setting << ',' << to_string(r.strategy) << ',' << format_double(r.final_accuracy.mean) << ','
          << format_double(r.final_accuracy.std) << ',' << r.final_accuracy.count << '\n';
    write_file_atomic(dir / "sweep_table.csv", lng.str());

    std::ostringstream wide;
    wide << "setting";
    for (StrategyKind s : base.strategies) wide << ',' << to_string(s) << "_mean," << to_string(s) << "_std";
    wide << '\n';
    for (const std::string& label : result.settings) {
      wide << label;
      for (StrategyKind s : base.strategies)
        for (const SweepRow& r : result.rows)
          if (r.setting == label && r.strategy == s)
            wide << ',' << format_double(r.final_accuracy.mean) << ',' << format_double(r.final_accuracy.std);
      wide << '\n';
    }
    write_file_atomic(dir / "sweep_table_wide.csv", wide.str());
  }
  return result;
}

}  // namespace artex
