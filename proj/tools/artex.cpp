// artex: command line front end for dataset tooling, experiments, sweeps and
// analysis. Any `--<config.key>=<value>` flag overrides that config key.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "artex/analysis.hpp"
#include "artex/config.hpp"
#include "artex/csv.hpp"
#include "artex/error.hpp"
#include "artex/experiment.hpp"
#include "artex/supervised.hpp"

namespace {

using namespace artex;
namespace fs = std::filesystem;

struct ConfigArgs {
  std::string config_file;
  std::string manifest_file;
  std::vector<std::string> sets;
};

void add_config_args(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.config_file, "Config file of key = value lines");
  cmd->add_option("--set", args.sets, "Override one key, as key=value (repeatable)");
  cmd->allow_extras();
}

// Config file (or manifest snapshot), then --set values, then --key=value extras.
ExperimentConfig resolve_config(const ConfigArgs& args, const std::vector<std::string>& extras) {
  ExperimentConfig config;
  if (!args.manifest_file.empty()) {
    const fs::path p = args.manifest_file;
    config = load_manifest(fs::is_directory(p) ? p : p.parent_path()).config;
  } else if (!args.config_file.empty()) {
    config = load_config(args.config_file);
  } else {
    apply_setting(config, "dataset.synthetic.preset", "easy");
  }
  for (const std::string& s : args.sets) apply_override(config, s);
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0) throw Error(ErrorCode::ConfigError, "unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    if (arg.find('=') == std::string::npos) {
      if (i + 1 >= extras.size()) throw Error(ErrorCode::ConfigError, "flag --" + arg + " needs a value");
      arg += "=" + extras[++i];
    }
    apply_override(config, arg);
  }
  return config;
}

void print_final(const ExperimentResult& r, std::ostream& out) {
  out << "strategy   final_accuracy  std     cells\n";
  for (std::size_t s = 0; s < r.config.strategies.size(); ++s) {
    std::vector<double> finals;
    for (const TrialResult& t : r.flatten(s)) finals.push_back(t.correct ? 1.0 : 0.0);
    const SummaryRow row = mean_std(finals);
    out << std::left << std::setw(11) << to_string(r.config.strategies[s]) << std::fixed << std::setprecision(4)
        << std::setw(16) << row.mean << std::setw(8) << row.std << row.count << '\n';
  }
  out << "output: " << r.output_dir.string() << '\n';
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Active texture recognition experiments"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  auto* dataset = app.add_subcommand("dataset", "Generate or inspect texture datasets");
  dataset->require_subcommand(1);
  ConfigArgs gen_args;
  std::string gen_out;
  auto* gen = dataset->add_subcommand("gen", "Write a synthetic dataset as PNG files");
  add_config_args(gen, gen_args);
  gen->add_option("-o,--out", gen_out, "Destination directory")->required();

  ConfigArgs inspect_args;
  std::string inspect_path;
  auto* inspect = dataset->add_subcommand("inspect", "Summarize a dataset directory or the configured dataset");
  add_config_args(inspect, inspect_args);
  inspect->add_option("path", inspect_path, "Dataset directory");

  ConfigArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment");
  add_config_args(run, run_args);
  run->add_option("-m,--manifest", run_args.manifest_file, "Re-run from a manifest.json or results directory");

  ConfigArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run an ablation sweep");
  add_config_args(sweep, sweep_args);

  std::string results_dir;
  std::string human_log;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a finished results directory");
  analyze_cmd->add_option("results", results_dir, "Results directory")->required();
  analyze_cmd->add_option("--human-log", human_log, "Human study log CSV");

  ConfigArgs classify_args;
  auto* classify = app.add_subcommand("classify", "Supervised fabric classification with a train/val split");
  add_config_args(classify, classify_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::ostream* progress = quiet ? nullptr : &std::cerr;

  if (gen->parsed()) {
    const ExperimentConfig config = resolve_config(gen_args, gen->remaining());
    if (config.dataset.source != DatasetSource::Synthetic)
      throw Error(ErrorCode::ConfigError, "field 'dataset.source': dataset gen needs a synthetic source");
    config.validate();
    const Dataset ds = resolve_dataset(config.dataset);
    save_dataset(ds, gen_out);
    std::cout << "wrote " << ds.image_count() << " images in " << ds.fabric_count() << " fabrics to " << gen_out
              << '\n';
    return 0;
  }
  if (inspect->parsed()) {
    ExperimentConfig config = resolve_config(inspect_args, inspect->remaining());
    Dataset ds = inspect_path.empty() ? resolve_dataset(config.dataset) : load_dataset(inspect_path);
    std::cout << "origin: " << ds.origin() << "\nshape: " << to_string(ds.shape()) << "\nfabrics: "
              << ds.fabric_count() << "\nimages: " << ds.image_count() << '\n';
    for (const auto& f : ds.fabrics()) {
      double mean = 0.0;
      for (const TextureImage& img : f.images) mean += img.mean_intensity();
      mean /= static_cast<double>(f.images.size());
      std::cout << "  " << f.id << ": " << f.images.size() << " images, mean intensity " << format_double(mean)
                << '\n';
    }
    return 0;
  }
  if (run->parsed()) {
    const ExperimentConfig config = resolve_config(run_args, run->remaining());
    ExperimentOptions options;
    options.progress = progress;
    print_final(run_experiment(config, options), std::cout);
    return 0;
  }
  if (sweep->parsed()) {
    const ExperimentConfig config = resolve_config(sweep_args, sweep->remaining());
    ExperimentOptions options;
    options.progress = progress;
    const SweepResult r = ablation_sweep(config, options);
    std::cout << "setting,strategy,mean,std\n";
    for (const SweepRow& row : r.rows)
      std::cout << row.setting << ',' << to_string(row.strategy) << ',' << format_double(row.final_accuracy.mean)
                << ',' << format_double(row.final_accuracy.std) << '\n';
    return 0;
  }
  if (analyze_cmd->parsed()) {
    const AnalysisReport r =
        analyze(results_dir, human_log.empty() ? std::nullopt : std::optional<fs::path>(human_log));
    std::cout << "js distance matrix:\n";
    for (std::size_t a = 0; a < r.strategies.size(); ++a) {
      std::cout << "  " << std::left << std::setw(9) << to_string(r.strategies[a]);
      for (double v : r.js_matrix[a]) std::cout << ' ' << std::fixed << std::setprecision(4) << v;
      std::cout << '\n';
    }
    std::cout << "most touched = prediction:\n";
    for (std::size_t s = 0; s < r.strategies.size(); ++s)
      std::cout << "  " << std::setw(9) << to_string(r.strategies[s]) << ' ' << r.most_touched[s] << '\n';
    if (r.human_most_touched) std::cout << "  human     " << *r.human_most_touched << '\n';
    std::cout << "written to " << (fs::path(results_dir) / "analysis").string() << '\n';
    return 0;
  }
  if (classify->parsed()) {
    const ExperimentConfig config = resolve_config(classify_args, classify->remaining());
    config.validate();
    const Dataset ds = resolve_dataset(config.dataset);
    const SupervisedResult r = run_supervised(ds, config.classifier, config.supervised, config.seed);
    const fs::path dir = resolve_output_dir(config.output_dir);
    std::ostringstream curve;
    curve << "epoch,train_loss,train_accuracy,val_accuracy\n";
    for (const SupervisedEpoch& e : r.curve)
      curve << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.train_accuracy) << ','
            << format_double(e.val_accuracy) << '\n';
    write_file_atomic(dir / "supervised_curve.csv", curve.str());
    std::ostringstream cm;
    r.val_confusion.write_csv(cm);
    write_file_atomic(dir / "supervised_confusion.csv", cm.str());
    std::cout << "train " << r.train_size << " / val " << r.val_size << " images; final val accuracy "
              << format_double(r.curve.back().val_accuracy) << "\noutput: " << dir.string() << '\n';
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const artex::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return artex::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
