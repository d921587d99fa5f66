#include "artex/analysis.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "artex/csv.hpp"
#include "artex/error.hpp"

namespace artex {

namespace fs = std::filesystem;

Manifest load_manifest(const fs::path& results_dir) {
  const fs::path path = results_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ManifestError, "missing " + path.string());
  Manifest m;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "artex-manifest")
      throw Error(ErrorCode::ManifestError, path.string() + " is not an artex manifest");
    m.status = j.at("status").get<std::string>();
    for (const auto& [key, value] : j.at("config").items()) apply_setting(m.config, key, value.get<std::string>());
    for (const auto& t : j.at("trials")) {
      TrialSpec spec;
      spec.reference_fabric = t.at("reference").get<std::string>();
      const auto comps = t.at("comparisons").get<std::vector<std::string>>();
      if (comps.size() != kComparisonPlatforms)
        throw Error(ErrorCode::ManifestError, "trial needs 4 comparison fabrics");
      std::copy(comps.begin(), comps.end(), spec.comparison_fabrics.begin());
      spec.max_rounds = m.config.max_rounds;
      spec.validate();
      m.trial_ids.push_back(t.at("id").get<std::string>());
      m.trials.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ManifestError, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ManifestError) throw;
    throw Error(ErrorCode::ManifestError, path.string() + ": " + e.what());
  }
  return m;
}

LoadedResults load_results(const fs::path& results_dir) {
  LoadedResults out;
  out.manifest = load_manifest(results_dir);
  const Manifest& m = out.manifest;
  if (m.status != "complete")
    throw Error(ErrorCode::ManifestError, "experiment status is '" + m.status + "', not complete");
  for (StrategyKind s : m.config.strategies) {
    std::vector<TrialResult> cells;
    for (std::size_t t = 0; t < m.trials.size(); ++t) {
      for (int r = 0; r < m.config.runs; ++r) {
        const fs::path file = results_dir / "trials" / std::string(to_string(s)) /
                              (m.trial_ids[t] + "_run" + std::to_string(r) + ".csv");
        std::ifstream in(file);
        if (!in) throw Error(ErrorCode::ManifestError, "missing " + file.string());
        try {
          cells.push_back(read_trial_csv(in, m.trials[t], s));
        } catch (const Error& e) {
          throw Error(ErrorCode::ManifestError, file.string() + ": " + e.what());
        }
      }
    }
    out.cells.push_back(std::move(cells));
  }
  return out;
}

AnalysisReport analyze(const fs::path& results_dir, const std::optional<fs::path>& human_log, bool write_files) {
  const LoadedResults loaded = load_results(results_dir);
  const Manifest& m = loaded.manifest;
  const int runs = m.config.runs;
  AnalysisReport report;
  report.strategies = m.config.strategies;

  auto cell_key = [&](std::size_t i) {
    return m.trial_ids[i / runs] + "/run" + std::to_string(i % runs);
  };
  std::vector<std::vector<KeyedProfile>> profiles;
  for (const auto& cells : loaded.cells) {
    std::vector<KeyedProfile> p;
    for (std::size_t i = 0; i < cells.size(); ++i) p.push_back({cell_key(i), exploration_profile(cells[i])});
    profiles.push_back(std::move(p));
  }

  const std::size_t n = report.strategies.size();
  report.js_matrix.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      report.js_matrix[a][b] = report.js_matrix[b][a] = compare_strategies(profiles[a], profiles[b]);

  std::vector<std::string> labels;
  for (const TrialSpec& t : m.trials) {
    labels.push_back(t.reference_fabric);
    labels.insert(labels.end(), t.comparison_fabrics.begin(), t.comparison_fabrics.end());
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (const auto& cells : loaded.cells) {
    report.most_touched.push_back(most_touched_equals_prediction(cells));
    report.confusion.push_back(confusion_matrix(cells, labels));
  }

  if (human_log) {
    const std::vector<HumanTrialLog> logs = load_human_log(*human_log);
    std::map<std::string, std::size_t> trial_index;
    for (std::size_t t = 0; t < m.trial_ids.size(); ++t) trial_index[m.trial_ids[t]] = t;
    ConfusionMatrix human_cm(labels);
    std::map<std::string, std::vector<const HumanTrialLog*>> by_participant;
    for (const HumanTrialLog& log : logs) {
      const auto it = trial_index.find(log.trial_id);
      if (it == trial_index.end())
        throw Error(ErrorCode::AlignmentError, "human trial '" + log.trial_id + "' (participant " +
                                                   log.participant_id + ") is not in the experiment");
      const TrialSpec& spec = m.trials[it->second];
      human_cm.add(spec.reference_fabric, spec.comparison_fabrics[log.final_answer - 1]);
      by_participant[log.participant_id].push_back(&log);
    }
    for (const auto& [participant, plogs] : by_participant) {
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<KeyedProfile> human, robot;
        for (const HumanTrialLog* log : plogs) {
          const std::size_t t = trial_index[log->trial_id];
          for (int r = 0; r < runs; ++r) {
            const std::size_t cell = t * runs + r;
            human.push_back({cell_key(cell), exploration_profile(*log)});
            robot.push_back(profiles[s][cell]);
          }
        }
        report.human_distances.push_back({participant, report.strategies[s], compare_strategies(human, robot),
                                          human.size()});
      }
    }
    report.human_most_touched = most_touched_equals_prediction(logs);
    report.human_confusion = std::move(human_cm);
  }

  if (write_files) {
    const fs::path dir = results_dir / "analysis";
    std::ostringstream js;
    CsvWriter w(js);
    std::vector<std::string> row{"strategy"};
    for (StrategyKind s : report.strategies) row.emplace_back(to_string(s));
    w.row(row);
    for (std::size_t a = 0; a < n; ++a) {
      row.assign({std::string(to_string(report.strategies[a]))});
      for (std::size_t b = 0; b < n; ++b) row.push_back(format_double(report.js_matrix[a][b]));
      w.row(row);
    }
    write_file_atomic(dir / "js_matrix.csv", js.str());

    std::ostringstream mt;
    mt << "source,fraction\n";
    for (std::size_t s = 0; s < n; ++s)
      mt << to_string(report.strategies[s]) << ',' << format_double(report.most_touched[s]) << '\n';
    if (report.human_most_touched) mt << "human," << format_double(*report.human_most_touched) << '\n';
    write_file_atomic(dir / "most_touched.csv", mt.str());

    for (std::size_t s = 0; s < n; ++s) {
      std::ostringstream cm;
      report.confusion[s].write_csv(cm);
      write_file_atomic(dir / ("confusion_" + std::string(to_string(report.strategies[s])) + ".csv"), cm.str());
    }
    if (report.human_confusion) {
      std::ostringstream cm;
      report.human_confusion->write_csv(cm);
      write_file_atomic(dir / "confusion_human.csv", cm.str());
      std::ostringstream hd;
      CsvWriter hw(hd);
      hw.row({"participant_id", "strategy", "mean_js", "pairs"});
      for (const ParticipantDistance& d : report.human_distances)
        hw.row({d.participant_id, std::string(to_string(d.strategy)), format_double(d.mean_js),
                std::to_string(d.pairs)});
      write_file_atomic(dir / "human_js.csv", hd.str());
    }
  }
  return report;
}

}  // namespace artex
