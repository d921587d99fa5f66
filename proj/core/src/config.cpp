#include "artex/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "artex/csv.hpp"
#include "artex/error.hpp"

namespace artex {

namespace {

[[noreturn]] void bad_field(std::string_view key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + std::string(key) + "': " + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || !std::isfinite(v)) bad_field(key, "'" + t + "' is not a finite number");
  } else {
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
      bad_field(key, "'" + t + "' is not an integer");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "on" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "off" || t == "0" || t == "no") return false;
  bad_field(key, "'" + t + "' is not a boolean");
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ExperimentConfig&)> get;  // empty: not part of the snapshot
};

template <typename T>
Key number_key(std::string name, T ExperimentConfig::*unused, std::function<T&(ExperimentConfig&)> ref) = delete;

template <typename T, typename Ref>
Key number(std::string name, Ref ref) {
  return {std::move(name),
          [ref](ExperimentConfig& c, std::string_view k, std::string_view v) { ref(c) = parse_number<T>(k, v); },
          [ref](const ExperimentConfig& c) {
            const T v = ref(const_cast<ExperimentConfig&>(c));
            if constexpr (std::is_floating_point_v<T>)
              return format_double(v);
            else
              return std::to_string(v);
          }};
}

template <typename Ref>
Key boolean(std::string name, Ref ref) {
  return {std::move(name), [ref](ExperimentConfig& c, std::string_view k, std::string_view v) { ref(c) = parse_bool(k, v); },
          [ref](const ExperimentConfig& c) {
            return std::string(ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          }};
}

std::string format_trial_list(const std::vector<TrialListEntry>& list) {
  std::vector<std::string> parts;
  for (const TrialListEntry& e : list)
    parts.push_back(e.reference + "|" + join({e.comparisons.begin(), e.comparisons.end()}, ','));
  return join(parts, ';');
}

std::vector<TrialListEntry> parse_trial_list(std::string_view key, std::string_view text) {
  std::vector<TrialListEntry> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto bar = item.find('|');
    if (bar == std::string::npos) bad_field(key, "entry '" + item + "' lacks 'reference|c1,c2,c3,c4'");
    TrialListEntry e;
    e.reference = trim(std::string_view(item).substr(0, bar));
    const auto comps = split(std::string_view(item).substr(bar + 1), ',');
    if (comps.size() != kComparisonPlatforms)
      bad_field(key, "entry '" + item + "' needs 4 comparison fabrics, found " + std::to_string(comps.size()));
    std::copy(comps.begin(), comps.end(), e.comparisons.begin());
    out.push_back(std::move(e));
  }
  return out;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"dataset.source",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   const std::string t = trim(v);
                   if (t == "synthetic")
                     c.dataset.source = DatasetSource::Synthetic;
                   else if (t == "directory")
                     c.dataset.source = DatasetSource::Directory;
                   else
                     bad_field(key, "expected 'synthetic' or 'directory', got '" + t + "'");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.dataset.source == DatasetSource::Synthetic ? "synthetic" : "directory");
                 }});
    k.push_back({"dataset.path",
                 [](ExperimentConfig& c, std::string_view, std::string_view v) { c.dataset.path = trim(v); },
                 [](const ExperimentConfig& c) { return c.dataset.path.string(); }});
    k.push_back(number<int>("dataset.height", [](ExperimentConfig& c) -> int& { return c.dataset.shape.height; }));
    k.push_back(number<int>("dataset.width", [](ExperimentConfig& c) -> int& { return c.dataset.shape.width; }));
    k.push_back(number<int>("dataset.channels", [](ExperimentConfig& c) -> int& { return c.dataset.shape.channels; }));
    k.push_back({"dataset.synthetic.preset",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   try {
                     c.dataset.classes = synthetic_preset(trim(v));
                   } catch (const Error& e) {
                     bad_field(key, e.what());
                   }
                 },
                 {}});
    k.push_back({"dataset.synthetic.classes",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   try {
                     c.dataset.classes = parse_synthetic_classes(v);
                   } catch (const Error& e) {
                     bad_field(key, e.what());
                   }
                 },
                 [](const ExperimentConfig& c) { return format_synthetic_classes(c.dataset.classes); }});
    k.push_back(number<int>("dataset.synthetic.n_per_class",
                            [](ExperimentConfig& c) -> int& { return c.dataset.n_per_class; }));
    k.push_back(number<std::uint64_t>("dataset.synthetic.seed",
                                      [](ExperimentConfig& c) -> std::uint64_t& { return c.dataset.seed; }));

    k.push_back({"trials.mode",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   const std::string t = trim(v);
                   if (t == "sample")
                     c.trials.mode = TrialMode::Sample;
                   else if (t == "list")
                     c.trials.mode = TrialMode::List;
                   else if (t == "balanced")
                     c.trials.mode = TrialMode::Balanced;
                   else
                     bad_field(key, "expected 'sample', 'list' or 'balanced', got '" + t + "'");
                 },
                 [](const ExperimentConfig& c) {
                   switch (c.trials.mode) {
                     case TrialMode::Sample: return std::string("sample");
                     case TrialMode::List: return std::string("list");
                     case TrialMode::Balanced: break;
                   }
                   return std::string("balanced");
                 }});
    k.push_back(number<int>("trials.n", [](ExperimentConfig& c) -> int& { return c.trials.n; }));
    k.push_back(number<std::uint64_t>("trials.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.trials.seed; }));
    k.push_back(number<int>("trials.placements", [](ExperimentConfig& c) -> int& { return c.trials.placements; }));
    k.push_back({"trials.list",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   c.trials.list = parse_trial_list(key, v);
                 },
                 [](const ExperimentConfig& c) { return format_trial_list(c.trials.list); }});

    k.push_back({"experiment.strategies",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   c.strategies.clear();
                   for (const std::string& s : split(v, ',')) {
                     try {
                       const StrategyKind kind = parse_strategy(s);
                       if (std::find(c.strategies.begin(), c.strategies.end(), kind) != c.strategies.end())
                         bad_field(key, "strategy '" + s + "' listed twice");
                       c.strategies.push_back(kind);
                     } catch (const Error& e) {
                       if (e.code() == ErrorCode::ConfigError && std::string(e.what()).find("field '") != std::string::npos)
                         throw;
                       bad_field(key, e.what());
                     }
                   }
                 },
                 [](const ExperimentConfig& c) {
                   std::vector<std::string> names;
                   for (StrategyKind s : c.strategies) names.emplace_back(to_string(s));
                   return join(names, ',');
                 }});
    k.push_back(number<int>("experiment.runs", [](ExperimentConfig& c) -> int& { return c.runs; }));
    k.push_back(number<int>("experiment.max_rounds", [](ExperimentConfig& c) -> int& { return c.max_rounds; }));
    k.push_back(number<int>("experiment.epochs_baseline",
                            [](ExperimentConfig& c) -> int& { return c.engine.epochs_baseline; }));
    k.push_back(number<int>("experiment.epochs_per_round",
                            [](ExperimentConfig& c) -> int& { return c.engine.epochs_per_round; }));
    k.push_back(number<int>("experiment.n_mc", [](ExperimentConfig& c) -> int& { return c.engine.n_mc; }));
    k.push_back(number<std::uint64_t>("experiment.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.seed; }));
    k.push_back(boolean("experiment.retrain_from_scratch",
                        [](ExperimentConfig& c) -> bool& { return c.engine.retrain_from_scratch; }));
    Key threads = number<int>("experiment.threads", [](ExperimentConfig& c) -> int& { return c.threads; });
    threads.get = {};
    k.push_back(std::move(threads));

    k.push_back(boolean("augmentation.enabled", [](ExperimentConfig& c) -> bool& { return c.engine.augmentation; }));
    k.push_back(number<int>("augmentation.copies", [](ExperimentConfig& c) -> int& { return c.engine.copies; }));

    k.push_back({"classifier.conv_channels",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   c.classifier.conv_channels.clear();
                   for (const std::string& s : split(v, ','))
                     c.classifier.conv_channels.push_back(parse_number<int>(key, s));
                 },
                 [](const ExperimentConfig& c) {
                   std::vector<std::string> parts;
                   for (int ch : c.classifier.conv_channels) parts.push_back(std::to_string(ch));
                   return join(parts, ',');
                 }});
    k.push_back(number<int>("classifier.dense_hidden_units",
                            [](ExperimentConfig& c) -> int& { return c.classifier.dense_hidden_units; }));
    k.push_back(number<double>("classifier.dropout_rate",
                               [](ExperimentConfig& c) -> double& { return c.classifier.dropout_rate; }));
    k.push_back(number<double>("classifier.learning_rate",
                               [](ExperimentConfig& c) -> double& { return c.classifier.learning_rate; }));
    k.push_back(number<double>("classifier.momentum",
                               [](ExperimentConfig& c) -> double& { return c.classifier.momentum; }));
    k.push_back(number<int>("classifier.batch_size", [](ExperimentConfig& c) -> int& { return c.classifier.batch_size; }));
    k.push_back(number<double>("classifier.weight_init_scale",
                               [](ExperimentConfig& c) -> double& { return c.classifier.weight_init_scale; }));

    k.push_back(number<double>("supervised.val_fraction",
                               [](ExperimentConfig& c) -> double& { return c.supervised.val_fraction; }));
    k.push_back(number<int>("supervised.epochs", [](ExperimentConfig& c) -> int& { return c.supervised.epochs; }));

    k.push_back({"sweep.axis",
                 [](ExperimentConfig& c, std::string_view key, std::string_view v) {
                   const std::string t = trim(v);
                   if (t == "dropout_rate")
                     c.sweep.axis = SweepAxis::DropoutRate;
                   else if (t == "augmentation")
                     c.sweep.axis = SweepAxis::Augmentation;
                   else
                     bad_field(key, "expected 'dropout_rate' or 'augmentation', got '" + t + "'");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.sweep.axis == SweepAxis::DropoutRate ? "dropout_rate" : "augmentation");
                 }});
    k.push_back({"sweep.values",
                 [](ExperimentConfig& c, std::string_view, std::string_view v) { c.sweep.values = split(v, ','); },
                 [](const ExperimentConfig& c) { return join(c.sweep.values, ','); }});

    Key dir{"output.dir",
            [](ExperimentConfig& c, std::string_view, std::string_view v) { c.output_dir = trim(v); }, {}};
    k.push_back(std::move(dir));
    Key stamps = boolean("output.timestamps", [](ExperimentConfig& c) -> bool& { return c.timestamps; });
    stamps.get = {};
    k.push_back(std::move(stamps));
    Key resume = boolean("output.resume", [](ExperimentConfig& c) -> bool& { return c.resume; });
    resume.get = {};
    k.push_back(std::move(resume));
    return k;
  }();
  return table;
}

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const std::string k = trim(key);
  for (const Key& entry : keys()) {
    if (entry.name == k) {
      entry.set(config, k, value);
      return;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown key '" + k + "'");
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw Error(ErrorCode::ConfigError, "override '" + std::string(assignment) + "' is not key=value");
  apply_setting(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(std::istream& in, std::string_view origin) {
  ExperimentConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(number) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, where + "expected 'key = value'");
    try {
      apply_setting(config, std::string_view(body).substr(0, eq), std::string_view(body).substr(eq + 1));
    } catch (const Error& e) {
      const std::string msg = e.what();
      const std::string prefix = std::string(to_string(e.code())) + ": ";
      throw Error(ErrorCode::ConfigError, where + msg.substr(msg.rfind(prefix, 0) == 0 ? prefix.size() : 0));
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + path.string());
  return parse_config(in, path.string());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : keys())
    if (k.get) out.emplace_back(k.name, k.get(config));
  return out;
}

std::string to_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : keys()) out.push_back(k.name);
  return out;
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const char* key, const std::string& what) {
    if (!ok) bad_field(key, what);
  };
  check(runs >= 1, "experiment.runs", "must be >= 1");
  check(max_rounds >= 0, "experiment.max_rounds", "must be >= 0");
  check(!strategies.empty(), "experiment.strategies", "at least one strategy is required");
  check(threads >= 0, "experiment.threads", "must be >= 0");
  check(engine.copies >= 1, "augmentation.copies", "must be >= 1");
  check(engine.epochs_baseline >= 0, "experiment.epochs_baseline", "must be >= 0");
  check(engine.epochs_per_round >= 0, "experiment.epochs_per_round", "must be >= 0");
  check(engine.n_mc >= 1, "experiment.n_mc", "must be >= 1");
  check(dataset.shape.height >= 1 && dataset.shape.width >= 1, "dataset.height", "image size must be positive");
  check(dataset.shape.channels == 1 || dataset.shape.channels == 3, "dataset.channels", "must be 1 or 3");
  if (dataset.source == DatasetSource::Synthetic) {
    check(!dataset.classes.empty(), "dataset.synthetic.classes", "no synthetic classes configured");
    check(dataset.n_per_class >= 1, "dataset.synthetic.n_per_class", "must be >= 1");
  } else {
    check(!dataset.path.empty(), "dataset.path", "required for directory datasets");
  }
  switch (trials.mode) {
    case TrialMode::Sample: check(trials.n >= 1, "trials.n", "must be >= 1"); break;
    case TrialMode::List: check(!trials.list.empty(), "trials.list", "no trials listed"); break;
    case TrialMode::Balanced: check(trials.placements >= 1, "trials.placements", "must be >= 1"); break;
  }
  check(supervised.val_fraction > 0.0 && supervised.val_fraction < 1.0, "supervised.val_fraction",
        "must lie in (0, 1)");
  check(supervised.epochs >= 1, "supervised.epochs", "must be >= 1");
  try {
    ClassifierConfig c = classifier;
    c.input = dataset.shape;
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("classifier: ") + e.what());
  }
}

std::vector<SyntheticClassParams> synthetic_preset(std::string_view name) {
  constexpr double kPi = std::numbers::pi;
  std::vector<SyntheticClassParams> out;
  auto add = [&](std::string n, double orient, double freq, double rot_jitter, double noise) {
    out.push_back({std::move(n), orient, freq, kPi, rot_jitter, noise});
  };
  if (name == "easy") {
    // Rotation augmentation hides orientation, so frequency carries the label.
    add("grating000", 0.0, 2.5, 0.0, 0.05);
    add("grating045", 45.0, 6.0, 0.0, 0.05);
    add("grating090", 90.0, 9.5, 0.0, 0.05);
    add("grating135", 135.0, 13.0, 0.0, 0.05);
  } else if (name == "hard") {
    for (int i = 0; i < 8; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "fine%02d", i);
      add(id, 6.0 * i, 4.0 + 0.25 * i, 10.0, 0.15);
    }
  } else if (name == "frequency") {
    for (int i = 0; i < 8; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "freq%02d", i);
      add(id, 0.0, 3.0 + 1.0 * i, 30.0, 0.15);
    }
  } else if (name == "suite8") {
    for (int i = 0; i < 8; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "fabric%d", i + 1);
      add(id, 22.5 * i, 3.0 + 1.5 * i, 5.0, 0.1);
    }
  } else {
    throw Error(ErrorCode::ConfigError, "unknown synthetic preset '" + std::string(name) + "'");
  }
  return out;
}

std::vector<SyntheticClassParams> parse_synthetic_classes(std::string_view text) {
  std::vector<SyntheticClassParams> out;
  for (const std::string& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto f = split(item, ':');
    if (f.size() != 6)
      throw Error(ErrorCode::ConfigError,
                  "class '" + item + "' needs name:orientation:frequency:phase_jitter:rotation_jitter:noise");
    SyntheticClassParams p;
    p.name = f[0];
    p.orientation_degrees = parse_number<double>("orientation", f[1]);
    p.frequency_cycles_per_image = parse_number<double>("frequency", f[2]);
    p.phase_jitter = parse_number<double>("phase_jitter", f[3]);
    p.placement_rotation_jitter_degrees = parse_number<double>("rotation_jitter", f[4]);
    p.noise_sigma = parse_number<double>("noise", f[5]);
    if (p.name.empty()) throw Error(ErrorCode::ConfigError, "class name is empty");
    try {
      p.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string format_synthetic_classes(std::span<const SyntheticClassParams> classes) {
  std::vector<std::string> parts;
  for (const SyntheticClassParams& p : classes)
    parts.push_back(p.name + ":" + format_double(p.orientation_degrees) + ":" +
                    format_double(p.frequency_cycles_per_image) + ":" + format_double(p.phase_jitter) + ":" +
                    format_double(p.placement_rotation_jitter_degrees) + ":" + format_double(p.noise_sigma));
  return join(parts, ';');
}

Dataset resolve_dataset(const DatasetConfig& config) {
  if (config.source == DatasetSource::Synthetic)
    return generate_synthetic(config.classes, config.n_per_class, config.shape, config.seed);
  LoadOptions opts;
  opts.height = config.shape.height;
  opts.width = config.shape.width;
  opts.channels = config.shape.channels;
  return load_dataset(config.path, opts);
}

std::vector<TrialSpec> build_trials(const TrialConfig& trials, const Dataset& dataset, int max_rounds) {
  const std::vector<std::string>& ids = dataset.fabric_ids();
  std::vector<TrialSpec> out;
  auto finish = [&](TrialSpec spec) {
    spec.max_rounds = max_rounds;
    spec.validate();
    out.push_back(std::move(spec));
  };

  switch (trials.mode) {
    case TrialMode::List:
      for (const TrialListEntry& e : trials.list) {
        if (!dataset.contains(e.reference)) throw Error(ErrorCode::UnknownFabric, e.reference);
        for (const std::string& c : e.comparisons)
          if (!dataset.contains(c)) throw Error(ErrorCode::UnknownFabric, c);
        TrialSpec spec;
        spec.reference_fabric = e.reference;
        spec.comparison_fabrics = e.comparisons;
        finish(std::move(spec));
      }
      break;

    case TrialMode::Sample: {
      if (ids.size() < kComparisonPlatforms)
        throw Error(ErrorCode::ConfigError, "trial sampling needs at least 4 fabrics, dataset has " +
                                                std::to_string(ids.size()));
      for (int t = 0; t < trials.n; ++t) {
        Rng rng(derive_seed(trials.seed, {static_cast<std::uint64_t>(t)}));
        std::vector<std::size_t> order(ids.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = 0; i < kComparisonPlatforms; ++i)
          std::swap(order[i], order[i + rng.below(order.size() - i)]);
        TrialSpec spec;
        for (int p = 0; p < kComparisonPlatforms; ++p) spec.comparison_fabrics[p] = ids[order[p]];
        spec.reference_fabric = spec.comparison_fabrics[rng.below(kComparisonPlatforms)];
        finish(std::move(spec));
      }
      break;
    }

    case TrialMode::Balanced: {
      if (ids.size() < kComparisonPlatforms)
        throw Error(ErrorCode::ConfigError, "balanced trials need at least 4 fabrics, dataset has " +
                                                std::to_string(ids.size()));
      for (std::size_t f = 0; f < ids.size(); ++f) {
        for (int k = 0; k < trials.placements; ++k) {
          Rng rng(derive_seed(trials.seed, {f, static_cast<std::uint64_t>(k)}));
          std::vector<std::size_t> others;
          for (std::size_t i = 0; i < ids.size(); ++i)
            if (i != f) others.push_back(i);
          for (std::size_t i = 0; i + 1 < kComparisonPlatforms; ++i)
            std::swap(others[i], others[i + rng.below(others.size() - i)]);
          TrialSpec spec;
          spec.reference_fabric = ids[f];
          const int slot = k % kComparisonPlatforms;
          for (int p = 0, o = 0; p < kComparisonPlatforms; ++p)
            spec.comparison_fabrics[p] = p == slot ? ids[f] : ids[others[o++]];
          finish(std::move(spec));
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace artex
