#pragma once

#include <array>
#include <iosfwd>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artex/engine.hpp"

namespace artex {

/// sqrt of the base-2 Jensen-Shannon divergence; lies in [0, 1]. Exactly 1
/// for disjoint supports. Throws DistributionError for negative entries,
/// mismatched lengths or sums off 1 by more than 1e-6.
double js_distance(std::span<const double> p, std::span<const double> q);

enum class ProfileSource { RobotTouchCounts, HumanTimeFractions };

std::string_view to_string(ProfileSource source) noexcept;

/// Share of attention per object: index 0 is the reference, 1..4 the
/// comparison platforms.
struct ExplorationProfile {
  std::array<double, kPlatforms> weights{};
  ProfileSource source = ProfileSource::RobotTouchCounts;
};

struct VisitEvent {
  int event_index = 0;
  int object_index = 0;  // 0 reference, 1..4 comparisons
  double duration_s = 0.0;
};

/// One participant's trial from a human-study log.
struct HumanTrialLog {
  std::string participant_id;
  std::string trial_id;
  std::vector<VisitEvent> events;  // in event_index order
  int final_answer = 1;            // platform 1..4
};

/// Parses the CSV layout
/// `participant_id,trial_id,event_index,object_index,duration_s,final_answer`.
/// Trials are returned in order of first appearance. Throws LogParseError
/// naming the offending line.
std::vector<HumanTrialLog> parse_human_log(std::istream& in);
std::vector<HumanTrialLog> load_human_log(const std::filesystem::path& path);

/// Touch counts over total touches. Throws EmptyProfile.
ExplorationProfile exploration_profile(const TrialResult& trial);
/// Summed visit durations over total duration. Throws EmptyProfile.
ExplorationProfile exploration_profile(const HumanTrialLog& log);

struct KeyedProfile {
  std::string trial_key;
  ExplorationProfile profile;
};

/// Mean per-trial js_distance over two lists paired position by position.
/// Throws AlignmentError when lengths or trial keys differ.
double compare_strategies(std::span<const KeyedProfile> a, std::span<const KeyedProfile> b);

/// Counts indexed by (true fabric, predicted fabric) over a fixed label set.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);

  /// Throws UnknownFabric.
  void add(std::string_view truth, std::string_view predicted);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  long count(std::size_t truth, std::size_t predicted) const { return counts_[truth * size() + predicted]; }
  long row_sum(std::size_t truth) const;
  long total() const;

  /// Header row of labels, one row per true fabric led by its label.
  void write_csv(std::ostream& out) const;

 private:
  std::size_t index(std::string_view label) const;

  std::vector<std::string> labels_;
  std::vector<long> counts_;
};

/// Rows and columns follow `labels` when given, else the sorted union of the
/// fabrics appearing in `results`.
ConfusionMatrix confusion_matrix(std::span<const TrialResult> results,
                                 std::optional<std::vector<std::string>> labels = std::nullopt);

struct SummaryRow {
  int step = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t count = 0;
};

struct Summary {
  std::vector<SummaryRow> accuracy;  // correctness as 0/1
  std::vector<SummaryRow> variance;
  std::vector<SummaryRow> entropy;
};

/// Arithmetic mean and sample (n - 1) standard deviation.
SummaryRow mean_std(std::span<const double> values, int step = 0);

/// Per-round statistics over rounds 1..max, ordered by round. A trial
/// contributes to each round it executed.
Summary summarize(std::span<const TrialResult> results);

/// Fraction of trials whose most attended comparison platform equals the
/// final prediction; a tie counts as a match when the prediction is among
/// the tied maxima. Returns 0 for an empty list.
double most_touched_equals_prediction(std::span<const TrialResult> results);
double most_touched_equals_prediction(std::span<const HumanTrialLog> logs);

/// True when `platform` carries the largest comparison weight (ties allowed).
bool profile_matches(const ExplorationProfile& profile, int platform);

}  // namespace artex
