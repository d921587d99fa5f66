#include "artex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "artex/csv.hpp"
#include "artex/error.hpp"

namespace artex {

namespace {

void check_distribution(std::span<const double> p, const char* name) {
  if (p.empty()) throw Error(ErrorCode::DistributionError, std::string(name) + " is empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::DistributionError, std::string(name) + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw Error(ErrorCode::DistributionError, std::string(name) + " sums to " + format_double(sum));
}

// KL(a || m) in bits, skipping zero entries of a.
double kl_to_midpoint(std::span<const double> a, std::span<const double> b) {
  double kl = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    const double m = 0.5 * (a[i] + b[i]);
    kl += a[i] * std::log2(a[i] / m);
  }
  return kl;
}

}  // namespace

double js_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw Error(ErrorCode::DistributionError, "lengths differ: " + std::to_string(p.size()) + " vs " +
                                                  std::to_string(q.size()));
  check_distribution(p, "p");
  check_distribution(q, "q");
  bool disjoint = true;
  for (std::size_t i = 0; i < p.size() && disjoint; ++i) disjoint = p[i] == 0.0 || q[i] == 0.0;
  if (disjoint) return 1.0;
  const double jsd = 0.5 * kl_to_midpoint(p, q) + 0.5 * kl_to_midpoint(q, p);
  return std::sqrt(std::clamp(jsd, 0.0, 1.0));
}

std::string_view to_string(ProfileSource source) noexcept {
  return source == ProfileSource::RobotTouchCounts ? "robot_touch_counts" : "human_time_fractions";
}

ExplorationProfile exploration_profile(const TrialResult& trial) {
  ExplorationProfile out;
  out.source = ProfileSource::RobotTouchCounts;
  double total = 0.0;
  for (int c : trial.touch_counts) total += c;
  if (total <= 0.0) throw Error(ErrorCode::EmptyProfile, "trial has no touches");
  for (int i = 0; i < kPlatforms; ++i) out.weights[i] = trial.touch_counts[i] / total;
  return out;
}

ExplorationProfile exploration_profile(const HumanTrialLog& log) {
  ExplorationProfile out;
  out.source = ProfileSource::HumanTimeFractions;
  double total = 0.0;
  for (const VisitEvent& e : log.events) {
    out.weights[e.object_index] += e.duration_s;
    total += e.duration_s;
  }
  if (log.events.empty() || !(total > 0.0))
    throw Error(ErrorCode::EmptyProfile, "participant " + log.participant_id + ", trial " + log.trial_id);
  for (double& w : out.weights) w /= total;
  return out;
}

double compare_strategies(std::span<const KeyedProfile> a, std::span<const KeyedProfile> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::AlignmentError, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " trials");
  if (a.empty()) throw Error(ErrorCode::AlignmentError, "no trials to compare");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].trial_key != b[i].trial_key)
      throw Error(ErrorCode::AlignmentError, "position " + std::to_string(i) + " pairs trial '" + a[i].trial_key +
                                                 "' with '" + b[i].trial_key + "'");
    sum += js_distance(a[i].profile.weights, b[i].profile.weights);
  }
  return sum / static_cast<double>(a.size());
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

std::size_t ConfusionMatrix::index(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(ErrorCode::UnknownFabric, std::string(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(std::string_view truth, std::string_view predicted) {
  ++counts_[index(truth) * size() + index(predicted)];
}

long ConfusionMatrix::row_sum(std::size_t truth) const {
  long s = 0;
  for (std::size_t j = 0; j < size(); ++j) s += count(truth, j);
  return s;
}

long ConfusionMatrix::total() const {
  long s = 0;
  for (long c : counts_) s += c;
  return s;
}

void ConfusionMatrix::write_csv(std::ostream& out) const {
  CsvWriter w(out);
  std::vector<std::string> row{"true\\predicted"};
  row.insert(row.end(), labels_.begin(), labels_.end());
  w.row(row);
  for (std::size_t i = 0; i < size(); ++i) {
    row.assign({labels_[i]});
    for (std::size_t j = 0; j < size(); ++j) row.push_back(std::to_string(count(i, j)));
    w.row(row);
  }
}

ConfusionMatrix confusion_matrix(std::span<const TrialResult> results, std::optional<std::vector<std::string>> labels) {
  if (!labels) {
    std::vector<std::string> all;
    for (const TrialResult& r : results) {
      all.push_back(r.spec.reference_fabric);
      all.insert(all.end(), r.spec.comparison_fabrics.begin(), r.spec.comparison_fabrics.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    labels = std::move(all);
  }
  ConfusionMatrix m(std::move(*labels));
  for (const TrialResult& r : results) m.add(r.spec.reference_fabric, r.predicted_fabric());
  return m;
}

SummaryRow mean_std(std::span<const double> values, int step) {
  SummaryRow row;
  row.step = step;
  row.count = values.size();
  if (values.empty()) return row;
  double sum = 0.0;
  for (double v : values) sum += v;
  row.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return row;
}

Summary summarize(std::span<const TrialResult> results) {
  std::map<int, std::array<std::vector<double>, 3>> by_round;
  for (const TrialResult& r : results) {
    for (const RoundMetrics& m : r.rounds) {
      auto& cols = by_round[m.round];
      cols[0].push_back(m.correct ? 1.0 : 0.0);
      cols[1].push_back(m.mean_variance);
      cols[2].push_back(m.mean_entropy);
    }
  }
  Summary s;
  for (const auto& [round, cols] : by_round) {
    s.accuracy.push_back(mean_std(cols[0], round));
    s.variance.push_back(mean_std(cols[1], round));
    s.entropy.push_back(mean_std(cols[2], round));
  }
  return s;
}

bool profile_matches(const ExplorationProfile& profile, int platform) {
  if (platform < 1 || platform > kComparisonPlatforms) return false;
  const double best = *std::max_element(profile.weights.begin() + 1, profile.weights.end());
  return profile.weights[platform] == best;
}

double most_touched_equals_prediction(std::span<const TrialResult> results) {
  if (results.empty()) return 0.0;
  std::size_t hits = 0;
  for (const TrialResult& r : results)
    if (profile_matches(exploration_profile(r), r.predicted_platform)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double most_touched_equals_prediction(std::span<const HumanTrialLog> logs) {
  if (logs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const HumanTrialLog& log : logs)
    if (profile_matches(exploration_profile(log), log.final_answer)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(logs.size());
}

}  // namespace artex
