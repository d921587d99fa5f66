#include <cmath>
#include <sstream>

#include "artex/metrics.hpp"
#include "helpers.hpp"

namespace artex {
namespace {

std::vector<double> random_dist(Rng& rng, std::size_t n, double zero_chance = 0.0) {
  std::vector<double> p(n);
  double s = 0;
  for (double& v : p) {
    v = rng.bernoulli(zero_chance) ? 0.0 : -std::log(1.0 - rng.uniform());
    s += v;
  }
  if (s == 0) p[0] = s = 1.0;
  for (double& v : p) v /= s;
  return p;
}

// Brute-force oracle: KL to the midpoint in natural log, converted to bits.
double js_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  double kp = 0, kq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = (p[i] + q[i]) / 2;
    if (p[i] > 0) kp += p[i] * std::log(p[i] / m);
    if (q[i] > 0) kq += q[i] * std::log(q[i] / m);
  }
  return std::sqrt(std::max(0.0, (kp + kq) / 2 / std::log(2.0)));
}

TEST(JsDistance, AgreesWithOracleAndIsSymmetric) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 2 + rng.below(8);
    const auto p = random_dist(rng, n, 0.2), q = random_dist(rng, n, 0.2);
    const double d = js_distance(p, q);
    EXPECT_EQ(d, js_distance(q, p));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    bool disjoint = true;
    for (std::size_t k = 0; k < n; ++k) disjoint &= p[k] == 0 || q[k] == 0;
    if (!disjoint) EXPECT_NEAR(d, js_oracle(p, q), 1e-12);
  }
}

TEST(JsDistance, IdentityAndDisjointSupports) {
  const std::vector<double> p{0.2, 0.3, 0.5, 0.0, 0.0};
  EXPECT_EQ(js_distance(p, p), 0.0);
  const std::vector<double> a{0.5, 0.5, 0.0, 0.0, 0.0}, b{0.0, 0.0, 0.0, 0.9, 0.1};
  EXPECT_EQ(js_distance(a, b), 1.0);
  const std::vector<double> x{1.0, 0.0}, y{0.0, 1.0};
  EXPECT_EQ(js_distance(x, y), 1.0);
}

TEST(JsDistance, RejectsInvalidInputs) {
  const std::vector<double> ok{0.5, 0.5};
  EXPECT_ARTEX_ERROR(js_distance(ok, std::vector<double>{0.2, 0.3, 0.5}), ErrorCode::DistributionError);
  EXPECT_ARTEX_ERROR(js_distance(ok, std::vector<double>{0.7, 0.7}), ErrorCode::DistributionError);
  EXPECT_ARTEX_ERROR(js_distance(ok, std::vector<double>{1.5, -0.5}), ErrorCode::DistributionError);
  EXPECT_ARTEX_ERROR(js_distance(std::vector<double>{}, std::vector<double>{}), ErrorCode::DistributionError);
  EXPECT_ARTEX_ERROR(js_distance(ok, std::vector<double>{NAN, 1.0}), ErrorCode::DistributionError);
}

TrialResult fake_trial(std::array<int, 5> counts, int predicted, std::string ref = "c",
                       std::array<std::string, 4> comps = {"a", "b", "c", "d"}) {
  TrialResult r;
  r.spec.reference_fabric = ref;
  r.spec.comparison_fabrics = comps;
  r.touch_counts = counts;
  r.predicted_platform = predicted;
  return r;
}

TEST(ExplorationProfile, RobotCountsNormalize) {
  const auto prof = exploration_profile(fake_trial({1, 2, 3, 4, 10}, 4));
  EXPECT_EQ(prof.source, ProfileSource::RobotTouchCounts);
  EXPECT_DOUBLE_EQ(prof.weights[0], 0.05);
  EXPECT_DOUBLE_EQ(prof.weights[4], 0.5);
  double s = 0;
  for (double w : prof.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_ARTEX_ERROR(exploration_profile(fake_trial({0, 0, 0, 0, 0}, 1)), ErrorCode::EmptyProfile);
}

TEST(ExplorationProfile, HumanDurationsNormalize) {
  HumanTrialLog log{"p1", "trial000", {{0, 0, 2.0}, {1, 3, 6.0}, {2, 0, 2.0}}, 3};
  const auto prof = exploration_profile(log);
  EXPECT_EQ(prof.source, ProfileSource::HumanTimeFractions);
  EXPECT_DOUBLE_EQ(prof.weights[0], 0.4);
  EXPECT_DOUBLE_EQ(prof.weights[3], 0.6);
  HumanTrialLog empty{"p1", "t", {}, 1};
  EXPECT_ARTEX_ERROR(exploration_profile(empty), ErrorCode::EmptyProfile);
}

TEST(CompareStrategies, MeanOfPairedDistances) {
  ExplorationProfile a{{0.2, 0.2, 0.2, 0.2, 0.2}, ProfileSource::RobotTouchCounts};
  ExplorationProfile b{{0.0, 0.0, 0.0, 0.0, 1.0}, ProfileSource::RobotTouchCounts};
  std::vector<KeyedProfile> x{{"t0", a}, {"t1", a}}, y{{"t0", a}, {"t1", b}};
  EXPECT_NEAR(compare_strategies(x, y), js_distance(a.weights, b.weights) / 2, 1e-15);
  std::vector<KeyedProfile> shuffled{{"t1", a}, {"t0", a}};
  EXPECT_ARTEX_ERROR(compare_strategies(x, shuffled), ErrorCode::AlignmentError);
  EXPECT_ARTEX_ERROR(compare_strategies(x, std::span(y).first(1)), ErrorCode::AlignmentError);
}

TEST(ConfusionMatrixType, CountsAndCsv) {
  ConfusionMatrix m({"a", "b", "c"});
  m.add("a", "a");
  m.add("a", "c");
  m.add("b", "b");
  EXPECT_EQ(m.count(0, 2), 1);
  EXPECT_EQ(m.row_sum(0), 2);
  EXPECT_EQ(m.total(), 3);
  EXPECT_ARTEX_ERROR(m.add("z", "a"), ErrorCode::UnknownFabric);
  std::ostringstream out;
  m.write_csv(out);
  EXPECT_EQ(out.str(), "true\\predicted,a,b,c\na,1,0,1\nb,0,1,0\nc,0,0,0\n");
}

TEST(ConfusionMatrixType, BuiltFromTrialResults) {
  std::vector<TrialResult> rs{fake_trial({1, 1, 1, 1, 1}, 3), fake_trial({1, 1, 1, 1, 1}, 1),
                              fake_trial({1, 1, 1, 1, 1}, 2, "e", {"e", "a", "b", "c"})};
  const auto m = confusion_matrix(rs);
  EXPECT_EQ(m.labels(), (std::vector<std::string>{"a", "b", "c", "d", "e"}));
  EXPECT_EQ(m.count(2, 2), 1);
  EXPECT_EQ(m.count(2, 0), 1);
  EXPECT_EQ(m.count(4, 0), 1);
  const auto fixed = confusion_matrix(rs, std::vector<std::string>{"e", "d", "c", "b", "a"});
  EXPECT_EQ(fixed.count(0, 4), 1);
}

TEST(Summaries, SampleStandardDeviation) {
  const std::vector<double> v{1, 2, 3, 4};
  const SummaryRow r = mean_std(v, 7);
  EXPECT_EQ(r.step, 7);
  EXPECT_EQ(r.count, 4u);
  EXPECT_DOUBLE_EQ(r.mean, 2.5);
  EXPECT_NEAR(r.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(mean_std(std::vector<double>{3.0}).std, 0.0);
  EXPECT_EQ(mean_std(std::vector<double>{}).count, 0u);
}

TEST(Summaries, PerRoundOverTrials) {
  std::vector<TrialResult> rs(3);
  for (int t = 0; t < 3; ++t)
    for (int r = 1; r <= 2; ++r) {
      RoundMetrics m;
      m.round = r;
      m.correct = (t + r) % 2 == 0;
      m.mean_variance = t * 0.1;
      m.mean_entropy = r;
      rs[t].rounds.push_back(m);
    }
  const Summary s = summarize(rs);
  ASSERT_EQ(s.accuracy.size(), 2u);
  EXPECT_EQ(s.accuracy[0].step, 1);
  EXPECT_NEAR(s.accuracy[0].mean, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.accuracy[1].mean, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.variance[1].mean, 0.1, 1e-15);
  EXPECT_NEAR(s.variance[1].std, 0.1, 1e-15);
  EXPECT_EQ(s.entropy[1].mean, 2.0);
  EXPECT_EQ(s.entropy[1].std, 0.0);
}

TEST(MostTouched, TieCountsAsMatchWhenPredictionIsAmongMaxima) {
  std::vector<TrialResult> rs{fake_trial({9, 3, 3, 1, 1}, 2),  // tie 1/2, prediction among maxima
                              fake_trial({1, 3, 1, 3, 1}, 3),  // tie, prediction 3 is a maximum
                              fake_trial({1, 1, 5, 1, 1}, 1),  // miss
                              fake_trial({1, 1, 1, 1, 2}, 4)};
  EXPECT_DOUBLE_EQ(most_touched_equals_prediction(rs), 0.75);
  EXPECT_EQ(most_touched_equals_prediction(std::span<const TrialResult>{}), 0.0);
  std::vector<HumanTrialLog> logs{{"p", "t0", {{0, 2, 1.0}, {1, 1, 0.5}}, 2},
                                  {"p", "t1", {{0, 2, 1.0}, {1, 1, 0.5}}, 1}};
  EXPECT_DOUBLE_EQ(most_touched_equals_prediction(logs), 0.5);
}

TEST(MostTouched, ReferenceWeightIsIgnored) {
  ExplorationProfile p{{0.9, 0.05, 0.05, 0.0, 0.0}, ProfileSource::RobotTouchCounts};
  EXPECT_TRUE(profile_matches(p, 1));
  EXPECT_TRUE(profile_matches(p, 2));
  EXPECT_FALSE(profile_matches(p, 3));
  EXPECT_FALSE(profile_matches(p, 0));
}

}  // namespace
}  // namespace artex
