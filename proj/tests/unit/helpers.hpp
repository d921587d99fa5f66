#pragma once

#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "artex/classifier.hpp"
#include "artex/dataset.hpp"
#include "artex/engine.hpp"
#include "artex/error.hpp"

namespace artex::test {

// Checks that `stmt` throws artex::Error carrying `expected_code`.
#define EXPECT_ARTEX_ERROR(stmt, expected_code)                                   \
  do {                                                                            \
    try {                                                                         \
      stmt;                                                                       \
      ADD_FAILURE() << "expected " << ::artex::to_string(expected_code);          \
    } catch (const ::artex::Error& e) {                                           \
      EXPECT_EQ(e.code(), expected_code) << e.what();                             \
    }                                                                             \
  } while (0)

inline std::vector<SyntheticClassParams> four_classes(double noise = 0.05) {
  return {{"a", 0.0, 2.5, 3.14159, 0.0, noise},
          {"b", 45.0, 6.0, 3.14159, 0.0, noise},
          {"c", 90.0, 9.5, 3.14159, 0.0, noise},
          {"d", 135.0, 13.0, 3.14159, 0.0, noise}};
}

inline Dataset small_dataset(ImageShape shape = {16, 16, 1}, int n_per_class = 4) {
  const auto classes = four_classes();
  return generate_synthetic(classes, n_per_class, shape, 3);
}

inline ClassifierConfig small_classifier(ImageShape shape = {16, 16, 1}) {
  ClassifierConfig c;
  c.input = shape;
  c.conv_channels = {4, 6};
  c.dense_hidden_units = 12;
  return c;
}

inline EngineParams quick_params() {
  EngineParams p;
  p.copies = 2;
  p.epochs_baseline = 2;
  p.epochs_per_round = 1;
  p.n_mc = 4;
  return p;
}

inline TrialSpec spec_abcd(int max_rounds = 3, std::uint64_t seed = 11) {
  TrialSpec s;
  s.reference_fabric = "c";
  s.comparison_fabrics = {"a", "b", "c", "d"};
  s.max_rounds = max_rounds;
  s.seed = seed;
  return s;
}

inline double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Fresh per-test scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "artex_tests" /
             (std::string(info->test_suite_name()) + "." + info->name() + "." + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace artex::test
