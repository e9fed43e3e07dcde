#pragma once

#include "treeclust/data.hpp"

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline std::filesystem::path data_dir() { return TREECLUST_TEST_DATA_DIR; }
/// Fetched datasets (data/ at the repository root); may be absent.
inline std::filesystem::path dataset_dir() { return TREECLUST_DATASET_DIR; }
inline std::filesystem::path golden_dir() { return TREECLUST_GOLDEN_DIR; }
inline std::filesystem::path cli_path() { return TREECLUST_CLI; }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("treeclust-test-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Points on a small integer grid so that ties occur, with random ground truth.
inline treeclust::Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t f, int classes,
                                         int grid = 12) {
  treeclust::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(treeclust::uniform_index(rng, static_cast<std::uint64_t>(grid)));
    labels[i] = static_cast<int>(treeclust::uniform_index(rng, static_cast<std::uint64_t>(classes)));
  }
  return treeclust::make_dataset(std::move(m), std::move(labels));
}

inline treeclust::Dataset points_1d(const std::vector<double>& xs) {
  treeclust::Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
  return treeclust::make_dataset(std::move(m));
}

inline treeclust::Dataset points_2d(const std::vector<std::pair<double, double>>& xs) {
  treeclust::Matrix m(static_cast<Eigen::Index>(xs.size()), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = xs[i].first;
    m(static_cast<Eigen::Index>(i), 1) = xs[i].second;
  }
  return treeclust::make_dataset(std::move(m));
}

}  // namespace testsupport
