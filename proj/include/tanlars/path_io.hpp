#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "tanlars/l1_baseline.hpp"
#include "tanlars/lars_engine.hpp"

namespace tanlars {

/// <stem>.meta.json next to the exported CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes `step,lambda,active_size,<coefficients...>` with round-trip
/// precision and a JSON sidecar describing the path. For least angle paths
/// lambda is 2 * max correlation (penalty on ||r - X theta||^2); for l1 paths
/// it is the grid value of the penalized negative log-likelihood.
/// active_size counts nonzero coefficients plus, on least angle paths, the
/// indices about to enter. Throws IoError.
void path_export(const SolutionPath& path, const std::filesystem::path& out,
                 const std::vector<std::string>& column_names = {});
void path_export(const L1Path& path, const std::filesystem::path& out,
                 const std::vector<std::string>& column_names = {});

struct PathTable {
  std::vector<std::string> column_names;
  std::vector<long> steps;
  std::vector<double> lambdas;
  std::vector<std::size_t> active_sizes;
  Eigen::MatrixXd coefficients;  // one row per step
};

PathTable read_path_csv(const std::filesystem::path& csv);

}  // namespace tanlars
