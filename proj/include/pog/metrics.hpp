#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pog/common.hpp"
#include "pog/grid.hpp"

namespace pog::metrics {

/// Occupancy-deviation error between a ground-truth and an estimated grid:
/// root of the summed squared per-cell deviation divided by K, where K counts
/// the cells occupied in exactly one of the two grids. When K is zero the
/// union size is used instead (recorded in fallback); two empty grids give 0.
struct PogError {
  double error{0.0};
  int k{0};
  bool fallback{false};
};

PogError pog_error(const grid::PredictedOccupancyGrid& truth,
                   const grid::PredictedOccupancyGrid& estimate);

/// Same error restricted to cells whose ground-truth probability falls in the
/// low [0, 0.25], mid (0.25, 0.75] or high (0.75, 1] band. A band without any
/// occupied cell in either grid is undefined (nullopt).
struct BandedErrors {
  std::optional<PogError> low;
  std::optional<PogError> mid;
  std::optional<PogError> high;
};

BandedErrors banded_errors(const grid::PredictedOccupancyGrid& truth,
                           const grid::PredictedOccupancyGrid& estimate);

/// Mean of per-sample reconstruction errors plus the mean absolute cell value
/// of the raw vectors, reported together for scale context.
struct ReconstructionSummary {
  double mean_error{0.0};
  double mean_abs_cell{0.0};
};

ReconstructionSummary reconstruction_summary(const std::vector<double>& errors,
                                             const std::vector<std::vector<double>>& raw_vectors);

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<int>> counts;  ///< counts[truth][predicted]

  int total() const;
  double accuracy() const;  ///< throws DataError when empty
};

/// Builds the confusion matrix; labels outside classes raise DataError.
ConfusionMatrix confusion_matrix(const std::vector<std::string>& classes,
                                 const std::vector<std::string>& truths,
                                 const std::vector<std::string>& predictions);

}  // namespace pog::metrics
