#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pog/common.hpp"
#include "pog/grid.hpp"

namespace pog::forest {

struct ForestParams {
  int tree_count{50};
  /// Features tried per split; 0 means ceil(sqrt(feature_dim)).
  int m_try{0};
  /// 0 means unlimited depth.
  int max_depth{0};
  int min_samples_leaf{5};
  /// false: every tree trains on all rows (memorization configuration).
  bool bootstrap{true};
  std::uint64_t seed{1};
};

/// Flat node storage; feature == -1 marks a leaf carrying value.
struct TreeNode {
  int feature{-1};
  double threshold{0.0};
  int left{-1};
  int right{-1};
  double value{0.0};
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::RowVectorXd& x) const;
};

/// CART regression tree on the bootstrap rows given by indices. Splits
/// minimize the summed squared error; thresholds are midpoints of consecutive
/// distinct sorted feature values; ties resolve to the lowest feature index,
/// then the lowest threshold. The result depends only on the index multiset,
/// not its order.
RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::vector<int>& indices, const ForestParams& params,
                        std::uint64_t seed);

struct RandomForest {
  std::vector<RegressionTree> trees;

  /// Mean over the trees' predictions.
  double predict(const Eigen::RowVectorXd& x) const;
};

/// Bagged forest: every tree sees a size-n bootstrap drawn from a sub-stream
/// of params.seed. Deterministic in (x, y, params).
RandomForest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const ForestParams& params);

enum class BankVariant : std::uint32_t { kRawAog = 0, kReducedFeatures = 1 };

std::string to_string(BankVariant v);

/// Per-cell predictor: cells whose training targets are all zero keep a
/// recorded trivial zero predictor instead of a forest.
struct CellPredictor {
  bool zero{false};
  RandomForest forest;
};

struct ForestBank {
  grid::GridSpec spec{};
  double t_pred{0.0};
  BankVariant variant{BankVariant::kRawAog};
  int feature_dim{0};
  std::vector<CellPredictor> cells;
};

struct BankTrainReport {
  double wall_seconds{0.0};
  int trained_cells{0};
  int zero_cells{0};
};

/// Trains one forest per grid cell. Row g of x is the feature vector of
/// scene g; row g of targets the flattened ground-truth occupancy at t_pred.
ForestBank fit_bank(const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets,
                    const grid::GridSpec& spec, double t_pred, BankVariant variant,
                    const ForestParams& params, BankTrainReport* report = nullptr);

/// Predicted occupancy grid for one feature vector; probabilities are clamped
/// to [0, 1].
grid::PredictedOccupancyGrid predict_pog(const ForestBank& bank, const Eigen::RowVectorXd& x);

void save_bank(const ForestBank& bank, const std::string& path);
ForestBank load_bank(const std::string& path);

}  // namespace pog::forest
