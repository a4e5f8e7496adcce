#include "pog/forest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace pog::forest {

double RegressionTree::predict(const Eigen::RowVectorXd& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

struct SplitChoice {
  int feature{-1};
  double threshold{0.0};
  double total_sse{0.0};
};

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  const ForestParams& params;
  int m_try;
  std::mt19937_64 rng;
  std::vector<TreeNode> nodes;

  // Sampled feature subset, returned in ascending order so that the
  // lowest-index tie-break does not depend on the draw order.
  std::vector<int> sample_features() {
    const int d = static_cast<int>(x.cols());
    std::vector<int> pool(static_cast<std::size_t>(d));
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < m_try; ++k) {
      std::uniform_int_distribution<int> pick(k, d - 1);
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + m_try);
    std::sort(out.begin(), out.end());
    return out;
  }

  int build(std::vector<int>& indices, int depth) {
    const int n = static_cast<int>(indices.size());
    double sum = 0.0, sumsq = 0.0;
    for (int idx : indices) {
      sum += y(idx);
      sumsq += y(idx) * y(idx);
    }
    const double mean = sum / n;
    const double node_sse = sumsq - sum * sum / n;

    const bool at_depth_limit = params.max_depth > 0 && depth >= params.max_depth;
    if (at_depth_limit || n < 2 * params.min_samples_leaf || node_sse <= 1e-12)
      return make_leaf(mean);

    SplitChoice best;
    best.total_sse = node_sse;
    std::vector<std::pair<double, double>> order(static_cast<std::size_t>(n));
    for (const int feature : sample_features()) {
      for (int k = 0; k < n; ++k) {
        const int idx = indices[static_cast<std::size_t>(k)];
        order[static_cast<std::size_t>(k)] = {x(idx, feature), y(idx)};
      }
      std::sort(order.begin(), order.end());
      double left_sum = 0.0, left_sumsq = 0.0;
      for (int k = 1; k < n; ++k) {
        const auto& [value, target] = order[static_cast<std::size_t>(k - 1)];
        left_sum += target;
        left_sumsq += target * target;
        if (value == order[static_cast<std::size_t>(k)].first) continue;
        if (k < params.min_samples_leaf || n - k < params.min_samples_leaf) continue;
        const double right_sum = sum - left_sum;
        const double right_sumsq = sumsq - left_sumsq;
        const double sse = (left_sumsq - left_sum * left_sum / k) +
                           (right_sumsq - right_sum * right_sum / (n - k));
        if (sse < best.total_sse) {
          best.feature = feature;
          best.threshold = 0.5 * (value + order[static_cast<std::size_t>(k)].first);
          best.total_sse = sse;
        }
      }
    }
    if (best.feature < 0) return make_leaf(mean);

    std::vector<int> left, right;
    left.reserve(static_cast<std::size_t>(n));
    right.reserve(static_cast<std::size_t>(n));
    for (int idx : indices)
      (x(idx, best.feature) <= best.threshold ? left : right).push_back(idx);
    indices.clear();
    indices.shrink_to_fit();

    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{best.feature, best.threshold, -1, -1, 0.0});
    const int left_id = build(left, depth + 1);
    const int right_id = build(right, depth + 1);
    nodes[static_cast<std::size_t>(node_id)].left = left_id;
    nodes[static_cast<std::size_t>(node_id)].right = right_id;
    return node_id;
  }

  int make_leaf(double value) {
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, value});
    return static_cast<int>(nodes.size()) - 1;
  }
};

int resolve_m_try(const ForestParams& params, Eigen::Index d) {
  if (params.m_try > 0) return std::min<int>(params.m_try, static_cast<int>(d));
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
}

}  // namespace

RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::vector<int>& indices, const ForestParams& params,
                        std::uint64_t seed) {
  if (x.rows() != y.size()) throw DataError("forest: x and y row counts differ");
  if (indices.empty()) throw DataError("forest: empty training index set");
  if (params.min_samples_leaf < 1) throw DataError("forest: min_samples_leaf must be >= 1");
  for (int idx : indices)
    if (idx < 0 || idx >= x.rows()) throw DataError("forest: training index out of range");

  // Canonical index order: the tree depends only on the index multiset.
  std::vector<int> sorted = indices;
  std::sort(sorted.begin(), sorted.end());

  TreeBuilder builder{x, y, params, resolve_m_try(params, x.cols()), std::mt19937_64(seed), {}};
  builder.build(sorted, 0);
  RegressionTree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

double RandomForest::predict(const Eigen::RowVectorXd& x) const {
  if (trees.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return sum / static_cast<double>(trees.size());
}

RandomForest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const ForestParams& params) {
  if (x.rows() == 0) throw DataError("forest: empty training set");
  if (params.tree_count < 1) throw DataError("forest: tree_count must be >= 1");
  const int n = static_cast<int>(x.rows());
  RandomForest forest;
  forest.trees.reserve(static_cast<std::size_t>(params.tree_count));
  for (int t = 0; t < params.tree_count; ++t) {
    const std::uint64_t tree_seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
    std::vector<int> indices(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      std::mt19937_64 boot_rng(derive_seed(tree_seed, 0));
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (auto& idx : indices) idx = pick(boot_rng);
    } else {
      std::iota(indices.begin(), indices.end(), 0);
    }
    forest.trees.push_back(fit_tree(x, y, indices, params, derive_seed(tree_seed, 1)));
  }
  return forest;
}

std::string to_string(BankVariant v) {
  return v == BankVariant::kRawAog ? "raw" : "reduced";
}

ForestBank fit_bank(const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets,
                    const grid::GridSpec& spec, double t_pred, BankVariant variant,
                    const ForestParams& params, BankTrainReport* report) {
  spec.validate();
  if (x.rows() != targets.rows()) throw DataError("forest: feature/target row counts differ");
  if (targets.cols() != spec.cell_count())
    throw DataError("forest: target column count does not match the grid");

  const auto start = std::chrono::steady_clock::now();
  ForestBank bank;
  bank.spec = spec;
  bank.t_pred = t_pred;
  bank.variant = variant;
  bank.feature_dim = static_cast<int>(x.cols());
  bank.cells.resize(static_cast<std::size_t>(spec.cell_count()));

  int trained = 0, zeros = 0;
  for (int c = 0; c < spec.cell_count(); ++c) {
    const Eigen::VectorXd y = targets.col(c);
    CellPredictor& cell = bank.cells[static_cast<std::size_t>(c)];
    if ((y.array() == 0.0).all()) {
      cell.zero = true;
      ++zeros;
      continue;
    }
    ForestParams cell_params = params;
    cell_params.seed = derive_seed(params.seed, 10000 + static_cast<std::uint64_t>(c));
    cell.forest = fit_forest(x, y, cell_params);
    ++trained;
  }
  if (report) {
    report->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report->trained_cells = trained;
    report->zero_cells = zeros;
  }
  return bank;
}

grid::PredictedOccupancyGrid predict_pog(const ForestBank& bank, const Eigen::RowVectorXd& x) {
  if (x.size() != bank.feature_dim)
    throw DataError("forest: feature vector length " + std::to_string(x.size()) +
                    " does not match the bank feature dim " + std::to_string(bank.feature_dim));
  grid::PredictedOccupancyGrid pog(bank.spec, bank.t_pred);
  for (int c = 0; c < bank.spec.cell_count(); ++c) {
    const CellPredictor& cell = bank.cells[static_cast<std::size_t>(c)];
    pog.probs[static_cast<std::size_t>(c)] =
        cell.zero ? 0.0 : std::clamp(cell.forest.predict(x), 0.0, 1.0);
  }
  return pog;
}

namespace {

void write_bytes(std::ofstream& f, const void* data, std::size_t size) {
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void write_u32(std::ofstream& f, std::uint32_t v) { write_bytes(f, &v, sizeof v); }
void write_i32(std::ofstream& f, std::int32_t v) { write_bytes(f, &v, sizeof v); }
void write_f64(std::ofstream& f, double v) { write_bytes(f, &v, sizeof v); }

void read_bytes(std::ifstream& f, void* data, std::size_t size, const std::string& path) {
  f.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!f) throw DataError("forest bank: truncated file " + path);
}

std::uint32_t read_u32(std::ifstream& f, const std::string& path) {
  std::uint32_t v = 0;
  read_bytes(f, &v, sizeof v, path);
  return v;
}

std::int32_t read_i32(std::ifstream& f, const std::string& path) {
  std::int32_t v = 0;
  read_bytes(f, &v, sizeof v, path);
  return v;
}

double read_f64(std::ifstream& f, const std::string& path) {
  double v = 0.0;
  read_bytes(f, &v, sizeof v, path);
  return v;
}

constexpr char kMagic[8] = {'P', 'O', 'G', 'R', 'F', 'B', '0', '1'};

}  // namespace

void save_bank(const ForestBank& bank, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("forest bank: cannot open " + path + " for writing");
  write_bytes(f, kMagic, sizeof kMagic);
  write_u32(f, static_cast<std::uint32_t>(bank.spec.rows));
  write_u32(f, static_cast<std::uint32_t>(bank.spec.cols));
  write_f64(f, bank.spec.cell_length);
  write_f64(f, bank.spec.cell_width);
  write_f64(f, bank.spec.origin.x);
  write_f64(f, bank.spec.origin.y);
  write_f64(f, bank.spec.ego_cg.x);
  write_f64(f, bank.spec.ego_cg.y);
  write_f64(f, bank.t_pred);
  write_u32(f, static_cast<std::uint32_t>(bank.variant));
  write_u32(f, static_cast<std::uint32_t>(bank.feature_dim));
  write_u32(f, static_cast<std::uint32_t>(bank.cells.size()));
  for (const auto& cell : bank.cells) {
    write_u32(f, cell.zero ? 1 : 0);
    if (cell.zero) continue;
    write_u32(f, static_cast<std::uint32_t>(cell.forest.trees.size()));
    for (const auto& tree : cell.forest.trees) {
      write_u32(f, static_cast<std::uint32_t>(tree.nodes.size()));
      for (const auto& n : tree.nodes) {
        write_i32(f, n.feature);
        write_f64(f, n.threshold);
        write_i32(f, n.left);
        write_i32(f, n.right);
        write_f64(f, n.value);
      }
    }
  }
  if (!f) throw DataError("forest bank: write failed for " + path);
}

ForestBank load_bank(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("forest bank: cannot open " + path);
  char magic[8];
  read_bytes(f, magic, sizeof magic, path);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError("forest bank: bad magic in " + path);
  ForestBank bank;
  bank.spec.rows = static_cast<int>(read_u32(f, path));
  bank.spec.cols = static_cast<int>(read_u32(f, path));
  bank.spec.cell_length = read_f64(f, path);
  bank.spec.cell_width = read_f64(f, path);
  bank.spec.origin.x = read_f64(f, path);
  bank.spec.origin.y = read_f64(f, path);
  bank.spec.ego_cg.x = read_f64(f, path);
  bank.spec.ego_cg.y = read_f64(f, path);
  bank.t_pred = read_f64(f, path);
  bank.variant = static_cast<BankVariant>(read_u32(f, path));
  bank.feature_dim = static_cast<int>(read_u32(f, path));
  bank.spec.validate();
  const std::uint32_t cell_count = read_u32(f, path);
  if (cell_count != static_cast<std::uint32_t>(bank.spec.cell_count()))
    throw DataError("forest bank: cell count does not match the grid in " + path);
  bank.cells.resize(cell_count);
  for (auto& cell : bank.cells) {
    cell.zero = read_u32(f, path) != 0;
    if (cell.zero) continue;
    const std::uint32_t tree_count = read_u32(f, path);
    cell.forest.trees.resize(tree_count);
    for (auto& tree : cell.forest.trees) {
      const std::uint32_t node_count = read_u32(f, path);
      tree.nodes.resize(node_count);
      for (auto& n : tree.nodes) {
        n.feature = read_i32(f, path);
        n.threshold = read_f64(f, path);
        n.left = read_i32(f, path);
        n.right = read_i32(f, path);
        n.value = read_f64(f, path);
      }
    }
  }
  return bank;
}

}  // namespace pog::forest
