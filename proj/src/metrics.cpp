#include "pog/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pog::metrics {

namespace {

void check_same_grid(const grid::PredictedOccupancyGrid& a,
                     const grid::PredictedOccupancyGrid& b) {
  if (!(a.spec == b.spec)) throw DataError("metrics: grids have different specs");
}

// Shared core: error over the cells selected by in_band.
template <typename BandPredicate>
std::optional<PogError> error_over(const grid::PredictedOccupancyGrid& truth,
                                   const grid::PredictedOccupancyGrid& estimate,
                                   BandPredicate in_band) {
  int sym_diff = 0;
  int union_size = 0;
  double sum_sq = 0.0;
  bool any_cell = false;
  for (std::size_t c = 0; c < truth.probs.size(); ++c) {
    const double p = truth.probs[c];
    if (!in_band(p)) continue;
    any_cell = true;
    const double q = estimate.probs[c];
    const bool in_truth = p != 0.0;
    const bool in_est = q != 0.0;
    if (in_truth != in_est) ++sym_diff;
    if (in_truth || in_est) ++union_size;
    const double d = q - p;
    sum_sq += d * d;
  }
  if (!any_cell) return std::nullopt;
  PogError out;
  out.k = sym_diff;
  if (sym_diff == 0) {
    out.fallback = true;
    out.k = union_size;
    if (union_size == 0) return std::nullopt;
  }
  out.error = std::sqrt(sum_sq / out.k);
  return out;
}

}  // namespace

PogError pog_error(const grid::PredictedOccupancyGrid& truth,
                   const grid::PredictedOccupancyGrid& estimate) {
  check_same_grid(truth, estimate);
  const auto result = error_over(truth, estimate, [](double) { return true; });
  if (result) return *result;
  // Both grids empty: no deviation anywhere.
  return PogError{0.0, 0, true};
}

BandedErrors banded_errors(const grid::PredictedOccupancyGrid& truth,
                           const grid::PredictedOccupancyGrid& estimate) {
  check_same_grid(truth, estimate);
  BandedErrors out;
  out.low = error_over(truth, estimate, [](double p) { return p >= 0.0 && p <= 0.25; });
  out.mid = error_over(truth, estimate, [](double p) { return p > 0.25 && p <= 0.75; });
  out.high = error_over(truth, estimate, [](double p) { return p > 0.75 && p <= 1.0; });
  return out;
}

ReconstructionSummary reconstruction_summary(
    const std::vector<double>& errors, const std::vector<std::vector<double>>& raw_vectors) {
  if (errors.empty()) throw DataError("metrics: no reconstruction errors");
  ReconstructionSummary s;
  for (double e : errors) s.mean_error += e;
  s.mean_error /= static_cast<double>(errors.size());
  std::size_t cells = 0;
  for (const auto& vec : raw_vectors) {
    for (double v : vec) {
      s.mean_abs_cell += std::abs(v);
      ++cells;
    }
  }
  if (cells == 0) throw DataError("metrics: no raw cell values");
  s.mean_abs_cell /= static_cast<double>(cells);
  return s;
}

int ConfusionMatrix::total() const {
  int t = 0;
  for (const auto& row : counts)
    for (int v : row) t += v;
  return t;
}

double ConfusionMatrix::accuracy() const {
  const int n = total();
  if (n == 0) throw DataError("metrics: empty confusion matrix");
  int correct = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) correct += counts[k][k];
  return static_cast<double>(correct) / n;
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& classes,
                                 const std::vector<std::string>& truths,
                                 const std::vector<std::string>& predictions) {
  if (truths.size() != predictions.size())
    throw DataError("metrics: truth and prediction counts differ");
  ConfusionMatrix m;
  m.classes = classes;
  m.counts.assign(classes.size(), std::vector<int>(classes.size(), 0));
  const auto index_of = [&](const std::string& label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw DataError("metrics: unknown label '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
  };
  for (std::size_t k = 0; k < truths.size(); ++k)
    m.counts[index_of(truths[k])][index_of(predictions[k])] += 1;
  return m;
}

}  // namespace pog::metrics
