#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pog/common.hpp"

namespace pog::grid {

/// Number of attributes stored per augmented-grid cell:
/// occupancy flag, speed, heading, longitudinal accel, lateral accel.
inline constexpr int kAttributesPerCell = 5;

/// Geometry of the vehicle-fixed grid. Cell (i, j) spans
/// x in [origin.x + i*cell_length, origin.x + (i+1)*cell_length) and
/// y in [origin.y + j*cell_width,  origin.y + (j+1)*cell_width);
/// i is the column index (x direction), j the row index (y direction).
struct GridSpec {
  int rows{80};
  int cols{80};
  double cell_length{0.5};
  double cell_width{0.5};
  Vec2 origin{-20.0, -20.0};
  Vec2 ego_cg{2.5, 0.0};

  int cell_count() const { return rows * cols; }
  int flat_size() const { return rows * cols * kAttributesPerCell; }
  double extent_x() const { return cols * cell_length; }
  double extent_y() const { return rows * cell_width; }

  /// Throws DataError unless rows, cols and cell sizes are positive.
  void validate() const;

  /// 80x80 grid of 0.5 m cells covering a 40 m x 40 m area.
  static GridSpec paper_default();
  /// Square n x n grid covering the same 40 m x 40 m area.
  static GridSpec desk_default(int n);
};

bool operator==(const GridSpec& a, const GridSpec& b);

struct CellIndex {
  int i{0};  ///< column
  int j{0};  ///< row
  auto operator<=>(const CellIndex&) const = default;
};

struct CellAttributes {
  double occupancy{0.0};
  double speed{0.0};
  double heading{0.0};
  double accel_long{0.0};
  double accel_lat{0.0};
};

bool operator==(const CellAttributes& a, const CellAttributes& b);

/// Augmented occupancy grid: per-cell attribute tuples at a capture time.
struct AugmentedOccupancyGrid {
  GridSpec spec;
  double t0{0.0};
  std::vector<CellAttributes> cells;  ///< row-major, index j*cols + i

  explicit AugmentedOccupancyGrid(const GridSpec& s = GridSpec{}, double t = 0.0)
      : spec(s), t0(t), cells(static_cast<std::size_t>(s.cell_count())) {}

  CellAttributes& at(const CellIndex& c) {
    return cells[static_cast<std::size_t>(c.j) * spec.cols + c.i];
  }
  const CellAttributes& at(const CellIndex& c) const {
    return cells[static_cast<std::size_t>(c.j) * spec.cols + c.i];
  }
};

/// Predicted occupancy grid: per-cell occupancy probability at t0 + t_pred.
struct PredictedOccupancyGrid {
  GridSpec spec;
  double t_pred{0.0};
  std::vector<double> probs;  ///< row-major, index j*cols + i

  explicit PredictedOccupancyGrid(const GridSpec& s = GridSpec{}, double t = 0.0)
      : spec(s), t_pred(t), probs(static_cast<std::size_t>(s.cell_count()), 0.0) {}

  double& at(const CellIndex& c) {
    return probs[static_cast<std::size_t>(c.j) * spec.cols + c.i];
  }
  double at(const CellIndex& c) const {
    return probs[static_cast<std::size_t>(c.j) * spec.cols + c.i];
  }
};

/// Maps a world point to its cell, or nullopt when outside the grid.
/// Points exactly on a shared cell boundary resolve to the smaller index,
/// so the covered domain is closed on all outer edges.
std::optional<CellIndex> world_to_cell(const GridSpec& spec, const Vec2& p);

/// World coordinates of a cell center.
Vec2 cell_center(const GridSpec& spec, const CellIndex& c);

/// Cells whose center lies inside the oriented rectangle. Membership is
/// half-open in the rectangle frame ([-L/2, L/2) x [-W/2, W/2)) so that a
/// center exactly on the upper edge belongs to the neighbouring cell; this
/// keeps rasterization deterministic. Cells outside the grid are skipped.
std::vector<CellIndex> rasterize_footprint(const GridSpec& spec, const OrientedRect& rect);

/// Flattens an AOG to a vector of length 5*rows*cols. Order is row-major over
/// (j, i) with the five attributes of each cell contiguous (innermost).
std::vector<double> flatten(const AugmentedOccupancyGrid& aog);

/// Inverse of flatten; throws DataError on length mismatch.
AugmentedOccupancyGrid unflatten(const GridSpec& spec, const std::vector<double>& flat,
                                 double t0 = 0.0);

/// Writes a POG as a binary 8-bit PGM (P5). Pixel value is
/// round(255 * clamp(p, 0, 1)); image rows run north to south (row 0 of the
/// image is the grid row with the largest j).
void write_pgm(const PredictedOccupancyGrid& pog, std::ostream& out);
void write_pgm_file(const PredictedOccupancyGrid& pog, const std::string& path);

/// Reads a binary 8-bit PGM written by write_pgm; probabilities come back as
/// pixel/255. Throws DataError on malformed input.
PredictedOccupancyGrid read_pgm(std::istream& in, const GridSpec& spec, double t_pred);
PredictedOccupancyGrid read_pgm_file(const std::string& path, const GridSpec& spec,
                                     double t_pred);

}  // namespace pog::grid
