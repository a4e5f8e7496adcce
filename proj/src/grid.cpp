#include "pog/grid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pog::grid {

void GridSpec::validate() const {
  if (rows <= 0 || cols <= 0)
    throw DataError("grid spec: rows and cols must be positive");
  if (!(cell_length > 0.0) || !(cell_width > 0.0))
    throw DataError("grid spec: cell dimensions must be positive");
}

GridSpec GridSpec::paper_default() { return GridSpec{}; }

GridSpec GridSpec::desk_default(int n) {
  GridSpec s;
  s.rows = n;
  s.cols = n;
  s.cell_length = 40.0 / n;
  s.cell_width = 40.0 / n;
  return s;
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.rows == b.rows && a.cols == b.cols && a.cell_length == b.cell_length &&
         a.cell_width == b.cell_width && a.origin == b.origin && a.ego_cg == b.ego_cg;
}

bool operator==(const CellAttributes& a, const CellAttributes& b) {
  return a.occupancy == b.occupancy && a.speed == b.speed && a.heading == b.heading &&
         a.accel_long == b.accel_long && a.accel_lat == b.accel_lat;
}

namespace {

// Continuous cell coordinate -> index with the smaller-index boundary rule:
// a point exactly on a shared edge belongs to the cell below it.
std::optional<int> axis_index(double coord, double origin, double step, int count) {
  const double u = (coord - origin) / step;
  if (u < 0.0 || u > static_cast<double>(count)) return std::nullopt;
  double fl = std::floor(u);
  if (u == fl && u > 0.0) fl -= 1.0;
  const int idx = static_cast<int>(fl);
  if (idx < 0 || idx >= count) return std::nullopt;
  return idx;
}

}  // namespace

std::optional<CellIndex> world_to_cell(const GridSpec& spec, const Vec2& p) {
  const auto i = axis_index(p.x, spec.origin.x, spec.cell_length, spec.cols);
  const auto j = axis_index(p.y, spec.origin.y, spec.cell_width, spec.rows);
  if (!i || !j) return std::nullopt;
  return CellIndex{*i, *j};
}

Vec2 cell_center(const GridSpec& spec, const CellIndex& c) {
  return {spec.origin.x + (c.i + 0.5) * spec.cell_length,
          spec.origin.y + (c.j + 0.5) * spec.cell_width};
}

std::vector<CellIndex> rasterize_footprint(const GridSpec& spec, const OrientedRect& rect) {
  const double c = std::cos(rect.heading);
  const double s = std::sin(rect.heading);
  const double hl = 0.5 * rect.length;
  const double hw = 0.5 * rect.width;

  // Conservative axis-aligned bound of the rectangle.
  const double rx = std::abs(c) * hl + std::abs(s) * hw;
  const double ry = std::abs(s) * hl + std::abs(c) * hw;
  int i_lo = static_cast<int>(std::floor((rect.center.x - rx - spec.origin.x) / spec.cell_length));
  int i_hi = static_cast<int>(std::ceil((rect.center.x + rx - spec.origin.x) / spec.cell_length));
  int j_lo = static_cast<int>(std::floor((rect.center.y - ry - spec.origin.y) / spec.cell_width));
  int j_hi = static_cast<int>(std::ceil((rect.center.y + ry - spec.origin.y) / spec.cell_width));
  i_lo = std::max(i_lo, 0);
  j_lo = std::max(j_lo, 0);
  i_hi = std::min(i_hi, spec.cols - 1);
  j_hi = std::min(j_hi, spec.rows - 1);

  std::vector<CellIndex> out;
  for (int j = j_lo; j <= j_hi; ++j) {
    for (int i = i_lo; i <= i_hi; ++i) {
      const Vec2 d = cell_center(spec, {i, j}) - rect.center;
      const double lx = c * d.x + s * d.y;
      const double ly = -s * d.x + c * d.y;
      if (lx >= -hl && lx < hl && ly >= -hw && ly < hw) out.push_back({i, j});
    }
  }
  return out;
}

std::vector<double> flatten(const AugmentedOccupancyGrid& aog) {
  std::vector<double> flat(static_cast<std::size_t>(aog.spec.flat_size()));
  std::size_t k = 0;
  for (const auto& cell : aog.cells) {
    flat[k++] = cell.occupancy;
    flat[k++] = cell.speed;
    flat[k++] = cell.heading;
    flat[k++] = cell.accel_long;
    flat[k++] = cell.accel_lat;
  }
  return flat;
}

AugmentedOccupancyGrid unflatten(const GridSpec& spec, const std::vector<double>& flat,
                                 double t0) {
  if (flat.size() != static_cast<std::size_t>(spec.flat_size()))
    throw DataError("unflatten: vector length " + std::to_string(flat.size()) +
                    " does not match grid flat size " + std::to_string(spec.flat_size()));
  AugmentedOccupancyGrid aog(spec, t0);
  std::size_t k = 0;
  for (auto& cell : aog.cells) {
    cell.occupancy = flat[k++];
    cell.speed = flat[k++];
    cell.heading = flat[k++];
    cell.accel_long = flat[k++];
    cell.accel_lat = flat[k++];
  }
  return aog;
}

void write_pgm(const PredictedOccupancyGrid& pog, std::ostream& out) {
  out << "P5\n" << pog.spec.cols << " " << pog.spec.rows << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(pog.spec.cols));
  for (int j = pog.spec.rows - 1; j >= 0; --j) {
    for (int i = 0; i < pog.spec.cols; ++i) {
      const double p = std::clamp(pog.at({i, j}), 0.0, 1.0);
      row[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(255.0 * p));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("pgm: write failed");
}

void write_pgm_file(const PredictedOccupancyGrid& pog, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("pgm: cannot open " + path + " for writing");
  write_pgm(pog, f);
}

namespace {

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace

PredictedOccupancyGrid read_pgm(std::istream& in, const GridSpec& spec, double t_pred) {
  if (pgm_token(in) != "P5") throw DataError("pgm: expected binary P5 header");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pgm_token(in));
    h = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw DataError("pgm: malformed header");
  }
  if (w != spec.cols || h != spec.rows)
    throw DataError("pgm: image size " + std::to_string(w) + "x" + std::to_string(h) +
                    " does not match grid " + std::to_string(spec.cols) + "x" +
                    std::to_string(spec.rows));
  if (maxval != 255) throw DataError("pgm: expected maxval 255");
  PredictedOccupancyGrid pog(spec, t_pred);
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int j = spec.rows - 1; j >= 0; --j) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw DataError("pgm: truncated pixel data");
    for (int i = 0; i < w; ++i) pog.at({i, j}) = row[static_cast<std::size_t>(i)] / 255.0;
  }
  return pog;
}

PredictedOccupancyGrid read_pgm_file(const std::string& path, const GridSpec& spec,
                                     double t_pred) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("pgm: cannot open " + path);
  return read_pgm(f, spec, t_pred);
}

}  // namespace pog::grid
