#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pog/grid.hpp"

using namespace pog;
using namespace pog::grid;

TEST_CASE("GridSpec validation and defaults") {
  CHECK_NOTHROW(GridSpec{}.validate());
  GridSpec bad;
  bad.rows = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = GridSpec{};
  bad.cell_width = -1.0;
  CHECK_THROWS_AS(bad.validate(), DataError);

  const GridSpec paper = GridSpec::paper_default();
  CHECK(paper.rows == 80);
  CHECK(paper.cols == 80);
  CHECK(paper.cell_length == 0.5);
  CHECK(paper.cell_width == 0.5);
  CHECK(paper.extent_x() == doctest::Approx(40.0));
  CHECK(paper.extent_y() == doctest::Approx(40.0));
  CHECK(paper.flat_size() == 80 * 80 * 5);

  const GridSpec desk = GridSpec::desk_default(32);
  CHECK(desk.rows == 32);
  CHECK(desk.cols == 32);
  CHECK(desk.cell_length == doctest::Approx(1.25));
  CHECK(desk.extent_x() == doctest::Approx(40.0));
  CHECK(desk.origin == paper.origin);
}

TEST_CASE("world_to_cell boundary rules") {
  const GridSpec spec = GridSpec::paper_default();

  // Interior point.
  const auto c = world_to_cell(spec, {0.1, 0.1});
  REQUIRE(c.has_value());
  CHECK(c->i == 40);
  CHECK(c->j == 40);

  // A point on a shared edge belongs to the smaller-index cell.
  const auto edge = world_to_cell(spec, {-19.5, -19.5});
  REQUIRE(edge.has_value());
  CHECK(edge->i == 0);
  CHECK(edge->j == 0);

  // Outer corners are covered (closed domain).
  const auto lo = world_to_cell(spec, {-20.0, -20.0});
  REQUIRE(lo.has_value());
  CHECK(lo->i == 0);
  CHECK(lo->j == 0);
  const auto hi = world_to_cell(spec, {20.0, 20.0});
  REQUIRE(hi.has_value());
  CHECK(hi->i == 79);
  CHECK(hi->j == 79);

  CHECK_FALSE(world_to_cell(spec, {20.0001, 0.0}).has_value());
  CHECK_FALSE(world_to_cell(spec, {0.0, -20.0001}).has_value());
}

TEST_CASE("cell_center round-trips through world_to_cell") {
  const GridSpec spec = GridSpec::desk_default(20);
  for (int j = 0; j < spec.rows; j += 3)
    for (int i = 0; i < spec.cols; i += 3) {
      const auto back = world_to_cell(spec, cell_center(spec, {i, j}));
      REQUIRE(back.has_value());
      CHECK(back->i == i);
      CHECK(back->j == j);
    }
}

TEST_CASE("rasterize_footprint covers the expected cell count") {
  const GridSpec spec = GridSpec::paper_default();
  // Center on a cell center: a 4.5 x 2.0 footprint on 0.5 m cells covers
  // 9 columns and, due to the half-open width interval, 4 rows.
  const Vec2 center = cell_center(spec, {40, 40});
  const auto cells = rasterize_footprint(spec, {center, 0.0, 4.5, 2.0});
  CHECK(cells.size() == 36);

  // Every covered center really lies inside the rectangle.
  for (const auto& c : cells) {
    const Vec2 d = cell_center(spec, c) - center;
    CHECK(std::abs(d.x) <= 2.25);
    CHECK(std::abs(d.y) <= 1.0);
  }
}

TEST_CASE("rasterize_footprint half-open membership") {
  const GridSpec spec = GridSpec::paper_default();
  // A 0.5 x 0.5 square centered on a cell corner touches four cell centers
  // at local coordinates (+-0.25, +-0.25); only the closed lower edges keep
  // theirs, so exactly one cell (the south-west one) is covered.
  const auto cells = rasterize_footprint(spec, {{0.0, 0.0}, 0.0, 0.5, 0.5});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].i == 39);
  CHECK(cells[0].j == 39);
}

TEST_CASE("rasterize_footprint quarter-turn congruence") {
  const GridSpec spec = GridSpec::paper_default();
  const CellIndex anchor{40, 40};
  const Vec2 center = cell_center(spec, anchor);
  // 4.4 x 1.8 keeps every footprint edge 0.05 m away from the cell-center
  // lattice, so the rounding in cos(pi/2) cannot flip a membership test.
  const auto straight = rasterize_footprint(spec, {center, 0.0, 4.4, 1.8});
  const auto turned = rasterize_footprint(spec, {center, std::numbers::pi / 2.0, 4.4, 1.8});
  CHECK(straight.size() == turned.size());

  // Rotating the rectangle by +90 degrees maps offset (di, dj) to (-dj, di).
  std::set<std::pair<int, int>> expect;
  for (const auto& c : straight)
    expect.insert({-(c.j - anchor.j) + anchor.i, (c.i - anchor.i) + anchor.j});
  std::set<std::pair<int, int>> got;
  for (const auto& c : turned) got.insert({c.i, c.j});
  CHECK(expect == got);
}

TEST_CASE("rasterize_footprint clips at the grid border") {
  const GridSpec spec = GridSpec::desk_default(10);
  const auto cells = rasterize_footprint(spec, {{-20.0, -20.0}, 0.0, 12.0, 12.0});
  CHECK(!cells.empty());
  for (const auto& c : cells) {
    CHECK(c.i >= 0);
    CHECK(c.j >= 0);
    CHECK(c.i < spec.cols);
    CHECK(c.j < spec.rows);
  }
  // Fully outside the grid.
  CHECK(rasterize_footprint(spec, {{100.0, 100.0}, 0.3, 4.0, 2.0}).empty());
}

TEST_CASE("flatten layout and unflatten round-trip") {
  const GridSpec spec = GridSpec::desk_default(4);
  AugmentedOccupancyGrid aog(spec, 1.5);
  aog.at({1, 0}) = CellAttributes{1.0, 7.0, 0.25, -1.0, 0.5};
  aog.at({3, 2}) = CellAttributes{1.0, 3.0, -0.5, 2.0, 0.0};

  const auto flat = flatten(aog);
  REQUIRE(flat.size() == static_cast<std::size_t>(spec.flat_size()));
  // Cell (i=1, j=0) starts at (0*cols + 1) * 5.
  CHECK(flat[5] == 1.0);
  CHECK(flat[6] == 7.0);
  CHECK(flat[7] == 0.25);
  CHECK(flat[8] == -1.0);
  CHECK(flat[9] == 0.5);

  const auto back = unflatten(spec, flat, 1.5);
  CHECK(back.t0 == 1.5);
  for (int j = 0; j < spec.rows; ++j)
    for (int i = 0; i < spec.cols; ++i) CHECK(back.at({i, j}) == aog.at({i, j}));

  CHECK_THROWS_AS(unflatten(spec, std::vector<double>(7), 0.0), DataError);
}

TEST_CASE("pgm round-trip and orientation") {
  const GridSpec spec = GridSpec::desk_default(8);
  PredictedOccupancyGrid pog(spec, 2.0);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> level(0, 255);
  for (auto& p : pog.probs) p = level(rng) / 255.0;

  std::stringstream buf;
  write_pgm(pog, buf);
  const auto back = read_pgm(buf, spec, 2.0);
  for (std::size_t c = 0; c < pog.probs.size(); ++c)
    CHECK(back.probs[c] == doctest::Approx(pog.probs[c]).epsilon(1e-12));

  // Values that need rounding survive to the nearest shade.
  PredictedOccupancyGrid shades(spec, 0.5);
  shades.at({0, 0}) = 0.3;
  std::stringstream buf2;
  write_pgm(shades, buf2);
  const auto round_trip = read_pgm(buf2, spec, 0.5);
  CHECK(round_trip.at({0, 0}) == doctest::Approx(77.0 / 255.0));

  // North-up: the first data byte is the north-west cell (j = rows-1, i = 0).
  PredictedOccupancyGrid corner(spec, 0.0);
  corner.at({0, spec.rows - 1}) = 1.0;
  std::stringstream buf3;
  write_pgm(corner, buf3);
  const std::string bytes = buf3.str();
  const auto header_end = bytes.find("255\n") + 4;
  CHECK(static_cast<unsigned char>(bytes[header_end]) == 255);
  CHECK(static_cast<unsigned char>(bytes[header_end + 1]) == 0);
}

TEST_CASE("pgm rejects malformed input") {
  const GridSpec spec = GridSpec::desk_default(8);
  PredictedOccupancyGrid pog(spec, 0.0);
  std::stringstream buf;
  write_pgm(pog, buf);

  // Size mismatch against the expected grid.
  const GridSpec other = GridSpec::desk_default(4);
  std::stringstream copy(buf.str());
  CHECK_THROWS_AS(read_pgm(copy, other, 0.0), DataError);

  std::stringstream bad_magic("P2\n8 8\n255\n");
  CHECK_THROWS_AS(read_pgm(bad_magic, spec, 0.0), DataError);

  std::stringstream truncated("P5\n8 8\n255\n1234");
  CHECK_THROWS_AS(read_pgm(truncated, spec, 0.0), DataError);
}
