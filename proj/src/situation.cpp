#include "pog/situation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>

namespace pog::situation {

bool operator==(const BinaryImage& a, const BinaryImage& b) {
  return a.rows == b.rows && a.cols == b.cols && a.pixels == b.pixels;
}

double idm_distance(const BinaryImage& test, const BinaryImage& reference, int delta) {
  if (test.rows != reference.rows || test.cols != reference.cols)
    throw DataError("idm: image sizes differ");
  if (delta < 0) throw DataError("idm: warp range must be non-negative");
  double total = 0.0;
  for (int j = 0; j < test.rows; ++j) {
    const int n_lo = std::max(0, j - delta);
    const int n_hi = std::min(test.rows - 1, j + delta);
    for (int i = 0; i < test.cols; ++i) {
      const int m_lo = std::max(0, i - delta);
      const int m_hi = std::min(test.cols - 1, i + delta);
      const std::uint8_t a = test.at(i, j);
      int best = 1;
      for (int n = n_lo; n <= n_hi && best > 0; ++n)
        for (int m = m_lo; m <= m_hi; ++m)
          if (reference.at(m, n) == a) {
            best = 0;
            break;
          }
      total += best;
    }
  }
  return total;
}

BinaryImage render_road_image(const scenario::RoadGeometry& road, const grid::GridSpec& spec) {
  spec.validate();
  BinaryImage img(spec.rows, spec.cols);
  for (int j = 0; j < spec.rows; ++j)
    for (int i = 0; i < spec.cols; ++i)
      img.at(i, j) = road.contains(grid::cell_center(spec, {i, j})) ? 1 : 0;
  return img;
}

namespace {

std::vector<Vec2> rect_poly(double x0, double x1, double y0, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

}  // namespace

TemplateLibrary make_default_templates(const grid::GridSpec& spec) {
  const double x_min = spec.origin.x;
  const double x_max = spec.origin.x + spec.extent_x();
  const double y_min = spec.origin.y;
  const double y_max = spec.origin.y + spec.extent_y();

  // Junction frame of the generated scene family: main road corridor and the
  // branch corridor south of it.
  const double main_lo = -1.75, main_hi = 5.25;
  const double branch_lo = 7.5, branch_hi = 14.5;

  const auto main_full = rect_poly(x_min, x_max, main_lo, main_hi);
  const auto main_west = rect_poly(x_min, branch_hi, main_lo, main_hi);
  const auto branch_south = rect_poly(branch_lo, branch_hi, y_min, main_lo);
  const auto branch_north = rect_poly(branch_lo, branch_hi, main_hi, y_max);
  const auto bar_ns = rect_poly(branch_lo, branch_hi, y_min, y_max);
  const auto stem_west = rect_poly(x_min, branch_lo, main_lo, main_hi);

  const OrientedRect diag{{(branch_lo + branch_hi) / 2.0, (main_lo + main_hi) / 2.0},
                          std::numbers::pi / 4.0,
                          2.0 * (x_max - x_min),
                          main_hi - main_lo};

  std::vector<std::pair<std::string, std::vector<std::vector<Vec2>>>> layouts = {
      {"straight_ew", {main_full}},
      {"straight_ns", {bar_ns}},
      {"diagonal", {diag.corners()}},
      {"curve_left", {main_west, branch_north}},
      {"curve_right", {main_west, branch_south}},
      {"tee_south", {main_full, branch_south}},
      {"tee_north", {main_full, branch_north}},
      {"tee_west", {bar_ns, stem_west}},
      {"four_way", {main_full, branch_south, branch_north}},
  };

  TemplateLibrary lib;
  for (auto& [label, polys] : layouts) {
    scenario::RoadGeometry road;
    road.drivable = polys;
    lib.entries.push_back({label, render_road_image(road, spec)});
  }
  return lib;
}

RoadClassification classify_road(const BinaryImage& image, const TemplateLibrary& library,
                                 int k, int delta) {
  if (library.entries.empty()) throw DataError("classify_road: empty template library");
  if (k < 1) throw DataError("classify_road: k must be >= 1");
  k = std::min<int>(k, static_cast<int>(library.entries.size()));

  std::vector<std::pair<double, int>> dist;
  dist.reserve(library.entries.size());
  for (std::size_t t = 0; t < library.entries.size(); ++t)
    dist.emplace_back(idm_distance(image, library.entries[t].image, delta),
                      static_cast<int>(t));
  std::sort(dist.begin(), dist.end());

  // Majority vote among the k nearest; ties toward smaller summed distance,
  // then the lower first template index.
  struct Vote {
    int count{0};
    double sum{0.0};
    int first_index{std::numeric_limits<int>::max()};
  };
  std::map<std::string, Vote> votes;
  for (int n = 0; n < k; ++n) {
    const auto& [d, idx] = dist[static_cast<std::size_t>(n)];
    Vote& v = votes[library.entries[static_cast<std::size_t>(idx)].label];
    v.count += 1;
    v.sum += d;
    v.first_index = std::min(v.first_index, idx);
  }
  const auto better = [](const Vote& a, const Vote& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.sum != b.sum) return a.sum < b.sum;
    return a.first_index < b.first_index;
  };
  const Vote* best = nullptr;
  std::string best_label;
  for (const auto& [label, v] : votes) {
    if (!best || better(v, *best)) {
      best = &v;
      best_label = label;
    }
  }
  return {best_label, best->first_index, dist[0].first};
}

std::string to_string(Constellation c) {
  switch (c) {
    case Constellation::kLongitudinal: return "longitudinal";
    case Constellation::kOncoming: return "oncoming";
    case Constellation::kCrossingFromLeft: return "crossing_from_left";
    case Constellation::kCrossingFromRight: return "crossing_from_right";
    case Constellation::kOnTheLeft: return "on_the_left";
    case Constellation::kOnTheRight: return "on_the_right";
  }
  return "unknown";
}

std::string to_string(IntendedPath p) {
  switch (p) {
    case IntendedPath::kStraight: return "straight";
    case IntendedPath::kLeft: return "left";
    case IntendedPath::kRight: return "right";
  }
  return "unknown";
}

Constellation classify_constellation(const scenario::StateVector& ego,
                                     const scenario::StateVector& participant,
                                     double lane_corridor_halfwidth) {
  const double lane_dir = ego.heading + std::atan(ego.ego_lane_slope);
  const double delta = normalize_angle(participant.heading - lane_dir);
  const double quarter = std::numbers::pi / 4.0;

  if (std::abs(delta) <= quarter) {
    const double dx = participant.x - ego.x;
    const double dy = participant.y - ego.y;
    const double lateral = -std::sin(lane_dir) * dx + std::cos(lane_dir) * dy;
    if (std::abs(lateral) <= lane_corridor_halfwidth) return Constellation::kLongitudinal;
    return lateral > 0.0 ? Constellation::kOnTheLeft : Constellation::kOnTheRight;
  }
  if (std::abs(normalize_angle(delta - std::numbers::pi)) <= quarter)
    return Constellation::kOncoming;
  return delta > 0.0 ? Constellation::kCrossingFromRight : Constellation::kCrossingFromLeft;
}

namespace {

Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }

// Distance along the EGO ray to the line carrying a lane segment, or nullopt
// when (anti)parallel.
std::optional<double> ray_line_distance(const Vec2& pos, const Vec2& dir, const Vec2& q,
                                        const Vec2& g) {
  const double den = dir.cross(g);
  if (std::abs(den) < 1e-9) return std::nullopt;
  return (q - pos).cross(g) / den;
}

}  // namespace

std::vector<Vec2> build_ego_path(const scenario::Scene& scene, IntendedPath intent,
                                 const RelevanceConfig& cfg) {
  const auto& ego = scene.ego;
  const double reach = std::max(cfg.min_path_length,
                                ego.state.speed * scene.horizon + ego.footprint.length);
  const Vec2 pos = ego.state.position();
  const double h = ego.state.heading;
  const Vec2 dir = unit(h);

  if (intent == IntendedPath::kStraight) return {pos, pos + dir * reach};

  const double side = intent == IntendedPath::kLeft ? 1.0 : -1.0;
  const double target_heading = normalize_angle(h + side * std::numbers::pi / 2.0);
  const Vec2 target_dir = unit(target_heading);

  // Crossing distance to the nearest branch lane running in the turn
  // direction; fall back to an immediate arc when the road has none.
  std::optional<double> along;
  for (const auto& lane : scene.road.lanes) {
    for (std::size_t k = 0; k + 1 < lane.size(); ++k) {
      const Vec2 seg = lane[k + 1] - lane[k];
      const double seg_heading = std::atan2(seg.y, seg.x);
      if (std::abs(normalize_angle(seg_heading - target_heading)) > std::numbers::pi / 6.0)
        continue;
      const auto t = ray_line_distance(pos, dir, lane[k], target_dir);
      if (t && *t > 0.0 && (!along || *t < *along)) along = *t;
    }
  }

  const double radius = cfg.ego_turn_radius;
  const double straight_len = along ? std::max(0.0, *along - radius) : 0.0;
  const Vec2 turn_start = pos + dir * straight_len;
  const Vec2 center = turn_start + Vec2{-std::sin(h), std::cos(h)} * (side * radius);

  std::vector<Vec2> path{pos};
  if (straight_len > 0.0) path.push_back(turn_start);
  const int arc_samples = 9;
  const double start_angle = std::atan2(turn_start.y - center.y, turn_start.x - center.x);
  for (int n = 1; n <= arc_samples; ++n) {
    const double a = start_angle + side * (std::numbers::pi / 2.0) * n / arc_samples;
    path.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  const double used = straight_len + std::numbers::pi / 2.0 * radius;
  const double rem = reach - used;
  if (rem > 0.0) path.push_back(path.back() + target_dir * rem);
  return path;
}

std::vector<ParticipantVerdict> select_relevant(const scenario::Scene& scene,
                                                const scenario::HypothesisSet& hypos,
                                                IntendedPath intent,
                                                const RelevanceConfig& cfg) {
  const std::vector<Vec2> path = build_ego_path(scene, intent, cfg);
  const double halfwidth = 0.5 * scene.ego.footprint.width + cfg.margin;

  std::vector<ParticipantVerdict> out;
  out.reserve(scene.participants.size());
  for (const auto& part : scene.participants) {
    const auto entry =
        std::find_if(hypos.entries.begin(), hypos.entries.end(),
                     [&](const auto& e) { return e.participant_id == part.id; });
    if (entry == hypos.entries.end())
      throw DataError("select_relevant: no hypotheses for participant " +
                      std::to_string(part.id));
    ParticipantVerdict verdict;
    verdict.participant_id = part.id;
    verdict.constellation =
        classify_constellation(scene.ego.state, part.state, cfg.lane_corridor_halfwidth);
    for (const auto& traj : entry->trajectories) {
      Vec2 prev = part.state.position();
      for (const auto& st : traj) {
        if (segment_polyline_distance(prev, st.position(), path) <= halfwidth) {
          verdict.relevant = true;
          break;
        }
        prev = st.position();
      }
      if (verdict.relevant) break;
    }
    out.push_back(verdict);
  }
  return out;
}

void write_binary_pgm(const BinaryImage& image, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("pgm: cannot open " + path + " for writing");
  f << "P5\n" << image.cols << " " << image.rows << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.cols));
  for (int j = image.rows - 1; j >= 0; --j) {
    for (int i = 0; i < image.cols; ++i)
      row[static_cast<std::size_t>(i)] = image.at(i, j) ? 255 : 0;
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw DataError("pgm: write failed for " + path);
}

BinaryImage read_binary_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("pgm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw DataError("pgm: expected binary P5 header in " + path);
  int w = 0, h = 0, maxval = 0;
  f >> w >> h >> maxval;
  if (!f || w <= 0 || h <= 0 || maxval != 255)
    throw DataError("pgm: malformed header in " + path);
  f.get();
  BinaryImage img(h, w);
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int j = h - 1; j >= 0; --j) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!f) throw DataError("pgm: truncated pixel data in " + path);
    for (int i = 0; i < w; ++i) img.at(i, j) = row[static_cast<std::size_t>(i)] >= 128 ? 1 : 0;
  }
  return img;
}

}  // namespace pog::situation
