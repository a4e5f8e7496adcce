#include "pog/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>

namespace pog::scenario {

bool RoadGeometry::contains(const Vec2& p) const {
  for (const auto& poly : drivable)
    if (point_in_convex_polygon(p, poly)) return true;
  return false;
}

namespace {

bool finite_state(const StateVector& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.speed) &&
         std::isfinite(s.heading) && std::isfinite(s.ego_lane_slope);
}

}  // namespace

void Scene::validate() const {
  grid_spec.validate();
  if (horizon <= 0.0) throw DataError("scene: horizon must be positive");
  if (kappa <= 0) throw DataError("scene: kappa must be positive");
  std::vector<const TrafficParticipant*> all;
  all.push_back(&ego);
  for (const auto& p : participants) all.push_back(&p);
  std::set<int> ids;
  for (const auto* p : all) {
    if (!finite_state(p->state)) throw DataError("scene: non-finite state");
    if (p->state.speed < 0.0) throw DataError("scene: negative speed");
    if (!(p->footprint.length > 0.0) || !(p->footprint.width > 0.0))
      throw DataError("scene: footprint dimensions must be positive");
    if (!ids.insert(p->id).second)
      throw DataError("scene: duplicate participant id " + std::to_string(p->id));
  }
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = a + 1; b < all.size(); ++b)
      if (rects_overlap(all[a]->rect(), all[b]->rect()))
        throw DataError("scene: footprints of participants " + std::to_string(all[a]->id) +
                        " and " + std::to_string(all[b]->id) + " overlap");
}

StateVector propagate(const StateVector& s, double accel_long, double curvature, double dt) {
  if (!finite_state(s) || !std::isfinite(accel_long) || !std::isfinite(curvature) ||
      !std::isfinite(dt) || dt < 0.0)
    throw DataError("propagate: non-finite input");

  const double v_end_raw = s.speed + accel_long * dt;
  const double v_max = std::max(s.speed, std::max(v_end_raw, 0.0));
  if (v_max * v_max * std::abs(curvature) > kMaxAccelLat + kLateralSlack)
    throw DataError("propagate: curvature " + std::to_string(curvature) +
                    " exceeds the lateral-acceleration bound at speed " + std::to_string(v_max));

  // Saturating speed profile: once the vehicle stops it stays stopped.
  double arc = 0.0;
  double v_end = v_end_raw;
  if (accel_long < 0.0 && v_end_raw < 0.0) {
    const double t_stop = s.speed / (-accel_long);
    arc = 0.5 * s.speed * t_stop;
    v_end = 0.0;
  } else {
    arc = s.speed * dt + 0.5 * accel_long * dt * dt;
    v_end = std::max(v_end, 0.0);
  }

  StateVector out = s;
  out.speed = v_end;
  if (std::abs(curvature) < 1e-12) {
    out.x += arc * std::cos(s.heading);
    out.y += arc * std::sin(s.heading);
  } else {
    const double h1 = s.heading + curvature * arc;
    out.x += (std::sin(h1) - std::sin(s.heading)) / curvature;
    out.y -= (std::cos(h1) - std::cos(s.heading)) / curvature;
    out.heading = normalize_angle(h1);
  }
  return out;
}

namespace {

struct LaneHit {
  double distance;
  double direction;
};

// Nearest lane segment to p: distance and the segment's driving direction.
std::optional<LaneHit> nearest_lane(const RoadGeometry& road, const Vec2& p) {
  std::optional<LaneHit> best;
  for (const auto& lane : road.lanes) {
    for (std::size_t k = 0; k + 1 < lane.size(); ++k) {
      const double d = point_segment_distance(p, lane[k], lane[k + 1]);
      if (!best || d < best->distance) {
        const Vec2 dir = lane[k + 1] - lane[k];
        best = LaneHit{d, std::atan2(dir.y, dir.x)};
      }
    }
  }
  return best;
}

double lateral_curvature(const StateVector& s, double accel_long, LateralMode mode,
                         const RoadGeometry& road, const HypothesisConfig& cfg, double dt) {
  double base = 0.0;
  switch (mode) {
    case LateralMode::kBearLeft:
      base = cfg.turn_curvature;
      break;
    case LateralMode::kBearRight:
      base = -cfg.turn_curvature;
      break;
    case LateralMode::kStraight: {
      const auto hit = nearest_lane(road, s.position());
      if (hit && hit->distance <= cfg.lane_capture_distance) {
        const double err = normalize_angle(hit->direction - s.heading);
        if (std::abs(err) <= cfg.lane_capture_angle)
          base = std::clamp(cfg.heading_gain * err, -cfg.turn_curvature, cfg.turn_curvature);
      }
      break;
    }
  }
  const double v_end = std::max(0.0, s.speed + accel_long * dt);
  const double v_max = std::max(s.speed, v_end);
  if (v_max > 1e-12) {
    const double limit = kMaxAccelLat / (v_max * v_max);
    base = std::clamp(base, -limit, limit);
  }
  return base;
}

}  // namespace

HypothesisSet generate_hypotheses(const Scene& scene, const HypothesisConfig& cfg) {
  if (cfg.accels.empty()) throw DataError("hypotheses: no longitudinal maneuvers configured");
  if (cfg.substeps_per_instant <= 0)
    throw DataError("hypotheses: substeps_per_instant must be positive");

  HypothesisSet set;
  set.horizon = scene.horizon;
  set.kappa = scene.kappa;
  set.instants.resize(static_cast<std::size_t>(scene.kappa));
  for (int k = 0; k < scene.kappa; ++k)
    set.instants[static_cast<std::size_t>(k)] = scene.horizon * (k + 1) / scene.kappa;

  const int s_count = cfg.hypothesis_count();
  const double dt = scene.horizon / (scene.kappa * cfg.substeps_per_instant);
  constexpr LateralMode kModes[] = {LateralMode::kBearLeft, LateralMode::kStraight,
                                    LateralMode::kBearRight};

  for (const auto& part : scene.participants) {
    ParticipantHypotheses ph;
    ph.participant_id = part.id;
    ph.trajectories.reserve(static_cast<std::size_t>(s_count));
    for (double accel : cfg.accels) {
      for (LateralMode mode : kModes) {
        std::vector<StateVector> traj;
        traj.reserve(static_cast<std::size_t>(scene.kappa));
        StateVector cur = part.state;
        for (int k = 0; k < scene.kappa; ++k) {
          for (int sub = 0; sub < cfg.substeps_per_instant; ++sub) {
            const double kappa_cmd = lateral_curvature(cur, accel, mode, scene.road, cfg, dt);
            cur = propagate(cur, accel, kappa_cmd, dt);
          }
          traj.push_back(cur);
        }
        ph.trajectories.push_back(std::move(traj));
      }
    }
    ph.probs.assign(static_cast<std::size_t>(scene.kappa),
                    std::vector<double>(static_cast<std::size_t>(s_count), 1.0 / s_count));
    set.entries.push_back(std::move(ph));
  }
  return set;
}

grid::AugmentedOccupancyGrid encode_aog(const Scene& scene) {
  const auto& spec = scene.grid_spec;
  spec.validate();
  grid::AugmentedOccupancyGrid aog(spec, scene.t0);

  for (const auto& c : scene.road.infrastructure_cells) {
    if (c.i < 0 || c.i >= spec.cols || c.j < 0 || c.j >= spec.rows)
      throw DataError("encode_aog: infrastructure cell outside the grid");
    aog.at(c) = grid::CellAttributes{1.0, 0.0, 0.0, 0.0, 0.0};
  }

  std::vector<bool> vehicle_cell(static_cast<std::size_t>(spec.cell_count()), false);
  std::vector<const TrafficParticipant*> all;
  all.push_back(&scene.ego);
  for (const auto& p : scene.participants) all.push_back(&p);
  for (const auto* p : all) {
    for (const auto& c : grid::rasterize_footprint(spec, p->rect())) {
      const std::size_t idx = static_cast<std::size_t>(c.j) * spec.cols + c.i;
      if (vehicle_cell[idx])
        throw DataError("encode_aog: overlapping footprints at cell (" + std::to_string(c.i) +
                        ", " + std::to_string(c.j) + ")");
      vehicle_cell[idx] = true;
      aog.at(c) = grid::CellAttributes{1.0, p->state.speed, p->state.heading, p->accel_long,
                                       p->accel_lat};
    }
  }
  return aog;
}

grid::PredictedOccupancyGrid oracle_pog(const Scene& scene, const HypothesisSet& hypos,
                                        double t_pred) {
  const auto& spec = scene.grid_spec;
  int instant = -1;
  for (std::size_t k = 0; k < hypos.instants.size(); ++k)
    if (std::abs(hypos.instants[k] - t_pred) <= 1e-9) instant = static_cast<int>(k);
  if (instant < 0)
    throw DataError("oracle_pog: t_pred " + std::to_string(t_pred) +
                    " is not a prediction instant of the hypothesis set");

  std::set<int> scene_ids;
  for (const auto& p : scene.participants) scene_ids.insert(p.id);
  std::set<int> hypo_ids;
  for (const auto& e : hypos.entries) hypo_ids.insert(e.participant_id);
  if (scene_ids != hypo_ids)
    throw DataError("oracle_pog: hypothesis set does not cover the scene participants");

  grid::PredictedOccupancyGrid pog(spec, t_pred);
  for (const auto& entry : hypos.entries) {
    const auto part = std::find_if(scene.participants.begin(), scene.participants.end(),
                                   [&](const auto& p) { return p.id == entry.participant_id; });
    for (std::size_t s = 0; s < entry.trajectories.size(); ++s) {
      const StateVector& st = entry.trajectories[s][static_cast<std::size_t>(instant)];
      const OrientedRect rect{st.position(), st.heading, part->footprint.length,
                              part->footprint.width};
      const double p = entry.probs[static_cast<std::size_t>(instant)][s];
      for (const auto& c : grid::rasterize_footprint(spec, rect)) pog.at(c) += p;
    }
  }
  for (auto& v : pog.probs) v = std::min(1.0, v);
  for (const auto& c : scene.road.infrastructure_cells) pog.at(c) = 1.0;
  return pog;
}

namespace {

// Junction layout constants of the generated scene family (EGO frame, meters).
constexpr double kLaneWidth = 3.5;
constexpr double kMainEbLaneY = 0.0;
constexpr double kMainWbLaneY = 3.5;
constexpr double kBranchSbLaneX = 9.25;
constexpr double kBranchNbLaneX = 12.75;

}  // namespace

RoadGeometry make_intersection_road(const grid::GridSpec& spec) {
  const double x_min = spec.origin.x;
  const double x_max = spec.origin.x + spec.extent_x();
  const double y_min = spec.origin.y;

  RoadGeometry road;
  road.lanes = {
      {{x_min, kMainEbLaneY}, {x_max, kMainEbLaneY}},
      {{x_max, kMainWbLaneY}, {x_min, kMainWbLaneY}},
      {{kBranchSbLaneX, kMainEbLaneY - 0.5 * kLaneWidth}, {kBranchSbLaneX, y_min}},
      {{kBranchNbLaneX, y_min}, {kBranchNbLaneX, kMainEbLaneY - 0.5 * kLaneWidth}},
  };
  const double main_lo = kMainEbLaneY - 0.5 * kLaneWidth;
  const double main_hi = kMainWbLaneY + 0.5 * kLaneWidth;
  const double branch_lo = kBranchSbLaneX - 0.5 * kLaneWidth;
  const double branch_hi = kBranchNbLaneX + 0.5 * kLaneWidth;
  road.drivable = {
      {{x_min, main_lo}, {x_max, main_lo}, {x_max, main_hi}, {x_min, main_hi}},
      {{branch_lo, y_min}, {branch_hi, y_min}, {branch_hi, main_lo}, {branch_lo, main_lo}},
  };
  road.infrastructure_cells = boundary_band(road, spec);
  return road;
}

std::vector<grid::CellIndex> boundary_band(const RoadGeometry& road, const grid::GridSpec& spec) {
  const double band = std::max(spec.cell_length, spec.cell_width);
  std::vector<grid::CellIndex> out;
  for (int j = 0; j < spec.rows; ++j) {
    for (int i = 0; i < spec.cols; ++i) {
      const Vec2 c = grid::cell_center(spec, {i, j});
      if (road.contains(c)) continue;
      double dist = std::numeric_limits<double>::infinity();
      for (const auto& poly : road.drivable) {
        for (std::size_t k = 0; k < poly.size(); ++k) {
          dist = std::min(dist,
                          point_segment_distance(c, poly[k], poly[(k + 1) % poly.size()]));
          if (dist <= band) break;
        }
        if (dist <= band) break;
      }
      if (dist <= band) out.push_back({i, j});
    }
  }
  return out;
}

Dataset sample_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  cfg.grid_spec.validate();
  if (cfg.scene_count <= 0) throw DataError("dataset: scene_count must be positive");
  if (cfg.train_count < 0 || cfg.train_count > cfg.scene_count)
    throw DataError("dataset: train_count out of range");
  if (cfg.max_participants < 1 || cfg.max_participants > 3)
    throw DataError("dataset: max_participants must be in [1, 3]");

  const RoadGeometry road = make_intersection_road(cfg.grid_spec);

  // Participant slots: oncoming on the westbound lane, crosser approaching
  // northbound on the branch, lead vehicle ahead on the EGO lane.
  struct Slot {
    Vec2 base;
    Vec2 along;  // unit vector of the position jitter
    double heading;
  };
  const std::vector<Slot> slots = {
      {{20.0, kMainWbLaneY}, {-1.0, 0.0}, std::numbers::pi},
      {{kBranchNbLaneX, -16.0}, {0.0, 1.0}, std::numbers::pi / 2.0},
      {{8.0, kMainEbLaneY}, {1.0, 0.0}, 0.0},
  };

  Dataset ds;
  ds.scenes.reserve(static_cast<std::size_t>(cfg.scene_count));
  for (int n = 0; n < cfg.scene_count; ++n) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
    std::uniform_int_distribution<int> count_dist(1, cfg.max_participants);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Scene scene;
    scene.grid_spec = cfg.grid_spec;
    scene.road = road;
    scene.horizon = cfg.horizon;
    scene.kappa = cfg.kappa;
    scene.seed = derive_seed(seed, static_cast<std::uint64_t>(n));
    scene.ego.id = 0;
    scene.ego.state = {cfg.grid_spec.ego_cg.x, cfg.grid_spec.ego_cg.y,
                       kmh_to_mps(cfg.ego_speed_kmh), 0.0, 0.0};

    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      scene.participants.clear();
      const int count = count_dist(rng);
      std::vector<int> order(slots.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
      std::shuffle(order.begin(), order.end(), rng);
      for (int p = 0; p < count; ++p) {
        const Slot& slot = slots[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];
        TrafficParticipant tp;
        tp.id = p + 1;
        const double shift = unit(rng) * cfg.position_jitter;
        tp.state.x = slot.base.x + slot.along.x * shift;
        tp.state.y = slot.base.y + slot.along.y * shift;
        tp.state.heading = slot.heading;
        tp.state.speed =
            kmh_to_mps(cfg.speed_min_kmh + unit(rng) * (cfg.speed_max_kmh - cfg.speed_min_kmh));
        tp.accel_long = (2.0 * unit(rng) - 1.0) * cfg.accel_jitter;
        scene.participants.push_back(tp);
      }
      try {
        scene.validate();
        placed = true;
      } catch (const DataError&) {
      }
    }
    if (!placed) throw DataError("dataset: could not place participants in scene " +
                                 std::to_string(n));
    ds.scenes.push_back(std::move(scene));
  }

  ds.train_indices.resize(static_cast<std::size_t>(cfg.train_count));
  for (int k = 0; k < cfg.train_count; ++k) ds.train_indices[static_cast<std::size_t>(k)] = k;
  ds.test_indices.resize(static_cast<std::size_t>(cfg.scene_count - cfg.train_count));
  for (int k = cfg.train_count; k < cfg.scene_count; ++k)
    ds.test_indices[static_cast<std::size_t>(k - cfg.train_count)] = k;
  return ds;
}

}  // namespace pog::scenario
