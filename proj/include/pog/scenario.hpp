#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "pog/common.hpp"
#include "pog/grid.hpp"

namespace pog::scenario {

/// Motion bounds for passenger vehicles (m/s^2).
inline constexpr double kMaxAccelLong = 4.5;
inline constexpr double kMaxBrake = 9.0;
inline constexpr double kMaxAccelLat = 7.0;
/// Slack for the lateral-acceleration feasibility check; commands exactly at
/// the bound are accepted, anything meaningfully above is rejected.
inline constexpr double kLateralSlack = 1e-9;

/// Vehicle state in the EGO-fixed frame: position, speed along the heading,
/// heading angle, and the slope of the EGO vehicle's lane.
struct StateVector {
  double x{0.0};
  double y{0.0};
  double speed{0.0};
  double heading{0.0};
  double ego_lane_slope{0.0};

  Vec2 position() const { return {x, y}; }
};

struct Footprint {
  double length{4.5};
  double width{2.0};
};

struct TrafficParticipant {
  int id{0};
  StateVector state{};
  double accel_long{0.0};
  double accel_lat{0.0};
  Footprint footprint{};

  OrientedRect rect() const {
    return {state.position(), state.heading, footprint.length, footprint.width};
  }
};

/// Road description: lane center polylines (ordered in driving direction),
/// convex drivable polygons whose union is the road surface, and the grid
/// cells of the road-boundary band.
struct RoadGeometry {
  std::vector<std::vector<Vec2>> lanes;
  std::vector<std::vector<Vec2>> drivable;
  std::vector<grid::CellIndex> infrastructure_cells;

  bool contains(const Vec2& p) const;
};

struct Scene {
  grid::GridSpec grid_spec{};
  RoadGeometry road{};
  TrafficParticipant ego{};
  std::vector<TrafficParticipant> participants{};
  double horizon{2.0};
  int kappa{4};
  std::uint64_t seed{0};
  double t0{0.0};

  /// Throws DataError on non-finite states, negative speeds, duplicate ids or
  /// overlapping footprints (EGO included).
  void validate() const;
};

/// Advances a state by dt seconds under constant longitudinal acceleration
/// and constant path curvature (arc motion). Speed saturates at zero; the
/// vehicle does not reverse. Throws DataError when the commanded curvature
/// would exceed the lateral-acceleration bound at the speeds reached.
StateVector propagate(const StateVector& s, double accel_long, double curvature, double dt);

enum class LateralMode { kBearLeft, kStraight, kBearRight };

struct HypothesisConfig {
  /// Longitudinal maneuvers: max brake, hold, max accelerate.
  std::vector<double> accels{-kMaxBrake, 0.0, kMaxAccelLong};
  /// Curvature magnitude of the bear-left/bear-right maneuvers (1/m).
  double turn_curvature{0.125};
  /// Proportional gain steering the straight maneuver toward the nearest
  /// aligned lane (1/m per rad of heading error).
  double heading_gain{0.2};
  double lane_capture_distance{3.0};
  double lane_capture_angle{std::numbers::pi / 4.0};
  int substeps_per_instant{5};

  int hypothesis_count() const { return static_cast<int>(accels.size()) * 3; }
};

/// All maneuver hypotheses of one participant: trajectories[s][k] is the
/// state of hypothesis s at prediction instant k, probs[k][s] its probability
/// at that instant (rows sum to 1).
struct ParticipantHypotheses {
  int participant_id{0};
  std::vector<std::vector<StateVector>> trajectories;
  std::vector<std::vector<double>> probs;
};

struct HypothesisSet {
  double horizon{2.0};
  int kappa{4};
  std::vector<double> instants;
  std::vector<ParticipantHypotheses> entries;
};

/// Builds the maneuver hypothesis set for every non-EGO participant.
/// Hypothesis order is accels x {bear left, straight, bear right}.
HypothesisSet generate_hypotheses(const Scene& scene, const HypothesisConfig& cfg = {});

/// Encodes the current scene into an augmented occupancy grid: road-boundary
/// cells get [1,0,0,0,0], vehicle cells (EGO included) the owner's state
/// tuple. Throws DataError when two vehicle footprints claim the same cell.
grid::AugmentedOccupancyGrid encode_aog(const Scene& scene);

/// Ground-truth predicted occupancy at t_pred: per cell the hypothesis
/// probability mass whose footprints cover the cell, clamped to 1, with
/// road-boundary cells fixed at 1. The EGO vehicle is excluded.
grid::PredictedOccupancyGrid oracle_pog(const Scene& scene, const HypothesisSet& hypos,
                                        double t_pred);

struct DatasetConfig {
  grid::GridSpec grid_spec{};
  int scene_count{2850};
  int train_count{1950};
  double horizon{2.0};
  int kappa{4};
  double speed_min_kmh{10.0};
  double speed_max_kmh{50.0};
  double position_jitter{10.0};
  double accel_jitter{2.5};
  double ego_speed_kmh{30.0};
  int max_participants{3};
  HypothesisConfig hypothesis{};
};

struct Dataset {
  std::vector<Scene> scenes;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

/// Samples the synthetic T-intersection scene family. Fully deterministic in
/// (cfg, seed); scene n draws from a sub-stream derived from (seed, n).
Dataset sample_dataset(const DatasetConfig& cfg, std::uint64_t seed);

/// The generator's road: west-east main road through the EGO position with a
/// two-lane branch to the south.
RoadGeometry make_intersection_road(const grid::GridSpec& spec);

/// Computes the one-cell road-boundary band for an arbitrary road geometry.
std::vector<grid::CellIndex> boundary_band(const RoadGeometry& road, const grid::GridSpec& spec);

}  // namespace pog::scenario
