#pragma once

#include <string>
#include <vector>

#include "pog/common.hpp"
#include "pog/grid.hpp"
#include "pog/scenario.hpp"

namespace pog::planner {

struct PlannerConfig {
  int accel_count{5};
  double accel_min{-scenario::kMaxBrake};
  double accel_max{scenario::kMaxAccelLong};
  /// Curvature magnitude of the bear-left/bear-right candidates (1/m).
  double turn_curvature{0.125};
  int substeps_per_instant{5};
};

struct CandidateTrajectory {
  int index{0};
  double accel{0.0};
  double curvature{0.0};  ///< commanded curvature before the per-speed cap
  std::vector<scenario::StateVector> states;  ///< EGO states at the prediction instants
  std::string tag;
};

/// EGO candidate trajectories: accel_count accelerations spanning
/// [accel_min, accel_max] crossed with curvatures {+turn, 0, -turn}, each
/// integrated over the scene horizon. Curvature commands are capped to keep
/// the lateral acceleration within bounds.
std::vector<CandidateTrajectory> generate_candidates(const scenario::Scene& scene,
                                                     const PlannerConfig& cfg = {});

/// Occupancy cost of a candidate per prediction instant: the sum of predicted
/// occupancy probabilities under the EGO footprint. pogs[k] must describe
/// instant k of the candidate.
std::vector<double> occupancy_costs(const CandidateTrajectory& candidate,
                                    const std::vector<grid::PredictedOccupancyGrid>& pogs,
                                    const scenario::Footprint& footprint);

struct Selection {
  int index{0};
  double worst_cost{0.0};
  double total_cost{0.0};
};

/// Min-max selection over a rectangular cost table (candidate x instant):
/// picks the candidate whose worst instant cost is smallest; ties resolve to
/// the smaller summed cost, then the lower index.
Selection select_safe(const std::vector<std::vector<double>>& costs);

}  // namespace pog::planner
