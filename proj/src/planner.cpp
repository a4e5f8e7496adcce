#include "pog/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pog::planner {

namespace {

double capped_curvature(double base, double speed, double accel, double dt) {
  const double v_end = std::max(0.0, speed + accel * dt);
  const double v_max = std::max(speed, v_end);
  if (v_max > 1e-12) {
    const double limit = scenario::kMaxAccelLat / (v_max * v_max);
    base = std::clamp(base, -limit, limit);
  }
  return base;
}

}  // namespace

std::vector<CandidateTrajectory> generate_candidates(const scenario::Scene& scene,
                                                     const PlannerConfig& cfg) {
  if (cfg.accel_count < 1) throw DataError("planner: accel_count must be >= 1");
  if (cfg.substeps_per_instant < 1)
    throw DataError("planner: substeps_per_instant must be >= 1");

  const std::vector<double> accels = linspace(cfg.accel_min, cfg.accel_max, cfg.accel_count);
  const std::vector<double> curvatures = {cfg.turn_curvature, 0.0, -cfg.turn_curvature};
  const double dt = scene.horizon / (scene.kappa * cfg.substeps_per_instant);

  std::vector<CandidateTrajectory> out;
  out.reserve(accels.size() * curvatures.size());
  int index = 0;
  for (double accel : accels) {
    for (double curvature : curvatures) {
      CandidateTrajectory cand;
      cand.index = index++;
      cand.accel = accel;
      cand.curvature = curvature;
      char tag[64];
      std::snprintf(tag, sizeof tag, "a=%+.3f,k=%+.4f", accel, curvature);
      cand.tag = tag;
      scenario::StateVector cur = scene.ego.state;
      for (int k = 0; k < scene.kappa; ++k) {
        for (int sub = 0; sub < cfg.substeps_per_instant; ++sub) {
          const double cmd = capped_curvature(curvature, cur.speed, accel, dt);
          cur = scenario::propagate(cur, accel, cmd, dt);
        }
        cand.states.push_back(cur);
      }
      out.push_back(std::move(cand));
    }
  }
  return out;
}

std::vector<double> occupancy_costs(const CandidateTrajectory& candidate,
                                    const std::vector<grid::PredictedOccupancyGrid>& pogs,
                                    const scenario::Footprint& footprint) {
  if (pogs.size() != candidate.states.size())
    throw DataError("planner: prediction grid count does not match the candidate instants");
  std::vector<double> costs;
  costs.reserve(candidate.states.size());
  for (std::size_t k = 0; k < candidate.states.size(); ++k) {
    const auto& st = candidate.states[k];
    const OrientedRect rect{st.position(), st.heading, footprint.length, footprint.width};
    double cost = 0.0;
    for (const auto& cell : grid::rasterize_footprint(pogs[k].spec, rect))
      cost += pogs[k].at(cell);
    costs.push_back(cost);
  }
  return costs;
}

Selection select_safe(const std::vector<std::vector<double>>& costs) {
  if (costs.empty()) throw DataError("planner: empty cost table");
  const std::size_t instants = costs.front().size();
  if (instants == 0) throw DataError("planner: cost table has no instants");

  Selection best;
  best.worst_cost = std::numeric_limits<double>::infinity();
  best.total_cost = std::numeric_limits<double>::infinity();
  best.index = -1;
  for (std::size_t u = 0; u < costs.size(); ++u) {
    if (costs[u].size() != instants)
      throw DataError("planner: ragged cost table");
    double worst = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (double c : costs[u]) {
      worst = std::max(worst, c);
      total += c;
    }
    const bool improves = worst < best.worst_cost ||
                          (worst == best.worst_cost && total < best.total_cost);
    if (improves) {
      best.index = static_cast<int>(u);
      best.worst_cost = worst;
      best.total_cost = total;
    }
  }
  return best;
}

}  // namespace pog::planner
