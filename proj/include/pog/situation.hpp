#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pog/common.hpp"
#include "pog/grid.hpp"
#include "pog/scenario.hpp"

namespace pog::situation {

/// Binary image, row-major with pixel (i, j) at index j*cols + i. Pixel
/// values are 0 or 1.
struct BinaryImage {
  int rows{0};
  int cols{0};
  std::vector<std::uint8_t> pixels;

  BinaryImage() = default;
  BinaryImage(int r, int c) : rows(r), cols(c), pixels(static_cast<std::size_t>(r) * c, 0) {}

  std::uint8_t& at(int i, int j) { return pixels[static_cast<std::size_t>(j) * cols + i]; }
  std::uint8_t at(int i, int j) const { return pixels[static_cast<std::size_t>(j) * cols + i]; }
};

bool operator==(const BinaryImage& a, const BinaryImage& b);

/// Image-deformation-model distance between a test image and a reference
/// image of equal size: every test pixel matches the best reference pixel
/// inside a (2*delta+1)^2 window around its own position, and the absolute
/// pixel differences are summed. Not symmetric in its arguments.
double idm_distance(const BinaryImage& test, const BinaryImage& reference, int delta = 2);

struct TemplateLibrary {
  struct Entry {
    std::string label;
    BinaryImage image;
  };
  std::vector<Entry> entries;
};

/// Renders the drivable area into a binary image on the given grid
/// (pixel = 1 iff the cell center lies on the road).
BinaryImage render_road_image(const scenario::RoadGeometry& road, const grid::GridSpec& spec);

/// Nine canonical road layouts around the junction position of the generated
/// scene family, rendered at the grid resolution: straight roads, elbows,
/// T-junctions and a four-way crossing.
TemplateLibrary make_default_templates(const grid::GridSpec& spec);

struct RoadClassification {
  std::string label;
  int template_index{-1};
  double distance{0.0};
};

/// k-nearest-neighbour road classification under the IDM distance. Ties are
/// broken toward the smaller summed distance, then the lower template index.
RoadClassification classify_road(const BinaryImage& image, const TemplateLibrary& library,
                                 int k = 1, int delta = 2);

enum class Constellation {
  kLongitudinal,
  kOncoming,
  kCrossingFromLeft,
  kCrossingFromRight,
  kOnTheLeft,
  kOnTheRight,
};

std::string to_string(Constellation c);

/// Rule-based constellation of a participant relative to the EGO vehicle,
/// driven by the heading difference delta = normalize(psi_p - psi_ego -
/// atan(m_ego)). Same-direction traffic splits into longitudinal vs
/// on-the-left/on-the-right by lateral offset against the lane corridor.
/// All interval bounds are closed toward the longitudinal/oncoming classes.
Constellation classify_constellation(const scenario::StateVector& ego,
                                     const scenario::StateVector& participant,
                                     double lane_corridor_halfwidth = 2.0);

enum class IntendedPath { kStraight, kLeft, kRight };

std::string to_string(IntendedPath p);

struct RelevanceConfig {
  /// Extra clearance added to the EGO half-width when buffering the path.
  double margin{0.5};
  double ego_turn_radius{6.0};
  double min_path_length{5.0};
  double lane_corridor_halfwidth{2.0};
};

/// Polyline the EGO vehicle intends to follow: straight continues along the
/// heading; left/right follow the lane to the junction, take a quarter-circle
/// arc onto the best-matching branch lane and continue on it. Path length is
/// speed * horizon plus one vehicle length.
std::vector<Vec2> build_ego_path(const scenario::Scene& scene, IntendedPath intent,
                                 const RelevanceConfig& cfg = {});

struct ParticipantVerdict {
  int participant_id{0};
  Constellation constellation{Constellation::kLongitudinal};
  bool relevant{false};
};

/// A participant is safety-relevant iff any of its hypothesis trajectories
/// comes within the corridor half-width (EGO half-width + margin) of the
/// intended EGO path within the horizon.
std::vector<ParticipantVerdict> select_relevant(const scenario::Scene& scene,
                                                const scenario::HypothesisSet& hypos,
                                                IntendedPath intent,
                                                const RelevanceConfig& cfg = {});

/// PGM (P5) round-trip for binary images; pixels are stored as 0 / 255 and
/// read back with a mid-level threshold. Image rows run north to south.
void write_binary_pgm(const BinaryImage& image, const std::string& path);
BinaryImage read_binary_pgm(const std::string& path);

}  // namespace pog::situation
