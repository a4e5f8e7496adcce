#include "pog/common.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace pog {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return (p - a).norm();
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

namespace {

bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = (q - p).cross(r - p);
    return (v > 0.0) - (v < 0.0);
  };
  const int o1 = orient(a1, a2, b1);
  const int o2 = orient(a1, a2, b2);
  const int o3 = orient(b1, b2, a1);
  const int o4 = orient(b1, b2, a2);
  if (o1 != o2 && o3 != o4) return true;
  const auto on = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
  };
  if (o1 == 0 && on(a1, a2, b1)) return true;
  if (o2 == 0 && on(a1, a2, b2)) return true;
  if (o3 == 0 && on(b1, b2, a1)) return true;
  if (o4 == 0 && on(b1, b2, a2)) return true;
  return false;
}

}  // namespace

double segment_segment_distance(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  if (segments_intersect(a1, a2, b1, b2)) return 0.0;
  return std::min(std::min(point_segment_distance(a1, b1, b2), point_segment_distance(a2, b1, b2)),
                  std::min(point_segment_distance(b1, a1, a2), point_segment_distance(b2, a1, a2)));
}

double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& poly) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return (p - poly[0]).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < poly.size(); ++k)
    best = std::min(best, point_segment_distance(p, poly[k], poly[k + 1]));
  return best;
}

double segment_polyline_distance(const Vec2& a, const Vec2& b, const std::vector<Vec2>& poly) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return point_segment_distance(poly[0], a, b);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < poly.size(); ++k)
    best = std::min(best, segment_segment_distance(a, b, poly[k], poly[k + 1]));
  return best;
}

bool point_in_convex_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return false;
  int sign = 0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2& a = poly[k];
    const Vec2& b = poly[(k + 1) % poly.size()];
    const double c = (b - a).cross(p - a);
    if (c == 0.0) continue;
    const int s = c > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

std::vector<Vec2> OrientedRect::corners() const {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  std::vector<Vec2> out;
  out.reserve(4);
  for (const auto& [lx, ly] : {std::pair{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}})
    out.push_back({center.x + c * lx - s * ly, center.y + s * lx + c * ly});
  return out;
}

bool rects_overlap(const OrientedRect& a, const OrientedRect& b) {
  const auto corners_a = a.corners();
  const auto corners_b = b.corners();
  const auto separated = [](const std::vector<Vec2>& pa, const std::vector<Vec2>& pb,
                            const Vec2& axis) {
    double lo_a = std::numeric_limits<double>::infinity(), hi_a = -lo_a;
    double lo_b = lo_a, hi_b = hi_a;
    for (const auto& p : pa) {
      const double d = p.dot(axis);
      lo_a = std::min(lo_a, d);
      hi_a = std::max(hi_a, d);
    }
    for (const auto& p : pb) {
      const double d = p.dot(axis);
      lo_b = std::min(lo_b, d);
      hi_b = std::max(hi_b, d);
    }
    return hi_a < lo_b || hi_b < lo_a;
  };
  for (const auto* poly : {&corners_a, &corners_b}) {
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec2 e = (*poly)[(k + 1) % 4] - (*poly)[k];
      if (separated(corners_a, corners_b, {-e.y, e.x})) return false;
    }
  }
  return true;
}

}  // namespace pog
