#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pog {

/// Invalid or inconsistent input data (bad file, bad dimensions, bad command).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (divergence, non-finite values).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid command-line usage (bad flag combination, missing argument).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }

/// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

/// splitmix64 step; used to derive independent sub-seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic sub-seed for a tagged stream (e.g. per scene, per tree).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + tag * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return v;
}

/// Minimum distance from point p to segment [a, b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Minimum distance between segments [a1, a2] and [b1, b2].
double segment_segment_distance(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);

/// Minimum distance from point p to a polyline (>= 1 vertex).
double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& poly);

/// Minimum distance between segment [a, b] and a polyline.
double segment_polyline_distance(const Vec2& a, const Vec2& b, const std::vector<Vec2>& poly);

/// Point-in-convex-polygon test (vertices in order, boundary counts as inside).
bool point_in_convex_polygon(const Vec2& p, const std::vector<Vec2>& poly);

/// An oriented rectangle: center, heading of the long axis, full length and width.
struct OrientedRect {
  Vec2 center;
  double heading{0.0};
  double length{0.0};
  double width{0.0};

  std::vector<Vec2> corners() const;
};

/// Separating-axis overlap test for two oriented rectangles.
bool rects_overlap(const OrientedRect& a, const OrientedRect& b);

}  // namespace pog
