// Z^d geometry: points, edges, axis-aligned windows, simple random walk.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "interlace/rng.hpp"

namespace interlace {

inline constexpr int kMaxDim = 6;

/// Validates 3 <= d <= kMaxDim; throws std::invalid_argument otherwise.
void require_dimension(int dim);

/// A point of Z^d with d fixed at construction.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<int> coords);
  static Point from(std::span<const int> coords);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[i]; }
  int& operator[](int i) { return c_[i]; }
  std::span<const int> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  long long norm_inf() const;
  long long norm1() const;

  Point operator+(const Point& o) const;
  Point operator-(const Point& o) const;
  Point operator-() const;
  Point scaled(int k) const;

  friend bool operator==(const Point& a, const Point& b) {
    return a.dim_ == b.dim_ && a.c_ == b.c_;
  }
  friend std::strong_ordering operator<=>(const Point& a, const Point& b);

  std::string str() const;

 private:
  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept;
};

/// Unit vector sign * e_axis.
Point unit(int dim, int axis, int sign = +1);

/// The 2d nearest neighbours in the order +e_1, -e_1, +e_2, -e_2, ...
std::vector<Point> neighbors(const Point& x);

/// One simple-random-walk step from x.
Point srw_step(const Point& x, Rng& rng);

/// Unordered nearest-neighbour pair stored with the lexicographically
/// smaller endpoint first.
struct Edge {
  Point lo;
  Point hi;

  static Edge between(const Point& x, const Point& y);  // throws unless adjacent
  int axis() const;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Axis-aligned box corner + [0, side_1) x ... x [0, side_d).
///
/// Vertices are indexed row-major with axis 0 fastest. Edges are the
/// nearest-neighbour pairs with both endpoints inside; edge {v, v + e_a}
/// is indexed by axis a first, then by v within the box whose a-th side is
/// one shorter.
class Window {
 public:
  Window() = default;
  Window(Point corner, std::span<const int> sides);
  Window(Point corner, std::initializer_list<int> sides);

  /// The closed l∞ ball B(center, radius).
  static Window ball(const Point& center, int radius);
  /// center + [0, side)^d.
  static Window cube(const Point& corner, int side);

  int dim() const { return corner_.dim(); }
  const Point& corner() const { return corner_; }
  int side(int axis) const { return sides_[axis]; }
  std::span<const int> sides() const { return {sides_.data(), static_cast<std::size_t>(dim())}; }

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t edge_count(int axis) const { return edge_offset_[axis + 1] - edge_offset_[axis]; }

  bool contains(const Point& x) const;
  bool contains(const Window& other) const;

  std::size_t stride(int axis) const { return stride_[axis]; }
  std::size_t index(const Point& x) const;
  Point point(std::size_t v) const;
  /// Coordinates relative to the corner.
  void relative(std::size_t v, std::span<int> out) const;
  std::size_t index_relative(std::span<const int> rel) const;

  /// Edge {v, v + e_axis}; requires v + e_axis inside.
  std::size_t edge_index(std::size_t v, int axis) const;
  std::size_t edge_index_relative(std::span<const int> rel, int axis) const;
  /// Edge between two window vertices, if they are adjacent.
  std::optional<std::size_t> edge_between(std::size_t v, std::size_t w) const;
  /// (lower vertex, axis) of an edge index.
  std::pair<std::size_t, int> edge_origin(std::size_t e) const;
  std::pair<std::size_t, std::size_t> edge_endpoints(std::size_t e) const;

  /// Neighbour of v along +/- axis, if inside.
  std::optional<std::size_t> step(std::size_t v, int axis, int sign) const;

  /// Middle point (rounded down) and the l∞ radius max_i floor(side_i / 2).
  Point center() const;
  int linf_radius() const;

  /// Vertices with at least one neighbour outside the window.
  std::vector<std::size_t> inner_boundary() const;

  std::string str() const;

  friend bool operator==(const Window& a, const Window& b) {
    return a.corner_ == b.corner_ && a.sides_ == b.sides_;
  }

 private:
  void init();

  Point corner_;
  std::array<int, kMaxDim> sides_{};
  std::array<std::size_t, kMaxDim> stride_{};
  std::array<std::size_t, kMaxDim + 1> edge_offset_{};
  std::array<std::array<std::size_t, kMaxDim>, kMaxDim> edge_stride_{};
  std::size_t vertex_count_ = 0;
  std::size_t edge_count_ = 0;
};

}  // namespace interlace
