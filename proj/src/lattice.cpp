#include "interlace/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace interlace {

void require_dimension(int dim) {
  if (dim < 3 || dim > kMaxDim) {
    throw std::invalid_argument("dimension must be in [3, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(dim));
  }
}

Point::Point(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("point dimension out of range");
}

Point::Point(std::initializer_list<int> coords) : Point(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Point Point::from(std::span<const int> coords) {
  Point p(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), p.c_.begin());
  return p;
}

long long Point::norm_inf() const {
  long long m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max<long long>(m, std::llabs(c_[i]));
  return m;
}

long long Point::norm1() const {
  long long s = 0;
  for (int i = 0; i < dim_; ++i) s += std::llabs(c_[i]);
  return s;
}

Point Point::operator+(const Point& o) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] + o.c_[i];
  return r;
}

Point Point::operator-(const Point& o) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] - o.c_[i];
  return r;
}

Point Point::operator-() const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = -c_[i];
  return r;
}

Point Point::scaled(int k) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r.c_[i] = k * c_[i];
  return r;
}

std::strong_ordering operator<=>(const Point& a, const Point& b) {
  if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
  for (int i = 0; i < a.dim_; ++i) {
    if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::string Point::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c_[i];
  os << ')';
  return os.str();
}

std::size_t PointHash::operator()(const Point& p) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(p.dim());
  for (int c : p.coords()) h = mix64(h ^ static_cast<std::uint32_t>(c)) + 0x9E3779B97F4A7C15ULL;
  return static_cast<std::size_t>(h);
}

Point unit(int dim, int axis, int sign) {
  Point p(dim);
  p[axis] = sign;
  return p;
}

std::vector<Point> neighbors(const Point& x) {
  std::vector<Point> out;
  out.reserve(2 * x.dim());
  for (int a = 0; a < x.dim(); ++a) {
    Point up = x, down = x;
    ++up[a];
    --down[a];
    out.push_back(up);
    out.push_back(down);
  }
  return out;
}

Point srw_step(const Point& x, Rng& rng) {
  const auto k = static_cast<int>(uniform_index(rng, 2 * static_cast<std::uint64_t>(x.dim())));
  Point y = x;
  y[k / 2] += (k % 2 == 0) ? 1 : -1;
  return y;
}

Edge Edge::between(const Point& x, const Point& y) {
  if (x.dim() != y.dim() || (x - y).norm1() != 1) {
    throw std::invalid_argument("edge endpoints " + x.str() + " and " + y.str() + " are not adjacent");
  }
  return x < y ? Edge{x, y} : Edge{y, x};
}

int Edge::axis() const {
  for (int a = 0; a < lo.dim(); ++a) {
    if (lo[a] != hi[a]) return a;
  }
  return -1;
}

// ---------------------------------------------------------------------------

Window::Window(Point corner, std::span<const int> sides) : corner_(corner) {
  if (static_cast<int>(sides.size()) != corner.dim()) {
    throw std::invalid_argument("window sides do not match corner dimension");
  }
  for (int a = 0; a < corner.dim(); ++a) {
    if (sides[a] <= 0) throw std::invalid_argument("window sides must be positive");
    sides_[a] = sides[a];
  }
  init();
}

Window::Window(Point corner, std::initializer_list<int> sides)
    : Window(corner, std::span<const int>(sides.begin(), sides.size())) {}

Window Window::ball(const Point& center, int radius) {
  if (radius < 0) throw std::invalid_argument("ball radius must be nonnegative");
  Point corner = center;
  std::vector<int> sides(center.dim(), 2 * radius + 1);
  for (int a = 0; a < center.dim(); ++a) corner[a] -= radius;
  return Window(corner, sides);
}

Window Window::cube(const Point& corner, int side) {
  std::vector<int> sides(corner.dim(), side);
  return Window(corner, sides);
}

void Window::init() {
  const int d = dim();
  std::size_t s = 1;
  for (int a = 0; a < d; ++a) {
    stride_[a] = s;
    s *= static_cast<std::size_t>(sides_[a]);
  }
  vertex_count_ = s;
  edge_offset_[0] = 0;
  for (int a = 0; a < d; ++a) {
    std::size_t es = 1;
    for (int b = 0; b < d; ++b) {
      edge_stride_[a][b] = es;
      es *= static_cast<std::size_t>(b == a ? sides_[b] - 1 : sides_[b]);
    }
    edge_offset_[a + 1] = edge_offset_[a] + es;
  }
  edge_count_ = edge_offset_[d];
}

bool Window::contains(const Point& x) const {
  if (x.dim() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    const int r = x[a] - corner_[a];
    if (r < 0 || r >= sides_[a]) return false;
  }
  return true;
}

bool Window::contains(const Window& other) const {
  if (other.dim() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (other.corner_[a] < corner_[a]) return false;
    if (other.corner_[a] + other.sides_[a] > corner_[a] + sides_[a]) return false;
  }
  return true;
}

std::size_t Window::index(const Point& x) const {
  std::size_t v = 0;
  for (int a = 0; a < dim(); ++a) v += static_cast<std::size_t>(x[a] - corner_[a]) * stride_[a];
  return v;
}

Point Window::point(std::size_t v) const {
  Point p = corner_;
  for (int a = 0; a < dim(); ++a) {
    p[a] += static_cast<int>(v % static_cast<std::size_t>(sides_[a]));
    v /= static_cast<std::size_t>(sides_[a]);
  }
  return p;
}

void Window::relative(std::size_t v, std::span<int> out) const {
  for (int a = 0; a < dim(); ++a) {
    out[a] = static_cast<int>(v % static_cast<std::size_t>(sides_[a]));
    v /= static_cast<std::size_t>(sides_[a]);
  }
}

std::size_t Window::index_relative(std::span<const int> rel) const {
  std::size_t v = 0;
  for (int a = 0; a < dim(); ++a) v += static_cast<std::size_t>(rel[a]) * stride_[a];
  return v;
}

std::size_t Window::edge_index_relative(std::span<const int> rel, int axis) const {
  std::size_t e = edge_offset_[axis];
  for (int b = 0; b < dim(); ++b) e += static_cast<std::size_t>(rel[b]) * edge_stride_[axis][b];
  return e;
}

std::size_t Window::edge_index(std::size_t v, int axis) const {
  std::array<int, kMaxDim> rel{};
  relative(v, rel);
  return edge_index_relative(rel, axis);
}

std::optional<std::size_t> Window::edge_between(std::size_t v, std::size_t w) const {
  if (v > w) std::swap(v, w);
  const std::size_t diff = w - v;
  std::array<int, kMaxDim> rel{};
  relative(v, rel);
  for (int a = 0; a < dim(); ++a) {
    if (diff == stride_[a] && rel[a] + 1 < sides_[a]) return edge_index_relative(rel, a);
  }
  return std::nullopt;
}

std::pair<std::size_t, int> Window::edge_origin(std::size_t e) const {
  int axis = 0;
  while (e >= edge_offset_[axis + 1]) ++axis;
  std::size_t rest = e - edge_offset_[axis];
  std::size_t v = 0;
  for (int b = 0; b < dim(); ++b) {
    const auto len = static_cast<std::size_t>(b == axis ? sides_[b] - 1 : sides_[b]);
    v += (rest % len) * stride_[b];
    rest /= len;
  }
  return {v, axis};
}

std::pair<std::size_t, std::size_t> Window::edge_endpoints(std::size_t e) const {
  const auto [v, axis] = edge_origin(e);
  return {v, v + stride_[axis]};
}

std::optional<std::size_t> Window::step(std::size_t v, int axis, int sign) const {
  const auto r = static_cast<int>((v / stride_[axis]) % static_cast<std::size_t>(sides_[axis]));
  if (sign > 0) {
    if (r + 1 >= sides_[axis]) return std::nullopt;
    return v + stride_[axis];
  }
  if (r == 0) return std::nullopt;
  return v - stride_[axis];
}

Point Window::center() const {
  Point c = corner_;
  for (int a = 0; a < dim(); ++a) c[a] += (sides_[a] - 1) / 2;
  return c;
}

int Window::linf_radius() const {
  int r = 0;
  for (int a = 0; a < dim(); ++a) r = std::max(r, sides_[a] / 2);
  return r;
}

std::vector<std::size_t> Window::inner_boundary() const {
  std::vector<std::size_t> out;
  std::array<int, kMaxDim> rel{};
  for (std::size_t v = 0; v < vertex_count_; ++v) {
    relative(v, rel);
    for (int a = 0; a < dim(); ++a) {
      if (rel[a] == 0 || rel[a] == sides_[a] - 1) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

std::string Window::str() const {
  std::ostringstream os;
  os << corner_.str() << "+[";
  for (int a = 0; a < dim(); ++a) os << (a ? "," : "") << sides_[a];
  os << ']';
  return os.str();
}

}  // namespace interlace
