// Dense boolean fields over the vertices or edges of a window.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "interlace/lattice.hpp"

namespace interlace {

namespace detail {

template <class Tag>
class DenseField {
 public:
  DenseField() = default;
  explicit DenseField(const Window& w, bool value = false)
      : window_(w), bits_(Tag::size(w), value ? 1 : 0) {}

  const Window& window() const { return window_; }
  std::size_t size() const { return bits_.size(); }

  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v = true) { bits_[i] = v ? 1 : 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }
  const std::vector<std::uint8_t>& raw() const { return bits_; }
  std::vector<std::uint8_t>& raw() { return bits_; }

  /// Bitwise relations; both fields must live on the same window.
  bool subset_of(const DenseField& o) const {
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i] && !o.bits_[i]) return false;
    }
    return true;
  }
  DenseField complement() const {
    DenseField r = *this;
    for (auto& b : r.bits_) b ^= 1;
    return r;
  }
  friend bool operator==(const DenseField& a, const DenseField& b) {
    return a.window_ == b.window_ && a.bits_ == b.bits_;
  }

 private:
  Window window_;
  std::vector<std::uint8_t> bits_;
};

struct VertexTag {
  static std::size_t size(const Window& w) { return w.vertex_count(); }
};
struct EdgeTag {
  static std::size_t size(const Window& w) { return w.edge_count(); }
};

}  // namespace detail

/// One bit per window vertex.
using SiteField = detail::DenseField<detail::VertexTag>;
/// One bit per window-internal edge (indexed as in Window::edge_index).
using BondField = detail::DenseField<detail::EdgeTag>;

}  // namespace interlace
