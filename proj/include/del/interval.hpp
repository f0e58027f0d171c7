#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace del {

/// Dyadic subinterval [j 2^-d, (j+1) 2^-d) of [0,1), addressed by the bit path
/// from the root (0 = left child, 1 = right child). The integer j is the path
/// read as a binary number, most significant bit first.
class DyadicInterval {
 public:
  static constexpr int kMaxDepth = 64;

  using Key = unsigned __int128;

  constexpr DyadicInterval() = default;

  DyadicInterval(int depth, std::uint64_t index) : index_(index), depth_(depth) {
    if (depth < 0 || depth > kMaxDepth) {
      throw std::out_of_range("dyadic depth out of range: " + std::to_string(depth));
    }
    if (depth < kMaxDepth && (index >> depth) != 0) {
      throw std::out_of_range("dyadic index does not fit its depth");
    }
  }

  static DyadicInterval root() { return {}; }

  static DyadicInterval from_path(std::string_view bits) {
    if (bits.size() > static_cast<std::size_t>(kMaxDepth)) {
      throw std::out_of_range("dyadic path longer than 64 bits");
    }
    std::uint64_t index = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') {
        throw std::invalid_argument("dyadic path must consist of 0/1 characters");
      }
      index = (index << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return {static_cast<int>(bits.size()), index};
  }

  [[nodiscard]] int depth() const { return depth_; }
  [[nodiscard]] std::uint64_t index() const { return index_; }
  [[nodiscard]] bool is_root() const { return depth_ == 0; }

  [[nodiscard]] std::string path() const {
    std::string out(static_cast<std::size_t>(depth_), '0');
    for (int i = 0; i < depth_; ++i) {
      if ((index_ >> (depth_ - 1 - i)) & 1U) out[static_cast<std::size_t>(i)] = '1';
    }
    return out;
  }

  [[nodiscard]] DyadicInterval left() const { return child(0); }
  [[nodiscard]] DyadicInterval right() const { return child(1); }

  [[nodiscard]] DyadicInterval child(unsigned bit) const {
    if (depth_ >= kMaxDepth) throw std::out_of_range("dyadic depth cap (64) exceeded");
    DyadicInterval c;
    c.depth_ = depth_ + 1;
    c.index_ = (index_ << 1) | (bit & 1U);
    return c;
  }

  [[nodiscard]] DyadicInterval parent() const {
    if (depth_ == 0) throw std::logic_error("root interval has no parent");
    DyadicInterval p;
    p.depth_ = depth_ - 1;
    p.index_ = index_ >> 1;
    return p;
  }

  /// Ancestor at the given (smaller or equal) depth.
  [[nodiscard]] DyadicInterval ancestor(int depth) const {
    if (depth < 0 || depth > depth_) throw std::out_of_range("ancestor depth out of range");
    DyadicInterval a;
    a.depth_ = depth;
    a.index_ = depth == 0 ? 0 : index_ >> (depth_ - depth);
    return a;
  }

  [[nodiscard]] bool is_right_child() const { return depth_ > 0 && (index_ & 1U); }

  /// True when `other` is a (non-strict) subinterval of this one.
  [[nodiscard]] bool contains(const DyadicInterval& other) const {
    if (other.depth_ < depth_) return false;
    return other.ancestor(depth_).index_ == index_;
  }

  /// Endpoints scaled by 2^64; exact for every depth up to the cap.
  [[nodiscard]] Key left_key() const { return static_cast<Key>(index_) << (kMaxDepth - depth_); }
  [[nodiscard]] Key right_key() const {
    return (static_cast<Key>(index_) + 1) << (kMaxDepth - depth_);
  }
  [[nodiscard]] Key mid_key() const { return left_key() + (Key{1} << (kMaxDepth - depth_ - 1)); }

  [[nodiscard]] double length_double() const { return std::ldexp(1.0, -depth_); }

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;

  /// Address order: by left endpoint, coarser intervals first on ties.
  friend std::strong_ordering operator<=>(const DyadicInterval& a, const DyadicInterval& b) {
    if (auto c = a.left_key() <=> b.left_key(); c != 0) return c;
    return a.depth_ <=> b.depth_;
  }

 private:
  std::uint64_t index_ = 0;
  int depth_ = 0;
};

/// Smallest dyadic interval containing both arguments.
inline DyadicInterval common_ancestor(const DyadicInterval& a, const DyadicInterval& b) {
  int d = std::min(a.depth(), b.depth());
  while (d > 0 && a.ancestor(d) != b.ancestor(d)) --d;
  return a.ancestor(d);
}

}  // namespace del
