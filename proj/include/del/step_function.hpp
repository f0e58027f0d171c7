#pragma once

#include <algorithm>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "del/interval.hpp"
#include "del/scalar.hpp"

namespace del {

template <Scalar S>
struct Leaf {
  DyadicInterval interval;
  S value;
};

/// Piecewise-constant function on a finite dyadic partition of [0,1).
///
/// Leaves are kept in address order; construction validates that they tile
/// [0,1) without gaps or overlaps. Instances are immutable.
template <Scalar S>
class StepFunction {
 public:
  StepFunction() : leaves_{{DyadicInterval::root(), S(0)}} {}

  explicit StepFunction(std::vector<Leaf<S>> leaves) : leaves_(std::move(leaves)) {
    std::sort(leaves_.begin(), leaves_.end(),
              [](const Leaf<S>& a, const Leaf<S>& b) { return a.interval < b.interval; });
    validate();
  }

  static StepFunction constant(S value) {
    return StepFunction(std::vector<Leaf<S>>{{DyadicInterval::root(), std::move(value)}});
  }

  /// Indicator of a dyadic interval.
  static StepFunction indicator(const DyadicInterval& interval) {
    std::vector<Leaf<S>> leaves;
    DyadicInterval cur = interval;
    while (!cur.is_root()) {
      const DyadicInterval sibling = cur.parent().child(cur.is_right_child() ? 0U : 1U);
      leaves.push_back({sibling, S(0)});
      cur = cur.parent();
    }
    leaves.push_back({interval, S(1)});
    return StepFunction(std::move(leaves));
  }

  [[nodiscard]] const std::vector<Leaf<S>>& leaves() const { return leaves_; }
  [[nodiscard]] std::size_t size() const { return leaves_.size(); }

  [[nodiscard]] int max_depth() const {
    int d = 0;
    for (const auto& l : leaves_) d = std::max(d, l.interval.depth());
    return d;
  }

  /// Index of the leaf containing the left endpoint of `interval`.
  [[nodiscard]] std::size_t locate(const DyadicInterval& interval) const {
    const auto key = interval.left_key();
    auto it = std::upper_bound(leaves_.begin(), leaves_.end(), key,
                               [](const auto& k, const Leaf<S>& l) { return k < l.interval.left_key(); });
    return static_cast<std::size_t>(std::distance(leaves_.begin(), it)) - 1;
  }

  /// Half-open range of leaf indices lying inside `interval` (empty when the
  /// interval is strictly inside a single leaf).
  [[nodiscard]] std::pair<std::size_t, std::size_t> leaves_within(const DyadicInterval& interval) const {
    auto lo = std::lower_bound(leaves_.begin(), leaves_.end(), interval.left_key(),
                               [](const Leaf<S>& l, const auto& k) { return l.interval.left_key() < k; });
    auto hi = std::lower_bound(lo, leaves_.end(), interval.right_key(),
                               [](const Leaf<S>& l, const auto& k) { return l.interval.left_key() < k; });
    if (lo != leaves_.end() && !interval.contains(lo->interval)) return {0, 0};
    return {static_cast<std::size_t>(lo - leaves_.begin()), static_cast<std::size_t>(hi - leaves_.begin())};
  }

  [[nodiscard]] const S& value_at(const DyadicInterval& point_cell) const {
    return leaves_[locate(point_cell)].value;
  }

  /// Same function on a finer partition; every cell must lie inside one leaf.
  [[nodiscard]] StepFunction refine(const std::vector<DyadicInterval>& cells) const {
    std::vector<Leaf<S>> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
      const auto& leaf = leaves_[locate(c)];
      if (!leaf.interval.contains(c)) throw std::invalid_argument("refine: cell is not inside a leaf");
      out.push_back({c, leaf.value});
    }
    return StepFunction(std::move(out));
  }

  [[nodiscard]] StepFunction map(const std::function<S(const S&)>& fn) const {
    std::vector<Leaf<S>> out = leaves_;
    for (auto& l : out) l.value = fn(l.value);
    return StepFunction(std::move(out), Trusted{});
  }

 private:
  struct Trusted {};
  StepFunction(std::vector<Leaf<S>> leaves, Trusted) : leaves_(std::move(leaves)) {}

  void validate() const {
    if (leaves_.empty()) throw std::invalid_argument("step function needs at least one leaf");
    DyadicInterval::Key expected = 0;
    for (const auto& l : leaves_) {
      if (l.interval.left_key() != expected) {
        throw std::invalid_argument("leaves do not tile [0,1): gap or overlap at " + l.interval.path());
      }
      expected = l.interval.right_key();
    }
    if (expected != DyadicInterval::root().right_key()) {
      throw std::invalid_argument("leaves do not cover [0,1)");
    }
  }

  std::vector<Leaf<S>> leaves_;
};

/// Binary tree over all ancestors of a step function's leaves, carrying
/// integrals. Averages and Haar data of internal nodes are read from here.
template <Scalar S>
class DyadicTree {
 public:
  struct Node {
    DyadicInterval interval;
    S integral;
    int left = -1;
    int right = -1;
    int leaf = -1;  // index into the step function's leaves, or -1
    [[nodiscard]] bool is_leaf() const { return leaf >= 0; }
  };

  explicit DyadicTree(const StepFunction<S>& f) : f_(&f) {
    nodes_.reserve(2 * f.size());
    build(DyadicInterval::root(), 0, f.size());
  }
  explicit DyadicTree(const StepFunction<S>&& f) = delete;

  [[nodiscard]] const Node& root() const { return nodes_.front(); }
  [[nodiscard]] const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const StepFunction<S>& function() const { return *f_; }

  [[nodiscard]] S average(const Node& n) const {
    return n.integral / ScalarOps<S>::dyadic_length(n.interval.depth());
  }

  /// (avg over right half - avg over left half) / 2; zero on leaves.
  [[nodiscard]] S haar_amplitude(const Node& n) const {
    if (n.is_leaf()) return S(0);
    return (average(node(n.right)) - average(node(n.left))) / S(2);
  }

 private:
  int build(const DyadicInterval& interval, std::size_t lo, std::size_t hi) {
    const auto& leaves = f_->leaves();
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({interval, S(0), -1, -1, -1});
    if (hi - lo == 1 && leaves[lo].interval == interval) {
      nodes_[static_cast<std::size_t>(id)].leaf = static_cast<int>(lo);
      nodes_[static_cast<std::size_t>(id)].integral =
          leaves[lo].value * ScalarOps<S>::dyadic_length(interval.depth());
      return id;
    }
    const auto mid = interval.mid_key();
    const auto split = static_cast<std::size_t>(
        std::lower_bound(leaves.begin() + static_cast<std::ptrdiff_t>(lo),
                         leaves.begin() + static_cast<std::ptrdiff_t>(hi), mid,
                         [](const Leaf<S>& l, const auto& k) { return l.interval.left_key() < k; }) -
        leaves.begin());
    const int l = build(interval.left(), lo, split);
    const int r = build(interval.right(), split, hi);
    auto& n = nodes_[static_cast<std::size_t>(id)];
    n.left = l;
    n.right = r;
    n.integral = nodes_[static_cast<std::size_t>(l)].integral + nodes_[static_cast<std::size_t>(r)].integral;
    return id;
  }

  const StepFunction<S>* f_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Basic functionals

/// |I|^-1 times the integral of f over I.
template <Scalar S>
S average(const StepFunction<S>& f, const DyadicInterval& interval) {
  const auto [lo, hi] = f.leaves_within(interval);
  if (lo == hi) return f.value_at(interval);
  Accumulator<S> acc;
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& l = f.leaves()[i];
    acc.add(l.value * ScalarOps<S>::dyadic_length(l.interval.depth() - interval.depth()));
  }
  return acc.value();
}

/// Integral of f over I.
template <Scalar S>
S integral(const StepFunction<S>& f, const DyadicInterval& interval) {
  return average(f, interval) * ScalarOps<S>::dyadic_length(interval.depth());
}

/// (<f>_{I+} - <f>_{I-}) / 2: the value of (f,h_I)h_I on I+ for the normalized
/// Haar function h_I = |I|^{-1/2}(chi_{I+} - chi_{I-}). Always in the scalar field.
template <Scalar S>
S haar_amplitude(const StepFunction<S>& f, const DyadicInterval& interval) {
  return (average(f, interval.right()) - average(f, interval.left())) / S(2);
}

/// (f, h_I) = sqrt|I| * haar_amplitude. In exact mode this leaves the field
/// for odd depth, so it is only available there for even depth.
template <Scalar S>
S haar_coefficient(const StepFunction<S>& f, const DyadicInterval& interval) {
  const S amp = haar_amplitude(f, interval);
  if constexpr (ScalarOps<S>::kExact) {
    if (interval.depth() % 2 != 0) {
      throw std::domain_error("Haar coefficient at odd depth is outside the quadratic field; use haar_amplitude");
    }
    return amp * ScalarOps<S>::dyadic_length(interval.depth() / 2);
  } else {
    return amp * std::sqrt(interval.length_double());
  }
}

/// Calls fn(cell, f value, g value) for each cell of the common refinement,
/// in address order.
template <Scalar S, class Fn>
void for_each_common_cell(const StepFunction<S>& f, const StepFunction<S>& g, Fn&& fn) {
  const auto& a = f.leaves();
  const auto& b = g.leaves();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const auto& la = a[i];
    const auto& lb = b[j];
    const DyadicInterval cell = la.interval.depth() >= lb.interval.depth() ? la.interval : lb.interval;
    fn(cell, la.value, lb.value);
    const auto end = cell.right_key();
    if (la.interval.right_key() == end) ++i;
    if (lb.interval.right_key() == end) ++j;
  }
}

template <Scalar S>
std::vector<DyadicInterval> common_refinement(const StepFunction<S>& f, const StepFunction<S>& g) {
  std::vector<DyadicInterval> cells;
  for_each_common_cell(f, g, [&](const DyadicInterval& c, const S&, const S&) { cells.push_back(c); });
  return cells;
}

/// Integral over [0,1) of f*g.
template <Scalar S>
S integrate_product(const StepFunction<S>& f, const StepFunction<S>& g) {
  Accumulator<S> acc;
  for_each_common_cell(f, g, [&](const DyadicInterval& c, const S& x, const S& y) {
    acc.add(x * y * ScalarOps<S>::dyadic_length(c.depth()));
  });
  return acc.value();
}

/// Pointwise binary combination on the common refinement.
template <Scalar S, class Fn>
StepFunction<S> combine(const StepFunction<S>& f, const StepFunction<S>& g, Fn&& fn) {
  std::vector<Leaf<S>> out;
  for_each_common_cell(f, g, [&](const DyadicInterval& c, const S& x, const S& y) {
    out.push_back({c, fn(x, y)});
  });
  return StepFunction<S>(std::move(out));
}

template <Scalar S>
StepFunction<S> invert(const StepFunction<S>& f) {
  return f.map([](const S& v) {
    if (ScalarOps<S>::sign(v) == 0) throw std::domain_error("non-invertible step function");
    return S(1) / v;
  });
}

template <Scalar S>
StepFunction<S> square(const StepFunction<S>& f) {
  return f.map([](const S& v) { return v * v; });
}

template <Scalar S>
StepFunction<S> abs(const StepFunction<S>& f) {
  return f.map([](const S& v) { return scalar_abs(v); });
}

template <Scalar S>
StepFunction<S> scale(const StepFunction<S>& f, const S& factor) {
  return f.map([&](const S& v) { return v * factor; });
}

template <Scalar S>
S min_value(const StepFunction<S>& f) {
  S m = f.leaves().front().value;
  for (const auto& l : f.leaves()) m = scalar_min(m, l.value);
  return m;
}

template <Scalar S>
S max_value(const StepFunction<S>& f) {
  S m = f.leaves().front().value;
  for (const auto& l : f.leaves()) m = scalar_max(m, l.value);
  return m;
}

template <Scalar S>
bool is_positive(const StepFunction<S>& f) {
  return std::all_of(f.leaves().begin(), f.leaves().end(),
                     [](const Leaf<S>& l) { return ScalarOps<S>::sign(l.value) > 0; });
}

template <Scalar S>
StepFunction<double> to_float(const StepFunction<S>& f) {
  std::vector<Leaf<double>> out;
  out.reserve(f.size());
  for (const auto& l : f.leaves()) out.push_back({l.interval, ScalarOps<S>::to_double(l.value)});
  return StepFunction<double>(std::move(out));
}

// ---------------------------------------------------------------------------
// Text format: one leaf per line, "path-bits<TAB>value".

template <Scalar S>
std::string to_text(const StepFunction<S>& f) {
  std::string out;
  for (const auto& l : f.leaves()) {
    out += l.interval.path();
    out += '\t';
    out += ScalarOps<S>::to_string(l.value);
    out += '\n';
  }
  return out;
}

template <Scalar S>
StepFunction<S> from_text(std::string_view text) {
  std::vector<Leaf<S>> leaves;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected path<TAB>value");
    }
    leaves.push_back({DyadicInterval::from_path(line.substr(0, tab)), ScalarOps<S>::parse(line.substr(tab + 1))});
  }
  return StepFunction<S>(std::move(leaves));
}

}  // namespace del
