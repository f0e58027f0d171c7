#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "del/interval.hpp"
#include "del/scalar.hpp"
#include "del/step_function.hpp"
#include "del/weight.hpp"

namespace del {

/// Finitely supported signs on dyadic intervals. Zero entries are not stored.
class SignPattern {
 public:
  SignPattern() = default;

  void set(const DyadicInterval& interval, int sign) {
    if (sign < -1 || sign > 1) throw std::invalid_argument("sign must be -1, 0 or +1");
    if (sign == 0) {
      signs_.erase(interval);
    } else {
      signs_[interval] = sign;
    }
  }

  [[nodiscard]] int at(const DyadicInterval& interval) const {
    auto it = signs_.find(interval);
    return it == signs_.end() ? 0 : it->second;
  }

  [[nodiscard]] const std::map<DyadicInterval, int>& entries() const { return signs_; }
  [[nodiscard]] std::size_t size() const { return signs_.size(); }
  [[nodiscard]] bool empty() const { return signs_.empty(); }

  /// One interval per line, "path-bits<TAB>sign".
  [[nodiscard]] std::string to_text() const;
  static SignPattern from_text(std::string_view text);

 private:
  std::map<DyadicInterval, int> signs_;
};

/// Sign -1 on every row member of every even-level special interval.
template <Scalar S>
SignPattern paper_sign_pattern(const AnnotatedWeight<S>& aw) {
  SignPattern s;
  for (const auto& sp : aw.specials) {
    if (sp.level % 2 != 0) continue;
    for (const auto& r : sp.row) s.set(r, -1);
  }
  return s;
}

/// Minimal refinement of `cells` (a tiling in address order) in which every
/// interval of `targets` is a union of cells.
std::vector<DyadicInterval> refine_partition(const std::vector<DyadicInterval>& cells,
                                             std::vector<DyadicInterval> targets);

namespace detail {

template <Scalar S>
std::vector<DyadicInterval> leaf_cells(const StepFunction<S>& f) {
  std::vector<DyadicInterval> out;
  out.reserve(f.size());
  for (const auto& l : f.leaves()) out.push_back(l.interval);
  return out;
}

/// Node of the tree equal to `interval`, or the leaf node containing it.
template <Scalar S>
int find_node(const DyadicTree<S>& tree, const DyadicInterval& interval) {
  int id = 0;
  while (true) {
    const auto& n = tree.node(id);
    if (n.interval == interval || n.is_leaf()) return id;
    const unsigned bit = (interval.index() >> (interval.depth() - n.interval.depth() - 1)) & 1U;
    id = bit ? n.right : n.left;
  }
}

}  // namespace detail

/// T f = sum_R s(R) (f,h_R) h_R, on f's leaves refined by the children of the
/// support of s.
template <Scalar S>
StepFunction<S> martingale_transform(const StepFunction<S>& f, const SignPattern& s) {
  std::vector<DyadicInterval> targets;
  for (const auto& [r, sign] : s.entries()) {
    targets.push_back(r.left());
    targets.push_back(r.right());
  }
  const StepFunction<S> g = f.refine(refine_partition(detail::leaf_cells(f), std::move(targets)));
  const DyadicTree<S> tree(g);
  std::vector<Leaf<S>> out;
  out.reserve(g.size());
  struct Frame {
    int node;
    S value;
  };
  std::vector<Frame> stack{{0, S(0)}};
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    const auto& n = tree.node(fr.node);
    if (n.is_leaf()) {
      out.push_back({n.interval, std::move(fr.value)});
      continue;
    }
    const int sign = s.at(n.interval);
    if (sign == 0) {
      stack.push_back({n.right, fr.value});
      stack.push_back({n.left, std::move(fr.value)});
      continue;
    }
    const S term = S(sign) * tree.haar_amplitude(n);
    stack.push_back({n.right, fr.value + term});
    stack.push_back({n.left, fr.value - term});
  }
  return StepFunction<S>(std::move(out));
}

/// Convention for the local oscillation Delta_I f.
enum class DeltaConvention {
  kHaar,        // (f,h_I)^2 / |I|, the square-function term
  kDifference,  // (<f>_{I+} - <f>_{I-})^2, four times the Haar term
};

/// Sum over dyadic I inside J of Delta_I(f)^2 chi_I, zero outside J.
template <Scalar S>
StepFunction<S> haar_square_sum(const StepFunction<S>& f, const DyadicInterval& j,
                                DeltaConvention conv = DeltaConvention::kHaar) {
  const auto cells = refine_partition(detail::leaf_cells(f), {j});
  const StepFunction<S> g = f.refine(cells);
  const DyadicTree<S> tree(g);
  const S factor = conv == DeltaConvention::kHaar ? S(1) : S(4);
  std::vector<Leaf<S>> out;
  out.reserve(cells.size());
  // depth-first walk in address order accumulating the ancestor sum
  struct Frame {
    int node;
    S sum;
    bool inside;
  };
  std::vector<Frame> stack{{0, S(0), j.is_root()}};
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    const auto& n = tree.node(fr.node);
    const bool inside = fr.inside || n.interval == j;
    if (n.is_leaf()) {
      out.push_back({n.interval, inside ? fr.sum : S(0)});
      continue;
    }
    S next = fr.sum;
    if (inside) {
      const S a = tree.haar_amplitude(n);
      next = next + factor * a * a;
    }
    stack.push_back({n.right, next, inside});
    stack.push_back({n.left, std::move(next), inside});
  }
  return StepFunction<S>(std::move(out));
}

/// S^2 f = sum over all dyadic I of (f,h_I)^2 chi_I / |I|.
template <Scalar S>
StepFunction<S> square_function(const StepFunction<S>& f) {
  return haar_square_sum(f, DyadicInterval::root(), DeltaConvention::kHaar);
}

/// M^d(f chi_J): the dyadic maximal function of the restriction of f >= 0 to J.
///
/// Inside J this is the running maximum of averages from J down to the leaf;
/// outside J the best interval is the smallest dyadic one containing x and J.
template <Scalar S>
StepFunction<S> maximal_function(const StepFunction<S>& f, const DyadicInterval& j) {
  for (const auto& l : f.leaves()) {
    if (ScalarOps<S>::sign(l.value) < 0) throw std::domain_error("maximal function expects nonnegative input");
  }
  const DyadicTree<S> tree(f);
  std::vector<Leaf<S>> out;
  const int jn = detail::find_node(tree, j);
  const auto& jnode = tree.node(jn);
  const bool inside_leaf = jnode.interval != j;
  const S mass = inside_leaf ? f.leaves()[static_cast<std::size_t>(jnode.leaf)].value *
                                   ScalarOps<S>::dyadic_length(j.depth())
                             : jnode.integral;
  // outside J: the sibling of each ancestor of J
  for (int d = 1; d <= j.depth(); ++d) {
    const DyadicInterval a = j.ancestor(d);
    const DyadicInterval sib = a.parent().child(a.is_right_child() ? 0U : 1U);
    out.push_back({sib, mass / ScalarOps<S>::dyadic_length(d - 1)});
  }
  if (inside_leaf) {
    out.push_back({j, f.leaves()[static_cast<std::size_t>(jnode.leaf)].value});
  } else {
    struct Frame {
      int node;
      S best;
    };
    std::vector<Frame> stack{{jn, tree.average(jnode)}};
    while (!stack.empty()) {
      Frame fr = std::move(stack.back());
      stack.pop_back();
      const auto& n = tree.node(fr.node);
      const S best = scalar_max(fr.best, tree.average(n));
      if (n.is_leaf()) {
        out.push_back({n.interval, best});
        continue;
      }
      stack.push_back({n.right, best});
      stack.push_back({n.left, best});
    }
  }
  return StepFunction<S>(std::move(out));
}

/// M^d f over the whole lattice.
template <Scalar S>
StepFunction<S> maximal_function(const StepFunction<S>& f) {
  return maximal_function(f, DyadicInterval::root());
}

/// sup over dyadic I of <w>_I <w^-1>_I.
template <Scalar S>
S a2_characteristic(const StepFunction<S>& w) {
  const StepFunction<S> inv = invert(w);
  const DyadicTree<S> tw(w);
  const DyadicTree<S> ti(inv);
  S best(1);  // intervals inside a leaf
  for (std::size_t i = 0; i < tw.nodes().size(); ++i) {
    const auto& a = tw.nodes()[i];
    const auto& b = ti.nodes()[i];
    best = scalar_max(best, tw.average(a) * ti.average(b));
  }
  return best;
}

/// sup over dyadic I of <w>_I / inf_I w.
template <Scalar S>
S a1_characteristic(const StepFunction<S>& w) {
  const DyadicTree<S> tree(w);
  const auto& nodes = tree.nodes();
  std::vector<S> mins(nodes.size());
  // children always follow their parent in node order
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const auto& n = nodes[i];
    mins[i] = n.is_leaf() ? w.leaves()[static_cast<std::size_t>(n.leaf)].value
                          : scalar_min(mins[static_cast<std::size_t>(n.left)], mins[static_cast<std::size_t>(n.right)]);
  }
  S best(1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (ScalarOps<S>::sign(mins[i]) <= 0) throw std::domain_error("A1 characteristic needs a positive weight");
    best = scalar_max(best, tree.average(nodes[i]) / mins[i]);
  }
  return best;
}

/// Weighted L^2 norm squared: integral of f^2 v.
template <Scalar S>
S weighted_norm_sq(const StepFunction<S>& f, const StepFunction<S>& v) {
  return integrate_product(square(f), v);
}

template <Scalar S>
struct RubioDeFrancia {
  StepFunction<S> value;  // sum_{j=0}^{terms} (M^d)^j g / (2 M)^j
  StepFunction<S> tail;   // (M^d)^{terms+1} g / (2 M)^terms
  std::vector<double> iterate_ratios;  // ||M^{j+1} g|| / ||M^j g|| in L^2(w^-1)
};

/// Truncated Rubio de Francia series in L^2(w^-1) with the 2^j M^j normalization.
template <Scalar S>
RubioDeFrancia<S> rubio_de_francia(const StepFunction<S>& g, const StepFunction<S>& w, const S& m_norm, int terms) {
  if (terms < 1) throw std::invalid_argument("rubio_de_francia needs at least one term");
  if (ScalarOps<S>::sign(m_norm) <= 0) throw std::invalid_argument("M norm estimate must be positive");
  const StepFunction<S> v = invert(w);
  const S denom = S(2) * m_norm;
  StepFunction<S> iterate = g;
  StepFunction<S> sum = g;
  S scale_j(1);
  RubioDeFrancia<S> out;
  double prev = std::sqrt(to_double(weighted_norm_sq(g, v)));
  for (int j = 1; j <= terms; ++j) {
    iterate = maximal_function(iterate);
    scale_j = scale_j / denom;
    sum = combine(sum, iterate, [&](const S& a, const S& b) { return a + b * scale_j; });
    const double cur = std::sqrt(to_double(weighted_norm_sq(iterate, v)));
    out.iterate_ratios.push_back(prev > 0 ? cur / prev : 0.0);
    prev = cur;
  }
  const StepFunction<S> next = maximal_function(iterate);
  out.tail = scale(next, scale_j);
  out.value = std::move(sum);
  return out;
}

/// w-measure of {f > lambda}.
template <Scalar S>
S weak_distribution(const StepFunction<S>& f, const StepFunction<S>& w, const S& lambda) {
  Accumulator<S> acc;
  for_each_common_cell(f, w, [&](const DyadicInterval& c, const S& fv, const S& wv) {
    if (lambda < fv) acc.add(wv * ScalarOps<S>::dyadic_length(c.depth()));
  });
  return acc.value();
}

}  // namespace del
