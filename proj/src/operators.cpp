#include "del/operators.hpp"

#include <algorithm>

namespace del {

std::string SignPattern::to_text() const {
  std::string out;
  for (const auto& [interval, sign] : signs_) {
    out += interval.path();
    out += '\t';
    out += std::to_string(sign);
    out += '\n';
  }
  return out;
}

SignPattern SignPattern::from_text(std::string_view text) {
  SignPattern s;
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
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected path<TAB>sign");
    }
    const auto value = line.substr(tab + 1);
    int sign = 0;
    if (value == "-1") sign = -1;
    else if (value == "0") sign = 0;
    else if (value == "1" || value == "+1") sign = 1;
    else throw std::invalid_argument("line " + std::to_string(line_no) + ": sign must be -1, 0 or 1");
    s.set(DyadicInterval::from_path(line.substr(0, tab)), sign);
  }
  return s;
}

namespace {

using Targets = std::vector<DyadicInterval>;

// Any target strictly inside `cell`? Targets are sorted in address order.
bool has_strict_target(const DyadicInterval& cell, const Targets& targets) {
  auto it = std::lower_bound(targets.begin(), targets.end(), cell);
  for (; it != targets.end() && it->left_key() < cell.right_key(); ++it) {
    if (it->depth() > cell.depth()) return true;
  }
  return false;
}

void split_into(const DyadicInterval& cell, const Targets& targets, std::vector<DyadicInterval>& out) {
  if (!has_strict_target(cell, targets)) {
    out.push_back(cell);
    return;
  }
  split_into(cell.left(), targets, out);
  split_into(cell.right(), targets, out);
}

}  // namespace

std::vector<DyadicInterval> refine_partition(const std::vector<DyadicInterval>& cells, Targets targets) {
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  std::vector<DyadicInterval> out;
  out.reserve(cells.size());
  for (const auto& c : cells) split_into(c, targets, out);
  return out;
}

}  // namespace del
