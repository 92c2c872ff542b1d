#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slc/torus.hpp"

namespace slc {

/// Sample individuals are numbered 1..n.
using Element = int;

struct LabeledBlock {
  std::vector<Element> elements;  // sorted ascending, nonempty
  Site label;

  Element min() const { return elements.front(); }
  friend bool operator==(const LabeledBlock&, const LabeledBlock&) = default;
};

namespace detail {

// Sorts elements inside each block and blocks by their minimum; checks that
// the blocks are nonempty, disjoint, within [1, n] and, when `cover` is set,
// that they cover [n].
template <typename Block, typename ElementsOf>
void canonicalize_blocks(std::size_t n, std::vector<Block>& blocks, ElementsOf elements_of,
                         bool cover) {
  std::vector<char> seen(n + 1, 0);
  std::size_t total = 0;
  for (auto& b : blocks) {
    auto& els = elements_of(b);
    if (els.empty()) throw std::invalid_argument("empty block");
    std::sort(els.begin(), els.end());
    for (Element e : els) {
      if (e < 1 || static_cast<std::size_t>(e) > n)
        throw std::invalid_argument("element " + std::to_string(e) + " outside [1, " +
                                    std::to_string(n) + "]");
      if (seen[e]) throw std::invalid_argument("element " + std::to_string(e) + " repeated");
      seen[e] = 1;
      ++total;
    }
  }
  if (cover && total != n) throw std::invalid_argument("blocks do not cover [n]");
  std::sort(blocks.begin(), blocks.end(), [&](const Block& a, const Block& b) {
    return elements_of(a).front() < elements_of(b).front();
  });
}

}  // namespace detail

/// A partition of [n], blocks ordered by their minimal element.
class UnlabeledPartition {
 public:
  UnlabeledPartition() = default;
  UnlabeledPartition(std::size_t n, std::vector<std::vector<Element>> blocks)
      : n_(n), blocks_(std::move(blocks)) {
    detail::canonicalize_blocks(n_, blocks_, [](auto& b) -> auto& { return b; }, true);
  }

  static UnlabeledPartition singletons(std::size_t n) {
    std::vector<std::vector<Element>> b;
    for (std::size_t i = 1; i <= n; ++i) b.push_back({static_cast<Element>(i)});
    return UnlabeledPartition(n, std::move(b));
  }

  std::size_t sample_size() const { return n_; }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<std::vector<Element>>& blocks() const { return blocks_; }

  friend bool operator==(const UnlabeledPartition&, const UnlabeledPartition&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<Element>> blocks_;
};

/// A partition of [n] in which every block carries a torus site label.
///
/// Values are immutable once built; every operation returns a new value.
class LabeledPartition {
 public:
  LabeledPartition() = default;
  LabeledPartition(std::size_t n, std::vector<LabeledBlock> blocks)
      : n_(n), blocks_(std::move(blocks)) {
    detail::canonicalize_blocks(n_, blocks_, [](auto& b) -> auto& { return b.elements; }, true);
    owner_.assign(n_ + 1, -1);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      for (Element e : blocks_[i].elements) owner_[e] = static_cast<int>(i);
  }

  std::size_t sample_size() const { return n_; }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<LabeledBlock>& blocks() const { return blocks_; }
  const LabeledBlock& block(std::size_t i) const { return blocks_.at(i); }

  /// Position of the block containing element e (A(e)).
  std::size_t block_of(Element e) const {
    if (e < 1 || static_cast<std::size_t>(e) > n_) throw std::out_of_range("element out of range");
    return static_cast<std::size_t>(owner_[e]);
  }
  /// Label of the block containing element e (M(e)).
  Site label_of(Element e) const { return blocks_[block_of(e)].label; }

  /// Number of blocks carrying label x.
  std::size_t count_at(Site x) const {
    return static_cast<std::size_t>(std::count_if(
        blocks_.begin(), blocks_.end(), [&](const LabeledBlock& b) { return b.label == x; }));
  }

  friend bool operator==(const LabeledPartition& a, const LabeledPartition& b) {
    return a.n_ == b.n_ && a.blocks_ == b.blocks_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<LabeledBlock> blocks_;
  std::vector<int> owner_;
};

inline LabeledPartition singletons(std::size_t n, const std::vector<Site>& labels) {
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  if (labels.size() != n)
    throw std::invalid_argument("expected " + std::to_string(n) + " labels, got " +
                                std::to_string(labels.size()));
  std::vector<LabeledBlock> blocks;
  blocks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) blocks.push_back({{static_cast<Element>(i + 1)}, labels[i]});
  return LabeledPartition(n, std::move(blocks));
}

enum class LabelCheck { strict, relaxed };

/// Replace the blocks at `block_indices` (0-based positions) by their union,
/// labelled `new_label`. With LabelCheck::strict all merged blocks must
/// already carry `new_label`.
inline LabeledPartition merge(const LabeledPartition& p, const std::vector<std::size_t>& block_indices,
                              Site new_label, LabelCheck check = LabelCheck::strict) {
  std::set<std::size_t> idx(block_indices.begin(), block_indices.end());
  if (idx.size() != block_indices.size()) throw std::invalid_argument("duplicate block index");
  if (idx.size() < 2) throw std::invalid_argument("merge needs at least 2 blocks");
  if (*idx.rbegin() >= p.block_count()) throw std::invalid_argument("block index out of range");

  LabeledBlock merged{{}, new_label};
  std::vector<LabeledBlock> out;
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    const auto& b = p.block(i);
    if (idx.contains(i)) {
      if (check == LabelCheck::strict && b.label != new_label)
        throw std::invalid_argument("merged blocks must share the label " + to_string(new_label));
      merged.elements.insert(merged.elements.end(), b.elements.begin(), b.elements.end());
    } else {
      out.push_back(b);
    }
  }
  out.push_back(std::move(merged));
  return LabeledPartition(p.sample_size(), std::move(out));
}

inline UnlabeledPartition unlabeled_projection(const LabeledPartition& p) {
  std::vector<std::vector<Element>> blocks;
  blocks.reserve(p.block_count());
  for (const auto& b : p.blocks()) blocks.push_back(b.elements);
  return UnlabeledPartition(p.sample_size(), std::move(blocks));
}

/// Labeled partition induced on [m].
inline LabeledPartition restrict(const LabeledPartition& p, std::size_t m) {
  if (m < 1 || m > p.sample_size()) throw std::invalid_argument("restriction size out of range");
  std::vector<LabeledBlock> out;
  for (const auto& b : p.blocks()) {
    LabeledBlock r{{}, b.label};
    for (Element e : b.elements)
      if (static_cast<std::size_t>(e) <= m) r.elements.push_back(e);
    if (!r.elements.empty()) out.push_back(std::move(r));
  }
  return LabeledPartition(m, std::move(out));
}

/// sup_m 2^{-m} 1{p1|_m != p2|_m}.
inline double partition_metric(const LabeledPartition& p1, const LabeledPartition& p2) {
  if (p1.sample_size() != p2.sample_size())
    throw std::invalid_argument("partitions of different sample sizes");
  for (std::size_t m = 1; m <= p1.sample_size(); ++m)
    if (!(restrict(p1, m) == restrict(p2, m))) return std::ldexp(1.0, -static_cast<int>(m));
  return 0.0;
}

/// True iff every pair of distinct blocks has torus distance in [a, b].
inline bool in_distance_class(const LabeledPartition& p, const TorusSpec& torus, double a, double b) {
  if (a < 0 || a > b) throw std::invalid_argument("distance class needs 0 <= a <= b");
  const auto& bl = p.blocks();
  for (std::size_t i = 0; i < bl.size(); ++i)
    for (std::size_t j = i + 1; j < bl.size(); ++j) {
      const double d = torus_distance(bl[i].label, bl[j].label, torus);
      if (d < a || d > b) return false;
    }
  return true;
}

/// Throws unless every label lies on the torus.
inline void validate_labels(const LabeledPartition& p, const TorusSpec& torus) {
  for (const auto& b : p.blocks())
    if (!torus.contains(b.label))
      throw std::invalid_argument("label " + to_string(b.label) + " outside torus");
}

// Canonical text form: {1,3}@(0,0)|{2}@(5,-5)

inline std::string to_string(const std::vector<LabeledBlock>& blocks) {
  std::ostringstream os;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) os << '|';
    os << '{';
    for (std::size_t j = 0; j < blocks[i].elements.size(); ++j) {
      if (j) os << ',';
      os << blocks[i].elements[j];
    }
    os << "}@" << to_string(blocks[i].label);
  }
  return os.str();
}

inline std::string to_string(const LabeledPartition& p) { return to_string(p.blocks()); }

inline std::string to_string(const UnlabeledPartition& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.blocks().size(); ++i) {
    if (i) os << '|';
    os << '{';
    for (std::size_t j = 0; j < p.blocks()[i].size(); ++j) {
      if (j) os << ',';
      os << p.blocks()[i][j];
    }
    os << '}';
  }
  return os.str();
}

/// Parses the canonical text form; n defaults to the largest element seen.
inline LabeledPartition parse_labeled_partition(std::string_view text,
                                                std::optional<std::size_t> n = std::nullopt) {
  std::vector<LabeledBlock> blocks;
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("bad partition text at offset " + std::to_string(pos) + ": " + what);
  };
  auto expect = [&](char c) {
    if (pos >= text.size() || text[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  };
  auto read_int = [&]() {
    std::size_t start = pos;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start || (pos == start + 1 && (text[start] == '-' || text[start] == '+')))
      fail("expected integer");
    return std::stoi(std::string(text.substr(start, pos - start)));
  };
  Element max_el = 0;
  while (pos < text.size()) {
    LabeledBlock b;
    expect('{');
    while (true) {
      b.elements.push_back(read_int());
      max_el = std::max(max_el, b.elements.back());
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      break;
    }
    expect('}');
    expect('@');
    expect('(');
    b.label.x = read_int();
    expect(',');
    b.label.y = read_int();
    expect(')');
    blocks.push_back(std::move(b));
    if (pos < text.size()) expect('|');
  }
  if (blocks.empty()) fail("no blocks");
  return LabeledPartition(n.value_or(static_cast<std::size_t>(max_el)), std::move(blocks));
}

}  // namespace slc
