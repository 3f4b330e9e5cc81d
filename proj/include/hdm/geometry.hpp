#pragma once

#include <cstdint>

#include "hdm/errors.hpp"

namespace hdm {

/// Binary-tree partition of a chain of L = 2^N sites.
///
/// Sites are labelled 1..L. The partition at level p splits the chain into
/// 2^(N-p) consecutive blocks of 2^p sites each.
class TreeGeometry {
 public:
  static constexpr int kMaxLevels = 40;

  explicit TreeGeometry(int levels);

  int levels() const { return levels_; }
  std::int64_t length() const { return std::int64_t{1} << levels_; }

  bool contains(std::int64_t site) const { return site >= 1 && site <= length(); }
  void check_site(std::int64_t site) const;

  bool operator==(const TreeGeometry&) const = default;

 private:
  int levels_;
};

/// Element (p, q) of the level-p partition, q = 1..2^(N-p).
struct BlockId {
  int level = 0;
  std::int64_t index = 1;

  std::int64_t first_site() const { return (index - 1) * (std::int64_t{1} << level) + 1; }
  std::int64_t last_site() const { return index * (std::int64_t{1} << level); }
  std::int64_t size() const { return std::int64_t{1} << level; }

  bool operator==(const BlockId&) const = default;
};

/// Smallest level p at which sites i and j share a block.
int hierarchical_distance(std::int64_t i, std::int64_t j, const TreeGeometry& geom);

/// r(1, x): 0 for x = 1, ceil(log2 x) otherwise.
int distance_of_site(std::int64_t x, const TreeGeometry& geom);

/// Number of sites at hierarchical distance r from site 1.
std::int64_t shell_size(int r, const TreeGeometry& geom);

/// First site of shell r (1 for r = 0, 2^(r-1)+1 otherwise).
std::int64_t shell_first_site(int r);

/// Block at level p that contains a site.
BlockId block_of(std::int64_t site, int level, const TreeGeometry& geom);

/// The block merged with b one level up.
BlockId sibling_block(const BlockId& b, const TreeGeometry& geom);

}  // namespace hdm
