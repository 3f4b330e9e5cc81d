#include "hdm/geometry.hpp"

#include <bit>
#include <string>

namespace hdm {

TreeGeometry::TreeGeometry(int levels) : levels_(levels) {
  if (levels < 1 || levels > kMaxLevels) {
    throw InputError("tree depth N must lie in [1, " + std::to_string(kMaxLevels) +
                     "], got " + std::to_string(levels));
  }
}

void TreeGeometry::check_site(std::int64_t site) const {
  if (!contains(site)) {
    throw InputError("site index " + std::to_string(site) + " outside 1.." +
                     std::to_string(length()));
  }
}

int hierarchical_distance(std::int64_t i, std::int64_t j, const TreeGeometry& geom) {
  geom.check_site(i);
  geom.check_site(j);
  // Highest differing bit of the 0-based labels.
  const auto diff = static_cast<std::uint64_t>((i - 1) ^ (j - 1));
  return static_cast<int>(std::bit_width(diff));
}

int distance_of_site(std::int64_t x, const TreeGeometry& geom) {
  geom.check_site(x);
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(x - 1)));
}

std::int64_t shell_size(int r, const TreeGeometry& geom) {
  if (r < 0 || r > geom.levels()) {
    throw InputError("shell " + std::to_string(r) + " outside 0.." +
                     std::to_string(geom.levels()));
  }
  return r == 0 ? 1 : std::int64_t{1} << (r - 1);
}

std::int64_t shell_first_site(int r) { return r == 0 ? 1 : (std::int64_t{1} << (r - 1)) + 1; }

BlockId block_of(std::int64_t site, int level, const TreeGeometry& geom) {
  geom.check_site(site);
  if (level < 0 || level > geom.levels()) {
    throw InputError("block level " + std::to_string(level) + " outside 0.." +
                     std::to_string(geom.levels()));
  }
  return {level, ((site - 1) >> level) + 1};
}

BlockId sibling_block(const BlockId& b, const TreeGeometry& geom) {
  if (b.level < 0 || b.level >= geom.levels()) {
    throw InputError("block at level " + std::to_string(b.level) + " has no sibling");
  }
  if (b.index < 1 || b.index > (std::int64_t{1} << (geom.levels() - b.level))) {
    throw InputError("block index " + std::to_string(b.index) + " out of range");
  }
  return {b.level, b.index % 2 == 1 ? b.index + 1 : b.index - 1};
}

}  // namespace hdm
