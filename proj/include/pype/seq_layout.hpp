#ifndef PYPE_SEQ_LAYOUT_HPP
#define PYPE_SEQ_LAYOUT_HPP

#include "pype/pe_grid.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace pype {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Segment { Prefix, Visual, Instruction };

/// Prefix text, one image in raster slot order, then instruction text.
struct SequenceLayout {
  int prefix_len = 0;
  PositionGrid grid;
  int instruction_len = 0;

  int visual_len() const { return grid.height() * grid.width(); }
  int total_len() const { return prefix_len + visual_len() + instruction_len; }
  int visual_begin() const { return prefix_len; }
  int instruction_begin() const { return prefix_len + visual_len(); }
  Segment segment_of(int slot) const;
};

SequenceLayout make_layout(int prefix_len, PositionGrid grid, int instruction_len);

using AbsolutePositions = std::vector<long long>;

/// Prefix token k -> k; visual cell (i, j) -> prefix_len + grid(i, j) - 1; instruction token
/// k -> prefix_len + anchor + k, where anchor defaults to the grid's own max index.
/// Passing a larger anchor pins instruction positions across layers.
AbsolutePositions assign_positions(const SequenceLayout& layout,
                                   std::optional<int> instruction_anchor = std::nullopt);

/// Query-row x key-column causal mask derived from positions.
BoolMatrix build_mask(const SequenceLayout& layout, const AbsolutePositions& positions);

/// True iff the diagonal is set, no key with a later position is allowed, and no key with a
/// strictly earlier position is masked.
bool validate_mask(const BoolMatrix& mask, const AbsolutePositions& positions);

std::string positions_to_csv(const AbsolutePositions& positions);
std::string mask_to_csv(const BoolMatrix& mask);
BoolMatrix mask_from_csv(const std::string& text);

}  // namespace pype

#endif  // PYPE_SEQ_LAYOUT_HPP
