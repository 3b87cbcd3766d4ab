#include "pype/seq_layout.hpp"

#include "pype/csv.hpp"

#include <stdexcept>

namespace pype {

Segment SequenceLayout::segment_of(int slot) const {
  if (slot < 0 || slot >= total_len()) throw std::out_of_range("slot outside sequence");
  if (slot < visual_begin()) return Segment::Prefix;
  if (slot < instruction_begin()) return Segment::Visual;
  return Segment::Instruction;
}

SequenceLayout make_layout(int prefix_len, PositionGrid grid, int instruction_len) {
  if (prefix_len < 0 || instruction_len < 0) {
    throw std::invalid_argument("segment lengths must be >= 0");
  }
  return SequenceLayout{prefix_len, std::move(grid), instruction_len};
}

AbsolutePositions assign_positions(const SequenceLayout& layout,
                                   std::optional<int> instruction_anchor) {
  const int max_index = layout.grid.max_index();
  const int anchor = instruction_anchor.value_or(max_index);
  if (anchor < max_index) {
    throw std::invalid_argument("instruction anchor below the grid's max index");
  }

  AbsolutePositions positions;
  positions.reserve(static_cast<std::size_t>(layout.total_len()));
  for (int k = 0; k < layout.prefix_len; ++k) positions.push_back(k);
  const auto& grid = layout.grid;
  for (int i = 0; i < grid.height(); ++i)
    for (int j = 0; j < grid.width(); ++j) positions.push_back(layout.prefix_len + grid(i, j) - 1);
  for (int k = 0; k < layout.instruction_len; ++k)
    positions.push_back(static_cast<long long>(layout.prefix_len) + anchor + k);
  return positions;
}

BoolMatrix build_mask(const SequenceLayout& layout, const AbsolutePositions& positions) {
  const int n = layout.total_len();
  if (static_cast<int>(positions.size()) != n) {
    throw std::invalid_argument("positions length " + std::to_string(positions.size()) +
                                " does not match layout length " + std::to_string(n));
  }

  BoolMatrix mask = BoolMatrix::Constant(n, n, false);
  for (int a = 0; a < n; ++a) {
    const Segment qs = layout.segment_of(a);
    for (int b = 0; b < n; ++b) {
      const Segment ks = layout.segment_of(b);
      bool allowed = false;
      switch (qs) {
        case Segment::Prefix:
          allowed = ks == Segment::Prefix && positions[b] <= positions[a];
          break;
        case Segment::Visual:
          allowed = ks == Segment::Prefix ||
                    (ks == Segment::Visual && positions[b] <= positions[a]);
          break;
        case Segment::Instruction:
          allowed = ks != Segment::Instruction || b <= a;
          break;
      }
      mask(a, b) = allowed;
    }
  }
  return mask;
}

bool validate_mask(const BoolMatrix& mask, const AbsolutePositions& positions) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  if (mask.rows() != n || mask.cols() != n) return false;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (!mask(a, a)) return false;
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto pa = positions[static_cast<std::size_t>(a)];
      const auto pb = positions[static_cast<std::size_t>(b)];
      if (mask(a, b) && pb > pa) return false;
      if (!mask(a, b) && pb < pa) return false;
    }
  }
  return true;
}

std::string positions_to_csv(const AbsolutePositions& positions) {
  std::string out;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (k > 0) out += ',';
    out += std::to_string(positions[k]);
  }
  out += '\n';
  return out;
}

std::string mask_to_csv(const BoolMatrix& mask) {
  std::string out;
  out.reserve(static_cast<std::size_t>(mask.size() * 2));
  for (Eigen::Index a = 0; a < mask.rows(); ++a) {
    for (Eigen::Index b = 0; b < mask.cols(); ++b) {
      if (b > 0) out += ',';
      out += mask(a, b) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

BoolMatrix mask_from_csv(const std::string& text) {
  const auto rows = parse_int_rows(text, "mask");
  const auto n = rows.size();
  BoolMatrix mask(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    if (rows[a].size() != n) throw ParseError("mask", static_cast<int>(a + 1), "mask not square");
    for (std::size_t b = 0; b < n; ++b) {
      const auto v = rows[a][b];
      if (v != 0 && v != 1) throw ParseError("mask", static_cast<int>(a + 1), "entry not 0/1");
      mask(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v == 1;
    }
  }
  return mask;
}

}  // namespace pype
