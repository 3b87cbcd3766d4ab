#ifndef PYPE_PE_GRID_HPP
#define PYPE_PE_GRID_HPP

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace pype {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SchemeKind { RasterScan, Concentric, AllOne, PyramidDescent };

/// Visual position-encoding scheme. Only PyramidDescent carries a descent interval.
class EncodingScheme {
 public:
  static EncodingScheme raster_scan() { return EncodingScheme(SchemeKind::RasterScan, 1); }
  static EncodingScheme concentric() { return EncodingScheme(SchemeKind::Concentric, 1); }
  static EncodingScheme all_one() { return EncodingScheme(SchemeKind::AllOne, 1); }
  /// Throws std::invalid_argument when interval < 1.
  static EncodingScheme pyramid_descent(int interval);

  /// Parses "raster", "concentric", "allone" or "pyramid".
  static EncodingScheme parse(const std::string& name, int interval = 1);

  SchemeKind kind() const { return kind_; }
  int descent_interval() const { return interval_; }
  bool is_ring_based() const {
    return kind_ == SchemeKind::Concentric || kind_ == SchemeKind::PyramidDescent;
  }
  std::string name() const;

  friend bool operator==(const EncodingScheme&, const EncodingScheme&) = default;

 private:
  EncodingScheme(SchemeKind kind, int interval) : kind_(kind), interval_(interval) {}

  SchemeKind kind_;
  int interval_;
};

/// H x W matrix of 1-based position indices for visual tokens.
class PositionGrid {
 public:
  explicit PositionGrid(IndexMatrix indices);

  int height() const { return static_cast<int>(indices_.rows()); }
  int width() const { return static_cast<int>(indices_.cols()); }
  int operator()(int i, int j) const { return indices_(i, j); }
  const IndexMatrix& indices() const { return indices_; }
  int max_index() const { return indices_.maxCoeff(); }

  friend bool operator==(const PositionGrid& a, const PositionGrid& b) {
    return a.indices_.rows() == b.indices_.rows() && a.indices_.cols() == b.indices_.cols() &&
           a.indices_ == b.indices_;
  }

 private:
  IndexMatrix indices_;
};

/// Per-layer maximum assignable index, following the descent rule with 1-indexed layers.
struct DescentSchedule {
  int num_layers = 1;
  int descent_interval = 1;
  int initial_p_max = 1;
  std::vector<int> per_layer_p_max;

  int p_max_at(int layer) const;
};

/// Distance of cell (i, j) to the nearest image border.
int ring_depth(int i, int j, int height, int width);

PositionGrid build_grid(const EncodingScheme& scheme, int height, int width, int p_max = 1);

/// Initial P_max is floor(H/2), clamped to floor(min(H, W)/2) and to at least 1.
/// `width` defaults to `height` (square patch grid).
DescentSchedule build_schedule(int num_layers, int interval, int height, int width = 0);

/// Grid seen by `layer` (1-indexed). Only PyramidDescent follows the schedule; the other
/// schemes use the initial P_max at every layer.
PositionGrid grid_for_layer(const EncodingScheme& scheme, int height, int width,
                            const DescentSchedule& schedule, int layer);

// CSV: one line per grid row, comma separated, newline terminated, no header.
std::string grid_to_csv(const PositionGrid& grid);
PositionGrid grid_from_csv(const std::string& text);

std::string schedule_trace(const DescentSchedule& schedule);

}  // namespace pype

#endif  // PYPE_PE_GRID_HPP
