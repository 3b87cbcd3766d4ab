#include "pype/pe_grid.hpp"

#include "pype/csv.hpp"

#include <algorithm>
#include <stdexcept>

namespace pype {

EncodingScheme EncodingScheme::pyramid_descent(int interval) {
  if (interval < 1) throw std::invalid_argument("descent interval must be >= 1");
  return EncodingScheme(SchemeKind::PyramidDescent, interval);
}

EncodingScheme EncodingScheme::parse(const std::string& name, int interval) {
  if (name == "raster") return raster_scan();
  if (name == "concentric") return concentric();
  if (name == "allone") return all_one();
  if (name == "pyramid") return pyramid_descent(interval);
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string EncodingScheme::name() const {
  switch (kind_) {
    case SchemeKind::RasterScan: return "raster";
    case SchemeKind::Concentric: return "concentric";
    case SchemeKind::AllOne: return "allone";
    case SchemeKind::PyramidDescent: return "pyramid";
  }
  return "unknown";
}

PositionGrid::PositionGrid(IndexMatrix indices) : indices_(std::move(indices)) {
  if (indices_.rows() < 1 || indices_.cols() < 1) {
    throw std::invalid_argument("position grid must be non-empty");
  }
  if (indices_.minCoeff() < 1) throw std::invalid_argument("position indices must be >= 1");
}

int DescentSchedule::p_max_at(int layer) const {
  if (layer < 1 || layer > num_layers) {
    throw std::out_of_range("layer " + std::to_string(layer) + " outside [1, " +
                            std::to_string(num_layers) + "]");
  }
  return per_layer_p_max[static_cast<std::size_t>(layer - 1)];
}

int ring_depth(int i, int j, int height, int width) {
  if (i < 0 || i >= height || j < 0 || j >= width) {
    throw std::invalid_argument("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") outside " + std::to_string(height) + "x" +
                                std::to_string(width) + " grid");
  }
#ifdef PYPE_MUTATE_RING_DEPTH
  // Deliberate off-by-one used to confirm the self-check catches regressions.
  return std::min({i, j, height - 1 - i, width - 1 - j}) + 1;
#else
  return std::min({i, j, height - 1 - i, width - 1 - j});
#endif
}

PositionGrid build_grid(const EncodingScheme& scheme, int height, int width, int p_max) {
  if (height < 1 || width < 1) throw std::invalid_argument("grid dimensions must be >= 1");
  if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");

  IndexMatrix indices(height, width);
  switch (scheme.kind()) {
    case SchemeKind::RasterScan:
      for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) indices(i, j) = i * width + j + 1;
      break;
    case SchemeKind::AllOne:
      indices.setOnes();
      break;
    case SchemeKind::Concentric:
    case SchemeKind::PyramidDescent:
      for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j)
          indices(i, j) = std::min(ring_depth(i, j, height, width) + 1, p_max);
      break;
  }
  return PositionGrid(std::move(indices));
}

DescentSchedule build_schedule(int num_layers, int interval, int height, int width) {
  if (width == 0) width = height;
  if (num_layers < 1) throw std::invalid_argument("num_layers must be >= 1");
  if (interval < 1) throw std::invalid_argument("descent interval must be >= 1");
  if (height < 1 || width < 1) throw std::invalid_argument("grid dimensions must be >= 1");

  DescentSchedule schedule;
  schedule.num_layers = num_layers;
  schedule.descent_interval = interval;
  schedule.initial_p_max = std::max(1, std::min(height / 2, std::min(height, width) / 2));
  schedule.per_layer_p_max.reserve(static_cast<std::size_t>(num_layers));

  int p_max = schedule.initial_p_max;
  for (int layer = 1; layer <= num_layers; ++layer) {
    if (layer % interval == 0 && p_max > 1) --p_max;
    schedule.per_layer_p_max.push_back(p_max);
  }
  return schedule;
}

PositionGrid grid_for_layer(const EncodingScheme& scheme, int height, int width,
                            const DescentSchedule& schedule, int layer) {
  const int p_max = schedule.p_max_at(layer);
  if (scheme.kind() == SchemeKind::PyramidDescent) return build_grid(scheme, height, width, p_max);
  return build_grid(scheme, height, width, schedule.initial_p_max);
}

std::string grid_to_csv(const PositionGrid& grid) {
  std::string out;
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) {
      if (j > 0) out += ',';
      out += std::to_string(grid(i, j));
    }
    out += '\n';
  }
  return out;
}

PositionGrid grid_from_csv(const std::string& text) {
  const auto rows = parse_int_rows(text, "grid");
  if (rows.empty()) throw ParseError("grid", 1, "empty grid");
  const auto width = rows.front().size();
  IndexMatrix indices(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw ParseError("grid", static_cast<int>(i + 1), "ragged row");
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (rows[i][j] < 1) throw ParseError("grid", static_cast<int>(i + 1), "index < 1");
      indices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<int>(rows[i][j]);
    }
  }
  return PositionGrid(std::move(indices));
}

std::string schedule_trace(const DescentSchedule& schedule) {
  std::string out;
  for (std::size_t l = 0; l < schedule.per_layer_p_max.size(); ++l) {
    if (l > 0) out += ',';
    out += std::to_string(schedule.per_layer_p_max[l]);
  }
  return out;
}

}  // namespace pype
