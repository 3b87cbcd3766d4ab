#include "pype/analysis.hpp"

#include "pype/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pype {

double topk_mass(const Eigen::VectorXd& dist, int k) {
  if (k < 1 || k > dist.size()) {
    throw std::invalid_argument("k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(dist.size()) + "]");
  }
  std::vector<double> sorted(dist.data(), dist.data() + dist.size());
  std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(), std::greater<>());
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += sorted[static_cast<std::size_t>(i)];
  return total;
}

double attention_entropy(const Eigen::VectorXd& dist) {
  double h = 0.0;
  for (const double p : dist) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

int anchor_count(const Eigen::VectorXd& column_means, double threshold_multiple) {
  if (column_means.size() == 0) return 0;
  const double threshold = threshold_multiple / static_cast<double>(column_means.size());
  return static_cast<int>((column_means.array() > threshold).count());
}

Eigen::VectorXd visual_received_attention(const Matrix& probs, const SequenceLayout& layout) {
  const int n = layout.total_len();
  if (probs.rows() != n || probs.cols() != n) {
    throw std::invalid_argument("attention matrix does not match layout");
  }
  const int begin = layout.visual_begin();
  const int count = layout.visual_len();
  Eigen::VectorXd received = Eigen::VectorXd::Zero(count);
  int rows = 0;
  for (int a = begin; a < n; ++a) {
    const auto visual = probs.row(a).segment(begin, count);
    const double mass = visual.sum();
    if (mass <= 0.0) continue;
    received += visual.transpose() / mass;
    ++rows;
  }
  if (rows > 0) received /= static_cast<double>(rows);
  return received;
}

std::vector<AnchorMetrics> layer_report(const std::vector<AttentionRecord>& records,
                                        const SequenceLayout& layout, int k,
                                        double threshold_multiple) {
  if (records.empty()) throw std::invalid_argument("no attention records to report on");

  std::map<int, std::pair<Matrix, int>> per_layer;
  for (const auto& rec : records) {
    auto [it, inserted] = per_layer.try_emplace(rec.layer, Matrix::Zero(rec.probs.rows(), rec.probs.cols()), 0);
    if (it->second.first.rows() != rec.probs.rows() || it->second.first.cols() != rec.probs.cols()) {
      throw std::invalid_argument("attention records of one layer differ in shape");
    }
    it->second.first += rec.probs;
    ++it->second.second;
  }

  const int effective_k = std::min(k, layout.visual_len());
  std::vector<AnchorMetrics> out;
  for (const auto& [layer, acc] : per_layer) {
    const Matrix mean = acc.first / static_cast<double>(acc.second);
    const Eigen::VectorXd received = visual_received_attention(mean, layout);
    AnchorMetrics m;
    m.layer = layer;
    m.topk_mass = topk_mass(received, effective_k);
    m.entropy = attention_entropy(received);
    m.anchor_count = anchor_count(received, threshold_multiple);
    out.push_back(m);
  }
  return out;
}

std::string metrics_to_csv(const std::vector<AnchorMetrics>& metrics) {
  std::string out = "layer,topk_mass,entropy,anchor_count\n";
  char line[128];
  for (const auto& m : metrics) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%d\n", m.layer, m.topk_mass, m.entropy,
                  m.anchor_count);
    out += line;
  }
  return out;
}

std::vector<AnchorMetrics> metrics_from_csv(const std::string& text) {
  const std::string header = "layer,topk_mass,entropy,anchor_count";
  const auto eol = text.find('\n');
  if (text.substr(0, eol) != header) throw ParseError("metrics", 1, "unexpected header");
  if (eol == std::string::npos || eol + 1 == text.size()) return {};

  std::vector<AnchorMetrics> out;
  int line_no = 1;
  for (const auto& row : parse_real_rows(std::string_view(text).substr(eol + 1), "metrics")) {
    ++line_no;
    if (row.size() != 4) throw ParseError("metrics", line_no, "expected 4 columns");
    out.push_back({static_cast<int>(row[0]), row[1], row[2], static_cast<int>(row[3])});
  }
  return out;
}

std::string heatmap_to_pgm(const Matrix& values) {
  if (values.size() == 0) throw std::invalid_argument("heatmap must be non-empty");
  if (!values.allFinite()) throw std::invalid_argument("heatmap entries must be finite");
  if (values.minCoeff() < 0.0) throw std::invalid_argument("heatmap entries must be >= 0");

  const double peak = values.maxCoeff();
  std::ostringstream out;
  out << "P2\n" << values.cols() << ' ' << values.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const long gray = peak > 0.0 ? std::lround(255.0 * values(i, j) / peak) : 0;
      if (j > 0) out << ' ';
      out << gray;
    }
    out << '\n';
  }
  return out.str();
}

void render_heatmap(const Matrix& values, const std::string& path) {
  write_file(path, heatmap_to_pgm(values));
}

GrayImage parse_pgm(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  GrayImage img;
  if (!(in >> magic) || magic != "P2") throw ParseError("pgm", 1, "missing P2 magic");
  if (!(in >> img.width >> img.height >> img.max_value) || img.width < 1 || img.height < 1) {
    throw ParseError("pgm", 2, "bad header");
  }
  const auto count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.reserve(count);
  int px = 0;
  while (img.pixels.size() < count && in >> px) {
    if (px < 0 || px > img.max_value) throw ParseError("pgm", 4, "pixel out of range");
    img.pixels.push_back(px);
  }
  if (img.pixels.size() != count) throw ParseError("pgm", 4, "too few pixels");
  return img;
}

}  // namespace pype
