#ifndef PYPE_ANALYSIS_HPP
#define PYPE_ANALYSIS_HPP

#include "pype/decoder.hpp"
#include "pype/seq_layout.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace pype {

inline constexpr int kDefaultTopK = 5;
inline constexpr double kDefaultAnchorMultiple = 5.0;

struct AnchorMetrics {
  int layer = 1;
  double topk_mass = 0.0;
  double entropy = 0.0;
  int anchor_count = 0;
};

/// Sum of the k largest entries of a probability vector.
double topk_mass(const Eigen::VectorXd& dist, int k);

/// Shannon entropy in nats, with 0 ln 0 taken as 0.
double attention_entropy(const Eigen::VectorXd& dist);

/// Number of keys whose mean received attention exceeds `threshold_multiple / num_keys`.
/// This is a stand-in detector for anchor ("summary") tokens.
int anchor_count(const Eigen::VectorXd& column_means, double threshold_multiple);

/// Mean attention each visual key receives from queries that see at least one visual key,
/// each query row renormalized over the visual columns. `probs` is head-averaged.
Eigen::VectorXd visual_received_attention(const Matrix& probs, const SequenceLayout& layout);

/// One entry per layer, computed on head-averaged attention restricted to visual keys.
std::vector<AnchorMetrics> layer_report(const std::vector<AttentionRecord>& records,
                                        const SequenceLayout& layout, int k = kDefaultTopK,
                                        double threshold_multiple = kDefaultAnchorMultiple);

// "layer,topk_mass,entropy,anchor_count" header, reals with 6 decimals.
std::string metrics_to_csv(const std::vector<AnchorMetrics>& metrics);
std::vector<AnchorMetrics> metrics_from_csv(const std::string& text);

/// Plain-text PGM ("P2"), gray = round(255 * v / max v); an all-zero map is all black.
std::string heatmap_to_pgm(const Matrix& values);
void render_heatmap(const Matrix& values, const std::string& path);

struct GrayImage {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<int> pixels;  // row-major
};
GrayImage parse_pgm(const std::string& text);

}  // namespace pype

#endif  // PYPE_ANALYSIS_HPP
