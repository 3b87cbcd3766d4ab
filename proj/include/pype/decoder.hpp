#ifndef PYPE_DECODER_HPP
#define PYPE_DECODER_HPP

#include "pype/pe_grid.hpp"
#include "pype/rope.hpp"
#include "pype/seq_layout.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pype {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Where instruction tokens sit when the visual max index descends.
enum class InstructionPositions {
  FollowLayer,  ///< continue from the current layer's max visual index
  Fixed,        ///< continue from the first layer's max visual index at every layer
};

struct DecoderConfig {
  int num_layers = 2;
  int num_heads = 2;
  int model_dim = 16;
  int vocab_size = 32;
  std::uint64_t seed = 0;
  EncodingScheme scheme = EncodingScheme::raster_scan();
  double rope_base = 10000.0;
  InstructionPositions instruction_positions = InstructionPositions::FollowLayer;

  int head_dim() const { return model_dim / num_heads; }
  int ffn_dim() const { return 4 * model_dim; }
  RotaryConfig<double> rotary() const { return {head_dim(), rope_base}; }
  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

struct LayerWeights {
  Eigen::VectorXd attn_norm;
  Matrix wq, wk, wv, wo;  // model_dim x model_dim; head h owns rows [h*hd, (h+1)*hd) of wq/wk/wv
  Eigen::VectorXd ffn_norm;
  Matrix w_up;    // ffn_dim x model_dim
  Matrix w_down;  // model_dim x ffn_dim
};

/// Immutable after construction; forward() may run concurrently on one state.
struct DecoderState {
  DecoderConfig config;
  Matrix embedding;  // vocab_size x model_dim
  std::vector<LayerWeights> layers;
  Eigen::VectorXd final_norm;
  Matrix unembed;  // vocab_size x model_dim
};

/// One head's attention probabilities for one layer (query rows, key columns).
struct AttentionRecord {
  int layer = 1;  // 1-indexed, matching the descent schedule
  int head = 0;
  Matrix probs;
};

struct ForwardResult {
  Matrix logits;  // total_len x vocab_size
  std::vector<AttentionRecord> records;  // layer-major, then head
};

/// Per-layer geometry the decoder sees: grid-derived positions and the causal mask.
struct LayerGeometry {
  AbsolutePositions positions;
  BoolMatrix mask;
};

inline constexpr double kRmsEps = 1e-5;
inline constexpr double kInitRange = 0.02;

/// SplitMix64 stream; uniform() maps the top 53 bits to [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Fills every projection, the embedding and the unembedding with uniform(-0.02, 0.02)
/// draws from SplitMix64(seed), in the same tensor order as the binary weight format.
/// Norm gains start at 1.
DecoderState init_decoder(const DecoderConfig& config);

Eigen::VectorXd rms_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& gain);
double silu(double x);

/// Positions and mask for every layer (index 0 is layer 1).
std::vector<LayerGeometry> layer_geometries(const DecoderConfig& config,
                                            const SequenceLayout& layout,
                                            const DescentSchedule& schedule);

ForwardResult forward(const DecoderState& state, std::span<const int> token_ids,
                      const SequenceLayout& layout, const DescentSchedule& schedule);

/// Head-averaged attention of the last instruction token over visual keys, one H x W map
/// per layer.
std::vector<Matrix> visual_to_instruction_attention(const std::vector<AttentionRecord>& records,
                                                    const SequenceLayout& layout);

// Binary weights: "PYPE", u32 version, u32 num_layers, num_heads, model_dim, vocab_size,
// ffn_dim, f64 rope_base, then little-endian f64 tensors in row-major order:
// embedding, per layer {attn_norm, wq, wk, wv, wo, ffn_norm, w_up, w_down}, final_norm,
// unembed.
inline constexpr std::uint32_t kWeightsVersion = 1;
void save_weights(const DecoderState& state, std::ostream& out);
/// `base` supplies the scheme, seed and instruction-position mode (not stored in the file).
DecoderState load_weights(std::istream& in, const DecoderConfig& base);

}  // namespace pype

#endif  // PYPE_DECODER_HPP
