#include "pype/decoder.hpp"

#include <cmath>
#include <stdexcept>

namespace pype {

void DecoderConfig::validate() const {
  if (num_layers < 1) throw std::invalid_argument("num_layers must be >= 1");
  if (num_heads < 1) throw std::invalid_argument("num_heads must be >= 1");
  if (model_dim < 1 || model_dim % num_heads != 0) {
    throw std::invalid_argument("model_dim must be a positive multiple of num_heads");
  }
  if (head_dim() % 2 != 0) throw std::invalid_argument("head dimension must be even");
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
  rotary().validate();
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

Matrix uniform_matrix(SplitMix64& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = kInitRange * (2.0 * rng.uniform() - 1.0);
  return m;
}

}  // namespace

DecoderState init_decoder(const DecoderConfig& config) {
  config.validate();
  const int d = config.model_dim;
  const int f = config.ffn_dim();

  SplitMix64 rng(config.seed);
  DecoderState state;
  state.config = config;
  state.embedding = uniform_matrix(rng, config.vocab_size, d);
  state.layers.reserve(static_cast<std::size_t>(config.num_layers));
  for (int l = 0; l < config.num_layers; ++l) {
    LayerWeights w;
    w.attn_norm = Eigen::VectorXd::Ones(d);
    w.wq = uniform_matrix(rng, d, d);
    w.wk = uniform_matrix(rng, d, d);
    w.wv = uniform_matrix(rng, d, d);
    w.wo = uniform_matrix(rng, d, d);
    w.ffn_norm = Eigen::VectorXd::Ones(d);
    w.w_up = uniform_matrix(rng, f, d);
    w.w_down = uniform_matrix(rng, d, f);
    state.layers.push_back(std::move(w));
  }
  state.final_norm = Eigen::VectorXd::Ones(d);
  state.unembed = uniform_matrix(rng, config.vocab_size, d);
  return state;
}

Eigen::VectorXd rms_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& gain) {
  const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()) + kRmsEps);
  return (x / rms).cwiseProduct(gain);
}

double silu(double x) { return x / (1.0 + std::exp(-x)); }

std::vector<LayerGeometry> layer_geometries(const DecoderConfig& config,
                                            const SequenceLayout& layout,
                                            const DescentSchedule& schedule) {
  const int h = layout.grid.height();
  const int w = layout.grid.width();
  std::optional<int> anchor;
  if (config.instruction_positions == InstructionPositions::Fixed) {
    anchor = grid_for_layer(config.scheme, h, w, schedule, 1).max_index();
  }

  std::vector<LayerGeometry> out;
  out.reserve(static_cast<std::size_t>(schedule.num_layers));
  for (int layer = 1; layer <= schedule.num_layers; ++layer) {
    const SequenceLayout per_layer{layout.prefix_len,
                                   grid_for_layer(config.scheme, h, w, schedule, layer),
                                   layout.instruction_len};
    LayerGeometry g;
    g.positions = assign_positions(per_layer, anchor);
    g.mask = build_mask(per_layer, g.positions);
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

Matrix rms_norm_rows(const Matrix& x, const Eigen::VectorXd& gain) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    out.row(t) = rms_norm(x.row(t).transpose(), gain).transpose();
  }
  return out;
}

}  // namespace

ForwardResult forward(const DecoderState& state, std::span<const int> token_ids,
                      const SequenceLayout& layout, const DescentSchedule& schedule) {
  const DecoderConfig& cfg = state.config;
  const int n = layout.total_len();
  if (static_cast<int>(token_ids.size()) != n) {
    throw std::invalid_argument("token count " + std::to_string(token_ids.size()) +
                                " does not match layout length " + std::to_string(n));
  }
  if (schedule.num_layers != cfg.num_layers) {
    throw std::invalid_argument("schedule covers " + std::to_string(schedule.num_layers) +
                                " layers, decoder has " + std::to_string(cfg.num_layers));
  }

  Matrix x(n, cfg.model_dim);
  for (int t = 0; t < n; ++t) {
    const int id = token_ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= cfg.vocab_size) {
      throw std::invalid_argument("token id " + std::to_string(id) + " outside vocabulary");
    }
    x.row(t) = state.embedding.row(id);
  }

  const auto geometries = layer_geometries(cfg, layout, schedule);
  const int hd = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const Eigen::VectorXd theta = rotary_frequencies(cfg.rotary());

  ForwardResult result;
  result.records.reserve(static_cast<std::size_t>(cfg.num_layers * cfg.num_heads));

  for (int l = 0; l < cfg.num_layers; ++l) {
    const LayerWeights& w = state.layers[static_cast<std::size_t>(l)];
    const LayerGeometry& geo = geometries[static_cast<std::size_t>(l)];

    const Matrix a_in = rms_norm_rows(x, w.attn_norm);
    const Matrix q = a_in * w.wq.transpose();
    const Matrix k = a_in * w.wk.transpose();
    const Matrix v = a_in * w.wv.transpose();

    Matrix heads_out(n, cfg.model_dim);
    for (int h = 0; h < cfg.num_heads; ++h) {
      Matrix q_rot(n, hd), k_rot(n, hd);
      for (int t = 0; t < n; ++t) {
        const auto pos = geo.positions[static_cast<std::size_t>(t)];
        q_rot.row(t) = rotate_with(q.row(t).segment(h * hd, hd).transpose(), pos, theta);
        k_rot.row(t) = rotate_with(k.row(t).segment(h * hd, hd).transpose(), pos, theta);
      }
      const Matrix scores = q_rot * k_rot.transpose();

      AttentionRecord rec{l + 1, h, Matrix(n, n)};
      for (int a = 0; a < n; ++a) {
        const std::span<const bool> mask_row(geo.mask.row(a).data(), static_cast<std::size_t>(n));
        rec.probs.row(a) = masked_softmax(scores.row(a).transpose(), mask_row, scale).transpose();
      }
      heads_out.middleCols(h * hd, hd) = rec.probs * v.middleCols(h * hd, hd);
      result.records.push_back(std::move(rec));
    }
    x += heads_out * w.wo.transpose();

    const Matrix f_in = rms_norm_rows(x, w.ffn_norm);
    const Matrix hidden = (f_in * w.w_up.transpose()).unaryExpr([](double z) { return silu(z); });
    x += hidden * w.w_down.transpose();
  }

  result.logits = rms_norm_rows(x, state.final_norm) * state.unembed.transpose();
  return result;
}

std::vector<Matrix> visual_to_instruction_attention(const std::vector<AttentionRecord>& records,
                                                    const SequenceLayout& layout) {
  if (layout.instruction_len < 1) {
    throw std::invalid_argument("visual-to-instruction attention needs an instruction token");
  }
  const int h = layout.grid.height();
  const int w = layout.grid.width();
  const int query = layout.total_len() - 1;

  std::vector<Matrix> maps;
  std::vector<int> head_counts;
  for (const auto& rec : records) {
    if (rec.probs.rows() != layout.total_len() || rec.probs.cols() != layout.total_len()) {
      throw std::invalid_argument("attention record does not match layout");
    }
    const auto idx = static_cast<std::size_t>(rec.layer - 1);
    if (rec.layer < 1) throw std::invalid_argument("attention record layer must be >= 1");
    if (maps.size() <= idx) {
      maps.resize(idx + 1, Matrix::Zero(h, w));
      head_counts.resize(idx + 1, 0);
    }
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) maps[idx](i, j) += rec.probs(query, layout.visual_begin() + i * w + j);
    ++head_counts[idx];
  }
  for (std::size_t l = 0; l < maps.size(); ++l) {
    if (head_counts[l] == 0) throw std::invalid_argument("missing attention records for a layer");
    maps[l] /= static_cast<double>(head_counts[l]);
  }
  return maps;
}

}  // namespace pype
