#include "pype/decoder.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pype {

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'Y', 'P', 'E'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xFFu));
}

std::uint64_t get_bytes(std::istream& in, int count) {
  std::uint64_t v = 0;
  for (int b = 0; b < count; ++b) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("weights file truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes(in, 8)); }

template <typename Derived>
void put_tensor(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

void get_tensor(std::istream& in, Matrix& m, Eigen::Index rows, Eigen::Index cols) {
  m.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_f64(in);
}

void get_vector(std::istream& in, Eigen::VectorXd& v, Eigen::Index n) {
  v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = get_f64(in);
}

}  // namespace

void save_weights(const DecoderState& state, std::ostream& out) {
  const auto& cfg = state.config;
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kWeightsVersion);
  put_u32(out, static_cast<std::uint32_t>(cfg.num_layers));
  put_u32(out, static_cast<std::uint32_t>(cfg.num_heads));
  put_u32(out, static_cast<std::uint32_t>(cfg.model_dim));
  put_u32(out, static_cast<std::uint32_t>(cfg.vocab_size));
  put_u32(out, static_cast<std::uint32_t>(cfg.ffn_dim()));
  put_f64(out, cfg.rope_base);

  put_tensor(out, state.embedding);
  for (const auto& w : state.layers) {
    put_tensor(out, w.attn_norm);
    put_tensor(out, w.wq);
    put_tensor(out, w.wk);
    put_tensor(out, w.wv);
    put_tensor(out, w.wo);
    put_tensor(out, w.ffn_norm);
    put_tensor(out, w.w_up);
    put_tensor(out, w.w_down);
  }
  put_tensor(out, state.final_norm);
  put_tensor(out, state.unembed);
  if (!out) throw std::runtime_error("failed writing weights");
}

DecoderState load_weights(std::istream& in, const DecoderConfig& base) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not a PYPE weights file");
  const auto version = get_u32(in);
  if (version != kWeightsVersion) {
    throw std::runtime_error("unsupported weights version " + std::to_string(version));
  }

  DecoderConfig cfg = base;
  cfg.num_layers = static_cast<int>(get_u32(in));
  cfg.num_heads = static_cast<int>(get_u32(in));
  cfg.model_dim = static_cast<int>(get_u32(in));
  cfg.vocab_size = static_cast<int>(get_u32(in));
  const auto ffn = static_cast<int>(get_u32(in));
  cfg.rope_base = get_f64(in);
  cfg.validate();
  if (ffn != cfg.ffn_dim()) throw std::runtime_error("unexpected feed-forward width");

  const int d = cfg.model_dim;
  DecoderState state;
  state.config = cfg;
  get_tensor(in, state.embedding, cfg.vocab_size, d);
  state.layers.resize(static_cast<std::size_t>(cfg.num_layers));
  for (auto& w : state.layers) {
    get_vector(in, w.attn_norm, d);
    get_tensor(in, w.wq, d, d);
    get_tensor(in, w.wk, d, d);
    get_tensor(in, w.wv, d, d);
    get_tensor(in, w.wo, d, d);
    get_vector(in, w.ffn_norm, d);
    get_tensor(in, w.w_up, ffn, d);
    get_tensor(in, w.w_down, d, ffn);
  }
  get_vector(in, state.final_norm, d);
  get_tensor(in, state.unembed, cfg.vocab_size, d);
  return state;
}

}  // namespace pype
