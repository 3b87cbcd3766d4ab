#include "pype/oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace pype::oracle {

PositionGrid grid_oracle(const EncodingScheme& scheme, int height, int width, int p_max) {
  if (height < 1 || width < 1) throw std::invalid_argument("grid dimensions must be >= 1");
  if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");

  IndexMatrix cells = IndexMatrix::Ones(height, width);
  if (scheme.kind() == SchemeKind::AllOne) return PositionGrid(cells);
  if (scheme.kind() == SchemeKind::RasterScan) {
    int counter = 0;
    for (int i = 0; i < height; ++i)
      for (int j = 0; j < width; ++j) cells(i, j) = ++counter;
    return PositionGrid(cells);
  }

  for (int p = 1; p < p_max; ++p) {
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const bool inside = i >= p && i < height - p && j >= p && j < width - p;
        if (inside) cells(i, j) = p + 1;
      }
    }
  }
  return PositionGrid(cells);
}

PositionGrid literal_loop_grid(int height, int width, int p_max) {
  if (height < 1 || width < 1) throw std::invalid_argument("grid dimensions must be >= 1");
  if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");
  IndexMatrix cells = IndexMatrix::Ones(height, width);
  for (int p = 1; p <= p_max; ++p)
    for (int i = p; i < height - p; ++i)
      for (int j = p; j < width - p; ++j) cells(i, j) = p;
  return PositionGrid(cells);
}

Eigen::MatrixXd rotary_matrix(int dim, double base, long long position) {
  if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("rotary dimension must be even");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(dim, dim);
  for (int l = 0; l < dim / 2; ++l) {
    const double freq = 1.0 / std::pow(base, 2.0 * l / dim);
    const double angle = static_cast<double>(position) * freq;
    r(2 * l, 2 * l) = std::cos(angle);
    r(2 * l, 2 * l + 1) = -std::sin(angle);
    r(2 * l + 1, 2 * l) = std::sin(angle);
    r(2 * l + 1, 2 * l + 1) = std::cos(angle);
  }
  return r;
}

double attention_oracle(const Eigen::VectorXd& q, const Eigen::VectorXd& k, long long m,
                        long long n, int dim, double base) {
  if (q.size() != dim || k.size() != dim) throw std::invalid_argument("dimension mismatch");
  const Eigen::VectorXd qm = rotary_matrix(dim, base, m) * q;
  const Eigen::VectorXd kn = rotary_matrix(dim, base, n) * k;
  double acc = 0.0;
  for (int d = 0; d < dim; ++d) acc += qm(d) * kn(d);
  return acc;
}

Eigen::VectorXd naive_softmax(const Eigen::VectorXd& scores, const std::vector<bool>& allowed) {
  if (allowed.size() != static_cast<std::size_t>(scores.size())) {
    throw std::invalid_argument("mask length mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(scores.size());
  double total = 0.0;
  for (Eigen::Index b = 0; b < scores.size(); ++b) {
    if (allowed[static_cast<std::size_t>(b)]) {
      out(b) = std::exp(scores(b));
      total += out(b);
    }
  }
  if (total == 0.0) throw std::domain_error("no allowed entries");
  return out / total;
}

namespace {

Eigen::VectorXd plain_rms(const Eigen::VectorXd& x, const Eigen::VectorXd& gain) {
  double ms = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) ms += x(i) * x(i);
  ms /= static_cast<double>(x.size());
  const double inv = 1.0 / std::sqrt(ms + 1e-5);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = x(i) * inv * gain(i);
  return out;
}

}  // namespace

ReferenceResult reference_forward(const DecoderState& state, std::span<const int> token_ids) {
  const auto& cfg = state.config;
  const int n = static_cast<int>(token_ids.size());
  const int dim = cfg.model_dim;
  const int hd = cfg.model_dim / cfg.num_heads;

  std::vector<Eigen::VectorXd> x;
  for (int t = 0; t < n; ++t) x.emplace_back(state.embedding.row(token_ids[static_cast<std::size_t>(t)]).transpose());

  std::vector<Eigen::MatrixXd> rot;
  for (int t = 0; t < n; ++t) rot.push_back(rotary_matrix(hd, cfg.rope_base, t));

  ReferenceResult result;
  for (const auto& w : state.layers) {
    std::vector<Eigen::VectorXd> q(n), k(n), v(n);
    for (int t = 0; t < n; ++t) {
      const Eigen::VectorXd a = plain_rms(x[t], w.attn_norm);
      q[t] = w.wq * a;
      k[t] = w.wk * a;
      v[t] = w.wv * a;
    }

    std::vector<Eigen::VectorXd> concat(n, Eigen::VectorXd::Zero(dim));
    for (int h = 0; h < cfg.num_heads; ++h) {
      Matrix probs = Matrix::Zero(n, n);
      for (int a = 0; a < n; ++a) {
        const Eigen::VectorXd qa = rot[a] * q[a].segment(h * hd, hd);
        Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);
        std::vector<bool> allowed(static_cast<std::size_t>(n), false);
        for (int b = 0; b <= a; ++b) {
          const Eigen::VectorXd kb = rot[b] * k[b].segment(h * hd, hd);
          scores(b) = qa.dot(kb) / std::sqrt(static_cast<double>(hd));
          allowed[static_cast<std::size_t>(b)] = true;
        }
        const Eigen::VectorXd p = naive_softmax(scores, allowed);
        probs.row(a) = p.transpose();
        for (int b = 0; b <= a; ++b) concat[a].segment(h * hd, hd) += p(b) * v[b].segment(h * hd, hd);
      }
      result.probs.push_back(std::move(probs));
    }

    for (int t = 0; t < n; ++t) {
      x[t] += w.wo * concat[t];
      const Eigen::VectorXd f = plain_rms(x[t], w.ffn_norm);
      Eigen::VectorXd hidden = w.w_up * f;
      for (Eigen::Index i = 0; i < hidden.size(); ++i) {
        hidden(i) = hidden(i) / (1.0 + std::exp(-hidden(i)));
      }
      x[t] += w.w_down * hidden;
    }
  }

  result.logits.resize(n, cfg.vocab_size);
  for (int t = 0; t < n; ++t) {
    result.logits.row(t) = (state.unembed * plain_rms(x[t], state.final_norm)).transpose();
  }
  return result;
}

namespace {

std::string describe(const IndexMatrix& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += "  ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += std::to_string(m(i, j)) + ' ';
    s += '\n';
  }
  return s;
}

bool check_grids(std::ostream& out, int& cases) {
  const EncodingScheme schemes[] = {EncodingScheme::raster_scan(), EncodingScheme::concentric(),
                                    EncodingScheme::all_one(),
                                    EncodingScheme::pyramid_descent(1)};
  for (const auto& scheme : schemes) {
    for (int h = 1; h <= 12; ++h) {
      for (int w = 1; w <= 12; ++w) {
        for (int p = 1; p <= std::max(1, std::min(h, w) / 2) + 1; ++p) {
          ++cases;
          const auto fast = build_grid(scheme, h, w, p);
          const auto slow = grid_oracle(scheme, h, w, p);
          if (!(fast == slow)) {
            out << "grid mismatch: scheme=" << scheme.name() << " H=" << h << " W=" << w
                << " p_max=" << p << "\nbuild_grid:\n"
                << describe(fast.indices()) << "oracle:\n"
                << describe(slow.indices());
            return false;
          }
        }
      }
    }
  }
  return true;
}

bool check_attention(std::ostream& out, int count, std::uint64_t seed, int& cases) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<long long> pos(-2048, 2048);
  const int dims[] = {2, 8, 64};
  for (int c = 0; c < count; ++c) {
    ++cases;
    const int dim = dims[c % 3];
    Eigen::VectorXd q(dim), k(dim);
    for (int d = 0; d < dim; ++d) {
      q(d) = normal(rng);
      k(d) = normal(rng);
    }
    const long long m = pos(rng);
    const long long n = pos(rng);
    const double fast = attention_score(q, k, m, n, RotaryConfig<double>{dim, 10000.0});
    const double slow = attention_oracle(q, k, m, n, dim);
    const double scale = q.norm() * k.norm();
    if (std::abs(fast - slow) > 1e-9 * scale) {
      out << "attention mismatch: D=" << dim << " m=" << m << " n=" << n << " fast=" << fast
          << " oracle=" << slow << '\n';
      return false;
    }
  }
  return true;
}

bool check_schedules(std::ostream& out, int& cases) {
  for (int layers = 1; layers <= 40; ++layers) {
    for (int t = 1; t <= 8; ++t) {
      for (int h = 2; h <= 32; h += 3) {
        ++cases;
        const auto s = build_schedule(layers, t, h);
        const int init = h / 2;
        int expected = init;
        for (int l = 1; l <= layers; ++l) {
          if (l % t == 0 && expected > 1) --expected;
          const int got = s.per_layer_p_max[static_cast<std::size_t>(l - 1)];
          const int prev = l == 1 ? s.initial_p_max : s.per_layer_p_max[static_cast<std::size_t>(l - 2)];
          if (got != expected || got < 1 || got > prev || prev - got > 1) {
            out << "schedule mismatch: layers=" << layers << " t=" << t << " H=" << h
                << " layer=" << l << " got=" << got << " expected=" << expected << '\n';
            return false;
          }
        }
      }
    }
  }
  return true;
}

}  // namespace

bool run_self_check(std::ostream& out, int attention_cases, std::uint64_t seed) {
  int grid_cases = 0, attn_cases = 0, sched_cases = 0;
  const bool grids = check_grids(out, grid_cases);
  const bool attention = check_attention(out, attention_cases, seed, attn_cases);
  const bool schedules = check_schedules(out, sched_cases);
  out << "grids: " << (grids ? "PASS" : "FAIL") << " (" << grid_cases << " cases)\n";
  out << "attention: " << (attention ? "PASS" : "FAIL") << " (" << attn_cases << " cases)\n";
  out << "schedules: " << (schedules ? "PASS" : "FAIL") << " (" << sched_cases << " cases)\n";
  return grids && attention && schedules;
}

}  // namespace pype::oracle
