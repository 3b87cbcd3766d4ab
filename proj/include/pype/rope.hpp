#ifndef PYPE_ROPE_HPP
#define PYPE_ROPE_HPP

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace pype {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Head dimension and rotary base. The dimension must be even and the base > 1.
template <typename Scalar>
struct RotaryConfig {
  int dim = 2;
  Scalar base = Scalar(10000);

  void validate() const {
    if (dim < 2 || dim % 2 != 0) {
      throw std::invalid_argument("rotary dimension must be even and positive, got " +
                                  std::to_string(dim));
    }
    if (!(base > Scalar(1))) throw std::invalid_argument("rotary base must be > 1");
  }
};

/// theta_d = base^(-2(d-1)/dim) for d = 1..dim/2, so the first frequency is 1.
template <typename Scalar>
Vector<Scalar> rotary_frequencies(const RotaryConfig<Scalar>& config) {
  config.validate();
  const int half = config.dim / 2;
  Vector<Scalar> theta(half);
  for (int d = 0; d < half; ++d) {
    theta(d) = std::pow(config.base, Scalar(-2 * d) / Scalar(config.dim));
  }
  return theta;
}

/// Rotation with precomputed frequencies; v.size() must equal 2 * theta.size().
template <typename Derived, typename DerivedTheta>
Vector<typename Derived::Scalar> rotate_with(const Eigen::MatrixBase<Derived>& v,
                                             long long position,
                                             const Eigen::MatrixBase<DerivedTheta>& theta) {
  using Scalar = typename Derived::Scalar;
  if (v.size() != 2 * theta.size()) {
    throw std::invalid_argument("vector length " + std::to_string(v.size()) +
                                " does not match rotary dimension " +
                                std::to_string(2 * theta.size()));
  }
  Vector<Scalar> out(v.size());
  for (Eigen::Index d = 0; d < theta.size(); ++d) {
    const Scalar angle = static_cast<Scalar>(position) * theta(d);
    const Scalar c = std::cos(angle);
    const Scalar s = std::sin(angle);
    const Scalar x = v(2 * d);
    const Scalar y = v(2 * d + 1);
    out(2 * d) = c * x - s * y;
    out(2 * d + 1) = s * x + c * y;
  }
  return out;
}

/// Rotates interleaved pairs (v[2d], v[2d+1]) by position * theta_d.
template <typename Derived>
Vector<typename Derived::Scalar> rotate(const Eigen::MatrixBase<Derived>& v, long long position,
                                        const RotaryConfig<typename Derived::Scalar>& config) {
  return rotate_with(v, position, rotary_frequencies(config));
}

/// Real part of q^T e^{i(m-n)Theta} k, computed as <rotate(q, m), rotate(k, n)>.
template <typename DerivedQ, typename DerivedK>
typename DerivedQ::Scalar attention_score(const Eigen::MatrixBase<DerivedQ>& q,
                                          const Eigen::MatrixBase<DerivedK>& k, long long m,
                                          long long n,
                                          const RotaryConfig<typename DerivedQ::Scalar>& config) {
  if (q.size() != k.size()) {
    throw std::invalid_argument("query/key dimension mismatch: " + std::to_string(q.size()) +
                                " vs " + std::to_string(k.size()));
  }
  return rotate(q, m, config).dot(rotate(k, n, config));
}

/// Masked, max-subtracted softmax of `scale * logits`. Masked entries come back exactly 0.
template <typename Derived>
Vector<typename Derived::Scalar> masked_softmax(const Eigen::MatrixBase<Derived>& logits,
                                                std::span<const bool> mask_row,
                                                typename Derived::Scalar scale) {
  using Scalar = typename Derived::Scalar;
  if (static_cast<std::size_t>(logits.size()) != mask_row.size()) {
    throw std::invalid_argument("mask row length does not match key count");
  }
  bool any = false;
  Scalar max_logit = Scalar(0);
  for (Eigen::Index b = 0; b < logits.size(); ++b) {
    if (!mask_row[static_cast<std::size_t>(b)]) continue;
    const Scalar z = scale * logits(b);
    if (!any || z > max_logit) max_logit = z;
    any = true;
  }
  if (!any) throw std::domain_error("attention row is fully masked");

  Vector<Scalar> probs = Vector<Scalar>::Zero(logits.size());
  Scalar total = Scalar(0);
  for (Eigen::Index b = 0; b < logits.size(); ++b) {
    if (!mask_row[static_cast<std::size_t>(b)]) continue;
    probs(b) = std::exp(scale * logits(b) - max_logit);
    total += probs(b);
  }
  return probs / total;
}

/// Softmax over RoPE scores of one query against `keys` (one key per row).
template <typename DerivedQ, typename DerivedK>
Vector<typename DerivedQ::Scalar> attention_row(
    const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedK>& keys,
    long long q_pos, std::span<const long long> key_positions, std::span<const bool> mask_row,
    const RotaryConfig<typename DerivedQ::Scalar>& config, typename DerivedQ::Scalar scale) {
  using Scalar = typename DerivedQ::Scalar;
  const auto n = keys.rows();
  if (static_cast<std::size_t>(n) != key_positions.size() ||
      static_cast<std::size_t>(n) != mask_row.size()) {
    throw std::invalid_argument("keys, key positions and mask row must have equal length");
  }
  const Vector<Scalar> theta = rotary_frequencies(config);
  const Vector<Scalar> q_rot = rotate_with(q, q_pos, theta);
  Vector<Scalar> scores = Vector<Scalar>::Zero(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    if (!mask_row[static_cast<std::size_t>(b)]) continue;
    scores(b) = q_rot.dot(rotate_with(keys.row(b).transpose(), key_positions[b], theta));
  }
  return masked_softmax(scores, mask_row, scale);
}

}  // namespace pype

#endif  // PYPE_ROPE_HPP
