#ifndef PYPE_ORACLE_HPP
#define PYPE_ORACLE_HPP

// Brute-force reference implementations. Nothing here calls into pe_grid, seq_layout,
// rope or decoder arithmetic; only their value types are shared.

#include "pype/decoder.hpp"
#include "pype/pe_grid.hpp"

#include <Eigen/Core>

#include <ostream>
#include <span>
#include <vector>

namespace pype::oracle {

/// Ring-overwrite construction of the position matrix: start from all ones, then for each
/// p = 1..p_max-1 overwrite rows [p, H-p) x cols [p, W-p) with p+1, scanning every cell.
/// Raster and All-One are enumerated directly.
PositionGrid grid_oracle(const EncodingScheme& scheme, int height, int width, int p_max);

/// The overwrite loop read literally: start from all ones, for p = 1..p_max write p into
/// rows [p, H-p) x cols [p, W-p). The border ring and the first inner ring then share 1.
PositionGrid literal_loop_grid(int height, int width, int p_max);

/// D x D block-diagonal rotation matrix for `position`, built entry by entry.
Eigen::MatrixXd rotary_matrix(int dim, double base, long long position);

/// (R_m q)^T (R_n k) with dense rotation matrices.
double attention_oracle(const Eigen::VectorXd& q, const Eigen::VectorXd& k, long long m,
                        long long n, int dim, double base = 10000.0);

/// exp-normalize over allowed entries without max subtraction.
Eigen::VectorXd naive_softmax(const Eigen::VectorXd& scores, const std::vector<bool>& allowed);

struct ReferenceResult {
  Matrix logits;
  std::vector<Matrix> probs;  // layer-major, then head
};

/// Vanilla causal RoPE decoder: positions 0..N-1, lower-triangular mask, dense rotations.
ReferenceResult reference_forward(const DecoderState& state, std::span<const int> token_ids);

/// Grid, attention and schedule cross-checks. Prints one summary line per group and the
/// first failing case. Returns true when every group passes.
bool run_self_check(std::ostream& out, int attention_cases = 1000, std::uint64_t seed = 7);

}  // namespace pype::oracle

#endif  // PYPE_ORACLE_HPP
