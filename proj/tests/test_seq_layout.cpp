#include "pype/csv.hpp"
#include "pype/seq_layout.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

namespace pype {
namespace {

SequenceLayout layout_of(const EncodingScheme& scheme, int prefix, int h, int w, int p_max,
                         int instruction) {
  return make_layout(prefix, build_grid(scheme, h, w, p_max), instruction);
}

BoolMatrix lower_triangular(int n) {
  BoolMatrix m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = b <= a;
  return m;
}

TEST(AssignPositions, AllOneKeepsImageOneStepFromInstruction) {
  const auto layout = layout_of(EncodingScheme::all_one(), 5, 2, 2, 1, 2);
  EXPECT_EQ(assign_positions(layout), (AbsolutePositions{0, 1, 2, 3, 4, 5, 5, 5, 5, 6, 7}));
}

TEST(AssignPositions, RasterIsSequential) {
  const auto layout = layout_of(EncodingScheme::raster_scan(), 0, 2, 2, 1, 0);
  EXPECT_EQ(assign_positions(layout), (AbsolutePositions{0, 1, 2, 3}));
}

TEST(AssignPositions, Concentric4x4) {
  const auto layout = layout_of(EncodingScheme::concentric(), 1, 4, 4, 2, 1);
  const auto pos = assign_positions(layout);
  ASSERT_EQ(pos.size(), 18u);
  EXPECT_EQ(pos[0], 0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const bool inner = i >= 1 && i <= 2 && j >= 1 && j <= 2;
      EXPECT_EQ(pos[static_cast<std::size_t>(1 + i * 4 + j)], inner ? 2 : 1);
    }
  }
  EXPECT_EQ(pos[17], 3);
}

TEST(AssignPositions, FixedAnchorPinsInstructions) {
  const auto layout = layout_of(EncodingScheme::pyramid_descent(1), 1, 6, 6, 1, 2);
  const auto pos = assign_positions(layout, 3);
  EXPECT_EQ(pos[37], 4);
  EXPECT_EQ(pos[38], 5);
  EXPECT_THROW(assign_positions(layout_of(EncodingScheme::concentric(), 0, 6, 6, 3, 1), 2),
               std::invalid_argument);
}

TEST(AssignPositions, InvariantsOverRandomLayouts) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(1, 12), len(0, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const int h = dim(rng), w = dim(rng);
    const auto layout = layout_of(testing::random_scheme(rng), len(rng), h, w, dim(rng), len(rng));
    const auto pos = assign_positions(layout);
    ASSERT_EQ(static_cast<int>(pos.size()), layout.total_len());
    const int max_index = layout.grid.max_index();
    for (int k = 0; k < layout.prefix_len; ++k) EXPECT_EQ(pos[k], k);
    long long max_visual = -1;
    for (int s = layout.visual_begin(); s < layout.instruction_begin(); ++s) {
      EXPECT_GE(pos[s], layout.prefix_len);
      EXPECT_LE(pos[s], layout.prefix_len + max_index - 1);
      max_visual = std::max(max_visual, pos[s]);
    }
    for (int s = layout.instruction_begin(); s < layout.total_len(); ++s) {
      EXPECT_GT(pos[s], max_visual);
      if (s > layout.instruction_begin()) EXPECT_EQ(pos[s], pos[s - 1] + 1);
    }
    if (layout.instruction_len > 0) {
      // Farthest image token sits exactly max_index steps before the first instruction.
      long long min_visual = pos[layout.visual_begin()];
      for (int s = layout.visual_begin(); s < layout.instruction_begin(); ++s) min_visual = std::min(min_visual, pos[s]);
      EXPECT_EQ(pos[layout.instruction_begin()] - min_visual, max_index);
    }
  }
}

TEST(BuildMask, AllOneIsFullyConnected) {
  const auto layout = layout_of(EncodingScheme::all_one(), 0, 2, 2, 1, 0);
  EXPECT_TRUE(build_mask(layout, assign_positions(layout)).all());
}

TEST(BuildMask, RasterIsLowerTriangular) {
  const auto layout = layout_of(EncodingScheme::raster_scan(), 0, 2, 2, 1, 0);
  EXPECT_EQ(build_mask(layout, assign_positions(layout)), lower_triangular(4));
  const auto big = layout_of(EncodingScheme::raster_scan(), 3, 4, 5, 1, 4);
  EXPECT_EQ(build_mask(big, assign_positions(big)), lower_triangular(big.total_len()));
}

TEST(BuildMask, ConcentricRings) {
  const auto layout = layout_of(EncodingScheme::concentric(), 0, 4, 4, 2, 0);
  const auto mask = build_mask(layout, assign_positions(layout));
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      const bool a_outer = layout.grid(a / 4, a % 4) == 1;
      const bool b_outer = layout.grid(b / 4, b % 4) == 1;
      EXPECT_EQ(mask(a, b), a_outer ? b_outer : true) << a << "," << b;
    }
  }
}

TEST(BuildMask, LengthMismatchThrows) {
  const auto layout = layout_of(EncodingScheme::all_one(), 1, 2, 2, 1, 1);
  EXPECT_THROW(build_mask(layout, AbsolutePositions{0, 1, 1}), std::invalid_argument);
}

TEST(ValidateMask, Examples) {
  EXPECT_TRUE(validate_mask(lower_triangular(5), AbsolutePositions{0, 1, 2, 3, 4}));
  EXPECT_FALSE(validate_mask(BoolMatrix::Constant(3, 3, true), AbsolutePositions{0, 1, 2}));
  BoolMatrix no_diag = lower_triangular(3);
  no_diag(1, 1) = false;
  EXPECT_FALSE(validate_mask(no_diag, AbsolutePositions{0, 1, 2}));
  BoolMatrix hidden_past = lower_triangular(3);
  hidden_past(2, 0) = false;
  EXPECT_FALSE(validate_mask(hidden_past, AbsolutePositions{0, 1, 2}));
  EXPECT_FALSE(validate_mask(lower_triangular(3), AbsolutePositions{0, 1}));
}

TEST(ValidateMask, GeneratedMasksAlwaysPass) {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<int> dim(1, 12), len(0, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto scheme = testing::random_scheme(rng);
    const int h = dim(rng), w = dim(rng);
    const auto sched = build_schedule(4, std::max(1, scheme.descent_interval()), h, w);
    const int layer = std::uniform_int_distribution<int>(1, 4)(rng);
    const auto layout = make_layout(len(rng), grid_for_layer(scheme, h, w, sched, layer), len(rng));
    const auto pos = assign_positions(layout);
    EXPECT_TRUE(validate_mask(build_mask(layout, pos), pos));
  }
}

TEST(BuildMask, DescentOnlyAddsVisualPairs) {
  const auto scheme = EncodingScheme::pyramid_descent(1);
  const auto sched = build_schedule(6, 1, 10);
  BoolMatrix previous;
  for (int l = 1; l <= 6; ++l) {
    const auto layout = make_layout(0, grid_for_layer(scheme, 10, 10, sched, l), 0);
    const auto mask = build_mask(layout, assign_positions(layout));
    if (l > 1) {
      for (Eigen::Index a = 0; a < mask.rows(); ++a)
        for (Eigen::Index b = 0; b < mask.cols(); ++b)
          if (previous(a, b)) EXPECT_TRUE(mask(a, b));
    }
    previous = mask;
  }
}

TEST(MaskCsv, RoundTrip) {
  const auto layout = layout_of(EncodingScheme::concentric(), 2, 5, 5, 2, 2);
  const auto mask = build_mask(layout, assign_positions(layout));
  EXPECT_EQ(mask_from_csv(mask_to_csv(mask)), mask);
  EXPECT_EQ(positions_to_csv(AbsolutePositions{0, 1, 1}), "0,1,1\n");
  EXPECT_THROW(mask_from_csv("1,2\n0,1\n"), ParseError);
}

}  // namespace
}  // namespace pype
