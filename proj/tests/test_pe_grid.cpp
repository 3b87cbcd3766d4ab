#include "pype/csv.hpp"
#include "pype/oracle.hpp"
#include "pype/pe_grid.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

namespace pype {
namespace {

IndexMatrix make(int rows, int cols, std::initializer_list<int> values) {
  IndexMatrix m(rows, cols);
  auto it = values.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = *it++;
  return m;
}

TEST(RingDepth, Examples) {
  EXPECT_EQ(ring_depth(0, 0, 4, 4), 0);
  EXPECT_EQ(ring_depth(1, 2, 4, 4), 1);
  EXPECT_EQ(ring_depth(11, 11, 24, 24), 11);
}

TEST(RingDepth, OutOfRangeThrows) {
  EXPECT_THROW(ring_depth(-1, 0, 4, 4), std::invalid_argument);
  EXPECT_THROW(ring_depth(0, 4, 4, 4), std::invalid_argument);
  EXPECT_THROW(ring_depth(4, 0, 4, 4), std::invalid_argument);
}

TEST(BuildGrid, AllOne) {
  EXPECT_EQ(build_grid(EncodingScheme::all_one(), 3, 3).indices(), IndexMatrix::Ones(3, 3));
}

TEST(BuildGrid, RasterScanIsRowMajor) {
  EXPECT_EQ(build_grid(EncodingScheme::raster_scan(), 2, 2).indices(), make(2, 2, {1, 2, 3, 4}));
  const auto g = build_grid(EncodingScheme::raster_scan(), 3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(g(i, j), i * 5 + j + 1);
}

TEST(BuildGrid, Concentric4x4) {
  EXPECT_EQ(build_grid(EncodingScheme::concentric(), 4, 4, 2).indices(),
            make(4, 4, {1, 1, 1, 1, 1, 2, 2, 1, 1, 2, 2, 1, 1, 1, 1, 1}));
}

TEST(BuildGrid, PyramidWithUnitPMaxIsAllOne) {
  EXPECT_EQ(build_grid(EncodingScheme::pyramid_descent(2), 6, 6, 1).indices(),
            IndexMatrix::Ones(6, 6));
}

TEST(BuildGrid, ArgumentErrors) {
  EXPECT_THROW(build_grid(EncodingScheme::concentric(), 0, 3, 1), std::invalid_argument);
  EXPECT_THROW(build_grid(EncodingScheme::concentric(), 3, 0, 1), std::invalid_argument);
  EXPECT_THROW(build_grid(EncodingScheme::concentric(), 3, 3, 0), std::invalid_argument);
  EXPECT_THROW(EncodingScheme::pyramid_descent(0), std::invalid_argument);
  EXPECT_THROW(EncodingScheme::parse("spiral"), std::invalid_argument);
}

TEST(BuildGrid, DegenerateGridsAreAllOnes) {
  for (int w = 1; w <= 8; ++w) {
    EXPECT_EQ(build_grid(EncodingScheme::concentric(), 1, w, 5).indices(), IndexMatrix::Ones(1, w));
    EXPECT_EQ(build_grid(EncodingScheme::concentric(), 2, w, 5).indices(), IndexMatrix::Ones(2, w));
  }
}

TEST(BuildGrid, RingInvariants) {
  for (int h = 1; h <= 14; ++h) {
    for (int w = 1; w <= 14; ++w) {
      const int p_max = std::max(1, std::min(h, w) / 2);
      const auto g = build_grid(EncodingScheme::concentric(), h, w, p_max);
      EXPECT_LE(g.max_index(), std::max(1, std::min(h, w) / 2));
      EXPECT_GE(g.indices().minCoeff(), 1);
      const IndexMatrix& m = g.indices();
      EXPECT_EQ(m, m.rowwise().reverse().eval()) << h << "x" << w;
      EXPECT_EQ(m, m.colwise().reverse().eval()) << h << "x" << w;
      if (h == w) EXPECT_EQ(m, m.transpose().eval());
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          // Deeper cells never carry a smaller index.
          if (i + 1 < h && ring_depth(i + 1, j, h, w) > ring_depth(i, j, h, w)) {
            EXPECT_GE(m(i + 1, j), m(i, j));
          }
          for (int i2 = 0; i2 < h; ++i2)
            for (int j2 = 0; j2 < w; ++j2)
              if (ring_depth(i, j, h, w) == ring_depth(i2, j2, h, w)) EXPECT_EQ(m(i, j), m(i2, j2));
        }
      }
    }
  }
}

TEST(BuildGrid, MatchesOracleOnSmallGrids) {
  for (const auto scheme : {EncodingScheme::concentric(), EncodingScheme::pyramid_descent(3)}) {
    for (int h = 1; h <= 9; ++h)
      for (int w = 1; w <= 9; ++w)
        for (int p = 1; p <= 6; ++p)
          EXPECT_EQ(build_grid(scheme, h, w, p), oracle::grid_oracle(scheme, h, w, p));
  }
}

TEST(BuildSchedule, Examples) {
  EXPECT_EQ(build_schedule(6, 2, 6).per_layer_p_max, (std::vector<int>{3, 2, 2, 1, 1, 1}));
  EXPECT_EQ(build_schedule(4, 1, 24).per_layer_p_max, (std::vector<int>{11, 10, 9, 8}));
  EXPECT_EQ(build_schedule(3, 100, 8).per_layer_p_max, (std::vector<int>{4, 4, 4}));
  EXPECT_EQ(build_schedule(6, 2, 6).initial_p_max, 3);
}

TEST(BuildSchedule, NonSquareClampsToShortSide) {
  EXPECT_EQ(build_schedule(1, 5, 10, 4).initial_p_max, 2);
  EXPECT_EQ(build_schedule(1, 5, 4, 10).initial_p_max, 2);
  EXPECT_EQ(build_schedule(1, 5, 3, 1).initial_p_max, 1);
}

TEST(BuildSchedule, MonotoneDescentProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int layers = std::uniform_int_distribution<int>(1, 48)(rng);
    const int t = std::uniform_int_distribution<int>(1, 10)(rng);
    const int h = std::uniform_int_distribution<int>(2, 40)(rng);
    const auto s = build_schedule(layers, t, h);
    ASSERT_EQ(static_cast<int>(s.per_layer_p_max.size()), layers);
    EXPECT_TRUE(s.per_layer_p_max[0] == s.initial_p_max || s.per_layer_p_max[0] == s.initial_p_max - 1);
    for (int l = 1; l <= layers; ++l) {
      const int cur = s.p_max_at(l);
      const int prev = l == 1 ? s.initial_p_max : s.p_max_at(l - 1);
      EXPECT_GE(cur, 1);
      EXPECT_LE(cur, prev);
      EXPECT_LE(prev - cur, 1);
      if (cur < prev) EXPECT_EQ(l % t, 0);
    }
  }
}

TEST(BuildSchedule, ArgumentErrors) {
  EXPECT_THROW(build_schedule(0, 1, 4), std::invalid_argument);
  EXPECT_THROW(build_schedule(3, 0, 4), std::invalid_argument);
  EXPECT_THROW(build_schedule(3, 1, 4).p_max_at(4), std::out_of_range);
}

TEST(GridForLayer, PyramidDescends) {
  const auto scheme = EncodingScheme::pyramid_descent(2);
  const auto s = build_schedule(6, 2, 6);
  EXPECT_EQ(grid_for_layer(scheme, 6, 6, s, 1).indices(),
            make(6, 6, {1, 1, 1, 1, 1, 1,  //
                        1, 2, 2, 2, 2, 1,  //
                        1, 2, 3, 3, 2, 1,  //
                        1, 2, 3, 3, 2, 1,  //
                        1, 2, 2, 2, 2, 1,  //
                        1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(grid_for_layer(scheme, 6, 6, s, 6).indices(), IndexMatrix::Ones(6, 6));
  EXPECT_THROW(grid_for_layer(scheme, 6, 6, s, 0), std::out_of_range);
  EXPECT_THROW(grid_for_layer(scheme, 6, 6, s, 7), std::out_of_range);
}

TEST(GridForLayer, StaticSchemesIgnoreLayer) {
  const auto s = build_schedule(6, 1, 6);
  for (const auto scheme : {EncodingScheme::raster_scan(), EncodingScheme::concentric(), EncodingScheme::all_one()}) {
    const auto first = grid_for_layer(scheme, 6, 6, s, 1);
    for (int l = 2; l <= 6; ++l) EXPECT_EQ(grid_for_layer(scheme, 6, 6, s, l), first);
  }
}

TEST(GridCsv, FormatAndRoundTrip) {
  EXPECT_EQ(grid_to_csv(build_grid(EncodingScheme::raster_scan(), 2, 2)), "1,2\n3,4\n");
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = std::uniform_int_distribution<int>(1, 20)(rng);
    const int w = std::uniform_int_distribution<int>(1, 20)(rng);
    const auto g = build_grid(testing::random_scheme(rng), h, w, std::uniform_int_distribution<int>(1, 10)(rng));
    EXPECT_EQ(grid_from_csv(grid_to_csv(g)), g);
  }
  EXPECT_THROW(grid_from_csv("1,2\n3\n"), ParseError);
  EXPECT_THROW(grid_from_csv("1,0\n"), ParseError);
}

TEST(ScheduleTrace, Format) { EXPECT_EQ(schedule_trace(build_schedule(6, 2, 6)), "3,2,2,1,1,1"); }

}  // namespace
}  // namespace pype
