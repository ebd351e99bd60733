#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "autogmap/matrix.hpp"
#include "autogmap/reorder.hpp"
#include "oracles.hpp"

namespace autogmap {
namespace {

using testing::fixture_m8;

TEST(MatrixMarket, GeneralFile) {
  const auto m = parse_matrix_market(
      "%%MatrixMarket matrix coordinate real general\n"
      "% a comment\n"
      "3 3 2\n"
      "1 1 5\n"
      "3 2 1\n");
  EXPECT_EQ(m.dim(), 3u);
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_TRUE(m.contains(0, 0));
  EXPECT_TRUE(m.contains(2, 1));
  EXPECT_EQ(m.entries()[0].value, 5.0);
}

TEST(MatrixMarket, SymmetricExpansion) {
  const auto m = parse_matrix_market(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 1\n"
      "2 1 4\n");
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_TRUE(m.contains(1, 0));
  EXPECT_TRUE(m.contains(0, 1));
}

TEST(MatrixMarket, PatternGetsUnitValues) {
  const auto m = parse_matrix_market(
      "%%MatrixMarket matrix coordinate pattern symmetric\n"
      "3 3 2\n"
      "1 1\n"
      "3 1\n");
  EXPECT_EQ(m.nnz(), 3u);
  for (const auto& e : m.entries()) EXPECT_EQ(e.value, 1.0);
}

TEST(MatrixMarket, ErrorsNameTheLine) {
  const auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_matrix_market(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("%%MatrixMarket matrix array real general\n2 2\n"), 1u);
  EXPECT_EQ(line_of("garbage\n"), 1u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1\n"), 2u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 1\n"), 4u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n%\n1 2 7\n"), 5u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n"), 4u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n"), 3u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n"), 3u);
}

TEST(MatrixMarket, RoundTripPreservesPatternAndValues) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto base = synth_banded(30, 5, 0.6, static_cast<std::uint64_t>(trial));
    std::vector<Entry> entries = base.entries();
    for (auto& e : entries) e.value = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.uniform(-20, 20));
    const SparseMatrix m(base.dim(), entries);
    EXPECT_EQ(parse_matrix_market(to_matrix_market(m)), m);
  }
}

TEST(MatrixMarket, QH882WhenAvailable) {
  const char* dir = std::getenv("AUTOGMAP_DATA_DIR");
  const std::filesystem::path path = std::filesystem::path(dir ? dir : "data") / "qh882.mtx";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << "qh882.mtx not found under " << path.parent_path();
  std::ifstream in(path);
  const auto m = parse_matrix_market(in);
  EXPECT_EQ(m.dim(), 882u);
  EXPECT_NEAR(m.sparsity(), 0.995, 0.001);
}

TEST(SparseMatrix, RejectsDuplicatesAndOutOfRange) {
  EXPECT_THROW(SparseMatrix(2, {{0, 0, 1.0}, {0, 0, 2.0}}), ArgumentError);
  EXPECT_THROW(SparseMatrix(2, {{2, 0, 1.0}}), ArgumentError);
  EXPECT_THROW(SparseMatrix(0, {}), ArgumentError);
}

TEST(PrefixIndex, EmptyMatrixIsAllZero) {
  const PrefixIndex idx(SparseMatrix(4, {}));
  for (Index i = 0; i <= 4; ++i)
    for (Index j = 0; j <= 4; ++j) EXPECT_EQ(idx.at(i, j), 0u);
}

TEST(PrefixIndex, IdentityPattern) {
  const PrefixIndex idx(synth_banded(4, 0, 1.0, 0));
  EXPECT_EQ(idx.at(4, 4), 4u);
}

TEST(PrefixIndex, FixtureCounts) {
  const PrefixIndex idx = build_prefix_index(fixture_m8());
  EXPECT_EQ(idx.at(8, 8), 16u);
  EXPECT_EQ(count_nonzeros(idx, 0, 0, 8, 8), 16u);
  EXPECT_EQ(count_nonzeros(idx, 3, 3, 0, 4), 0u);
  EXPECT_EQ(count_nonzeros(idx, 2, 4, 2, 2), 1u);
}

TEST(PrefixIndex, BoundsAndCapacity) {
  const PrefixIndex idx(fixture_m8());
  EXPECT_THROW(idx.count(4, 4, 5, 1), BoundsError);
  EXPECT_THROW(idx.count(0, 8, 1, 1), BoundsError);
  EXPECT_NO_THROW(idx.count(8, 8, 0, 0));
  EXPECT_THROW(PrefixIndex(fixture_m8(), 7), CapacityError);
}

TEST(PrefixIndex, MatchesBruteForceOnEveryRectangle) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Index n = 8 + 8 * seed;  // up to 32; 64 is covered below with a stride
    const auto m = synth_banded(n, n / 3, 0.4, seed);
    const PrefixIndex idx(m);
    for (Index r0 = 0; r0 < n; ++r0)
      for (Index c0 = 0; c0 < n; ++c0)
        for (Index h = 0; r0 + h <= n; ++h)
          for (Index w = 0; c0 + w <= n; w += 1 + seed) ASSERT_EQ(idx.count(r0, c0, h, w), testing::brute_count(m, r0, c0, h, w));
  }
  const auto m = synth_banded(64, 10, 0.3, 99);
  const PrefixIndex idx(m);
  for (Index r0 = 0; r0 < 64; r0 += 3)
    for (Index c0 = 0; c0 < 64; c0 += 5)
      for (Index h = 0; r0 + h <= 64; ++h)
        for (Index w = 0; c0 + w <= 64; ++w) ASSERT_EQ(idx.count(r0, c0, h, w), testing::brute_count(m, r0, c0, h, w));
}

TEST(PrefixIndex, MonotoneAlongBothAxes) {
  const PrefixIndex idx(synth_banded(40, 6, 0.5, 11));
  for (Index i = 0; i <= 40; ++i)
    for (Index j = 0; j <= 40; ++j) {
      if (i > 0) {
        EXPECT_LE(idx.at(i - 1, j), idx.at(i, j));
      }
      if (j > 0) {
        EXPECT_LE(idx.at(i, j - 1), idx.at(i, j));
      }
    }
}

TEST(SynthBanded, DiagonalOnly) {
  const auto m = synth_banded(5, 0, 1.0, 42);
  EXPECT_EQ(m.nnz(), 5u);
  for (const auto& e : m.entries()) EXPECT_EQ(e.row, e.col);
}

TEST(SynthBanded, FullTridiagonal) { EXPECT_EQ(synth_banded(6, 1, 1.0, 1).nnz(), 16u); }

TEST(SynthBanded, BandAndSymmetry) {
  const auto m = synth_banded(64, 3, 0.5, 7);
  EXPECT_LE(bandwidth(m), 3u);
  EXPECT_TRUE(m.has_symmetric_pattern());
  for (Index i = 0; i < 64; ++i) EXPECT_TRUE(m.contains(i, i));
  EXPECT_EQ(m, synth_banded(64, 3, 0.5, 7));
}

TEST(SynthBanded, ArgumentChecks) {
  EXPECT_THROW(synth_banded(5, 1, 1.5, 0), ArgumentError);
  EXPECT_THROW(synth_banded(5, 1, -0.1, 0), ArgumentError);
  EXPECT_THROW(synth_banded(5, 5, 0.5, 0), ArgumentError);
}

TEST(EdgeList, Basics) {
  EXPECT_EQ(from_edge_list({}, 3).nnz(), 0u);
  EXPECT_EQ(from_edge_list({{0, 1}}, 2).nnz(), 2u);
  EXPECT_EQ(from_edge_list({{0, 1}, {1, 2}, {2, 3}}, 4).nnz(), 6u);
  EXPECT_EQ(from_edge_list({{0, 1}, {1, 0}, {0, 1}}, 2).nnz(), 2u);
  EXPECT_EQ(from_edge_list({{1, 1}}, 2).nnz(), 1u);
  EXPECT_THROW(from_edge_list({{0, 3}}, 3), ArgumentError);
}

}  // namespace
}  // namespace autogmap
