#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "tsprep/error.hpp"
#include "tsprep/parallel.hpp"
#include "tsprep/rng.hpp"
#include "tsprep/tensor.hpp"
#include "tsprep/text.hpp"

using namespace tsprep;

TEST(Tensor, RowMajorIndexing) {
  Tensor<double> t({2, 3, 4});
  for (std::size_t k = 0; k < t.size(); ++k) t.values()[k] = double(k);
  EXPECT_EQ(t(1, 2, 3), 23.0);
  EXPECT_EQ(t(0, 1, 0), 4.0);
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(shape_string(t.shape()), "(2, 3, 4)");
}

TEST(Tensor, DataSizeMismatchThrows) {
  EXPECT_THROW(Tensor<double>({2, 2}, std::vector<double>(3)), ConfigError);
}

TEST(Tensor, BitwiseEqualTreatsNaNAsEqual) {
  Tensor<double> a({2}, kNaN), b({2}, kNaN);
  EXPECT_TRUE(bitwise_equal(a, b));
  b(1) = 0.0;
  EXPECT_FALSE(bitwise_equal(a, b));
  EXPECT_FALSE(bitwise_equal(Tensor<double>({2}), Tensor<double>({1, 2})));
}

TEST(PaddedTensor, SelectAndConcat) {
  PaddedTensor3 X(3, 2, 2, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t c = 0; c < 2; ++c) X(i, t, c) = double(100 * i + 10 * t + c);
  std::vector<std::size_t> rows = {2, 0};
  auto sel = select_sequences(X, rows);
  EXPECT_EQ(sel.n(), 2u);
  EXPECT_EQ(sel(0, 1, 1), 211.0);
  EXPECT_EQ(sel(1, 0, 0), 0.0);

  std::vector<std::size_t> ch = {1};
  auto one = select_channels(X, ch);
  std::vector<PaddedTensor3> parts = {one, X};
  auto cat = concat_channels(parts);
  EXPECT_EQ(cat.c(), 3u);
  EXPECT_EQ(cat(2, 1, 0), 211.0);
  EXPECT_EQ(cat(2, 1, 1), 210.0);
}

TEST(Text, SplitKeepsEmptyFields) {
  auto parts = text::split("a,,b,", ',');
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[1], "");
  EXPECT_EQ(parts[3], "");
}

TEST(Text, LinesHandlesCrlfAndTrailingNewline) {
  auto ls = text::lines("x\r\ny\n");
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "x");
  EXPECT_EQ(ls[1], "y");
}

TEST(Text, ParseNumbers) {
  EXPECT_EQ(text::parse_double(" +1.5 "), 1.5);
  EXPECT_FALSE(text::parse_double("1.5x"));
  EXPECT_FALSE(text::parse_double(""));
  EXPECT_EQ(text::parse_int<int>("42"), 42);
  EXPECT_FALSE(text::parse_int<int>("4.2"));
  EXPECT_EQ(text::format_double(0.1), "0.1");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs = differs || x != c();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, SubstreamsDependOnPurposeAndIndex) {
  auto a = Rng::substream(1, "x", 0)();
  EXPECT_EQ(a, Rng::substream(1, "x", 0)());
  EXPECT_NE(a, Rng::substream(1, "y", 0)());
  EXPECT_NE(a, Rng::substream(1, "x", 1)());
  EXPECT_NE(a, Rng::substream(2, "x", 0)());
}

TEST(Rng, BoundedIsRoughlyUniform) {
  Rng rng(3);
  std::array<int, 5> counts{};
  for (int k = 0; k < 50000; ++k) ++counts[rng.bounded(5)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, PartialShuffleChoosesDistinctPrefix) {
  Rng rng(11);
  std::vector<int> v(20);
  std::iota(v.begin(), v.end(), 0);
  rng.partial_shuffle(std::span<int>(v), 7);
  std::set<int> all(v.begin(), v.end());
  EXPECT_EQ(all.size(), 20u);
}

TEST(Parallel, KeepsOrderAcrossThreadCounts) {
  std::vector<int> items(100);
  std::iota(items.begin(), items.end(), 0);
  auto one = parallel_map(items, 1, [](int x) { return x * x; });
  auto many = parallel_map(items, 8, [](int x) { return x * x; });
  EXPECT_EQ(one, many);
  EXPECT_EQ(many[9], 81);
}

TEST(Parallel, RethrowsLowestIndexError) {
  std::vector<int> items = {0, 1, 2, 3, 4, 5};
  try {
    parallel_map(items, 4, [](int x) -> int {
      if (x == 2 || x == 5) throw std::runtime_error("bad " + std::to_string(x));
      return x;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "bad 2");
  }
}

TEST(Errors, ParseErrorAppendsLine) {
  ParseError e("oops", 12);
  EXPECT_EQ(std::string(e.what()), "oops (line 12)");
}
