#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tsprep/transforms.hpp"

using namespace tsprep;

namespace {

/// Random sequences: channel 0 increasing times, data channels with NaN gaps.
struct Random3 {
  PaddedTensor3 X;
  Lengths length;
};

Random3 random_padded(std::mt19937_64& gen, std::size_t n, std::size_t s, std::size_t c, double p_nan) {
  std::uniform_int_distribution<std::size_t> len(1, s);
  std::uniform_real_distribution<double> u(0, 1);
  Random3 r{PaddedTensor3(n, s, c), Lengths(n)};
  for (std::size_t i = 0; i < n; ++i) {
    r.length[i] = std::int64_t(len(gen));
    double time = u(gen) * 3;
    for (std::size_t t = 0; t < std::size_t(r.length[i]); ++t) {
      r.X(i, t, 0) = time;
      time += 0.25 + std::floor(u(gen) * 4);
      for (std::size_t k = 1; k < c; ++k) r.X(i, t, k) = u(gen) < p_nan ? kNaN : std::round(u(gen) * 20) - 10;
    }
  }
  return r;
}

/// Time since the last observation strictly before t, or since the first step.
double delta_oracle(const PaddedTensor3& X, std::size_t i, std::size_t t, std::size_t ch) {
  for (std::size_t s = t; s-- > 0;)
    if (!std::isnan(X(i, s, ch))) return X(i, t, 0) - X(i, s, 0);
  return X(i, t, 0) - X(i, 0, 0);
}

}  // namespace

TEST(MissingSpec, Validation) {
  EXPECT_THROW(MissingSpec(1.5), ConfigError);
  EXPECT_THROW(MissingSpec(std::vector<double>{0.1, -0.1}), ConfigError);
  EXPECT_TRUE(MissingSpec().is_zero());
  EXPECT_FALSE(MissingSpec(std::vector<double>{0, 0.1}).is_zero());
}

TEST(Simulate, ZeroIsIdentity) {
  std::mt19937_64 gen(1);
  auto r = random_padded(gen, 5, 10, 3, 0.0);
  std::vector<std::size_t> data = {1, 2};
  EXPECT_TRUE(bitwise_equal(simulate_missing(r.X, r.length, data, {}, 3).tensor(), r.X.tensor()));
}

TEST(Simulate, ScalarDropsWholeTimePoints) {
  std::mt19937_64 gen(2);
  auto r = random_padded(gen, 30, 40, 4, 0.0);
  std::vector<std::size_t> data = {1, 2, 3};
  auto out = simulate_missing(r.X, r.length, data, MissingSpec(0.5), 7);
  for (std::size_t i = 0; i < out.n(); ++i) {
    std::size_t dropped = 0;
    for (std::size_t t = 0; t < std::size_t(r.length[i]); ++t) {
      const int nans = std::isnan(out(i, t, 1)) + std::isnan(out(i, t, 2)) + std::isnan(out(i, t, 3));
      EXPECT_TRUE(nans == 0 || nans == 3);
      EXPECT_FALSE(std::isnan(out(i, t, 0)));
      dropped += nans == 3;
    }
    EXPECT_EQ(dropped, std::size_t(std::round(0.5 * double(r.length[i]))));
  }
}

TEST(Simulate, PerChannelCounts) {
  std::mt19937_64 gen(3);
  auto r = random_padded(gen, 30, 40, 4, 0.0);
  std::vector<std::size_t> data = {1, 2, 3};
  const std::vector<double> p = {0.8, 0.2, 0.5};
  auto out = simulate_missing(r.X, r.length, data, MissingSpec(p), 11);
  for (std::size_t i = 0; i < out.n(); ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t dropped = 0;
      for (std::size_t t = 0; t < std::size_t(r.length[i]); ++t) dropped += std::isnan(out(i, t, k + 1));
      EXPECT_EQ(dropped, std::size_t(std::round(p[k] * double(r.length[i]))));
    }
}

TEST(Simulate, SeedDeterminesResult) {
  std::mt19937_64 gen(4);
  auto r = random_padded(gen, 10, 20, 3, 0.0);
  std::vector<std::size_t> data = {1, 2};
  auto a = simulate_missing(r.X, r.length, data, MissingSpec(0.3), 5);
  auto b = simulate_missing(r.X, r.length, data, MissingSpec(0.3), 5);
  auto c = simulate_missing(r.X, r.length, data, MissingSpec(0.3), 6);
  EXPECT_TRUE(bitwise_equal(a.tensor(), b.tensor()));
  EXPECT_FALSE(bitwise_equal(a.tensor(), c.tensor()));
}

TEST(Simulate, PerSequenceStreamsIgnoreOtherSequences) {
  std::mt19937_64 gen(5);
  auto r = random_padded(gen, 10, 20, 3, 0.0);
  std::vector<std::size_t> data = {1, 2};
  auto all = simulate_missing(r.X, r.length, data, MissingSpec(0.4), 9);
  std::vector<std::size_t> first = {0, 1, 2};
  Lengths len3(r.length.begin(), r.length.begin() + 3);
  auto part = simulate_missing(select_sequences(r.X, first), len3, data, MissingSpec(0.4), 9);
  EXPECT_TRUE(bitwise_equal(part.tensor(), select_sequences(all, first).tensor()));
}

TEST(Simulate, ListLengthMustMatchChannels) {
  std::mt19937_64 gen(6);
  auto r = random_padded(gen, 2, 5, 3, 0.0);
  std::vector<std::size_t> data = {1, 2};
  EXPECT_THROW(simulate_missing(r.X, r.length, data, MissingSpec(std::vector<double>{0.1}), 1), ConfigError);
}

TEST(Mask, OneObservedZeroMissingNaNPadding) {
  std::mt19937_64 gen(7);
  auto r = random_padded(gen, 20, 15, 3, 0.4);
  std::vector<std::size_t> ch = {1, 2};
  auto m = observational_mask(r.X, r.length, ch);
  for (std::size_t i = 0; i < r.X.n(); ++i)
    for (std::size_t t = 0; t < r.X.s(); ++t)
      for (std::size_t k = 0; k < 2; ++k) {
        if (t >= std::size_t(r.length[i])) EXPECT_TRUE(std::isnan(m(i, t, k)));
        else EXPECT_EQ(m(i, t, k), std::isnan(r.X(i, t, ch[k])) ? 0.0 : 1.0);
      }
}

TEST(Delta, MatchesBackwardScanOracle) {
  std::mt19937_64 gen(8);
  for (int rep = 0; rep < 20; ++rep) {
    auto r = random_padded(gen, 15, 25, 4, 0.5);
    std::vector<std::size_t> ch = {1, 2, 3};
    auto m = observational_mask(r.X, r.length, ch);
    auto d = time_delta(r.X, 0, m, r.length);
    for (std::size_t i = 0; i < r.X.n(); ++i)
      for (std::size_t t = 0; t < r.X.s(); ++t)
        for (std::size_t k = 0; k < 3; ++k) {
          if (t >= std::size_t(r.length[i])) {
            EXPECT_TRUE(std::isnan(d(i, t, k)));
            continue;
          }
          EXPECT_NEAR(d(i, t, k), delta_oracle(r.X, i, t, ch[k]), 1e-12);
        }
  }
}

TEST(Delta, RejectsNonIncreasingTime) {
  PaddedTensor3 X(1, 3, 2, 0.0);
  X(0, 1, 0) = 1;
  X(0, 2, 0) = 1;
  Lengths len = {3};
  std::vector<std::size_t> ch = {1};
  EXPECT_THROW(time_delta(X, 0, observational_mask(X, len, ch), len), ConfigError);
}

TEST(ImputeMethod, Parse) {
  EXPECT_EQ(ImputeMethod::parse("forward").kind, ImputeKind::forward);
  EXPECT_EQ(ImputeMethod::parse("none").name(), "none");
  EXPECT_THROW(ImputeMethod::parse("backward"), ConfigError);
}

TEST(Impute, ZeroMeanForward) {
  PaddedTensor3 X(1, 4, 2, kNaN);
  for (std::size_t t = 0; t < 4; ++t) X(0, t, 0) = double(t);
  X(0, 1, 1) = 5;
  Lengths len = {4};
  Tensor<double> y({1, 1}, 0.0);
  std::vector<double> fill = {kNaN, 2.5};
  std::vector<std::size_t> sel = {1};
  auto [z, y0] = impute(X, y, len, ImputeMethod::parse("zero"), fill, sel);
  EXPECT_EQ(z(0, 0, 1), 0.0);
  EXPECT_EQ(z(0, 1, 1), 5.0);
  auto [m, y1] = impute(X, y, len, ImputeMethod::parse("mean"), fill, sel);
  EXPECT_EQ(m(0, 0, 1), 2.5);
  EXPECT_EQ(m(0, 3, 1), 2.5);
  auto [f, y2] = impute(X, y, len, ImputeMethod::parse("forward"), fill, sel);
  EXPECT_EQ(f(0, 0, 1), 2.5);  // initial gap takes the fill value
  EXPECT_EQ(f(0, 2, 1), 5.0);
  EXPECT_EQ(f(0, 3, 1), 5.0);
}

TEST(Impute, MissingFillThrowsOnlyWhenNeeded) {
  PaddedTensor3 X(1, 2, 1, 1.0);
  Lengths len = {2};
  Tensor<double> y({1, 1});
  std::vector<double> fill = {kNaN};
  std::vector<std::size_t> sel = {0};
  EXPECT_NO_THROW(impute(X, y, len, ImputeMethod::parse("mean"), fill, sel));
  X(0, 1, 0) = kNaN;
  EXPECT_THROW(impute(X, y, len, ImputeMethod::parse("mean"), fill, sel), ConfigError);
  EXPECT_NO_THROW(impute(X, y, len, ImputeMethod::parse("forward"), fill, sel));
}

TEST(Impute, CustomFunctionReceivesFillAndSelection) {
  PaddedTensor3 X(1, 2, 2, kNaN);
  Lengths len = {2};
  Tensor<double> y({1, 1});
  std::vector<double> fill = {1.0, 7.0};
  std::vector<std::size_t> sel = {1};
  auto method = ImputeMethod::with([](PaddedTensor3 x, Tensor<double> yy, std::span<const double> f,
                                      std::span<const std::size_t> s) {
    for (std::size_t t = 0; t < 2; ++t) x(0, t, s[0]) = f[s[0]];
    return std::pair{std::move(x), std::move(yy)};
  });
  auto [out, yo] = impute(X, y, len, method, fill, sel);
  EXPECT_EQ(out(0, 1, 1), 7.0);
  EXPECT_TRUE(std::isnan(out(0, 1, 0)));
  auto bad = ImputeMethod::with([](PaddedTensor3, Tensor<double> yy, std::span<const double>,
                                   std::span<const std::size_t>) { return std::pair{PaddedTensor3(1, 1, 1), yy}; });
  EXPECT_THROW(impute(X, y, len, bad, fill, sel), ConfigError);
}

TEST(Impute, ForwardLeavesPaddingAndOtherChannels) {
  std::mt19937_64 gen(9);
  auto r = random_padded(gen, 10, 12, 3, 0.5);
  std::vector<double> fill = {kNaN, 0.5, -0.5};
  std::vector<std::size_t> sel = {2};
  auto [out, y] = impute(r.X, Tensor<double>({10, 1}), r.length, ImputeMethod::parse("forward"), fill, sel);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t t = 0; t < 12; ++t) {
      EXPECT_TRUE(fixtures::same_bits(out(i, t, 1), r.X(i, t, 1)));
      if (t >= std::size_t(r.length[i])) EXPECT_TRUE(std::isnan(out(i, t, 2)));
      else EXPECT_FALSE(std::isnan(out(i, t, 2)));
    }
}
