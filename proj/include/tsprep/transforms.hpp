#pragma once

// Missing-data simulation, observational masks, time deltas and imputation.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tsprep/error.hpp"
#include "tsprep/rng.hpp"
#include "tsprep/tensor.hpp"
#include "tsprep/tensor_core.hpp"

namespace tsprep {

// ---------------------------------------------------------------------------
// Missing-data simulation

/// Proportion of data to drop: one value for whole time points, or one per data channel.
class MissingSpec {
 public:
  MissingSpec() = default;
  MissingSpec(double p) : value_(p) { check(p); }
  MissingSpec(std::vector<double> per_channel) : value_(std::move(per_channel)) {
    for (double p : std::get<1>(value_)) check(p);
  }

  bool is_scalar() const { return value_.index() == 0; }
  double scalar() const { return std::get<0>(value_); }
  const std::vector<double>& per_channel() const { return std::get<1>(value_); }

  /// True when nothing will be dropped.
  bool is_zero() const {
    if (is_scalar()) return scalar() == 0.0;
    for (double p : per_channel())
      if (p != 0.0) return false;
    return true;
  }

  bool operator==(const MissingSpec&) const = default;

 private:
  static void check(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("missing proportion must be in [0, 1], got " + std::to_string(p));
  }

  std::variant<double, std::vector<double>> value_{0.0};
};

/// Count of entries dropped out of `length` for proportion `p`.
inline std::size_t missing_count(double p, std::int64_t length) {
  return static_cast<std::size_t>(std::round(p * static_cast<double>(length)));
}

/// Replaces randomly chosen entries of `data_channels` with NaN.
///
/// Scalar spec: round(p * length) whole time points per sequence lose every
/// data channel. Per-channel spec: round(p_c * length) entries of channel c,
/// drawn independently. Positions are a seeded partial shuffle of the valid
/// time indices, using one substream per sequence so the result does not
/// depend on processing order.
inline PaddedTensor3 simulate_missing(const PaddedTensor3& X, const Lengths& length,
                                      std::span<const std::size_t> data_channels, const MissingSpec& spec,
                                      std::uint64_t seed) {
  if (length.size() != X.n()) throw ConfigError("simulate_missing: length size does not match X");
  if (!spec.is_scalar() && spec.per_channel().size() != data_channels.size())
    throw ConfigError("missing list has " + std::to_string(spec.per_channel().size()) + " entries but there are " +
                      std::to_string(data_channels.size()) + " data channels");
  PaddedTensor3 out = X;
  if (spec.is_zero()) return out;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < X.n(); ++i) {
    Rng rng = Rng::substream(seed, "simulate_missing", i);
    const auto len = static_cast<std::size_t>(length[i]);
    auto draw = [&](double p) {
      positions.resize(len);
      std::iota(positions.begin(), positions.end(), std::size_t{0});
      const std::size_t k = missing_count(p, length[i]);
      rng.partial_shuffle(std::span<std::size_t>(positions), k);
      positions.resize(k);
    };
    if (spec.is_scalar()) {
      draw(spec.scalar());
      for (auto t : positions)
        for (auto ch : data_channels) out(i, t, ch) = kNaN;
    } else {
      for (std::size_t c = 0; c < data_channels.size(); ++c) {
        draw(spec.per_channel()[c]);
        for (auto t : positions) out(i, t, data_channels[c]) = kNaN;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Masks and time deltas

/// One channel per entry of `channels`: 1 where observed, 0 where NaN, NaN in padding.
inline PaddedTensor3 observational_mask(const PaddedTensor3& X, const Lengths& length,
                                        std::span<const std::size_t> channels) {
  PaddedTensor3 mask(X.n(), X.s(), channels.size());
  for (std::size_t i = 0; i < X.n(); ++i)
    for (std::size_t t = 0; t < static_cast<std::size_t>(length[i]); ++t)
      for (std::size_t k = 0; k < channels.size(); ++k) mask(i, t, k) = std::isnan(X(i, t, channels[k])) ? 0.0 : 1.0;
  return mask;
}

/// Time since the previous observation of each masked channel.
///
/// delta[0] = 0; delta[t] = s[t] - s[t-1] when channel was observed at t-1,
/// otherwise s[t] - s[t-1] + delta[t-1]. Padding is NaN.
inline PaddedTensor3 time_delta(const PaddedTensor3& X, std::size_t time_channel, const PaddedTensor3& mask,
                                const Lengths& length) {
  if (mask.n() != X.n() || mask.s() != X.s()) throw ConfigError("time_delta: mask shape does not match X");
  PaddedTensor3 delta(X.n(), X.s(), mask.c());
  for (std::size_t i = 0; i < X.n(); ++i) {
    const auto len = static_cast<std::size_t>(length[i]);
    for (std::size_t t = 0; t < len; ++t) {
      const double now = X(i, t, time_channel);
      if (std::isnan(now)) throw ConfigError("time_delta: missing time stamp in sequence " + std::to_string(i));
      for (std::size_t k = 0; k < mask.c(); ++k) {
        if (t == 0) {
          delta(i, t, k) = 0.0;
          continue;
        }
        const double gap = now - X(i, t - 1, time_channel);
        delta(i, t, k) = mask(i, t - 1, k) == 0.0 ? gap + delta(i, t - 1, k) : gap;
      }
      if (t > 0 && !(now > X(i, t - 1, time_channel)))
        throw ConfigError("time_delta: time stamps not increasing in sequence " + std::to_string(i));
    }
  }
  return delta;
}

// ---------------------------------------------------------------------------
// Imputation

enum class ImputeKind { none, zero, mean, forward, custom };

/// User imputation callback: (X, y, fill per X channel, channels to impute) -> (X, y).
using CustomImputer = std::function<std::pair<PaddedTensor3, Tensor<double>>(
    PaddedTensor3, Tensor<double>, std::span<const double>, std::span<const std::size_t>)>;

struct ImputeMethod {
  ImputeKind kind = ImputeKind::none;
  CustomImputer custom;

  static ImputeMethod parse(std::string_view name) {
    if (name == "none") return {ImputeKind::none, {}};
    if (name == "zero") return {ImputeKind::zero, {}};
    if (name == "mean") return {ImputeKind::mean, {}};
    if (name == "forward") return {ImputeKind::forward, {}};
    throw ConfigError("unknown imputation method '" + std::string(name) + "' (expected none, zero, mean or forward)");
  }

  static ImputeMethod with(CustomImputer fn) { return {ImputeKind::custom, std::move(fn)}; }

  std::string name() const {
    switch (kind) {
      case ImputeKind::none: return "none";
      case ImputeKind::zero: return "zero";
      case ImputeKind::mean: return "mean";
      case ImputeKind::forward: return "forward";
      case ImputeKind::custom: return "custom";
    }
    return "?";
  }
};

/// Fills NaNs of the `select` channels within each sequence's length.
///
/// `fill` holds one value per X channel (NaN where unavailable): the training
/// mean, mode for categorical channels, or an override. Values at time i only
/// depend on observations at times <= i and on `fill`. Padding stays NaN and
/// channels outside `select` (time, mask, delta) are untouched.
inline std::pair<PaddedTensor3, Tensor<double>> impute(const PaddedTensor3& X, const Tensor<double>& y,
                                                       const Lengths& length, const ImputeMethod& method,
                                                       std::span<const double> fill,
                                                       std::span<const std::size_t> select) {
  if (fill.size() != X.c()) throw ConfigError("impute: fill size does not match channel count");
  if (method.kind == ImputeKind::none) return {X, y};
  if (method.kind == ImputeKind::custom) {
    if (!method.custom) throw ConfigError("impute: custom method without a function");
    auto [X2, y2] = method.custom(X, y, fill, select);
    if (X2.shape() != X.shape() || y2.shape() != y.shape())
      throw ConfigError("custom imputation changed tensor shapes");
    return {std::move(X2), std::move(y2)};
  }

  PaddedTensor3 out = X;
  auto fill_for = [&](std::size_t ch) {
    const double f = method.kind == ImputeKind::zero ? 0.0 : fill[ch];
    if (std::isnan(f))
      throw ConfigError("cannot impute channel " + std::to_string(ch) +
                        ": no training observations and no override value");
    return f;
  };
  for (auto ch : select) {
    if (ch >= X.c()) throw ConfigError("impute: channel index out of range");
    for (std::size_t i = 0; i < X.n(); ++i) {
      double last = kNaN;
      for (std::size_t t = 0; t < static_cast<std::size_t>(length[i]); ++t) {
        double& v = out(i, t, ch);
        if (!std::isnan(v)) {
          last = v;
          continue;
        }
        if (method.kind == ImputeKind::forward && !std::isnan(last)) v = last;
        else v = fill_for(ch);
      }
    }
  }
  return {std::move(out), y};
}

}  // namespace tsprep
