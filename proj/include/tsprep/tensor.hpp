#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tsprep/error.hpp"

namespace tsprep {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(shape[k]);
  }
  return out + ")";
}

/// Dense row-major array of arbitrary rank.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T{}) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw ConfigError("tensor data size " + std::to_string(data_.size()) + " does not match shape " +
                        shape_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t k) const { return shape_.at(k); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  template <typename... Idx>
  T& operator()(Idx... idx) {
    return data_[offset(idx...)];
  }
  template <typename... Idx>
  const T& operator()(Idx... idx) const {
    return data_[offset(idx...)];
  }

 private:
  template <typename... Idx>
  std::size_t offset(Idx... idx) const {
    const std::size_t index[] = {static_cast<std::size_t>(idx)...};
    std::size_t off = 0;
    for (std::size_t k = 0; k < sizeof...(Idx); ++k) off = off * shape_[k] + index[k];
    return off;
  }

  Shape shape_;
  std::vector<T> data_;
};

/// Bitwise comparison, so NaN padding compares equal to NaN padding.
template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape() &&
         (a.size() == 0 || std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(T)) == 0);
}

/// The (sequences, steps, channels) array. NaN marks both missing values and padding.
class PaddedTensor3 {
 public:
  PaddedTensor3() = default;
  PaddedTensor3(std::size_t n, std::size_t s, std::size_t c, double fill = kNaN) : data_({n, s, c}, fill) {}
  explicit PaddedTensor3(Tensor<double> data) : data_(std::move(data)) {
    if (data_.rank() != 3) throw ConfigError("padded tensor must have rank 3, got " + shape_string(data_.shape()));
  }

  std::size_t n() const { return data_.rank() ? data_.dim(0) : 0; }
  std::size_t s() const { return data_.rank() ? data_.dim(1) : 0; }
  std::size_t c() const { return data_.rank() ? data_.dim(2) : 0; }
  const Shape& shape() const { return data_.shape(); }

  double& operator()(std::size_t i, std::size_t t, std::size_t ch) { return data_(i, t, ch); }
  double operator()(std::size_t i, std::size_t t, std::size_t ch) const { return data_(i, t, ch); }

  /// All channels of one time step.
  std::span<double> step(std::size_t i, std::size_t t) { return data_.values().subspan((i * s() + t) * c(), c()); }
  std::span<const double> step(std::size_t i, std::size_t t) const {
    return data_.values().subspan((i * s() + t) * c(), c());
  }

  const Tensor<double>& tensor() const noexcept { return data_; }
  Tensor<double>& tensor() noexcept { return data_; }

  friend bool bitwise_equal(const PaddedTensor3& a, const PaddedTensor3& b) {
    return bitwise_equal(a.data_, b.data_);
  }

 private:
  Tensor<double> data_;
};

/// Rows `rows` of a padded tensor, in the given order.
inline PaddedTensor3 select_sequences(const PaddedTensor3& X, std::span<const std::size_t> rows) {
  PaddedTensor3 out(rows.size(), X.s(), X.c());
  const std::size_t block = X.s() * X.c();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto src = X.tensor().values().subspan(rows[r] * block, block);
    std::copy(src.begin(), src.end(), out.tensor().values().begin() + r * block);
  }
  return out;
}

/// Rows of the leading dimension of any tensor.
template <typename T>
Tensor<T> select_rows(const Tensor<T>& t, std::span<const std::size_t> rows) {
  Shape shape = t.shape();
  if (shape.empty()) throw ConfigError("cannot select rows of a rank-0 tensor");
  const std::size_t block = shape[0] ? t.size() / shape[0] : 0;
  shape[0] = rows.size();
  Tensor<T> out(shape);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto src = t.values().subspan(rows[r] * block, block);
    std::copy(src.begin(), src.end(), out.values().begin() + r * block);
  }
  return out;
}

/// Channels `channels` of a padded tensor, in the given order.
inline PaddedTensor3 select_channels(const PaddedTensor3& X, std::span<const std::size_t> channels) {
  PaddedTensor3 out(X.n(), X.s(), channels.size());
  for (std::size_t i = 0; i < X.n(); ++i)
    for (std::size_t t = 0; t < X.s(); ++t)
      for (std::size_t k = 0; k < channels.size(); ++k) out(i, t, k) = X(i, t, channels[k]);
  return out;
}

/// Concatenate along the channel axis.
inline PaddedTensor3 concat_channels(std::span<const PaddedTensor3> parts) {
  if (parts.empty()) throw ConfigError("nothing to concatenate");
  const std::size_t n = parts[0].n(), s = parts[0].s();
  std::size_t c = 0;
  for (const auto& p : parts) {
    if (p.n() != n || p.s() != s) throw ConfigError("channel concatenation shape mismatch");
    c += p.c();
  }
  PaddedTensor3 out(n, s, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < s; ++t) {
      auto dst = out.step(i, t).begin();
      for (const auto& p : parts) {
        auto src = p.step(i, t);
        dst = std::copy(src.begin(), src.end(), dst);
      }
    }
  return out;
}

}  // namespace tsprep
