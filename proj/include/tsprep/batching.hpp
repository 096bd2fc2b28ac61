#pragma once

// Batch iteration, descending-length sorting and the packed time-major form.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "tsprep/error.hpp"
#include "tsprep/rng.hpp"
#include "tsprep/tensor.hpp"
#include "tsprep/tensor_core.hpp"

namespace tsprep {

struct Batch {
  PaddedTensor3 X;
  Tensor<double> y;
  Lengths length;
  TargetKind target = TargetKind::sequence;

  using Field = std::variant<const PaddedTensor3*, const Tensor<double>*, const Lengths*>;

  /// Access by name: "X", "y" or "length".
  Field operator[](std::string_view name) const {
    if (name == "X") return &X;
    if (name == "y") return &y;
    if (name == "length") return &length;
    throw ConfigError("batch has no field '" + std::string(name) + "'");
  }

  std::size_t size() const { return length.size(); }
};

struct BatchOptions {
  bool shuffle = false;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
};

/// Batches over one split of a dataset, in stored order unless shuffling.
class BatchLoader {
 public:
  BatchLoader(const Dataset& dataset, Split split, std::size_t batch_size, BatchOptions options = {})
      : X_(&dataset.X(split)), y_(&dataset.y(split)), length_(&dataset.length(split)),
        batch_size_(batch_size), target_(dataset.target) {
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (length_->empty()) throw ConfigError("split '" + std::string(to_string(split)) + "' is empty");
    order_.resize(length_->size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (options.shuffle) Rng::substream(options.seed, "batch_shuffle", options.epoch).shuffle(std::span(order_));
  }

  std::size_t size() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

  Batch operator[](std::size_t b) const {
    const std::size_t begin = b * batch_size_;
    const std::size_t end = std::min(order_.size(), begin + batch_size_);
    if (begin >= end) throw ConfigError("batch index out of range");
    std::span<const std::size_t> rows(order_.data() + begin, end - begin);
    Batch out{select_sequences(*X_, rows), select_rows(*y_, rows), {}, target_};
    for (auto r : rows) out.length.push_back((*length_)[r]);
    return out;
  }

  class iterator {
   public:
    using value_type = Batch;
    using difference_type = std::ptrdiff_t;
    iterator(const BatchLoader* loader, std::size_t b) : loader_(loader), b_(b) {}
    Batch operator*() const { return (*loader_)[b_]; }
    iterator& operator++() {
      ++b_;
      return *this;
    }
    bool operator==(const iterator& o) const { return b_ == o.b_; }

   private:
    const BatchLoader* loader_;
    std::size_t b_;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size()}; }

 private:
  const PaddedTensor3* X_;
  const Tensor<double>* y_;
  const Lengths* length_;
  std::size_t batch_size_;
  TargetKind target_;
  std::vector<std::size_t> order_;
};

inline std::vector<Batch> batches(const Dataset& dataset, Split split, std::size_t batch_size,
                                  BatchOptions options = {}) {
  BatchLoader loader(dataset, split, batch_size, options);
  std::vector<Batch> out;
  for (std::size_t b = 0; b < loader.size(); ++b) out.push_back(loader[b]);
  return out;
}

/// Permutation putting lengths in descending order; ties keep original order.
inline std::vector<std::size_t> length_order(const Lengths& length) {
  std::vector<std::size_t> order(length.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return length[a] > length[b]; });
  return order;
}

inline Batch sort_by_length(const Batch& batch, std::vector<std::size_t>* permutation = nullptr) {
  auto order = length_order(batch.length);
  Batch out{select_sequences(batch.X, order), select_rows(batch.y, order), {}, batch.target};
  for (auto r : order) out.length.push_back(batch.length[r]);
  if (permutation) *permutation = std::move(order);
  return out;
}

/// Time-major concatenation of a descending-length batch.
struct PackedBatch {
  Tensor<double> values;                  // (sum of lengths, c)
  std::vector<std::int64_t> batch_sizes;  // active sequences per time step
  std::vector<std::size_t> sort_order;    // original row of each sorted row
  Lengths sorted_length;
  std::size_t padded_steps = 0;
  /// Sequence-level targets sorted (b, l); per-step targets packed like X (sum of lengths).
  Tensor<double> y;
  TargetKind target = TargetKind::sequence;
};

inline PackedBatch pack(const Batch& batch) {
  PackedBatch out;
  out.target = batch.target;
  out.padded_steps = batch.X.s();
  out.sort_order = length_order(batch.length);
  std::size_t total = 0;
  for (auto r : out.sort_order) {
    if (batch.length[r] <= 0) throw ConfigError("cannot pack a zero-length sequence");
    out.sorted_length.push_back(batch.length[r]);
    total += static_cast<std::size_t>(batch.length[r]);
  }
  const std::size_t c = batch.X.c();
  const std::size_t steps = out.sorted_length.empty() ? 0 : static_cast<std::size_t>(out.sorted_length.front());
  out.values = Tensor<double>({total, c});
  if (batch.target == TargetKind::per_step) out.y = Tensor<double>({total});
  std::size_t row = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    std::int64_t active = 0;
    for (auto r : out.sort_order) {
      if (static_cast<std::size_t>(batch.length[r]) <= t) break;
      auto src = batch.X.step(r, t);
      std::copy(src.begin(), src.end(), out.values.values().begin() + row * c);
      if (batch.target == TargetKind::per_step) out.y(row) = batch.y(r, t);
      ++row;
      ++active;
    }
    out.batch_sizes.push_back(active);
  }
  if (batch.target == TargetKind::sequence) out.y = select_rows(batch.y, out.sort_order);
  return out;
}

/// Inverse of pack, in sorted row order; padding is refilled with NaN.
inline Batch unpack(const PackedBatch& packed) {
  const std::size_t b = packed.sorted_length.size();
  const std::size_t c = packed.values.rank() == 2 ? packed.values.dim(1) : 0;
  Batch out{PaddedTensor3(b, packed.padded_steps, c), {}, packed.sorted_length, packed.target};
  if (packed.target == TargetKind::per_step) out.y = Tensor<double>({b, packed.padded_steps}, kNaN);
  else out.y = packed.y;
  std::size_t row = 0;
  for (std::size_t t = 0; t < packed.batch_sizes.size(); ++t)
    for (std::size_t r = 0; r < static_cast<std::size_t>(packed.batch_sizes[t]); ++r, ++row) {
      auto src = packed.values.values().subspan(row * c, c);
      std::copy(src.begin(), src.end(), out.X.step(r, t).begin());
      if (packed.target == TargetKind::per_step) out.y(r, t) = packed.y(row);
    }
  return out;
}

}  // namespace tsprep
