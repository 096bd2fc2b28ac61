#pragma once

// Padded (n, s, c) data model: channel layout, per-channel training
// statistics, standardisation and the Dataset container.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tsprep/error.hpp"
#include "tsprep/tensor.hpp"

namespace tsprep {

using Lengths = std::vector<std::int64_t>;

enum class Split : std::uint8_t { train, val, test };

inline constexpr std::array<Split, 3> kAllSplits = {Split::train, Split::val, Split::test};

inline std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

/// Whether y holds one row per sequence or one value per time step (n, s).
enum class TargetKind : std::uint8_t { sequence, per_step };

// ---------------------------------------------------------------------------
// Channel layout

enum class ChannelKind : std::uint8_t { time, data, mask, delta };

inline std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::time: return "time";
    case ChannelKind::data: return "data";
    case ChannelKind::mask: return "mask";
    case ChannelKind::delta: return "delta";
  }
  return "?";
}

struct ChannelDescriptor {
  ChannelKind kind;
  std::string name;
  /// Index of the source channel in master numbering (0 = time stamp).
  std::size_t source;

  bool operator==(const ChannelDescriptor&) const = default;
};

/// Ordered channel descriptors: time stamp, data, mask, then delta blocks.
class ChannelLayout {
 public:
  ChannelLayout() = default;
  explicit ChannelLayout(std::vector<ChannelDescriptor> channels) : channels_(std::move(channels)) {
    for (std::size_t k = 1; k < channels_.size(); ++k)
      if (channels_[k].kind < channels_[k - 1].kind)
        throw ConfigError("channel layout out of order at channel " + std::to_string(k));
  }

  /// Layout built from master channel names (index 0 is the time stamp).
  /// `observed` lists the master channels that receive mask/delta channels.
  static ChannelLayout build(const std::vector<std::string>& master_names, bool time, bool mask, bool delta,
                             const std::vector<std::size_t>& observed) {
    std::vector<ChannelDescriptor> out;
    if (time) out.push_back({ChannelKind::time, master_names.at(0), 0});
    for (std::size_t k = 1; k < master_names.size(); ++k) out.push_back({ChannelKind::data, master_names[k], k});
    if (mask)
      for (auto k : observed) out.push_back({ChannelKind::mask, "mask_" + master_names.at(k), k});
    if (delta)
      for (auto k : observed) out.push_back({ChannelKind::delta, "delta_" + master_names.at(k), k});
    return ChannelLayout(std::move(out));
  }

  std::size_t size() const { return channels_.size(); }
  const ChannelDescriptor& operator[](std::size_t k) const { return channels_.at(k); }
  const std::vector<ChannelDescriptor>& channels() const { return channels_; }

  std::vector<std::size_t> indices(ChannelKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < channels_.size(); ++k)
      if (channels_[k].kind == kind) out.push_back(k);
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : channels_) out.push_back(c.name);
    return out;
  }

  bool operator==(const ChannelLayout&) const = default;

 private:
  std::vector<ChannelDescriptor> channels_;
};

// ---------------------------------------------------------------------------
// Padding and the time channel

/// Pads variable-length (length, c) series with NaN to the longest length.
inline std::pair<PaddedTensor3, Lengths> pad_to_longest(const std::vector<Tensor<double>>& series) {
  if (series.empty()) throw ConfigError("pad_to_longest: no series");
  const std::size_t c = series.front().rank() == 2 ? series.front().dim(1) : 0;
  std::size_t s = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].rank() != 2 || series[i].dim(1) != c)
      throw ConfigError("pad_to_longest: series " + std::to_string(i) + " has shape " +
                        shape_string(series[i].shape()) + ", expected (*, " + std::to_string(c) + ")");
    if (series[i].dim(0) == 0) throw ConfigError("pad_to_longest: series " + std::to_string(i) + " is empty");
    s = std::max(s, series[i].dim(0));
  }
  if (c == 0) throw ConfigError("pad_to_longest: series have no channels");
  PaddedTensor3 X(series.size(), s, c);
  Lengths length(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    length[i] = static_cast<std::int64_t>(series[i].dim(0));
    auto src = series[i].values();
    std::copy(src.begin(), src.end(), X.tensor().values().begin() + i * s * c);
  }
  return {std::move(X), std::move(length)};
}

/// Prepends channel 0 holding per-sequence time stamps. Padding stays NaN.
inline PaddedTensor3 append_time_channel(const PaddedTensor3& X, const Lengths& length,
                                         const std::vector<std::vector<double>>& times) {
  if (times.size() != X.n() || length.size() != X.n()) throw ConfigError("append_time_channel: shape mismatch");
  PaddedTensor3 out(X.n(), X.s(), X.c() + 1);
  for (std::size_t i = 0; i < X.n(); ++i) {
    if (times[i].size() < static_cast<std::size_t>(length[i]))
      throw ConfigError("append_time_channel: sequence " + std::to_string(i) + " has too few time stamps");
    for (std::size_t t = 0; t < X.s(); ++t) {
      auto dst = out.step(i, t);
      auto src = X.step(i, t);
      dst[0] = t < static_cast<std::size_t>(length[i]) ? times[i][t] : kNaN;
      std::copy(src.begin(), src.end(), dst.begin() + 1);
    }
  }
  return out;
}

/// Index time stamps 0, 1, ..., length-1.
inline PaddedTensor3 append_time_channel(const PaddedTensor3& X, const Lengths& length) {
  std::vector<std::vector<double>> times(X.n());
  for (std::size_t i = 0; i < X.n(); ++i) {
    times[i].resize(static_cast<std::size_t>(length[i]));
    for (std::size_t t = 0; t < times[i].size(); ++t) times[i][t] = static_cast<double>(t);
  }
  return append_time_channel(X, length, times);
}

// ---------------------------------------------------------------------------
// Training statistics

struct ChannelStat {
  std::size_t count = 0;  // observed, non-padding entries
  double mean = kNaN;
  double std = kNaN;  // unbiased (n - 1)
  double mode = kNaN;
  bool categorical = false;
  std::optional<double> override_value;

  bool available() const { return count > 0 || override_value.has_value(); }

  /// Divisor used by standardisation: 1 when the std is zero or undefined.
  double scale() const { return (count < 2 || !(std > 0.0) || !std::isfinite(std)) ? 1.0 : std; }

  /// Value used to fill missing entries: override, else mode (categorical), else mean.
  std::optional<double> fill() const {
    if (override_value) return override_value;
    if (count == 0) return std::nullopt;
    return categorical ? mode : mean;
  }
};

/// Per-channel statistics indexed like the channels of the tensor they were computed on.
struct ChannelStats {
  std::vector<ChannelStat> channels;

  const ChannelStat& operator[](std::size_t k) const { return channels.at(k); }
  std::size_t size() const { return channels.size(); }
};

/// NaN- and padding-excluding mean, std and (for categorical channels) mode.
/// Mode ties go to the smallest value. Overrides replace the fill value of a channel.
inline ChannelStats channel_stats(const PaddedTensor3& X, const Lengths& length,
                                  const std::set<std::size_t>& categorical = {},
                                  const std::map<std::size_t, double>& overrides = {}) {
  if (length.size() != X.n()) throw ConfigError("channel_stats: length size does not match X");
  ChannelStats stats;
  stats.channels.resize(X.c());
  for (std::size_t ch = 0; ch < X.c(); ++ch) {
    ChannelStat& st = stats.channels[ch];
    st.categorical = categorical.count(ch) > 0;
    double sum = 0;
    std::map<double, std::size_t> counts;
    for (std::size_t i = 0; i < X.n(); ++i)
      for (std::size_t t = 0; t < static_cast<std::size_t>(length[i]); ++t) {
        const double v = X(i, t, ch);
        if (std::isnan(v)) continue;
        ++st.count;
        sum += v;
        if (st.categorical) ++counts[v];
      }
    if (st.count > 0) {
      st.mean = sum / static_cast<double>(st.count);
      double ss = 0;
      for (std::size_t i = 0; i < X.n(); ++i)
        for (std::size_t t = 0; t < static_cast<std::size_t>(length[i]); ++t) {
          const double v = X(i, t, ch);
          if (!std::isnan(v)) ss += (v - st.mean) * (v - st.mean);
        }
      st.std = st.count > 1 ? std::sqrt(ss / static_cast<double>(st.count - 1)) : kNaN;
    }
    std::size_t best = 0;
    for (const auto& [value, n] : counts)
      if (n > best) {
        best = n;
        st.mode = value;
      }
  }
  for (const auto& [ch, value] : overrides) {
    if (ch >= X.c()) throw ConfigError("channel override index " + std::to_string(ch) + " out of range");
    stats.channels[ch].override_value = value;
    if (stats.channels[ch].categorical) stats.channels[ch].mode = value;
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Dataset

/// Final (n, s, c) tensors plus split membership. Immutable once built;
/// per-split tensors are materialised at construction.
class Dataset {
 public:
  struct SplitData {
    PaddedTensor3 X;
    Tensor<double> y;
    Lengths length;
    std::vector<std::size_t> indices;
  };

  Dataset() = default;

  Dataset(PaddedTensor3 X, Tensor<double> y, Lengths length, ChannelLayout layout,
          std::vector<Split> split_of_index, Split active = Split::train)
      : X_(std::move(X)),
        y_(std::move(y)),
        length_(std::move(length)),
        layout_(std::move(layout)),
        split_of_index_(std::move(split_of_index)),
        active_(active) {
    validate();
    for (auto split : kAllSplits) {
      auto& part = splits_[static_cast<std::size_t>(split)];
      for (std::size_t i = 0; i < split_of_index_.size(); ++i)
        if (split_of_index_[i] == split) part.indices.push_back(i);
      part.X = select_sequences(X_, part.indices);
      part.y = select_rows(y_, part.indices);
      for (auto i : part.indices) part.length.push_back(length_[i]);
    }
  }

  // Tensors of the active split.
  const PaddedTensor3& X() const { return X(active_); }
  const Tensor<double>& y() const { return y(active_); }
  const Lengths& length() const { return length(active_); }

  const PaddedTensor3& X(Split s) const { return part(s).X; }
  const Tensor<double>& y(Split s) const { return part(s).y; }
  const Lengths& length(Split s) const { return part(s).length; }
  const std::vector<std::size_t>& indices(Split s) const { return part(s).indices; }

  const PaddedTensor3& X_train() const { return X(Split::train); }
  const PaddedTensor3& X_val() const { return X(Split::val); }
  const PaddedTensor3& X_test() const { return X(Split::test); }
  const Tensor<double>& y_train() const { return y(Split::train); }
  const Tensor<double>& y_val() const { return y(Split::val); }
  const Tensor<double>& y_test() const { return y(Split::test); }
  const Lengths& length_train() const { return length(Split::train); }
  const Lengths& length_val() const { return length(Split::val); }
  const Lengths& length_test() const { return length(Split::test); }

  // Whole master pool in post-pipeline form.
  const PaddedTensor3& X_all() const { return X_; }
  const Tensor<double>& y_all() const { return y_; }
  const Lengths& length_all() const { return length_; }

  const ChannelLayout& layout() const { return layout_; }
  const std::vector<Split>& split_of_index() const { return split_of_index_; }
  Split active_split() const { return active_; }
  std::size_t size(Split s) const { return part(s).indices.size(); }

  Dataset with_active(Split s) const {
    Dataset d = *this;
    d.active_ = s;
    return d;
  }

  /// Same layout and membership with replaced tensors.
  Dataset with_tensors(PaddedTensor3 X, Tensor<double> y) const {
    Dataset d(std::move(X), std::move(y), length_, layout_, split_of_index_, active_);
    d.stats = stats;
    d.warnings = warnings;
    d.name = name;
    d.target = target;
    d.seed = seed;
    return d;
  }

  /// Statistics of the training split, master channel numbering.
  ChannelStats stats;
  std::vector<std::string> warnings;
  std::string name;
  TargetKind target = TargetKind::sequence;
  /// Seed used for simulation and splitting.
  std::uint64_t seed = 0;

 private:
  const SplitData& part(Split s) const { return splits_[static_cast<std::size_t>(s)]; }

  void validate() const {
    const std::size_t n = X_.n();
    if (y_.rank() == 0 || y_.dim(0) != n) throw ConfigError("dataset: y row count does not match X");
    if (length_.size() != n) throw ConfigError("dataset: length size does not match X");
    if (split_of_index_.size() != n) throw ConfigError("dataset: split membership size does not match X");
    if (layout_.size() != X_.c()) throw ConfigError("dataset: layout size does not match channel count");
    for (std::size_t i = 0; i < n; ++i) {
      if (length_[i] < 1 || static_cast<std::size_t>(length_[i]) > X_.s())
        throw ConfigError("dataset: length out of range for sequence " + std::to_string(i));
      for (std::size_t t = static_cast<std::size_t>(length_[i]); t < X_.s(); ++t)
        for (double v : X_.step(i, t))
          if (!std::isnan(v)) throw ConfigError("dataset: non-NaN padding in sequence " + std::to_string(i));
    }
  }

  PaddedTensor3 X_;
  Tensor<double> y_;
  Lengths length_;
  ChannelLayout layout_;
  std::vector<Split> split_of_index_;
  Split active_ = Split::train;
  std::array<SplitData, 3> splits_;
};

/// (x - mean) / std on data channels only, with training statistics in master
/// numbering. Time, mask and delta channels and all NaNs are left alone.
inline Dataset standardise(const Dataset& dataset, const ChannelStats& stats) {
  PaddedTensor3 X = dataset.X_all();
  const auto& layout = dataset.layout();
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].kind != ChannelKind::data) continue;
    const ChannelStat& st = stats[layout[k].source];
    if (st.count == 0) continue;
    const double mu = st.mean, sigma = st.scale();
    for (std::size_t i = 0; i < X.n(); ++i)
      for (std::size_t t = 0; t < X.s(); ++t) {
        double& v = X(i, t, k);
        if (!std::isnan(v)) v = (v - mu) / sigma;
      }
  }
  return dataset.with_tensors(std::move(X), dataset.y_all());
}

}  // namespace tsprep
