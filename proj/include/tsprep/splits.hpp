#pragma once

// Seeded stratified train/validation/test partitioning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsprep/error.hpp"
#include "tsprep/rng.hpp"
#include "tsprep/tensor_core.hpp"

namespace tsprep {

struct SplitSpec {
  double train_prop = 0.0;
  std::optional<double> val_prop;
  std::optional<std::uint64_t> seed;

  void validate() const {
    if (!(train_prop > 0.0 && train_prop <= 1.0)) throw ConfigError("train_prop must be in (0, 1]");
    if (val_prop) {
      if (!(*val_prop > 0.0 && *val_prop < 1.0)) throw ConfigError("val_prop must be in (0, 1)");
      if (!(train_prop + *val_prop < 1.0)) throw ConfigError("train_prop + val_prop must be < 1");
    } else if (!(train_prop < 1.0)) {
      throw ConfigError("train_prop must be < 1 when val_prop is not given");
    }
  }

  /// Proportions per split, in train/val/test order. Test is zero without val_prop.
  std::array<double, 3> proportions() const {
    if (val_prop) return {train_prop, *val_prop, 1.0 - train_prop - *val_prop};
    return {train_prop, 1.0 - train_prop, 0.0};
  }
};

struct SplitAssignment {
  std::vector<std::size_t> train, val, test;

  const std::vector<std::size_t>& operator[](Split s) const {
    return s == Split::train ? train : s == Split::val ? val : test;
  }

  std::vector<Split> membership(std::size_t n) const {
    std::vector<Split> out(n, Split::train);
    for (auto i : val) out.at(i) = Split::val;
    for (auto i : test) out.at(i) = Split::test;
    return out;
  }

  bool operator==(const SplitAssignment&) const = default;
};

namespace detail {

/// Largest-remainder apportionment of `n` items over `props` (summing to 1).
inline std::array<std::size_t, 3> apportion(const std::array<double, 3>& props, std::size_t n) {
  std::array<std::size_t, 3> out{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    double q = props[j] * static_cast<double>(n);
    if (std::fabs(q - std::round(q)) < 1e-9) q = std::round(q);
    out[j] = static_cast<std::size_t>(std::floor(q));
    frac[j] = q - std::floor(q);
    used += out[j];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; used < n; ++r, ++used) ++out[order[r % 3]];
  return out;
}

}  // namespace detail

/// Stratified split of sequences labelled by `strata`.
///
/// Global split sizes are the largest-remainder apportionment of prop * n.
/// Each stratum's allocation to each split is the floor or ceiling of its
/// quota prop * n_k, chosen so rows sum to the stratum sizes and columns to
/// the global sizes. Within each stratum (ascending stratum id) the indices
/// are shuffled by the seeded generator and dealt out train, val, test.
/// Index lists are returned in ascending order.
inline SplitAssignment stratified_split(std::span<const std::int64_t> strata, const SplitSpec& spec,
                                        std::vector<std::string>* warnings = nullptr) {
  spec.validate();
  if (strata.empty()) throw ConfigError("cannot split an empty data set");
  const std::uint64_t seed = resolve_seed(spec.seed);
  const auto props = spec.proportions();
  const auto target = detail::apportion(props, strata.size());

  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
  const std::size_t K = groups.size();

  std::vector<std::array<std::size_t, 3>> alloc(K);
  std::vector<std::array<bool, 3>> eligible(K), used(K);
  std::vector<std::size_t> row_left(K);
  std::array<std::size_t, 3> col_left = target;
  struct Cell {
    double frac;
    std::size_t k, j;
  };
  std::vector<Cell> cells;
  {
    std::size_t k = 0;
    for (const auto& [id, members] : groups) {
      std::size_t floors = 0;
      for (std::size_t j = 0; j < 3; ++j) {
        double q = props[j] * static_cast<double>(members.size());
        if (std::fabs(q - std::round(q)) < 1e-9) q = std::round(q);
        alloc[k][j] = static_cast<std::size_t>(std::floor(q));
        const double frac = q - std::floor(q);
        eligible[k][j] = frac > 0.0;
        used[k][j] = false;
        if (frac > 0.0) cells.push_back({frac, k, j});
        floors += alloc[k][j];
        col_left[j] -= alloc[k][j];
      }
      row_left[k] = members.size() - floors;
      ++k;
    }
  }

  // Greedy by largest remainder, then complete with augmenting paths.
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.frac > b.frac; });
  for (const auto& c : cells)
    if (row_left[c.k] > 0 && col_left[c.j] > 0) {
      used[c.k][c.j] = true;
      --row_left[c.k];
      --col_left[c.j];
    }
  for (std::size_t start = 0; start < K; ++start) {
    while (row_left[start] > 0) {
      // BFS over rows; parent links let us flip the alternating path.
      std::vector<std::ptrdiff_t> row_parent(K, -2), col_parent(3, -1);
      std::deque<std::size_t> queue{start};
      row_parent[start] = -1;
      std::ptrdiff_t found = -1;
      while (!queue.empty() && found < 0) {
        const std::size_t k = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < 3 && found < 0; ++j) {
          if (!eligible[k][j] || used[k][j] || col_parent[j] >= 0) continue;
          col_parent[j] = static_cast<std::ptrdiff_t>(k);
          if (col_left[j] > 0) {
            found = static_cast<std::ptrdiff_t>(j);
            break;
          }
          for (std::size_t k2 = 0; k2 < K; ++k2)
            if (used[k2][j] && row_parent[k2] == -2) {
              row_parent[k2] = static_cast<std::ptrdiff_t>(j);
              queue.push_back(k2);
            }
        }
      }
      if (found < 0) throw Error("stratified_split: no consistent per-stratum allocation");
      --col_left[static_cast<std::size_t>(found)];
      --row_left[start];
      auto j = static_cast<std::size_t>(found);
      for (;;) {
        const auto k = static_cast<std::size_t>(col_parent[j]);
        used[k][j] = true;
        if (row_parent[k] < 0) break;
        const auto jprev = static_cast<std::size_t>(row_parent[k]);
        used[k][jprev] = false;
        j = jprev;
      }
    }
  }

  SplitAssignment out;
  std::vector<std::size_t>* parts[3] = {&out.train, &out.val, &out.test};
  Rng rng = Rng::substream(seed, "stratified_split");
  std::size_t k = 0;
  for (auto& [id, members] : groups) {
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t pos = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t count = alloc[k][j] + (used[k][j] ? 1 : 0);
      if (count == 0 && props[j] > 0.0 && warnings)
        warnings->push_back("stratum " + std::to_string(id) + " has no sequences in the " +
                            std::string(to_string(kAllSplits[j])) + " split");
      parts[j]->insert(parts[j]->end(), members.begin() + pos, members.begin() + pos + count);
      pos += count;
    }
    ++k;
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

}  // namespace tsprep
