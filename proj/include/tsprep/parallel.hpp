#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace tsprep {

/// Applies `fn` to every item on up to `threads` workers. Results keep input
/// order; if any call throws, the exception of the lowest index is rethrown.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, unsigned threads, Fn fn) {
  using Out = decltype(fn(items.front()));
  std::vector<std::optional<Out>> results(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < items.size();) {
      try {
        results[k].emplace(fn(items[k]));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(items.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Out> out;
  out.reserve(items.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace tsprep
