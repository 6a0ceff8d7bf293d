#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace klnorm {

namespace detail {

template <class T, class Less>
void insertion_sort(std::span<T> v, std::size_t lo, std::size_t hi, Less& less) {
  for (std::size_t i = lo + 1; i < hi; ++i) {
    T x = std::move(v[i]);
    std::size_t j = i;
    for (; j > lo && less(x, v[j - 1]); --j) v[j] = std::move(v[j - 1]);
    v[j] = std::move(x);
  }
}

}  // namespace detail

/// Rearranges `v` so that its first k elements are the k smallest under
/// `less` (a strict total order), in unspecified order. Quickselect with
/// median-of-3 pivots and a branch-free Lomuto partition; expected O(n).
template <class T, class Less>
void select_smallest(std::span<T> v, std::size_t k, Less less) {
  if (k == 0 || k >= v.size()) return;
  std::size_t lo = 0;
  std::size_t hi = v.size();
  while (hi - lo > 16) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t last = hi - 1;
    if (less(v[mid], v[lo])) std::swap(v[mid], v[lo]);
    if (less(v[last], v[mid])) {
      std::swap(v[last], v[mid]);
      if (less(v[mid], v[lo])) std::swap(v[mid], v[lo]);
    }
    std::swap(v[mid], v[last]);
    const T pivot = v[last];

    std::size_t store = lo;
    for (std::size_t i = lo; i < last; ++i) {
      T x = std::move(v[i]);
      const bool smaller = less(x, pivot);
      v[i] = std::move(v[store]);
      v[store] = std::move(x);
      store += smaller;
    }
    std::swap(v[store], v[last]);

    if (store == k) return;
    if (k < store)
      hi = store;
    else
      lo = store + 1;
  }
  detail::insertion_sort(v, lo, hi, less);
}

}  // namespace klnorm
