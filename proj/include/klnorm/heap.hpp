#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace klnorm {

// Binary heaps over dense ids 0..n-1 whose keys live outside the heap.
// `Before(a, b)` is true when a belongs closer to the top than b; callers
// supply a strict total order (value, then symbol) so results are
// deterministic.

/// Indexed binary heap with positional lookup for arbitrary key changes.
template <class Before>
class IndexedHeap {
 public:
  static constexpr std::uint32_t npos = UINT32_MAX;

  IndexedHeap(std::size_t capacity, Before before) : pos_(capacity, npos), before_(std::move(before)) {
    heap_.reserve(capacity);
  }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  bool contains(std::uint32_t id) const { return pos_[id] != npos; }
  std::uint32_t top() const {
    assert(!heap_.empty());
    return heap_.front();
  }

  /// Builds the heap from scratch in linear time.
  void assign(const std::vector<std::uint32_t>& ids) {
    for (std::uint32_t id : heap_) pos_[id] = npos;
    heap_ = ids;
    for (std::size_t i = 0; i < heap_.size(); ++i) pos_[heap_[i]] = static_cast<std::uint32_t>(i);
    for (std::size_t i = heap_.size() / 2; i-- > 0;) sift_down(i);
  }

  void push(std::uint32_t id) {
    assert(!contains(id));
    pos_[id] = static_cast<std::uint32_t>(heap_.size());
    heap_.push_back(id);
    sift_up(heap_.size() - 1);
  }

  std::uint32_t pop() {
    const std::uint32_t id = top();
    erase(id);
    return id;
  }

  void erase(std::uint32_t id) {
    const std::size_t i = pos_[id];
    assert(i != npos);
    const std::uint32_t last = heap_.back();
    heap_.pop_back();
    pos_[id] = npos;
    if (i == heap_.size()) return;
    heap_[i] = last;
    pos_[last] = static_cast<std::uint32_t>(i);
    update_at(i);
  }

  /// Restores order after the key of `id` changed in either direction.
  void update(std::uint32_t id) { update_at(pos_[id]); }

 private:
  void update_at(std::size_t i) {
    if (i > 0 && before_(heap_[i], heap_[(i - 1) / 2]))
      sift_up(i);
    else
      sift_down(i);
  }

  void place(std::size_t i, std::uint32_t id) {
    heap_[i] = id;
    pos_[id] = static_cast<std::uint32_t>(i);
  }

  void sift_up(std::size_t i) {
    const std::uint32_t id = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!before_(id, heap_[parent])) break;
      place(i, heap_[parent]);
      i = parent;
    }
    place(i, id);
  }

  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    const std::uint32_t id = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && before_(heap_[child + 1], heap_[child])) ++child;
      if (!before_(heap_[child], id)) break;
      place(i, heap_[child]);
      i = child;
    }
    place(i, id);
  }

  std::vector<std::uint32_t> heap_;
  std::vector<std::uint32_t> pos_;
  Before before_;
};

/// Plain binary heap that only ever inspects, re-keys, or drops its top.
template <class Before>
class TopHeap {
 public:
  TopHeap(std::vector<std::uint32_t> ids, Before before) : heap_(std::move(ids)), before_(std::move(before)) {
    for (std::size_t i = heap_.size() / 2; i-- > 0;) sift_down(i);
  }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  std::uint32_t top() const {
    assert(!heap_.empty());
    return heap_.front();
  }

  /// Call after mutating the top's key in place.
  void top_changed() { sift_down(0); }

  void pop_top() {
    heap_.front() = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) sift_down(0);
  }

 private:
  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    const std::uint32_t id = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && before_(heap_[child + 1], heap_[child])) ++child;
      if (!before_(heap_[child], id)) break;
      heap_[i] = heap_[child];
      i = child;
    }
    heap_[i] = id;
  }

  std::vector<std::uint32_t> heap_;
  Before before_;
};

}  // namespace klnorm
