#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include "klnorm/certificate.hpp"
#include "klnorm/compare.hpp"
#include "klnorm/heap.hpp"
#include "klnorm/objective.hpp"
#include "klnorm/select.hpp"
#include "klnorm/tickets.hpp"
#include "klnorm/types.hpp"
#include "klnorm/window.hpp"

namespace klnorm {

namespace detail {

template <ComparatorMode Mode>
using mode_constant = std::integral_constant<ComparatorMode, Mode>;

template <class F>
decltype(auto) with_mode(ComparatorMode mode, F&& f) {
  if (mode == ComparatorMode::exact) return f(mode_constant<ComparatorMode::exact>{});
  return f(mode_constant<ComparatorMode::float64>{});
}

inline std::vector<u64> packed_counts(const Histogram& h) {
  std::vector<u64> c;
  c.reserve(h.support_size());
  for (std::size_t a : h.support()) c.push_back(h.count(a));
  return c;
}

inline FreqTable unpack(const Histogram& h, const std::vector<u64>& m, u64 target) {
  FreqTable t{std::vector<u64>(h.alphabet_size(), 0), target};
  for (std::size_t i = 0; i < m.size(); ++i) t.freqs[h.support()[i]] = m[i];
  return t;
}

/// Per-symbol frequencies with cached increment/decrement tickets, indexed by
/// support position. Ticket ties resolve to the lower position (= lower
/// symbol index).
template <ComparatorMode Mode>
struct Marginals {
  std::vector<u64> c;
  std::vector<u64> m;
  std::vector<double> up;    // c ln((m+1)/m)
  std::vector<double> down;  // c ln(m/(m-1)), +inf when m < 2

  Marginals(std::vector<u64> counts, std::vector<u64> freqs)
      : c(std::move(counts)), m(std::move(freqs)), up(c.size()), down(c.size()) {
    for (std::uint32_t i = 0; i < c.size(); ++i) refresh(i);
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(c.size()); }

  void refresh(std::uint32_t i) {
    up[i] = increment_value(c[i], m[i]);
    down[i] = m[i] >= 2 ? decrement_value(c[i], m[i]) : std::numeric_limits<double>::infinity();
  }

  std::strong_ordering order(double va, std::uint32_t a, u64 ka, double vb, std::uint32_t b, u64 kb) const {
    if constexpr (Mode == ComparatorMode::float64)
      return float_order(va, vb);
    else
      return compare_ticket_values_exact(va, c[a], ka, vb, c[b], kb);
  }

  bool up_before(std::uint32_t a, std::uint32_t b) const {
    const auto o = order(up[a], a, m[a], up[b], b, m[b]);
    return o > 0 || (o == 0 && a < b);
  }

  bool down_before(std::uint32_t a, std::uint32_t b) const {
    const auto o = order(down[a], a, m[a] - 1, down[b], b, m[b] - 1);
    return o < 0 || (o == 0 && a < b);
  }

  /// Moving a unit from a to b strictly increases the objective.
  bool improving(std::uint32_t a, std::uint32_t b) const {
    return order(down[a], a, m[a] - 1, up[b], b, m[b]) < 0;
  }

  auto up_order() const {
    return [this](std::uint32_t a, std::uint32_t b) { return up_before(a, b); };
  }
  auto down_order() const {
    return [this](std::uint32_t a, std::uint32_t b) { return down_before(a, b); };
  }
};

inline void bump(OpCounts* ops, const char* key, u64 n) {
  if (ops) (*ops)[key] += n;
}

/// Bidirectional exchange loop: moves a unit from the cheapest decrement to
/// the best increment while that strictly improves the objective. Heaps are
/// built only when a global scan finds an improving pair.
template <ComparatorMode Mode>
u64 exchange_repair(Marginals<Mode>& st) {
  const std::uint32_t n = st.size();
  std::uint32_t best_up = 0;
  std::optional<std::uint32_t> best_down;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (i > 0 && st.up_before(i, best_up)) best_up = i;
    if (st.m[i] >= 2 && (!best_down || st.down_before(i, *best_down))) best_down = i;
  }
  if (!best_down || *best_down == best_up || !st.improving(*best_down, best_up)) return 0;

  IndexedHeap up_heap(n, st.up_order());
  IndexedHeap down_heap(n, st.down_order());
  std::vector<std::uint32_t> ids;
  ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) ids.push_back(i);
  up_heap.assign(ids);
  ids.clear();
  for (std::uint32_t i = 0; i < n; ++i)
    if (st.m[i] >= 2) ids.push_back(i);
  down_heap.assign(ids);

  u64 exchanges = 0;
  while (!down_heap.empty()) {
    const std::uint32_t a = down_heap.top();
    const std::uint32_t b = up_heap.top();
    if (a == b || !st.improving(a, b)) break;
    --st.m[a];
    ++st.m[b];
    st.refresh(a);
    st.refresh(b);
    up_heap.update(a);
    up_heap.update(b);
    if (st.m[a] < 2)
      down_heap.erase(a);
    else
      down_heap.update(a);
    if (down_heap.contains(b))
      down_heap.update(b);
    else
      down_heap.push(b);
    ++exchanges;
  }
  return exchanges;
}

/// Geometric-mean rounding of s = Mc/N: d = floor(s), keep d when
/// (Mc)^2 <= N^2 d(d+1), else d + 1; at least 1. Exact in 128 bits while
/// M * N < 2^63.
inline std::vector<u64> geometric_init(const std::vector<u64>& counts, u64 total, u64 target) {
  if (static_cast<u128>(target) * total >= (u128{1} << 63))
    fail(ErrorCode::overflow, "target * total must stay below 2^63 for geometric rounding");
  std::vector<u64> m(counts.size());
  const u128 n = total;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const u128 scaled = static_cast<u128>(target) * counts[i];
    const u128 d = scaled / n;
    const bool keep = scaled * scaled <= n * n * d * (d + 1);
    m[i] = std::max<u64>(1, static_cast<u64>(keep ? d : d + 1));
  }
  return m;
}

inline NormReport make_report(const Histogram& h, FreqTable table, ComparatorMode mode, OpCounts ops) {
  NormReport r;
  r.phi = phi(h, table);
  r.kl = kl_divergence(h, table);
  r.certificate_ok = is_support_feasible(h, table) && is_marginal_optimal(h, table, mode).ok;
  r.table = std::move(table);
  r.op_counts = std::move(ops);
  return r;
}

inline bool trivial_target(const Histogram& h, u64 target) { return target == h.support_size(); }

inline FreqTable all_ones(const Histogram& h, u64 target) {
  return unpack(h, std::vector<u64>(h.support_size(), 1), target);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bottom-up greedy: start at m = 1 on the support and hand out the M - r
// remaining units one at a time to the largest increment ticket.
// ---------------------------------------------------------------------------

inline FreqTable bottom_up_table(const Histogram& h, u64 target, ComparatorMode mode = ComparatorMode::float64,
                                 OpCounts* ops = nullptr) {
  require_target(h, target);
  if (detail::trivial_target(h, target)) return detail::all_ones(h, target);
  return detail::with_mode(mode, [&](auto tag) {
    constexpr ComparatorMode Mode = decltype(tag)::value;
    detail::Marginals<Mode> st(detail::packed_counts(h), std::vector<u64>(h.support_size(), 1));
    std::vector<std::uint32_t> ids(st.size());
    for (std::uint32_t i = 0; i < st.size(); ++i) ids[i] = i;
    TopHeap heap(std::move(ids), st.up_order());
    const u64 rounds = target - h.support_size();
    for (u64 k = 0; k < rounds; ++k) {
      const std::uint32_t a = heap.top();
      ++st.m[a];
      st.up[a] = increment_value(st.c[a], st.m[a]);
      heap.top_changed();
    }
    detail::bump(ops, "heap_inserts", st.size());
    detail::bump(ops, "heap_rounds", rounds);
    return detail::unpack(h, st.m, target);
  });
}

inline NormReport bottom_up(const Histogram& h, u64 target, ComparatorMode mode = ComparatorMode::float64) {
  OpCounts ops;
  FreqTable t = bottom_up_table(h, target, mode, &ops);
  return detail::make_report(h, std::move(t), mode, std::move(ops));
}

// ---------------------------------------------------------------------------
// Geometric-mean initialization, one-direction feasibility repair, then
// bidirectional exchange until the marginal-exchange condition holds.
// ---------------------------------------------------------------------------

inline FreqTable bloom_bidirectional_table(const Histogram& h, u64 target,
                                           ComparatorMode mode = ComparatorMode::float64, OpCounts* ops = nullptr) {
  require_target(h, target);
  if (detail::trivial_target(h, target)) return detail::all_ones(h, target);
  return detail::with_mode(mode, [&](auto tag) {
    constexpr ComparatorMode Mode = decltype(tag)::value;
    std::vector<u64> c = detail::packed_counts(h);
    std::vector<u64> init = detail::geometric_init(c, h.total(), target);
    detail::Marginals<Mode> st(std::move(c), std::move(init));

    u128 sum = 0;
    for (u64 m : st.m) sum += m;
    u64 phase1 = 0;
    if (sum > target) {
      std::vector<std::uint32_t> ids;
      for (std::uint32_t i = 0; i < st.size(); ++i)
        if (st.m[i] >= 2) ids.push_back(i);
      TopHeap heap(std::move(ids), st.down_order());
      for (; sum > target; --sum, ++phase1) {
        const std::uint32_t a = heap.top();
        --st.m[a];
        st.refresh(a);
        if (st.m[a] < 2)
          heap.pop_top();
        else
          heap.top_changed();
      }
    } else if (sum < target) {
      std::vector<std::uint32_t> ids(st.size());
      for (std::uint32_t i = 0; i < st.size(); ++i) ids[i] = i;
      TopHeap heap(std::move(ids), st.up_order());
      for (; sum < target; ++sum, ++phase1) {
        const std::uint32_t a = heap.top();
        ++st.m[a];
        st.refresh(a);
        heap.top_changed();
      }
    }
    const u64 exchanges = detail::exchange_repair(st);
    detail::bump(ops, "phase1_steps", phase1);
    detail::bump(ops, "phase2_exchanges", exchanges);
    return detail::unpack(h, st.m, target);
  });
}

inline NormReport bloom_bidirectional(const Histogram& h, u64 target,
                                      ComparatorMode mode = ComparatorMode::float64) {
  OpCounts ops;
  FreqTable t = bloom_bidirectional_table(h, target, mode, &ops);
  return detail::make_report(h, std::move(t), mode, std::move(ops));
}

// ---------------------------------------------------------------------------
// Linear window: start at the window's upper corner and apply the D cheapest
// decrement tickets found inside it by quickselect.
// ---------------------------------------------------------------------------

namespace detail {

struct WindowTicket {
  double value;
  std::uint32_t pos;
  u64 level;
};

template <ComparatorMode Mode>
auto cheaper_ticket(const std::vector<u64>& c) {
  return [&c](const WindowTicket& x, const WindowTicket& y) {
    std::strong_ordering o = std::strong_ordering::equal;
    if constexpr (Mode == ComparatorMode::float64)
      o = float_order(x.value, y.value);
    else
      o = compare_ticket_values_exact(x.value, c[x.pos], x.level - 1, y.value, c[y.pos], y.level - 1);
    if (o != 0) return o < 0;
    if (x.pos != y.pos) return x.pos < y.pos;
    return x.level < y.level;
  };
}

}  // namespace detail

inline FreqTable linear_window_table(const Histogram& h, u64 target, ComparatorMode mode = ComparatorMode::float64,
                                     OpCounts* ops = nullptr) {
  require_target(h, target);
  if (detail::trivial_target(h, target)) return detail::all_ones(h, target);
  const Window w = window_bounds(h, target);
  const std::vector<u64> c = detail::packed_counts(h);
  std::vector<u64> m = w.upper;

  std::vector<detail::WindowTicket> tickets;
  tickets.reserve(w.width());
  for (std::uint32_t i = 0; i < c.size(); ++i)
    for (u64 j = w.lower[i] + 1; j <= w.upper[i]; ++j)
      tickets.push_back({decrement_value(c[i], j), i, j});

  detail::with_mode(mode, [&](auto tag) {
    constexpr ComparatorMode Mode = decltype(tag)::value;
    select_smallest(std::span<detail::WindowTicket>(tickets), w.deficit, detail::cheaper_ticket<Mode>(c));
  });
  for (u64 k = 0; k < w.deficit; ++k) --m[tickets[k].pos];

  detail::bump(ops, "tickets_emitted", tickets.size());
  detail::bump(ops, "decrements_applied", w.deficit);
  return detail::unpack(h, m, target);
}

inline NormReport linear_window(const Histogram& h, u64 target, ComparatorMode mode = ComparatorMode::float64) {
  OpCounts ops;
  FreqTable t = linear_window_table(h, target, mode, &ops);
  return detail::make_report(h, std::move(t), mode, std::move(ops));
}

// ---------------------------------------------------------------------------
// Greedy min-decrement heap started from the window's upper side.
// ---------------------------------------------------------------------------

inline FreqTable smart_collet_table(const Histogram& h, u64 target, ComparatorMode mode = ComparatorMode::float64,
                                    OpCounts* ops = nullptr) {
  require_target(h, target);
  if (detail::trivial_target(h, target)) return detail::all_ones(h, target);
  const Window w = window_bounds(h, target);
  return detail::with_mode(mode, [&](auto tag) {
    constexpr ComparatorMode Mode = decltype(tag)::value;
    detail::Marginals<Mode> st(detail::packed_counts(h), w.upper);
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i = 0; i < st.size(); ++i)
      if (st.m[i] >= 2) ids.push_back(i);
    TopHeap heap(std::move(ids), st.down_order());
    for (u64 k = 0; k < w.deficit; ++k) {
      const std::uint32_t a = heap.top();
      --st.m[a];
      st.down[a] = st.m[a] >= 2 ? decrement_value(st.c[a], st.m[a]) : std::numeric_limits<double>::infinity();
      if (st.m[a] < 2)
        heap.pop_top();
      else
        heap.top_changed();
    }
    detail::bump(ops, "downgrades", w.deficit);
    return detail::unpack(h, st.m, target);
  });
}

inline NormReport smart_collet(const Histogram& h, u64 target, ComparatorMode mode = ComparatorMode::float64) {
  OpCounts ops;
  FreqTable t = smart_collet_table(h, target, mode, &ops);
  return detail::make_report(h, std::move(t), mode, std::move(ops));
}

// ---------------------------------------------------------------------------
// Lagrangian threshold: bisect a ticket cutoff theta so that about D window
// tickets fall below it, read each frequency off an approximate inverse,
// refine against the true tickets, close the residual with a small heap and
// finish with the exchange loop.
// ---------------------------------------------------------------------------

struct ThresholdConfig {
  int bisection_rounds = 18;
  int refine_steps = 8;
  /// Residual |sum(m) - M| above residual_factor * ceil(sqrt(r)) falls back
  /// to the ticket path.
  u64 residual_factor = 4;
};

namespace detail {

/// Smallest level j whose decrement ticket c ln(j/(j-1)) is below theta,
/// from c/theta + 1/2 + theta/(12c).
inline double threshold_level(u64 count, double theta) {
  const double c = static_cast<double>(count);
  return std::ceil(c / theta + 0.5 + theta / (12.0 * c));
}

inline u64 clamp_level(double x, u64 lo, u64 hi) {
  if (!(x > static_cast<double>(lo))) return lo;
  if (x >= static_cast<double>(hi)) return hi;
  return static_cast<u64>(x);
}

}  // namespace detail

inline FreqTable threshold_window_table(const Histogram& h, u64 target,
                                        ComparatorMode mode = ComparatorMode::float64, OpCounts* ops = nullptr,
                                        const ThresholdConfig& cfg = {}) {
  require_target(h, target);
  if (detail::trivial_target(h, target)) return detail::all_ones(h, target);
  const Window w = window_bounds(h, target);
  const std::vector<u64> c = detail::packed_counts(h);
  const std::uint32_t r = static_cast<std::uint32_t>(c.size());

  std::vector<std::uint32_t> active;
  for (std::uint32_t i = 0; i < r; ++i)
    if (w.upper[i] > w.lower[i]) active.push_back(i);

  std::vector<u64> m = w.upper;
  if (w.deficit == 0 || active.empty()) {
    detail::bump(ops, "bisection_rounds", 0);
    return detail::unpack(h, m, target);
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::uint32_t i : active) {
    lo = std::min(lo, decrement_value(c[i], w.upper[i]));
    hi = std::max(hi, decrement_value(c[i], w.lower[i] + 1));
  }
  const auto below = [&](double theta) {
    u64 n = 0;
    for (std::uint32_t i : active) {
      const u64 j = detail::clamp_level(detail::threshold_level(c[i], theta), w.lower[i] + 1, w.upper[i] + 1);
      n += w.upper[i] + 1 - j;
    }
    return n;
  };
  for (int k = 0; k < cfg.bisection_rounds; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid) < w.deficit)
      lo = mid;
    else
      hi = mid;
  }
  const double theta = hi;

  u64 refine = 0;
  for (std::uint32_t i : active) {
    u64 mi = detail::clamp_level(detail::threshold_level(c[i], theta), w.lower[i] + 1, w.upper[i] + 1) - 1;
    for (int s = 0; s < cfg.refine_steps; ++s, ++refine) {
      if (mi < w.upper[i] && decrement_value(c[i], mi + 1) >= theta)
        ++mi;
      else if (mi > w.lower[i] && decrement_value(c[i], mi) < theta)
        --mi;
      else
        break;
    }
    m[i] = mi;
  }

  i128 residual = -static_cast<i128>(target);
  for (u64 x : m) residual += x;
  const u64 abs_residual = static_cast<u64>(residual < 0 ? -residual : residual);
  const u64 limit = cfg.residual_factor * static_cast<u64>(std::ceil(std::sqrt(static_cast<double>(r))));

  detail::bump(ops, "bisection_rounds", static_cast<u64>(cfg.bisection_rounds));
  detail::bump(ops, "refine_steps", refine);
  detail::bump(ops, "residual", abs_residual);
  if (abs_residual > limit) {
    detail::bump(ops, "fallback", 1);
    return linear_window_table(h, target, mode, ops);
  }
  detail::bump(ops, "fallback", 0);

  return detail::with_mode(mode, [&](auto tag) {
    constexpr ComparatorMode Mode = decltype(tag)::value;
    detail::Marginals<Mode> st(c, m);
    if (residual > 0) {
      IndexedHeap heap(r, st.down_order());
      std::vector<std::uint32_t> ids;
      for (std::uint32_t i = 0; i < r; ++i)
        if (st.m[i] > w.lower[i]) ids.push_back(i);
      heap.assign(ids);
      for (i128 k = 0; k < residual; ++k) {
        const std::uint32_t a = heap.top();
        --st.m[a];
        st.refresh(a);
        if (st.m[a] <= w.lower[a])
          heap.erase(a);
        else
          heap.update(a);
      }
    } else if (residual < 0) {
      IndexedHeap heap(r, st.up_order());
      std::vector<std::uint32_t> ids;
      for (std::uint32_t i = 0; i < r; ++i)
        if (st.m[i] < w.upper[i]) ids.push_back(i);
      heap.assign(ids);
      for (i128 k = 0; k < -residual; ++k) {
        const std::uint32_t a = heap.top();
        ++st.m[a];
        st.refresh(a);
        if (st.m[a] >= w.upper[a])
          heap.erase(a);
        else
          heap.update(a);
      }
    }
    detail::bump(ops, "phase2_exchanges", detail::exchange_repair(st));
    return detail::unpack(h, st.m, target);
  });
}

inline NormReport threshold_window(const Histogram& h, u64 target, ComparatorMode mode = ComparatorMode::float64,
                                   const ThresholdConfig& cfg = {}) {
  OpCounts ops;
  FreqTable t = threshold_window_table(h, target, mode, &ops, cfg);
  return detail::make_report(h, std::move(t), mode, std::move(ops));
}

}  // namespace klnorm
