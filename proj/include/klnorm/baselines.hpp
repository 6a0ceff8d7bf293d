#pragma once

#include <array>
#include <bit>
#include <vector>

#include "klnorm/exact.hpp"

// Re-implementations of deployed normalizers, kept faithful to their
// documented behavior (including the ways they miss the KL optimum) so they
// can be scored against the exact algorithms. None of them consults the
// exact comparator.

namespace klnorm::baseline {

struct GiesenResult {
  NormReport report;
  FreqTable pre_fixup;  // straight cumulative differences; may hold zeros
};

struct FseResult {
  NormReport report;
  bool fallback = false;  // fast pass handed over to the two-threshold routine
};

namespace detail {

using klnorm::detail::make_report;
using klnorm::detail::packed_counts;
using klnorm::detail::unpack;

inline NormReport scored(const Histogram& h, FreqTable t, OpCounts ops) {
  return make_report(h, std::move(t), ComparatorMode::float64, std::move(ops));
}

/// Lowest index among the largest entries.
inline std::size_t argmax(const std::vector<u64>& m) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m[i] > m[best]) best = i;
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cumulative rescaling: m_i = floor(M C_i / N) - floor(M C_{i-1} / N) in
// ascending symbol order, then raise on-support zeros to 1 and take the
// excess back one unit at a time from the currently largest frequency.
// ---------------------------------------------------------------------------

inline GiesenResult giesen(const Histogram& h, u64 target) {
  require_target(h, target);
  const std::vector<u64> c = detail::packed_counts(h);
  std::vector<u64> m(c.size());
  u128 cumulative = 0;
  u64 prev = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    cumulative += c[i];
    const u64 cur = static_cast<u64>(cumulative * target / h.total());
    m[i] = cur - prev;
    prev = cur;
  }
  GiesenResult out;
  out.pre_fixup = detail::unpack(h, m, target);

  u64 excess = 0;
  for (u64& x : m)
    if (x == 0) {
      x = 1;
      ++excess;
    }
  for (u64 k = 0; k < excess; ++k) --m[detail::argmax(m)];

  OpCounts ops{{"zero_fixups", excess}};
  out.report = detail::scored(h, detail::unpack(h, m, target), std::move(ops));
  return out;
}

// ---------------------------------------------------------------------------
// Geometric-mean rounding followed by a single-direction marginal heap that
// only restores the total; no exchange phase.
// ---------------------------------------------------------------------------

inline NormReport bloom_one_direction(const Histogram& h, u64 target) {
  require_target(h, target);
  using Marginals = klnorm::detail::Marginals<ComparatorMode::float64>;
  std::vector<u64> c = detail::packed_counts(h);
  std::vector<u64> init = klnorm::detail::geometric_init(c, h.total(), target);
  Marginals st(std::move(c), std::move(init));

  u128 sum = 0;
  for (u64 x : st.m) sum += x;
  u64 steps = 0;
  if (sum > target) {
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i = 0; i < st.size(); ++i)
      if (st.m[i] >= 2) ids.push_back(i);
    TopHeap heap(std::move(ids), st.down_order());
    for (; sum > target; --sum, ++steps) {
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
    for (; sum < target; ++sum, ++steps) {
      const std::uint32_t a = heap.top();
      ++st.m[a];
      st.refresh(a);
      heap.top_changed();
    }
  }
  return detail::scored(h, detail::unpack(h, st.m, target), {{"phase1_steps", steps}});
}

// ---------------------------------------------------------------------------
// Ceiling envelope U = ceil(Mc/N) (+1 on zeros), then D = sum(U) - M greedy
// downgrades of the cheapest decrement ticket.
// ---------------------------------------------------------------------------

inline NormReport collet_ceiling(const Histogram& h, u64 target) {
  require_target(h, target);
  using Marginals = klnorm::detail::Marginals<ComparatorMode::float64>;
  const std::vector<u64> c = detail::packed_counts(h);
  std::vector<u64> upper(c.size());
  u128 sum = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const u128 scaled = static_cast<u128>(target) * c[i];
    upper[i] = static_cast<u64>((scaled + h.total() - 1) / h.total());
    if (upper[i] == 0) upper[i] = 1;
    sum += upper[i];
  }
  const u64 deficit = static_cast<u64>(sum - target);

  Marginals st(c, std::move(upper));
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < st.size(); ++i)
    if (st.m[i] >= 2) ids.push_back(i);
  TopHeap heap(std::move(ids), st.down_order());
  for (u64 k = 0; k < deficit; ++k) {
    const std::uint32_t a = heap.top();
    --st.m[a];
    st.refresh(a);
    if (st.m[a] < 2)
      heap.pop_top();
    else
      heap.top_changed();
  }
  return detail::scored(h, detail::unpack(h, st.m, target), {{"downgrades", deficit}});
}

// ---------------------------------------------------------------------------
// FSE-style normalization with a 2^62 fixed-point reciprocal of N.
// ---------------------------------------------------------------------------

struct FseConfig {
  static constexpr unsigned reciprocal_shift = 62;
  unsigned table_log = 0;
  /// Round-up thresholds for estimates 0..7, as fractions scaled by 2^20.
  std::array<u64, 8> rtb{0, 472907, 504365, 521142, 549454, 700449, 749732, 830472};
  u64 low_threshold = 0;     // floor(N / M)
  u64 m2_mid_threshold = 0;  // floor(3N / 2M)
  u64 half_step = 0;         // 2^(61 - L) - 1
};

inline FseConfig make_fse_config(const Histogram& h, u64 target) {
  if (target < 2 || !std::has_single_bit(target))
    fail(ErrorCode::invalid_argument, "FSE normalization needs a power-of-two target");
  FseConfig cfg;
  cfg.table_log = static_cast<unsigned>(std::countr_zero(target));
  if (cfg.table_log > 40) fail(ErrorCode::invalid_argument, "FSE table log too large");
  if (h.total() > (u64{1} << 62)) fail(ErrorCode::overflow, "FSE normalization needs N <= 2^62");
  cfg.low_threshold = h.total() >> cfg.table_log;
  cfg.m2_mid_threshold = static_cast<u64>((static_cast<u128>(h.total()) * 3) >> (cfg.table_log + 1));
  cfg.half_step = (u64{1} << (61 - cfg.table_log)) - 1;
  return cfg;
}

/// Two-threshold fallback: counts <= floor(N/M) and counts <= floor(3N/2M)
/// both take frequency 1 and leave the residual problem; the rest are
/// assigned by cumulative rescaling seeded at the half step (round to
/// nearest). Includes the re-threshold applied when the residual scale
/// would round survivors to zero.
inline NormReport fse_normalize_m2(const Histogram& h, u64 target, const FseConfig& cfg) {
  require_target(h, target);
  const std::vector<u64> c = detail::packed_counts(h);
  const unsigned L = cfg.table_log;
  std::vector<u64> m(c.size(), 0);
  std::vector<bool> assigned(c.size(), false);
  u64 distributed = 0;
  u64 rest = h.total();
  u64 low_one = cfg.m2_mid_threshold;

  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] <= cfg.low_threshold || c[i] <= low_one) {
      m[i] = 1;
      assigned[i] = true;
      ++distributed;
      rest -= c[i];
    }
  }
  if (distributed > target) fail(ErrorCode::fallback_infeasible, "fallback infeasible");
  u64 to_distribute = target - distributed;

  if (to_distribute > 0 && rest / to_distribute > low_one) {
    low_one = static_cast<u64>((static_cast<u128>(rest) * 3) / (static_cast<u128>(to_distribute) * 2));
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!assigned[i] && c[i] <= low_one) {
        m[i] = 1;
        assigned[i] = true;
        ++distributed;
        rest -= c[i];
      }
    }
    if (distributed > target) fail(ErrorCode::fallback_infeasible, "fallback infeasible");
    to_distribute = target - distributed;
  }

  if (distributed == c.size()) {
    m[detail::argmax(c)] += to_distribute;
  } else {
    if (to_distribute == 0) fail(ErrorCode::fallback_infeasible, "fallback infeasible");
    const unsigned v = FseConfig::reciprocal_shift - L;
    const u128 mid = cfg.half_step;
    const u128 step = ((u128{1} << v) * to_distribute + mid) / rest;
    u128 acc = mid;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (assigned[i]) continue;
      const u128 end = acc + c[i] * step;
      const u64 weight = static_cast<u64>((end >> v) - (acc >> v));
      if (weight < 1) fail(ErrorCode::fallback_infeasible, "fallback infeasible");
      m[i] = weight;
      acc = end;
    }
  }

  u128 sum = 0;
  for (u64 x : m) sum += x;
  if (sum != target) fail(ErrorCode::fallback_infeasible, "fallback infeasible");
  return detail::scored(h, detail::unpack(h, m, target), {{"m2_small_symbols", distributed}});
}

inline NormReport fse_normalize_m2(const Histogram& h, u64 target) {
  return fse_normalize_m2(h, target, make_fse_config(h, target));
}

/// Fast pass: per-symbol floor estimate, fractional round-up for estimates
/// below 8, slack absorbed in bulk by the largest symbol. Hands over to
/// fse_normalize_m2 when the overshoot would take at least half of it.
inline FseResult fse_fast(const Histogram& h, u64 target, const FseConfig& cfg) {
  require_target(h, target);
  const std::vector<u64> c = detail::packed_counts(h);
  const unsigned scale = FseConfig::reciprocal_shift - cfg.table_log;
  const u64 sigma = (u64{1} << FseConfig::reciprocal_shift) / h.total();
  const u64 vstep = u64{1} << (scale - 20);

  std::vector<u64> m(c.size());
  u128 sum = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] <= cfg.low_threshold) {
      m[i] = 1;  // the codec's {1, -1} sentinel, scored as unit mass
    } else {
      const u128 scaled = static_cast<u128>(c[i]) * sigma;
      u64 proba = static_cast<u64>(scaled >> scale);
      if (proba < 8) {
        const u128 rest = scaled - (static_cast<u128>(proba) << scale);
        if (rest > static_cast<u128>(vstep) * cfg.rtb[proba]) ++proba;
      }
      m[i] = proba;
    }
    sum += m[i];
  }

  const std::size_t largest = detail::argmax(m);
  FseResult out;
  if (sum > target && sum - target >= m[largest] / 2) {
    out.fallback = true;
    out.report = fse_normalize_m2(h, target, cfg);
    out.report.op_counts["fallback"] = 1;
    return out;
  }
  m[largest] = static_cast<u64>(static_cast<i128>(m[largest]) + static_cast<i128>(target) - static_cast<i128>(sum));
  out.report = detail::scored(h, detail::unpack(h, m, target), {{"fallback", 0}});
  return out;
}

inline FseResult fse_fast(const Histogram& h, u64 target) {
  return fse_fast(h, target, make_fse_config(h, target));
}

}  // namespace klnorm::baseline
