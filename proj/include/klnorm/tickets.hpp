#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "klnorm/types.hpp"

namespace klnorm {

namespace detail {

inline constexpr std::size_t kLogTableSize = 4096;

inline const std::array<double, kLogTableSize>& log1p_recip_table() {
  static const std::array<double, kLogTableSize> table = [] {
    std::array<double, kLogTableSize> t{};
    t[0] = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < kLogTableSize; ++j)
      t[j] = std::log1p(1.0 / static_cast<double>(j));
    return t;
  }();
  return table;
}

// Forces the table to be built during static initialization rather than on
// first use from some worker thread.
inline const bool log_table_ready = (log1p_recip_table(), true);

}  // namespace detail

/// ln(1 + 1/j) for j >= 1. Table lookup below 4096, a six-term series in 1/j
/// above (truncation error < x^7/7, far below one ulp there).
inline double log1p_recip(u64 j) {
  if (j < detail::kLogTableSize) return detail::log1p_recip_table()[j];
  const double x = 1.0 / static_cast<double>(j);
  return x * (1.0 + x * (-1.0 / 2 + x * (1.0 / 3 + x * (-1.0 / 4 + x * (1.0 / 5 - x * (1.0 / 6))))));
}

/// c * ln((j+1)/j).
inline double increment_value(u64 count, u64 level) {
  return static_cast<double>(count) * log1p_recip(level);
}

/// c * ln(j/(j-1)); identical bits to increment_value(count, level - 1).
inline double decrement_value(u64 count, u64 level) {
  return increment_value(count, level - 1);
}

inline double ticket_value(u64 count, u64 level, TicketKind kind) {
  if (count == 0) fail(ErrorCode::invalid_argument, "ticket count must be positive");
  if (kind == TicketKind::increment) {
    if (level < 1) fail(ErrorCode::invalid_argument, "increment level must be >= 1");
    return increment_value(count, level);
  }
  if (level < 2) fail(ErrorCode::invalid_argument, "decrement level must be >= 2");
  return decrement_value(count, level);
}

inline Ticket make_ticket(std::size_t symbol, u64 count, u64 level, TicketKind kind) {
  return Ticket{symbol, count, level, kind, ticket_value(count, level, kind)};
}

}  // namespace klnorm
