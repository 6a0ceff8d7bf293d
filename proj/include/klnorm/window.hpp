#pragma once

#include <algorithm>
#include <vector>

#include "klnorm/types.hpp"

namespace klnorm {

/// Per-symbol bounds [lower, upper] that contain every KL optimum, indexed by
/// support position (aligned with Histogram::support()).
struct Window {
  std::vector<u64> lower;
  std::vector<u64> upper;
  u64 deficit = 0;  // sum(upper) - M

  u64 width() const {
    u64 w = 0;
    for (std::size_t i = 0; i < lower.size(); ++i) w += upper[i] - lower[i];
    return w;
  }
};

/// L_a = max(1, ceil(s_a - p_a(r-2) - 1)), U_a = floor(s_a + p_a(r-2) + 1),
/// computed from c_a(M-r+2) and c_a(M+r-2) with exact 128-bit division.
inline Window window_bounds(const Histogram& h, u64 target) {
  require_target(h, target);
  const u64 r = h.support_size();
  const u128 n = h.total();
  const u128 lo_scale = static_cast<u128>(target) - r + 2;
  const u128 hi_scale = static_cast<u128>(target) + r - 2;

  Window w;
  w.lower.reserve(r);
  w.upper.reserve(r);
  u128 sum_lower = 0;
  u128 sum_upper = 0;
  for (std::size_t a : h.support()) {
    const u128 c = h.count(a);
    const u128 x = c * lo_scale;
    const u64 lower = x <= n ? 1 : static_cast<u64>(std::max<u128>(1, (x - 1) / n));
    const u64 upper = static_cast<u64>(c * hi_scale / n + 1);
    w.lower.push_back(lower);
    w.upper.push_back(upper);
    sum_lower += lower;
    sum_upper += upper;
  }
  if (sum_lower > target || sum_upper < target)
    fail(ErrorCode::overflow, "window does not bracket the target");
  w.deficit = static_cast<u64>(sum_upper - target);
  return w;
}

}  // namespace klnorm
