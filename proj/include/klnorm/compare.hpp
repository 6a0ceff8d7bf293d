#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <numeric>

#include "klnorm/tickets.hpp"
#include "klnorm/types.hpp"

namespace klnorm {

/// Limits of the arbitrary-precision path. Operand bit-length grows like
/// c * log2(j), so these keep a single comparison in the tens of megabits.
struct ExactBudget {
  u64 max_count = 1'000'000;
  u64 max_level = u64{1} << 20;
};

/// Relative error bound on a computed ticket value (log1p_recip is within a
/// few ulps, the product with c adds half an ulp). Gaps wider than this are
/// decided in floating point even in exact mode.
inline constexpr double kTicketRelError = 1e-13;

namespace detail {

inline std::strong_ordering to_ordering(int sign) {
  if (sign < 0) return std::strong_ordering::less;
  if (sign > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

inline std::strong_ordering float_order(double a, double b) {
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

/// Orders ca*ln((ka+1)/ka) against cb*ln((kb+1)/kb) by comparing
/// (ka+1)^ca * kb^cb with ka^ca * (kb+1)^cb. Common factors of the
/// exponents are divided out first.
inline std::strong_ordering power_compare(u64 ca, u64 ka, u64 cb, u64 kb) {
  const u64 g = std::gcd(ca, cb);
  ca /= g;
  cb /= g;
  mpz_class lhs, rhs, t;
  mpz_ui_pow_ui(lhs.get_mpz_t(), static_cast<unsigned long>(ka + 1), static_cast<unsigned long>(ca));
  mpz_ui_pow_ui(t.get_mpz_t(), static_cast<unsigned long>(kb), static_cast<unsigned long>(cb));
  lhs *= t;
  mpz_ui_pow_ui(rhs.get_mpz_t(), static_cast<unsigned long>(ka), static_cast<unsigned long>(ca));
  mpz_ui_pow_ui(t.get_mpz_t(), static_cast<unsigned long>(kb + 1), static_cast<unsigned long>(cb));
  rhs *= t;
  return to_ordering(cmp(lhs, rhs));
}

}  // namespace detail

/// True ordering of two ticket values given in increment form
/// (value = c * ln(1 + 1/k)). Structural shortcuts and a float interval test
/// settle almost every call; near-ties go to big-integer powers.
inline std::strong_ordering compare_ticket_values_exact(double va, u64 ca, u64 ka, double vb, u64 cb,
                                                        u64 kb, const ExactBudget& budget = {}) {
  if (ka == kb) return detail::to_ordering(ca < cb ? -1 : (ca > cb ? 1 : 0));
  if (ca == cb) return detail::to_ordering(ka > kb ? -1 : 1);
  const double gap = std::abs(va - vb);
  if (gap > kTicketRelError * std::max(std::abs(va), std::abs(vb))) return detail::float_order(va, vb);
  if (ca > budget.max_count || cb > budget.max_count || ka > budget.max_level ||
      kb > budget.max_level)
    fail(ErrorCode::budget_exceeded, "exact comparison out of budget");
  return detail::power_compare(ca, ka, cb, kb);
}

inline std::strong_ordering compare_ticket_values(ComparatorMode mode, double va, u64 ca, u64 ka,
                                                  double vb, u64 cb, u64 kb) {
  if (mode == ComparatorMode::float64) return detail::float_order(va, vb);
  return compare_ticket_values_exact(va, ca, ka, vb, cb, kb);
}

inline std::strong_ordering compare_tickets_exact(const Ticket& t1, const Ticket& t2,
                                                  const ExactBudget& budget = {}) {
  return compare_ticket_values_exact(t1.value, t1.count, t1.base(), t2.value, t2.count, t2.base(),
                                     budget);
}

inline std::strong_ordering compare_tickets(const Ticket& t1, const Ticket& t2, ComparatorMode mode) {
  if (mode == ComparatorMode::float64) return detail::float_order(t1.value, t2.value);
  return compare_tickets_exact(t1, t2);
}

}  // namespace klnorm
