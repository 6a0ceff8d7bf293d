#pragma once

#include <optional>

#include "klnorm/compare.hpp"
#include "klnorm/objective.hpp"
#include "klnorm/tickets.hpp"

namespace klnorm {

struct ExchangeWitness {
  std::size_t from = 0;  // symbol whose decrement is cheapest
  std::size_t to = 0;    // symbol whose increment is most valuable
};

struct CertificateResult {
  bool ok = false;
  std::optional<ExchangeWitness> witness;

  explicit operator bool() const noexcept { return ok; }
};

/// Marginal-exchange test: a support-feasible table maximizes sum c ln m iff
/// the cheapest decrement ticket (over m >= 2) is no cheaper than the best
/// increment ticket. Ties pick the lowest symbol index, so the witness on
/// failure is deterministic.
inline CertificateResult is_marginal_optimal(const Histogram& h, const FreqTable& t,
                                             ComparatorMode mode = ComparatorMode::float64) {
  if (!is_support_feasible(h, t)) fail(ErrorCode::infeasible_table, "table is not support-feasible");

  std::optional<std::size_t> dec;
  std::size_t inc = h.support().front();
  double dec_val = 0.0;
  double inc_val = increment_value(h.count(inc), t.freqs[inc]);

  auto order = [&](double va, std::size_t a, u64 ka, double vb, std::size_t b, u64 kb) {
    return compare_ticket_values(mode, va, h.count(a), ka, vb, h.count(b), kb);
  };

  for (std::size_t a : h.support()) {
    const u64 m = t.freqs[a];
    if (a != inc) {
      const double v = increment_value(h.count(a), m);
      if (order(v, a, m, inc_val, inc, t.freqs[inc]) > 0) {
        inc = a;
        inc_val = v;
      }
    }
    if (m >= 2) {
      const double v = decrement_value(h.count(a), m);
      if (!dec || order(v, a, m - 1, dec_val, *dec, t.freqs[*dec] - 1) < 0) {
        dec = a;
        dec_val = v;
      }
    }
  }

  CertificateResult result;
  result.ok = !dec || order(dec_val, *dec, t.freqs[*dec] - 1, inc_val, inc, t.freqs[inc]) >= 0;
  if (!result.ok) result.witness = ExchangeWitness{*dec, inc};
  return result;
}

}  // namespace klnorm
