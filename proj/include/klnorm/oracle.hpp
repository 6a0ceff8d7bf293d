#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "klnorm/types.hpp"

namespace klnorm::oracle {

struct OracleResult {
  double best_phi = 0.0;
  std::vector<FreqTable> optima;  // every table within kOptimaTolerance of best_phi
  u64 enumerated = 0;
};

inline constexpr double kOptimaTolerance = 1e-12;
inline constexpr u64 kDefaultLimit = 10'000'000;

/// C(M-1, r-1), saturating at `cap + 1`.
inline u64 composition_count(u64 target, u64 parts, u64 cap) {
  if (parts == 0 || target < parts) return 0;
  const u64 n = target - 1;
  u64 k = parts - 1;
  if (k > n - k) k = n - k;
  u128 acc = 1;
  for (u64 i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > cap) return cap + 1;
  }
  return static_cast<u64>(acc);
}

/// Exhaustive maximization of sum c_a ln m_a over every composition of M into
/// r positive parts on the support, enumerated in lexicographic order.
inline OracleResult brute_force_optimum(const Histogram& h, u64 target, u64 limit = kDefaultLimit) {
  require_target(h, target);
  const std::size_t r = h.support_size();
  if (composition_count(target, r, limit) > limit)
    fail(ErrorCode::oracle_too_large, "instance too large for oracle");

  std::vector<double> logs(target + 1, 0.0);
  for (u64 m = 1; m <= target; ++m) logs[m] = std::log(static_cast<double>(m));
  std::vector<double> c(r);
  for (std::size_t i = 0; i < r; ++i) c[i] = static_cast<double>(h.count(h.support()[i]));

  std::vector<u64> m(r, 1);
  std::vector<std::vector<u64>> candidates;
  OracleResult out;
  out.best_phi = -std::numeric_limits<double>::infinity();

  // Sequential sum over the support so values match phi() bit for bit.
  auto visit = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += c[i] * logs[m[i]];
    ++out.enumerated;
    if (acc > out.best_phi) out.best_phi = acc;
    if (acc >= out.best_phi - kOptimaTolerance) candidates.push_back(m);
  };

  auto rec = [&](auto& self, std::size_t i, u64 remaining) -> void {
    if (i + 1 == r) {
      m[i] = remaining;
      visit();
      return;
    }
    const u64 slots_after = r - i - 1;
    for (u64 v = 1; v + slots_after <= remaining; ++v) {
      m[i] = v;
      self(self, i + 1, remaining - v);
    }
  };
  rec(rec, 0, target);

  for (const auto& cand : candidates) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += c[i] * logs[cand[i]];
    if (acc < out.best_phi - kOptimaTolerance) continue;
    FreqTable t{std::vector<u64>(h.alphabet_size(), 0), target};
    for (std::size_t i = 0; i < r; ++i) t.freqs[h.support()[i]] = cand[i];
    out.optima.push_back(std::move(t));
  }
  return out;
}

}  // namespace klnorm::oracle
