#pragma once

#include <cmath>
#include <limits>
#include <numeric>

#include "klnorm/types.hpp"

namespace klnorm {

namespace detail {

inline void check_alignment(const Histogram& h, const FreqTable& t) {
  if (t.freqs.size() != h.alphabet_size())
    fail(ErrorCode::invalid_argument, "frequency table does not match histogram alphabet");
  u128 sum = 0;
  for (u64 m : t.freqs) sum += m;
  if (sum != t.target) fail(ErrorCode::invalid_argument, "frequencies do not sum to target");
}

}  // namespace detail

/// D(p || m/M) in nats per source symbol; +inf when a support symbol has m = 0.
///
/// Each term is evaluated as p * log1p((cM - Nm) / (Nm)) with the numerator
/// formed exactly in 128-bit integers, so near-proportional tables keep full
/// relative precision.
inline double kl_divergence(const Histogram& h, const FreqTable& t) {
  detail::check_alignment(h, t);
  const u64 n = h.total();
  const double nd = static_cast<double>(n);
  double kl = 0.0;
  for (std::size_t a : h.support()) {
    const u64 c = h.count(a);
    const u64 m = t.freqs[a];
    if (m == 0) return std::numeric_limits<double>::infinity();
    const u128 num = static_cast<u128>(c) * t.target;
    const u128 den = static_cast<u128>(n) * m;
    const double diff = num >= den ? static_cast<double>(num - den) : -static_cast<double>(den - num);
    const double x = diff / static_cast<double>(den);
    kl += (static_cast<double>(c) / nd) * std::log1p(x);
  }
  return kl;
}

/// sum over the support of c_a ln m_a; -inf when a support symbol has m = 0.
inline double phi(const Histogram& h, const FreqTable& t) {
  if (t.freqs.size() != h.alphabet_size())
    fail(ErrorCode::invalid_argument, "frequency table does not match histogram alphabet");
  double acc = 0.0;
  for (std::size_t a : h.support()) {
    const u64 m = t.freqs[a];
    if (m == 0) return -std::numeric_limits<double>::infinity();
    acc += static_cast<double>(h.count(a)) * std::log(static_cast<double>(m));
  }
  return acc;
}

/// Feasible for the support-reduced problem: aligned, sums to target,
/// m >= 1 on the support and 0 off it.
inline bool is_support_feasible(const Histogram& h, const FreqTable& t) {
  if (t.freqs.size() != h.alphabet_size()) return false;
  u128 sum = 0;
  for (std::size_t a = 0; a < t.freqs.size(); ++a) {
    const bool on = h.count(a) > 0;
    if (on && t.freqs[a] == 0) return false;
    if (!on && t.freqs[a] != 0) return false;
    sum += t.freqs[a];
  }
  return sum == t.target;
}

}  // namespace klnorm
