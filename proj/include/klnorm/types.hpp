#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace klnorm {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i128 = __int128;

enum class ErrorCode {
  empty_histogram,
  overflow,
  no_finite_solution,
  invalid_argument,
  infeasible_table,
  budget_exceeded,
  oracle_too_large,
  fallback_infeasible,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// Empirical counts over an alphabet. Zero slots are kept so that output
/// tables align positionally with the input.
class Histogram {
 public:
  const std::vector<u64>& counts() const noexcept { return counts_; }
  u64 count(std::size_t a) const { return counts_[a]; }
  u64 total() const noexcept { return total_; }
  /// Indices with positive count, ascending.
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  std::size_t support_size() const noexcept { return support_.size(); }
  std::size_t alphabet_size() const noexcept { return counts_.size(); }

  friend Histogram build_histogram(std::span<const u64> counts);

 private:
  std::vector<u64> counts_;
  u64 total_ = 0;
  std::vector<std::size_t> support_;
};

inline Histogram build_histogram(std::span<const u64> counts) {
  Histogram h;
  h.counts_.assign(counts.begin(), counts.end());
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    if (h.total_ > std::numeric_limits<u64>::max() - counts[a])
      fail(ErrorCode::overflow, "histogram total overflows 64 bits");
    h.total_ += counts[a];
    h.support_.push_back(a);
  }
  if (h.total_ == 0) fail(ErrorCode::empty_histogram, "empty histogram");
  return h;
}

inline Histogram build_histogram(std::initializer_list<u64> counts) {
  return build_histogram(std::span<const u64>(counts.begin(), counts.size()));
}

inline Histogram build_histogram(const std::vector<u64>& counts) {
  return build_histogram(std::span<const u64>(counts));
}

struct FreqTable {
  std::vector<u64> freqs;
  u64 target = 0;

  friend bool operator==(const FreqTable&, const FreqTable&) = default;
};

enum class TicketKind { increment, decrement };

/// One unit move's marginal change in sum c_a ln m_a.
struct Ticket {
  std::size_t symbol = 0;
  u64 count = 0;
  u64 level = 1;
  TicketKind kind = TicketKind::increment;
  double value = 0.0;

  /// Level in increment form: a decrement at j is the increment at j - 1.
  u64 base() const noexcept {
    return kind == TicketKind::increment ? level : level - 1;
  }
};

enum class ComparatorMode { float64, exact };

using OpCounts = std::map<std::string, u64>;

struct NormReport {
  FreqTable table;
  double phi = 0.0;
  double kl = 0.0;
  bool certificate_ok = false;
  OpCounts op_counts;
};

inline const char* to_string(ComparatorMode mode) {
  return mode == ComparatorMode::exact ? "exact" : "float64";
}

inline void require_target(const Histogram& h, u64 target) {
  if (target < h.support_size())
    fail(ErrorCode::no_finite_solution, "no finite-KL solution");
}

}  // namespace klnorm
