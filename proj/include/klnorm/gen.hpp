#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "klnorm/types.hpp"

namespace klnorm::gen {

enum class Family { uniform, geometric, zipf, gaussian, sparse_heavy };

struct DistSpec {
  Family family = Family::uniform;
  double param = 0.0;  // p for geometric, s for zipf; unused otherwise
  u64 r = 1;
  u64 total = 1;
};

inline std::string label(const DistSpec& d) {
  std::ostringstream os;
  switch (d.family) {
    case Family::uniform: return "uniform";
    case Family::geometric: os << "geom" << d.param; return os.str();
    case Family::zipf: os << "zipf" << d.param; return os.str();
    case Family::gaussian: return "gaussian";
    case Family::sparse_heavy: return "sparse";
  }
  return "?";
}

/// Accepts uniform, geometric (geom), zipf, gaussian, sparse_heavy (sparse).
inline Family parse_family(const std::string& name) {
  if (name == "uniform") return Family::uniform;
  if (name == "geometric" || name == "geom") return Family::geometric;
  if (name == "zipf") return Family::zipf;
  if (name == "gaussian") return Family::gaussian;
  if (name == "sparse_heavy" || name == "sparse") return Family::sparse_heavy;
  fail(ErrorCode::invalid_argument, "unknown distribution '" + name + "'");
}

/// The seven families swept in the redundancy and agreement experiments;
/// r and total are left for the caller.
inline std::vector<DistSpec> sweep_families() {
  return {
      {Family::uniform, 0.0, 1, 1},   {Family::geometric, 0.7, 1, 1}, {Family::geometric, 0.95, 1, 1},
      {Family::zipf, 1.0, 1, 1},      {Family::zipf, 1.5, 1, 1},      {Family::gaussian, 0.0, 1, 1},
      {Family::sparse_heavy, 0.0, 1, 1},
  };
}

namespace detail {

inline std::vector<double> weights(const DistSpec& d) {
  std::vector<double> w(d.r);
  const double r = static_cast<double>(d.r);
  switch (d.family) {
    case Family::uniform:
      std::fill(w.begin(), w.end(), 1.0);
      break;
    case Family::geometric:
      for (u64 a = 0; a < d.r; ++a) w[a] = std::pow(d.param, static_cast<double>(a));
      break;
    case Family::zipf:
      for (u64 a = 0; a < d.r; ++a) w[a] = std::pow(static_cast<double>(a + 1), -d.param);
      break;
    case Family::gaussian: {
      const double mu = (r - 1) / 2;
      const double sigma = r / 6;
      for (u64 a = 0; a < d.r; ++a) {
        const double z = (static_cast<double>(a) - mu) / sigma;
        w[a] = std::exp(-0.5 * z * z);
      }
      break;
    }
    case Family::sparse_heavy: {
      const u64 hot = (d.r + 7) / 8;
      const u64 cold = d.r - hot;
      for (u64 a = 0; a < d.r; ++a)
        w[a] = a < hot ? (cold == 0 ? 1.0 : 0.9) / static_cast<double>(hot) : 0.1 / static_cast<double>(cold);
      break;
    }
  }
  return w;
}

}  // namespace detail

/// Floors real weights to integer counts with every count >= 1 and the total
/// exactly N. Symbols whose share would floor below 1 are pinned at 1 first
/// and the remaining weights rescaled to N minus the pinned count (repeated
/// until stable); the floor residual goes to the first symbol.
inline std::vector<u64> generate_counts(const DistSpec& d) {
  if (d.r == 0) fail(ErrorCode::invalid_argument, "support size must be positive");
  if (d.total < d.r) fail(ErrorCode::invalid_argument, "N < r: cannot give every symbol a positive count");
  if (d.family == Family::geometric && !(d.param > 0.0 && d.param < 1.0))
    fail(ErrorCode::invalid_argument, "geometric p must lie in (0, 1)");
  if (d.family == Family::zipf && !(d.param > 0.0)) fail(ErrorCode::invalid_argument, "zipf s must be positive");

  const std::vector<double> w = detail::weights(d);
  std::vector<bool> pinned(d.r, false);
  u64 pinned_count = 0;
  for (bool changed = true; changed;) {
    changed = false;
    double free_weight = 0.0;
    for (u64 a = 0; a < d.r; ++a)
      if (!pinned[a]) free_weight += w[a];
    const double budget = static_cast<double>(d.total - pinned_count);
    for (u64 a = 0; a < d.r; ++a) {
      if (pinned[a]) continue;
      if (free_weight <= 0.0 || std::floor(budget * w[a] / free_weight) < 1.0) {
        pinned[a] = true;
        ++pinned_count;
        changed = true;
      }
    }
  }

  double free_weight = 0.0;
  for (u64 a = 0; a < d.r; ++a)
    if (!pinned[a]) free_weight += w[a];
  const double budget = static_cast<double>(d.total - pinned_count);
  std::vector<u64> c(d.r, 1);
  i128 residual = static_cast<i128>(d.total);
  for (u64 a = 0; a < d.r; ++a) {
    if (!pinned[a]) c[a] = static_cast<u64>(std::floor(budget * w[a] / free_weight));
    residual -= c[a];
  }
  if (residual >= 0 || c[0] > static_cast<u64>(-residual)) {
    c[0] = static_cast<u64>(static_cast<i128>(c[0]) + residual);
  } else {
    // float rounding overshot; take it back from the largest count instead
    std::size_t big = 0;
    for (std::size_t a = 1; a < c.size(); ++a)
      if (c[a] > c[big]) big = a;
    c[big] = static_cast<u64>(static_cast<i128>(c[big]) + residual);
  }
  return c;
}

inline Histogram generate(const DistSpec& d) { return build_histogram(generate_counts(d)); }

inline Histogram byte_histogram(std::span<const unsigned char> bytes) {
  if (bytes.empty()) fail(ErrorCode::empty_histogram, "empty byte stream");
  std::vector<u64> counts(256, 0);
  for (unsigned char b : bytes) ++counts[b];
  return build_histogram(counts);
}

inline Histogram byte_histogram_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::invalid_argument, "cannot open " + path);
  std::vector<u64> counts(256, 0);
  char buf[1 << 16];
  u64 n = 0;
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) ++counts[static_cast<unsigned char>(buf[i])];
    n += got;
  }
  if (n == 0) fail(ErrorCode::empty_histogram, "empty byte stream");
  return build_histogram(counts);
}

/// SplitMix64.
class Rng {
 public:
  explicit Rng(u64 seed) : state_(seed) {}

  u64 next() {
    u64 z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [lo, hi].
  u64 between(u64 lo, u64 hi) {
    const u64 span = hi - lo + 1;
    if (span == 0) return next();
    return lo + static_cast<u64>((static_cast<u128>(next()) * span) >> 64);
  }

 private:
  u64 state_;
};

struct SmallInstance {
  Histogram histogram;
  u64 target;
};

inline SmallInstance random_small_instance(u64 seed, u64 max_r, u64 max_target, u64 max_count) {
  Rng rng(seed);
  const u64 r = rng.between(1, max_r);
  const u64 target = rng.between(r, std::max(r, max_target));
  std::vector<u64> counts(r);
  for (u64& c : counts) c = rng.between(1, max_count);
  return {build_histogram(counts), target};
}

// Counts file: whitespace-separated nonnegative decimal integers.

inline std::vector<u64> parse_counts(const std::string& text) {
  std::vector<u64> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    u64 v = 0;
    std::size_t start = i;
    for (; i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])); ++i) {
      const char ch = text[i];
      if (ch < '0' || ch > '9') fail(ErrorCode::invalid_argument, "malformed count '" + text.substr(start, i - start + 1) + "'");
      const u64 digit = static_cast<u64>(ch - '0');
      if (v > (UINT64_MAX - digit) / 10) fail(ErrorCode::overflow, "count exceeds 64 bits");
      v = v * 10 + digit;
    }
    out.push_back(v);
  }
  return out;
}

inline std::vector<u64> read_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::invalid_argument, "cannot open " + path);
  return parse_counts(std::string(std::istreambuf_iterator<char>(in), {}));
}

inline std::string format_counts(const std::vector<u64>& counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(counts[i]);
  }
  return out;
}

}  // namespace klnorm::gen
