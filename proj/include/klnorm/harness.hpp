#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "klnorm/baselines.hpp"
#include "klnorm/exact.hpp"
#include "klnorm/gen.hpp"
#include "klnorm/oracle.hpp"

// Registry, validation suite, redundancy rows and timing cells shared by the
// command-line tool and the acceptance binary.

namespace klnorm::harness {

using RunFn = std::function<NormReport(const Histogram&, u64, ComparatorMode)>;
// Bare computation for timing; fills ops when non-null.
using KernelFn = std::function<void(const Histogram&, u64, ComparatorMode, OpCounts*)>;

struct Algorithm {
  std::string name;
  bool exact = false;
  bool needs_power_of_two = false;
  RunFn run;
  KernelFn kernel;
};

namespace detail {

template <class TableFn>
Algorithm exact_entry(std::string name, TableFn table) {
  Algorithm a;
  a.name = std::move(name);
  a.exact = true;
  a.run = [table](const Histogram& h, u64 M, ComparatorMode mode) {
    OpCounts ops;
    FreqTable t = table(h, M, mode, &ops);
    return klnorm::detail::make_report(h, std::move(t), mode, std::move(ops));
  };
  a.kernel = [table](const Histogram& h, u64 M, ComparatorMode mode, OpCounts* ops) { (void)table(h, M, mode, ops); };
  return a;
}

inline Algorithm baseline_entry(std::string name, bool pow2, RunFn run) {
  Algorithm a;
  a.name = std::move(name);
  a.needs_power_of_two = pow2;
  a.run = run;
  a.kernel = [run](const Histogram& h, u64 M, ComparatorMode mode, OpCounts* ops) {
    NormReport rep = run(h, M, mode);
    if (ops)
      for (const auto& [k, v] : rep.op_counts) (*ops)[k] += v;
  };
  return a;
}

}  // namespace detail

inline const std::vector<Algorithm>& algorithms() {
  static const std::vector<Algorithm> all = [] {
    std::vector<Algorithm> v;
    v.push_back(detail::exact_entry("bottom_up", [](const Histogram& h, u64 M, ComparatorMode m, OpCounts* o) {
      return bottom_up_table(h, M, m, o);
    }));
    v.push_back(detail::exact_entry("bloom_bidir", [](const Histogram& h, u64 M, ComparatorMode m, OpCounts* o) {
      return bloom_bidirectional_table(h, M, m, o);
    }));
    v.push_back(detail::exact_entry("linear_window", [](const Histogram& h, u64 M, ComparatorMode m, OpCounts* o) {
      return linear_window_table(h, M, m, o);
    }));
    v.push_back(detail::exact_entry("smart_collet", [](const Histogram& h, u64 M, ComparatorMode m, OpCounts* o) {
      return smart_collet_table(h, M, m, o);
    }));
    v.push_back(detail::exact_entry("threshold_window", [](const Histogram& h, u64 M, ComparatorMode m, OpCounts* o) {
      return threshold_window_table(h, M, m, o);
    }));
    v.push_back(detail::baseline_entry("giesen", false, [](const Histogram& h, u64 M, ComparatorMode) {
      return baseline::giesen(h, M).report;
    }));
    v.push_back(detail::baseline_entry("bloom_onedir", false, [](const Histogram& h, u64 M, ComparatorMode) {
      return baseline::bloom_one_direction(h, M);
    }));
    v.push_back(detail::baseline_entry("collet_ceiling", false, [](const Histogram& h, u64 M, ComparatorMode) {
      return baseline::collet_ceiling(h, M);
    }));
    v.push_back(detail::baseline_entry("fse_fast", true, [](const Histogram& h, u64 M, ComparatorMode) {
      return baseline::fse_fast(h, M).report;
    }));
    v.push_back(detail::baseline_entry("fse_m2", true, [](const Histogram& h, u64 M, ComparatorMode) {
      return baseline::fse_normalize_m2(h, M);
    }));
    return v;
  }();
  return all;
}

inline const Algorithm* find_algorithm(std::string_view name) {
  for (const auto& a : algorithms())
    if (a.name == name) return &a;
  return nullptr;
}

inline std::vector<Algorithm> exact_algorithms() {
  std::vector<Algorithm> v;
  for (const auto& a : algorithms())
    if (a.exact) v.push_back(a);
  return v;
}

inline std::vector<std::string> algorithm_names() {
  std::vector<std::string> v;
  for (const auto& a : algorithms()) v.push_back(a.name);
  return v;
}

// ---------------------------------------------------------------------------
// Witness instances
// ---------------------------------------------------------------------------

struct Witness {
  std::string label;
  std::vector<u64> counts;
  u64 target;
};

inline std::vector<Witness> witnesses() {
  return {
      {"(1000,1,1) M=256", {1000, 1, 1}, 256},
      {"(3,2) M=256", {3, 2}, 256},
      {"(3046,2582,4294) M=8", {3046, 2582, 4294}, 8},
      {"(8,114,8) M=23", {8, 114, 8}, 23},
      {"(22,4x8) M=16", {22, 4, 4, 4, 4, 4, 4, 4, 4}, 16},
      {"(10,3,3) M=8", {10, 3, 3}, 8},
  };
}

/// Equal up to permuting values among symbols with equal counts.
inline bool same_up_to_ties(const Histogram& h, const std::vector<u64>& got, const std::vector<u64>& want) {
  if (got.size() != want.size()) return false;
  std::map<u64, std::pair<std::vector<u64>, std::vector<u64>>> groups;
  for (std::size_t a = 0; a < got.size(); ++a) {
    groups[h.count(a)].first.push_back(got[a]);
    groups[h.count(a)].second.push_back(want[a]);
  }
  for (auto& [c, g] : groups) {
    std::sort(g.first.begin(), g.first.end());
    std::sort(g.second.begin(), g.second.end());
    if (g.first != g.second) return false;
  }
  return true;
}

struct HeuristicWitness {
  std::string what;
  std::vector<u64> got;
  std::vector<u64> want;
  bool ok;
};

/// The documented heuristic outputs on the witness instances.
inline std::vector<HeuristicWitness> heuristic_witnesses() {
  std::vector<HeuristicWitness> out;
  auto add = [&](std::string what, const Histogram& h, std::vector<u64> got, std::vector<u64> want, bool ties) {
    const bool ok = ties ? same_up_to_ties(h, got, want) : got == want;
    out.push_back({std::move(what), std::move(got), std::move(want), ok});
  };
  const Histogram a = build_histogram({1000, 1, 1});
  add("giesen pre-fixup (1000,1,1)/256", a, baseline::giesen(a, 256).pre_fixup.freqs, {255, 0, 1}, false);
  const Histogram b = build_histogram({3, 2});
  add("giesen (3,2)/256", b, baseline::giesen(b, 256).report.table.freqs, {153, 103}, false);
  const Histogram c = build_histogram({3046, 2582, 4294});
  add("bloom_onedir (3046,2582,4294)/8", c, baseline::bloom_one_direction(c, 8).table.freqs, {3, 2, 3}, false);
  const Histogram d = build_histogram({22, 4, 4, 4, 4, 4, 4, 4, 4});
  add("collet_ceiling (22,4x8)/16", d, baseline::collet_ceiling(d, 16).table.freqs, {7, 2, 1, 1, 1, 1, 1, 1, 1},
      true);
  const Histogram e = build_histogram({10, 3, 3});
  add("fse_fast (10,3,3)/8", e, baseline::fse_fast(e, 8).report.table.freqs, {4, 2, 2}, false);
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline constexpr double kPhiTolerance = 1e-12;
inline constexpr double kKlRelTolerance = 1e-12;
// Absolute floor for KL agreement when the optimum is (numerically) zero.
inline constexpr double kKlAbsFloor = 1e-15;

inline bool kl_agree(double a, double b) {
  return std::abs(a - b) <= std::max(kKlRelTolerance * std::max(std::abs(a), std::abs(b)), kKlAbsFloor);
}

struct CheckResult {
  std::string name;
  bool passed = true;
  u64 cases = 0;
  std::string detail;  // first failure
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
};

struct ValidateConfig {
  u64 seed = 1;
  u64 cases = 1000;
  /// Exact algorithms under test; empty means the registry's five.
  std::vector<Algorithm> exact;
};

namespace detail {

inline std::string describe(const Histogram& h, u64 M) {
  return "(" + gen::format_counts(h.counts()) + ") M=" + std::to_string(M);
}

inline void record(CheckResult& c, bool ok, const std::string& what) {
  ++c.cases;
  if (!ok && c.passed) {
    c.passed = false;
    c.detail = what;
  }
}

inline bool in_window(const Histogram& h, const Window& w, const FreqTable& t) {
  for (std::size_t k = 0; k < h.support_size(); ++k) {
    const u64 m = t.freqs[h.support()[k]];
    if (m < w.lower[k] || m > w.upper[k]) return false;
  }
  return true;
}

}  // namespace detail

inline ValidationReport validate(const ValidateConfig& cfg) {
  const std::vector<Algorithm> exact = cfg.exact.empty() ? exact_algorithms() : cfg.exact;
  const ComparatorMode modes[] = {ComparatorMode::float64, ComparatorMode::exact};
  auto named = [](const char* name) {
    CheckResult c;
    c.name = name;
    return c;
  };
  CheckResult witness = named("witness suite"), cert = named("certificate"), agree = named("exact agreement"),
              oracle_eq = named("oracle equivalence"), window = named("window containment");

  // Certificate and agreement run over every exact output; the oracle and
  // window checks need enumerable instances.
  auto run_all = [&](const Histogram& h, u64 M, const oracle::OracleResult* orc) {
    const std::string where = detail::describe(h, M);
    double ref = std::numeric_limits<double>::quiet_NaN();
    for (const auto& algo : exact) {
      for (ComparatorMode mode : modes) {
        const std::string who = algo.name + "/" + to_string(mode) + " on " + where;
        NormReport rep;
        try {
          rep = algo.run(h, M, mode);
        } catch (const std::exception& e) {
          detail::record(cert, false, who + ": " + e.what());
          continue;
        }
        bool feasible = is_support_feasible(h, rep.table);
        bool ok = false;
        if (feasible) {
          try {
            ok = is_marginal_optimal(h, rep.table, ComparatorMode::exact).ok;
          } catch (const Error&) {
            feasible = false;
          }
        }
        detail::record(cert, feasible && ok, who + ": certificate fails");
        if (std::isnan(ref))
          ref = rep.kl;
        else
          detail::record(agree, kl_agree(rep.kl, ref), who + ": KL disagrees");
        if (orc) detail::record(oracle_eq, std::abs(rep.phi - orc->best_phi) <= kPhiTolerance, who + ": phi below oracle");
      }
    }
  };

  auto check_window = [&](const Histogram& h, u64 M, const oracle::OracleResult& orc) {
    const Window w = window_bounds(h, M);
    const u64 r = h.support_size();
    const std::string where = detail::describe(h, M);
    detail::record(window, r == 1 || w.width() <= 4 * r - 4, where + ": window wider than 4r-4");
    for (const auto& t : orc.optima) detail::record(window, detail::in_window(h, w, t), where + ": optimum outside window");
  };

  // (1) witnesses: heuristics reproduce the documented outputs; every exact
  // algorithm is certificate-clean and oracle-optimal.
  for (const auto& hw : heuristic_witnesses())
    detail::record(witness, hw.ok, hw.what + ": got (" + gen::format_counts(hw.got) + ")");
  for (const auto& w : witnesses()) {
    const Histogram h = build_histogram(w.counts);
    const auto orc = oracle::brute_force_optimum(h, w.target);
    for (const auto& algo : exact) {
      bool ok = false;
      try {
        const NormReport rep = algo.run(h, w.target, ComparatorMode::exact);
        ok = is_support_feasible(h, rep.table) && is_marginal_optimal(h, rep.table, ComparatorMode::exact).ok &&
             std::abs(rep.phi - orc.best_phi) <= kPhiTolerance;
      } catch (const std::exception&) {
      }
      detail::record(witness, ok, algo.name + " on " + w.label);
    }
    run_all(h, w.target, &orc);
    check_window(h, w.target, orc);
  }

  // (2)-(5) on seeded small instances.
  gen::Rng seeds(cfg.seed);
  for (u64 i = 0; i < cfg.cases; ++i) {
    const auto inst = gen::random_small_instance(seeds.next(), 6, 24, 50);
    const auto orc = oracle::brute_force_optimum(inst.histogram, inst.target);
    run_all(inst.histogram, inst.target, &orc);
    check_window(inst.histogram, inst.target, orc);
  }

  // Agreement and certificate on medium generated instances.
  for (const auto& d : gen::sweep_families()) {
    const Histogram h = gen::generate({d.family, d.param, 256, 1'000'000});
    run_all(h, 4096, nullptr);
  }

  return {{witness, cert, agree, oracle_eq, window}};
}

// ---------------------------------------------------------------------------
// Redundancy rows
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& baseline_names() {
  static const std::vector<std::string> names{"giesen", "bloom_onedir", "fse_fast", "collet_ceiling", "fse_m2"};
  return names;
}

struct RedundancyRow {
  std::string label;  // instance or distribution
  u64 r = 0, N = 0, M = 0;
  double opt_kl = 0.0;
  std::map<std::string, double> gaps;  // NaN when a baseline does not apply
  bool skipped = false;
  std::string note;
};

inline RedundancyRow redundancy_row(std::string label, const Histogram& h, u64 M) {
  RedundancyRow row;
  row.label = std::move(label);
  row.r = h.support_size();
  row.N = h.total();
  row.M = M;
  if (M < row.r) {
    row.skipped = true;
    row.note = "r > M, no finite-KL solution";
    return row;
  }
  row.opt_kl = linear_window(h, M).kl;
  for (const auto& name : baseline_names()) {
    const Algorithm* a = find_algorithm(name);
    double gap = std::numeric_limits<double>::quiet_NaN();
    try {
      gap = a->run(h, M, ComparatorMode::float64).kl - row.opt_kl;
    } catch (const Error& e) {
      if (!row.note.empty()) row.note += "; ";
      row.note += name + ": " + e.what();
    }
    row.gaps[name] = gap;
  }
  return row;
}

/// The four witness rows of the redundancy table.
inline std::vector<RedundancyRow> witness_rows() {
  const std::vector<Witness> ws{
      {"(3046,2582,4294) M=8", {3046, 2582, 4294}, 8},
      {"(10,3,3) M=8", {10, 3, 3}, 8},
      {"(22,4x8) M=16", {22, 4, 4, 4, 4, 4, 4, 4, 4}, 16},
      {"(3,2) M=256", {3, 2}, 256},
  };
  std::vector<RedundancyRow> rows;
  for (const auto& w : ws) rows.push_back(redundancy_row(w.label, build_histogram(w.counts), w.target));
  return rows;
}

struct SweepSpec {
  std::vector<gen::DistSpec> families = gen::sweep_families();
  std::vector<u64> r_list{64, 256, 1024, 4096};
  std::vector<u64> n_list{1'000'000};
  u64 M = u64{1} << 20;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs fn(i) for i in [0, n) on a small pool.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

/// One row per (distribution, r, N) cell in that order; r > M cells are
/// kept as skipped rows.
inline std::vector<RedundancyRow> sweep_rows(const SweepSpec& spec) {
  std::vector<gen::DistSpec> cells;
  for (const auto& f : spec.families)
    for (u64 r : spec.r_list)
      for (u64 n : spec.n_list) cells.push_back({f.family, f.param, r, n});
  std::vector<RedundancyRow> rows(cells.size());
  parallel_for(cells.size(), spec.threads, [&](std::size_t i) {
    const auto& d = cells[i];
    if (d.r > spec.M) {
      rows[i].label = gen::label(d);
      rows[i].r = d.r;
      rows[i].N = d.total;
      rows[i].M = spec.M;
      rows[i].skipped = true;
      rows[i].note = "r > M, cell dropped";
      return;
    }
    rows[i] = redundancy_row(gen::label(d), gen::generate(d), spec.M);
  });
  return rows;
}

/// Per-distribution maximum gap over the non-skipped rows.
inline std::vector<RedundancyRow> aggregate_rows(const std::vector<RedundancyRow>& rows) {
  std::vector<RedundancyRow> out;
  for (const auto& row : rows) {
    if (row.skipped) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const RedundancyRow& a) { return a.label == row.label; });
    if (it == out.end()) {
      RedundancyRow agg;
      agg.label = row.label;
      agg.M = row.M;
      agg.opt_kl = std::numeric_limits<double>::quiet_NaN();
      for (const auto& name : baseline_names()) agg.gaps[name] = std::numeric_limits<double>::quiet_NaN();
      out.push_back(agg);
      it = out.end() - 1;
    }
    it->r = std::max(it->r, row.r);
    it->N = std::max(it->N, row.N);
    for (const auto& [name, gap] : row.gaps) {
      double& best = it->gaps[name];
      if (!std::isnan(gap) && (std::isnan(best) || gap > best)) best = gap;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct BenchCell {
  std::string algorithm;
  std::string distribution;
  u64 r = 0, N = 0, M = 0;
  int repeats = 0;
  double best_seconds = 0.0;
  double ns_per_symbol = 0.0;
  OpCounts ops;  // from a single call
};

/// Best-of-`repeats` wall clock for one call after `warmups` untimed calls.
inline BenchCell bench_cell(const Algorithm& algo, const gen::DistSpec& d, u64 M, int repeats, int warmups,
                            ComparatorMode mode = ComparatorMode::float64) {
  const Histogram h = gen::generate(d);
  BenchCell cell{algo.name, gen::label(d), d.r, d.total, M, repeats, 0.0, 0.0, {}};
  algo.kernel(h, M, mode, &cell.ops);
  for (int i = 0; i < warmups; ++i) algo.kernel(h, M, mode, nullptr);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    algo.kernel(h, M, mode, nullptr);
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  cell.best_seconds = best;
  cell.ns_per_symbol = best * 1e9 / static_cast<double>(d.r);
  return cell;
}

struct BenchSpec {
  std::vector<std::string> algorithms{"linear_window"};
  std::vector<gen::DistSpec> families{{gen::Family::uniform, 0.0, 1, 1}};
  std::vector<u64> r_list{64, 512, 4096};
  u64 N = 1'000'000;
  u64 M = u64{1} << 20;
  int repeats = 50;
  int warmups = 5;
  int slow_repeats = 3;  // bottom_up is Theta(M log r) per call
};

inline std::vector<BenchCell> bench(const BenchSpec& spec) {
  std::vector<BenchCell> out;
  for (const auto& name : spec.algorithms) {
    const Algorithm* algo = find_algorithm(name);
    if (!algo) fail(ErrorCode::invalid_argument, "unknown algorithm '" + name + "'");
    const bool slow = name == "bottom_up";
    for (const auto& f : spec.families)
      for (u64 r : spec.r_list) {
        if (r > spec.M || r > spec.N) continue;
        out.push_back(bench_cell(*algo, {f.family, f.param, r, spec.N}, spec.M, slow ? spec.slow_repeats : spec.repeats,
                                 slow ? 1 : spec.warmups));
      }
  }
  return out;
}

}  // namespace klnorm::harness
