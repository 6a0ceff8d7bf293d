// klnorm: normalize histograms to a fixed total, validate the exact
// algorithms, tabulate baseline redundancy, time scaling, generate inputs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "klnorm/harness.hpp"
#include "klnorm/klnorm.hpp"

using json = nlohmann::ordered_json;
using namespace klnorm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitValidation = 2;

struct GenFlags {
  std::string dist;
  double p = 0.7;
  double s = 1.0;
  u64 r = 0;
  u64 N = 0;

  gen::DistSpec spec() const {
    gen::DistSpec d;
    d.family = gen::parse_family(dist);
    d.param = d.family == gen::Family::geometric ? p : (d.family == gen::Family::zipf ? s : 0.0);
    d.r = r;
    d.total = N;
    return d;
  }
};

void add_gen_flags(CLI::App* cmd, GenFlags& g) {
  cmd->add_option("--dist", g.dist, "uniform | geometric | zipf | gaussian | sparse_heavy");
  cmd->add_option("--p", g.p, "geometric ratio");
  cmd->add_option("--s", g.s, "zipf exponent");
  cmd->add_option("--r", g.r, "support size");
  cmd->add_option("--N", g.N, "total count");
}

ComparatorMode parse_mode(const std::string& m) {
  if (m == "float64" || m == "float") return ComparatorMode::float64;
  if (m == "exact") return ComparatorMode::exact;
  fail(ErrorCode::invalid_argument, "unknown comparator mode '" + m + "'");
}

double unit(bool bits) { return bits ? 1.0 / std::log(2.0) : 1.0; }

// Finite doubles as numbers, everything else as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join_ops(const OpCounts& ops) {
  std::string s;
  for (const auto& [k, v] : ops) {
    if (!s.empty()) s += ';';
    s += k + "=" + std::to_string(v);
  }
  return s;
}

std::vector<gen::DistSpec> parse_dists(const std::vector<std::string>& names, double p, double s) {
  if (names.empty()) return gen::sweep_families();
  std::vector<gen::DistSpec> out;
  for (const auto& n : names) {
    // geom0.95 / zipf1.5 carry their parameter inline.
    gen::DistSpec d;
    std::string base = n;
    std::optional<double> param;
    const auto cut = n.find_first_of("0123456789");
    if (cut != std::string::npos && cut > 0) {
      base = n.substr(0, cut);
      param = std::stod(n.substr(cut));
    }
    d.family = gen::parse_family(base);
    if (d.family == gen::Family::geometric) d.param = param.value_or(p);
    if (d.family == gen::Family::zipf) d.param = param.value_or(s);
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct NormalizeArgs {
  std::string algo;
  u64 target = 0;
  std::optional<std::string> counts, counts_file, bytes_file;
  GenFlags gen;
  std::string mode = "float64";
  std::string format = "json";
  bool bits = false;
};

int cmd_normalize(const NormalizeArgs& a) {
  const harness::Algorithm* algo = harness::find_algorithm(a.algo);
  if (!algo) fail(ErrorCode::invalid_argument, "unknown algorithm '" + a.algo + "'");
  const int sources = int(a.counts.has_value()) + int(a.counts_file.has_value()) + int(a.bytes_file.has_value()) +
                      int(!a.gen.dist.empty());
  if (sources != 1)
    fail(ErrorCode::invalid_argument, "exactly one input source: --counts, --counts-file, --bytes-file or --dist");

  Histogram h = [&] {
    if (a.counts) return build_histogram(gen::parse_counts(*a.counts));
    if (a.counts_file) return build_histogram(gen::read_counts_file(*a.counts_file));
    if (a.bytes_file) return gen::byte_histogram_file(*a.bytes_file);
    return gen::generate(a.gen.spec());
  }();

  const NormReport rep = algo->run(h, a.target, parse_mode(a.mode));
  const double k = unit(a.bits);
  const std::string kl_key = a.bits ? "kl_bits" : "kl_nats";

  if (a.format == "json") {
    json j;
    j["algorithm"] = algo->name;
    j["M"] = a.target;
    j["N"] = h.total();
    j["r"] = h.support_size();
    j["freqs"] = rep.table.freqs;
    j["phi"] = number(rep.phi * k);
    j[kl_key] = number(rep.kl * k);
    j["certificate_ok"] = rep.certificate_ok;
    j["op_counts"] = rep.op_counts;
    std::cout << j.dump(2) << "\n";
  } else if (a.format == "csv") {
    std::cout << "algorithm,M,N,r,phi," << kl_key << ",certificate_ok,freqs,op_counts\n";
    std::cout << algo->name << ',' << a.target << ',' << h.total() << ',' << h.support_size() << ','
              << fmt(rep.phi * k) << ',' << fmt(rep.kl * k) << ',' << (rep.certificate_ok ? "true" : "false") << ','
              << gen::format_counts(rep.table.freqs) << ',' << join_ops(rep.op_counts) << "\n";
  } else if (a.format == "plain") {
    std::cout << gen::format_counts(rep.table.freqs) << "\n";
    std::cout << "phi " << fmt(rep.phi * k) << "\n" << kl_key << ' ' << fmt(rep.kl * k) << "\n";
    std::cout << "certificate " << (rep.certificate_ok ? "ok" : "FAILED") << "\n";
  } else {
    fail(ErrorCode::invalid_argument, "unknown format '" + a.format + "'");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_validate(u64 seed, u64 cases, const std::string& format) {
  harness::ValidateConfig cfg;
  cfg.seed = seed;
  cfg.cases = cases;
  const auto report = harness::validate(cfg);
  if (format == "json") {
    json j;
    j["ok"] = report.ok();
    j["checks"] = json::array();
    for (const auto& c : report.checks)
      j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"cases", c.cases}, {"detail", c.detail}});
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& c : report.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.cases << " cases)";
      if (!c.passed) std::cout << ": " << c.detail;
      std::cout << "\n";
    }
  }
  return report.ok() ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------

struct RedundancyArgs {
  bool witness = false;
  bool aggregate = false;
  std::vector<std::string> dists;
  double p = 0.7, s = 1.0;
  std::vector<u64> r_list{64, 256, 1024, 4096};
  std::vector<u64> n_list{1'000'000};
  u64 M = u64{1} << 20;
  unsigned threads = 0;
  std::string format = "csv";
  bool bits = false;
};

int cmd_redundancy(const RedundancyArgs& a) {
  std::vector<harness::RedundancyRow> rows;
  if (a.witness) {
    rows = harness::witness_rows();
  } else {
    harness::SweepSpec spec;
    spec.families = parse_dists(a.dists, a.p, a.s);
    spec.r_list = a.r_list;
    spec.n_list = a.n_list;
    spec.M = a.M;
    spec.threads = a.threads;
    rows = harness::sweep_rows(spec);
    if (a.aggregate) rows = harness::aggregate_rows(rows);
  }
  const double k = unit(a.bits);
  if (a.format == "json") {
    json out = json::array();
    for (const auto& row : rows) {
      json j{{"label", row.label}, {"r", row.r}, {"N", row.N}, {"M", row.M}};
      j["skipped"] = row.skipped;
      j["opt_kl"] = number(row.opt_kl * k);
      json gaps = json::object();
      for (const auto& name : harness::baseline_names()) {
        const auto it = row.gaps.find(name);
        gaps[name] = it == row.gaps.end() ? json(nullptr) : number(it->second * k);
      }
      j["gaps"] = gaps;
      if (!row.note.empty()) j["note"] = row.note;
      out.push_back(j);
    }
    std::cout << out.dump(2) << "\n";
  } else if (a.format == "csv") {
    std::cout << "label,r,N,M,opt_kl,baseline,gap,note\n";
    for (const auto& row : rows) {
      if (row.skipped) {
        std::cout << row.label << ',' << row.r << ',' << row.N << ',' << row.M << ",,,," << row.note << "\n";
        continue;
      }
      for (const auto& name : harness::baseline_names()) {
        const auto it = row.gaps.find(name);
        const double gap = it == row.gaps.end() ? NAN : it->second;
        std::cout << '"' << row.label << "\"," << row.r << ',' << row.N << ',' << row.M << ',' << fmt(row.opt_kl * k)
                  << ',' << name << ',' << fmt(gap * k) << ",\"" << row.note << "\"\n";
      }
    }
  } else {
    fail(ErrorCode::invalid_argument, "unknown format '" + a.format + "'");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::vector<std::string> algos{"linear_window"};
  std::vector<std::string> dists{"uniform"};
  double p = 0.7, s = 1.0;
  std::vector<u64> r_list{64, 512, 4096};
  u64 N = 1'000'000;
  u64 M = u64{1} << 20;
  int repeats = 50;
  int warmups = 5;
  std::string format = "csv";
};

int cmd_bench(const BenchArgs& a) {
  harness::BenchSpec spec;
  spec.algorithms = a.algos;
  spec.families = parse_dists(a.dists, a.p, a.s);
  spec.r_list = a.r_list;
  spec.N = a.N;
  spec.M = a.M;
  spec.repeats = a.repeats;
  spec.warmups = a.warmups;
  const auto cells = harness::bench(spec);
  if (a.format == "json") {
    json out = json::array();
    for (const auto& c : cells)
      out.push_back({{"algorithm", c.algorithm},
                     {"distribution", c.distribution},
                     {"r", c.r},
                     {"N", c.N},
                     {"M", c.M},
                     {"repeats", c.repeats},
                     {"best_seconds", c.best_seconds},
                     {"ns_per_symbol", c.ns_per_symbol},
                     {"op_counts", c.ops}});
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "algorithm,distribution,r,N,M,repeats,best_seconds,ns_per_symbol,op_counts\n";
    for (const auto& c : cells)
      std::cout << c.algorithm << ',' << c.distribution << ',' << c.r << ',' << c.N << ',' << c.M << ',' << c.repeats
                << ',' << fmt(c.best_seconds) << ',' << fmt(c.ns_per_symbol) << ',' << join_ops(c.ops) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_gen(const GenFlags& g, const std::string& out) {
  if (g.dist.empty()) fail(ErrorCode::invalid_argument, "--dist is required");
  const auto counts = gen::generate_counts(g.spec());
  const std::string text = gen::format_counts(counts) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) fail(ErrorCode::invalid_argument, "cannot write " + out);
    f << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KL-optimal frequency normalization"};
  app.require_subcommand(1);

  NormalizeArgs norm;
  auto* n = app.add_subcommand("normalize", "normalize one histogram");
  n->add_option("--algo", norm.algo, "algorithm")->required()->check(CLI::IsMember(harness::algorithm_names()));
  n->add_option("--target,-M", norm.target, "target total M")->required();
  n->add_option("--counts", norm.counts, "whitespace-separated counts");
  n->add_option("--counts-file", norm.counts_file, "file of whitespace-separated counts");
  n->add_option("--bytes-file", norm.bytes_file, "byte histogram of a file");
  add_gen_flags(n, norm.gen);
  n->add_option("--mode", norm.mode, "float64 | exact")->check(CLI::IsMember({"float64", "exact"}));
  n->add_option("--format", norm.format, "json | csv | plain")->check(CLI::IsMember({"json", "csv", "plain"}));
  n->add_flag("--bits", norm.bits, "report phi and KL in bits");

  u64 seed = 1, cases = 1000;
  std::string vformat = "plain";
  auto* v = app.add_subcommand("validate", "run the validation suite");
  v->add_option("--seed", seed);
  v->add_option("--cases", cases, "seeded small instances");
  v->add_option("--format", vformat, "plain | json")->check(CLI::IsMember({"plain", "json"}));

  RedundancyArgs red;
  auto* rd = app.add_subcommand("redundancy", "KL gap of each baseline against the optimum");
  auto* wflag = rd->add_flag("--witness", red.witness, "the four witness rows");
  rd->add_flag("--aggregate", red.aggregate, "per-distribution maxima")->excludes(wflag);
  rd->add_option("--dist", red.dists, "distributions (default: all seven)");
  rd->add_option("--p", red.p);
  rd->add_option("--s", red.s);
  rd->add_option("--r", red.r_list, "support sizes");
  rd->add_option("--N", red.n_list, "totals");
  rd->add_option("--M,--target", red.M);
  rd->add_option("--threads", red.threads, "worker threads (0: all cores)");
  rd->add_option("--format", red.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  rd->add_flag("--bits", red.bits);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "best-of-K wall clock per symbol");
  b->add_option("--algo", bench.algos)->check(CLI::IsMember(harness::algorithm_names()));
  b->add_option("--dist", bench.dists);
  b->add_option("--p", bench.p);
  b->add_option("--s", bench.s);
  b->add_option("--r", bench.r_list);
  b->add_option("--N", bench.N);
  b->add_option("--M,--target", bench.M);
  b->add_option("--repeats", bench.repeats);
  b->add_option("--warmups", bench.warmups);
  b->add_option("--format", bench.format)->check(CLI::IsMember({"csv", "json"}));
  b->add_flag("--serial-timing", "accepted for compatibility; timing is always serial");

  GenFlags g;
  std::string out;
  auto* gc = app.add_subcommand("gen", "write a synthetic counts file");
  add_gen_flags(gc, g);
  gc->add_option("--out,-o", out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*n) return cmd_normalize(norm);
    if (*v) return cmd_validate(seed, cases, vformat);
    if (*rd) return cmd_redundancy(red);
    if (*b) return cmd_bench(bench);
    if (*gc) return cmd_gen(g, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
