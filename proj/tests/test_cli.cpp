#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "klnorm/harness.hpp"
#include "klnorm/klnorm.hpp"

using namespace klnorm;

namespace {

struct CliRun {
  int code;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(KLNORM_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

// --- harness ----------------------------------------------------------------

TEST(Harness, RegistryHasTenAlgorithms) {
  const auto names = harness::algorithm_names();
  EXPECT_EQ(names.size(), 10u);
  EXPECT_EQ(harness::exact_algorithms().size(), 5u);
  EXPECT_NE(harness::find_algorithm("fse_m2"), nullptr);
  EXPECT_EQ(harness::find_algorithm("nope"), nullptr);
}

TEST(Harness, ValidateDefaultPasses) {
  harness::ValidateConfig cfg;
  cfg.cases = 300;
  const auto rep = harness::validate(cfg);
  ASSERT_EQ(rep.checks.size(), 5u);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(rep.ok());
}

TEST(Harness, CorruptedAlgorithmFailsCertificate) {
  // Optimal table with one unit moved between the first two support symbols.
  harness::Algorithm bad = *harness::find_algorithm("linear_window");
  bad.name = "corrupted";
  bad.run = [](const Histogram& h, u64 M, ComparatorMode mode) {
    FreqTable t = linear_window_table(h, M, mode);
    const auto& s = h.support();
    if (s.size() >= 2 && t.freqs[s[0]] >= 2) {
      --t.freqs[s[0]];
      ++t.freqs[s[1]];
    }
    return klnorm::detail::make_report(h, std::move(t), mode, {});
  };
  harness::ValidateConfig cfg;
  cfg.cases = 50;
  cfg.exact = harness::exact_algorithms();
  cfg.exact.push_back(bad);
  const auto rep = harness::validate(cfg);
  EXPECT_FALSE(rep.ok());
  bool cert_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "certificate") cert_failed = !c.passed;
  EXPECT_TRUE(cert_failed);
}

TEST(Harness, RedundancyRowsAreNonNegativeAndDeterministic) {
  harness::SweepSpec spec;
  spec.r_list = {64, 300};
  spec.M = 4096;
  spec.threads = 4;
  const auto a = harness::sweep_rows(spec);
  spec.threads = 1;
  const auto b = harness::sweep_rows(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_EQ(a[i].r, b[i].r);
    EXPECT_EQ(a[i].opt_kl, b[i].opt_kl);
    for (const auto& [name, gap] : a[i].gaps) {
      if (std::isnan(gap)) continue;
      EXPECT_GE(gap, -1e-12) << a[i].label << " " << name;
      EXPECT_EQ(gap, b[i].gaps.at(name));
    }
  }
}

TEST(Harness, InfeasibleCellsAreSkipped) {
  harness::SweepSpec spec;
  spec.families = {{gen::Family::uniform, 0, 1, 1}};
  spec.r_list = {64, 256};
  spec.M = 128;
  const auto rows = harness::sweep_rows(spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].skipped);
  EXPECT_TRUE(rows[1].skipped);
  EXPECT_EQ(harness::aggregate_rows(rows).size(), 1u);
}

TEST(Harness, TiedPermutationMatching) {
  const Histogram h = build_histogram({22, 4, 4, 4, 4, 4, 4, 4, 4});
  EXPECT_TRUE(harness::same_up_to_ties(h, {7, 1, 1, 1, 1, 1, 1, 1, 2}, {7, 2, 1, 1, 1, 1, 1, 1, 1}));
  EXPECT_FALSE(harness::same_up_to_ties(h, {6, 2, 2, 1, 1, 1, 1, 1, 1}, {7, 2, 1, 1, 1, 1, 1, 1, 1}));
}

TEST(Harness, BenchCellRecordsOpsOfOneCall) {
  const auto cell = harness::bench_cell(*harness::find_algorithm("bottom_up"), {gen::Family::uniform, 0, 64, 1000000},
                                        1 << 14, 2, 1);
  EXPECT_EQ(cell.ops.at("heap_rounds"), (1u << 14) - 64);
  EXPECT_GT(cell.best_seconds, 0.0);
}

// --- command line -----------------------------------------------------------

TEST(Cli, NormalizeJsonRoundTrips) {
  const CliRun r = cli("normalize --algo linear_window --target 16 --counts \"22 4 4 4 4 4 4 4 4\"");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["algorithm"], "linear_window");
  EXPECT_EQ(j["M"], 16);
  EXPECT_EQ(j["N"], 54);
  EXPECT_EQ(j["r"], 9);
  EXPECT_EQ(j["freqs"].get<std::vector<u64>>(), (std::vector<u64>{8, 1, 1, 1, 1, 1, 1, 1, 1}));
  EXPECT_TRUE(j["certificate_ok"].get<bool>());
  const Histogram h = build_histogram({22, 4, 4, 4, 4, 4, 4, 4, 4});
  const auto rep = linear_window(h, 16);
  EXPECT_EQ(j["phi"].get<double>(), rep.phi);
  EXPECT_EQ(j["kl_nats"].get<double>(), rep.kl);
  EXPECT_EQ(j["op_counts"]["decrements_applied"], 10);
}

TEST(Cli, LargeJsonRoundTripIsBitExact) {
  const CliRun r = cli("normalize --algo threshold_window --target 1048576 --dist zipf --s 1.5 --r 2000 --N 1000000000");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  const Histogram h = gen::generate({gen::Family::zipf, 1.5, 2000, 1000000000});
  EXPECT_EQ(j["freqs"].get<std::vector<u64>>(), threshold_window(h, 1 << 20).table.freqs);
}

TEST(Cli, GiesenReportsItsTable) {
  const CliRun r = cli("normalize --algo giesen --target 256 --counts \"1000 1 1\" --format csv");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("254 1 1"), std::string::npos);
}

TEST(Cli, InputErrors) {
  const CliRun r = cli("normalize --algo bottom_up --target 2 --counts \"1 1 1\"");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("no finite-KL solution"), std::string::npos);
  EXPECT_EQ(cli("normalize --algo bottom_up --target 8 --counts \"1 x\"").code, 1);
  EXPECT_EQ(cli("normalize --algo bottom_up --target 8").code, 1);
  EXPECT_EQ(cli("normalize --algo bottom_up --target 8 --counts \"1 2\" --dist uniform --r 2 --N 4").code, 1);
  EXPECT_EQ(cli("normalize --algo nope --target 8 --counts \"1 2\"").code, 1);
  EXPECT_EQ(cli("normalize --algo fse_fast --target 12 --counts \"1 2\"").code, 1);
  EXPECT_EQ(cli("normalize --algo giesen --target 8 --counts-file /nonexistent").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
}

TEST(Cli, CountsAndBytesFiles) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto counts = dir / "klnorm_cli_counts.txt";
  const auto bytes = dir / "klnorm_cli_bytes.bin";
  {
    std::ofstream(counts) << "3 2\n";
    std::ofstream(bytes, std::ios::binary) << "aaab";
  }
  CliRun r = cli("normalize --algo bottom_up --target 256 --counts-file " + counts.string() + " --format plain");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "154 102");
  r = cli("normalize --algo bottom_up --target 4 --bytes-file " + bytes.string() + " --format json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["r"], 2);
  EXPECT_EQ(j["freqs"][int('a')], 3);
  std::filesystem::remove(counts);
  std::filesystem::remove(bytes);
}

TEST(Cli, BitsFlagRescalesOnly) {
  const auto nats = nlohmann::json::parse(cli("normalize --algo giesen --target 256 --counts \"3 2\"").out);
  const auto bits = nlohmann::json::parse(cli("normalize --algo giesen --target 256 --counts \"3 2\" --bits").out);
  EXPECT_EQ(nats["freqs"], bits["freqs"]);
  EXPECT_NEAR(bits["kl_bits"].get<double>(), nats["kl_nats"].get<double>() / std::log(2.0), 1e-18);
}

TEST(Cli, Gen) {
  CliRun r = cli("gen --dist uniform --r 4 --N 10");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "4 2 2 2\n");
  r = cli("gen --dist zipf --s 1.0 --r 256 --N 1000000");
  ASSERT_EQ(r.code, 0);
  const auto c = gen::parse_counts(r.out);
  EXPECT_EQ(c.size(), 256u);
  EXPECT_EQ(build_histogram(c).total(), 1000000u);
  EXPECT_EQ(cli("gen --dist geometric --p 0.7 --r 64 --N 63").code, 1);
  EXPECT_EQ(cli("gen --dist cauchy --r 4 --N 10").code, 1);
}

TEST(Cli, ValidateExitCode) {
  const CliRun r = cli("validate --cases 100");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS oracle equivalence"), std::string::npos);
}

TEST(Cli, RedundancyWitnessJson) {
  const CliRun r = cli("redundancy --witness --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 4u);
  EXPECT_NEAR(j[0]["gaps"]["bloom_onedir"].get<double>(), 2.6e-5, 0.05 * 2.6e-5);
  EXPECT_NEAR(j[1]["gaps"]["fse_fast"].get<double>(), 9.5e-3, 0.05 * 9.5e-3);
}

TEST(Cli, RedundancySweepSkipsInfeasibleCells) {
  const CliRun r = cli("redundancy --dist uniform --r 64 512 --M 256 --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("r > M"), std::string::npos);
  EXPECT_EQ(r.out.rfind("label,r,N,M,opt_kl,baseline,gap,note", 0), 0u);
}

TEST(Cli, BenchCsv) {
  const CliRun r = cli("bench --algo linear_window --dist uniform --r 64 512 --repeats 2 --warmups 0");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("linear_window,uniform,512"), std::string::npos);
  EXPECT_NE(r.out.find("tickets_emitted="), std::string::npos);
}
