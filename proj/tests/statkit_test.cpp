// Copyright 2026 The qrng-bs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "qrng/random_source.hpp"
#include "qrng/statkit.hpp"

namespace qrng::stat {
namespace {

BitStream alternating(std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = i % 2;
  return BitStream(std::move(b));
}

BitStream fair(std::size_t n, std::uint64_t seed) {
  RandomSource rng(seed);
  std::vector<std::uint8_t> b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.next_u64() >> 63);
  return BitStream(std::move(b));
}

BitStream constant(std::size_t n, std::uint8_t v) { return BitStream(std::vector<std::uint8_t>(n, v)); }

TEST(Monobit, BalancedAndExtreme) {
  const auto bal = monobit(alternating(100));
  EXPECT_EQ(bal.statistic, 0.0);
  EXPECT_EQ(*bal.p_value, 1.0);
  EXPECT_TRUE(bal.pass);

  const auto zeros = monobit(constant(100, 0));
  EXPECT_LT(*zeros.p_value, 1e-15);
  EXPECT_FALSE(zeros.pass);
  EXPECT_EQ(zeros.status, Status::kFail);
}

TEST(Monobit, FrozenPValue) {
  std::vector<std::uint8_t> b(100, 0);
  std::fill(b.begin(), b.begin() + 60, 1);
  // erfc(2 / sqrt 2), evaluated to 30 digits offline
  EXPECT_NEAR(*monobit(BitStream(b)).p_value, 0.0455002638963584144, 1e-14);
}

TEST(Monobit, TooShort) { EXPECT_THROW(monobit(alternating(99)), std::invalid_argument); }

TEST(ChiSquare, Examples) {
  std::vector<std::uint32_t> even;
  for (int i = 0; i < 300; ++i) even.push_back(static_cast<std::uint32_t>(i % 3));
  const auto uni = chi_square_multinomial(SymbolStream(3, even));
  EXPECT_EQ(uni.statistic, 0.0);
  EXPECT_EQ(*uni.p_value, 1.0);

  const auto same = chi_square_multinomial(SymbolStream(3, std::vector<std::uint32_t>(300, 0)));
  EXPECT_DOUBLE_EQ(same.statistic, 600.0);
  EXPECT_FALSE(same.pass);
  // two degrees of freedom: p = exp(-chi2 / 2)
  EXPECT_NEAR(*same.p_value / 5.14820022241201378e-131, 1.0, 1e-9);

  EXPECT_THROW(chi_square_multinomial(SymbolStream(3, std::vector<std::uint32_t>(14, 0))), std::invalid_argument);
}

TEST(ChiSquare, FrozenPValues) {
  std::vector<std::uint32_t> s3;
  for (auto [sym, count] : {std::pair{0u, 40}, {1u, 30}, {2u, 30}}) s3.insert(s3.end(), count, sym);
  EXPECT_NEAR(*chi_square_multinomial(SymbolStream(3, s3)).p_value, 0.367879441171442322, 1e-14);

  std::vector<std::uint32_t> s4;
  for (auto [sym, count] : {std::pair{0u, 30}, {1u, 20}, {2u, 25}, {3u, 25}}) s4.insert(s4.end(), count, sym);
  const auto r = chi_square_multinomial(SymbolStream(4, s4));
  EXPECT_DOUBLE_EQ(r.statistic, 2.0);
  EXPECT_NEAR(*r.p_value, 0.572406704470879834, 1e-14);
}

TEST(ChiSquare, SimulatedTernaryPasses) {
  RandomSource rng(5);
  std::vector<std::uint32_t> s(100000);
  for (auto& x : s) x = static_cast<std::uint32_t>(rng.uniform() * 3);
  EXPECT_GT(*chi_square_multinomial(SymbolStream(3, s)).p_value, 0.001);
}

TEST(Runs, Examples) {
  const auto alt = runs_test(alternating(1000));
  EXPECT_EQ(alt.statistic, 1000.0);
  EXPECT_FALSE(alt.pass);

  std::vector<std::uint8_t> blocks(1000, 0);
  std::fill(blocks.begin() + 500, blocks.end(), 1);
  const auto two = runs_test(BitStream(blocks));
  EXPECT_EQ(two.statistic, 2.0);
  EXPECT_FALSE(two.pass);

  EXPECT_GT(*runs_test(fair(100000, 7)).p_value, 0.001);
}

TEST(Runs, FrozenPValue) {
  // "1100" repeated: V = 50, E = 51, sigma = 5, p = erfc(0.2 / sqrt 2)
  std::vector<std::uint8_t> b;
  for (int i = 0; i < 25; ++i) b.insert(b.end(), {1, 1, 0, 0});
  EXPECT_NEAR(*runs_test(BitStream(b)).p_value, 0.841480581121793954, 1e-14);
}

TEST(Runs, FrequencyPrerequisite) {
  const auto r = runs_test(constant(1000, 0));
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(*r.p_value, 0.0);
  EXPECT_FALSE(r.note.empty());
}

TEST(SerialCorrelation, Examples) {
  EXPECT_NEAR(serial_correlation(alternating(1000), 1).statistic, -1.0, 1e-9);
  EXPECT_NEAR(serial_correlation(alternating(1000), 2).statistic, 1.0, 1e-9);
  const auto flat = serial_correlation(constant(1000, 1), 1);
  EXPECT_EQ(flat.status, Status::kNotApplicable);
  EXPECT_FALSE(flat.p_value.has_value());
  EXPECT_LT(std::abs(serial_correlation(fair(100000, 8), 1).statistic), 0.01);
  EXPECT_THROW(serial_correlation(alternating(3), 2), std::invalid_argument);
}

TEST(SerialCorrelation, AlwaysInRange) {
  RandomSource rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint8_t> b(50 + t);
    const double p = rng.uniform();
    for (auto& x : b) x = rng.bernoulli(p);
    const auto r = serial_correlation(BitStream(b), 1 + t % 5);
    if (r.status != Status::kNotApplicable) {
      EXPECT_GE(r.statistic, -1.0);
      EXPECT_LE(r.statistic, 1.0);
    }
  }
}

TEST(Entropy, EqualityCasesAndBounds) {
  EXPECT_DOUBLE_EQ(entropy_rate(alternating(1000)), 1.0);
  EXPECT_DOUBLE_EQ(entropy_rate(constant(10, 1)), 0.0);
  std::vector<std::uint32_t> q;
  for (int i = 0; i < 400; ++i) q.push_back(static_cast<std::uint32_t>(i % 4));
  EXPECT_DOUBLE_EQ(entropy_rate(SymbolStream(4, q)), 2.0);

  RandomSource rng(10);
  for (std::size_t n = 2; n <= 6; ++n)
    for (int t = 0; t < 20; ++t) {
      std::vector<std::uint32_t> s(1 + t * 7);
      for (auto& x : s) x = static_cast<std::uint32_t>(rng.uniform() * rng.uniform() * static_cast<double>(n));
      const double h = entropy_rate(SymbolStream(n, s));
      EXPECT_GE(h, 0.0);
      EXPECT_LE(h, std::log2(static_cast<double>(n)) + 1e-12);
    }
}

TEST(Bias, Examples) {
  EXPECT_EQ(bias_estimate(constant(10, 1)), 0.5);
  EXPECT_EQ(bias_estimate(alternating(10)), 0.0);
  EXPECT_THROW(bias_estimate(BitStream()), std::invalid_argument);
}

TEST(Suite, FairStreamPasses) {
  const auto s = run_suite(fair(100000, 11), SuiteConfig::full());
  EXPECT_TRUE(s.overall);
  EXPECT_EQ(s.reports.size(), 6u);
  EXPECT_EQ(s.input_digest.size(), 64u);
}

TEST(Suite, AllZerosFailsMonobitAndRuns) {
  const auto s = run_suite(constant(10000, 0), SuiteConfig::full());
  EXPECT_FALSE(s.overall);
  EXPECT_FALSE(s.find("monobit")->pass);
  EXPECT_FALSE(s.find("runs")->pass);
  EXPECT_EQ(s.find("serial_correlation")->status, Status::kNotApplicable);
}

TEST(Suite, EmptySelectionPassesVacuously) {
  const auto s = run_suite(fair(1000, 12), SuiteConfig{0.001, {}, 1});
  EXPECT_TRUE(s.reports.empty());
  EXPECT_TRUE(s.overall);
}

TEST(Suite, ShortStreamReportsNotApplicable) {
  const auto s = run_suite(alternating(20), SuiteConfig{0.001, {TestKind::kMonobit}, 1});
  EXPECT_EQ(s.reports[0].status, Status::kNotApplicable);
  EXPECT_TRUE(s.overall);
}

TEST(Suite, Deterministic) {
  const auto b = fair(20000, 13);
  const auto x = run_suite(b, SuiteConfig::full());
  const auto y = run_suite(b, SuiteConfig::full());
  EXPECT_EQ(x.input_digest, y.input_digest);
  ASSERT_EQ(x.reports.size(), y.reports.size());
  for (std::size_t i = 0; i < x.reports.size(); ++i) {
    EXPECT_EQ(x.reports[i].statistic, y.reports[i].statistic);
    EXPECT_EQ(x.reports[i].p_value, y.reports[i].p_value);
  }
  EXPECT_NE(x.input_digest, run_suite(fair(20000, 14), SuiteConfig::full()).input_digest);
}

TEST(Suite, DigestIsSha256OfPackedBytes) {
  // SHA-256 of the single byte 0xAA
  std::vector<std::uint8_t> b{1, 0, 1, 0, 1, 0, 1, 0};
  for (int i = 0; i < 12; ++i) b.insert(b.end(), {1, 0, 1, 0, 1, 0, 1, 0});
  EXPECT_EQ(sha256_hex(std::vector<std::uint8_t>{}),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(run_suite(BitStream(b), SuiteConfig{}).input_digest, sha256_hex(pack_bits(BitStream(b))));
}

TEST(Suite, SymbolStreamVariant) {
  std::vector<std::uint32_t> s;
  for (int i = 0; i < 3000; ++i) s.push_back(static_cast<std::uint32_t>(i % 3));
  const auto r = run_suite(SymbolStream(3, s), SuiteConfig::full());
  EXPECT_TRUE(r.overall);
  EXPECT_EQ(r.find("monobit")->status, Status::kNotApplicable);
  EXPECT_NEAR(r.find("entropy")->statistic, std::log2(3.0), 1e-12);
}

TEST(Calibration, FailureRateAtMostOnePercent) {
  // Reduced run; the full 1000-seed calibration is an acceptance criterion.
  int fails_mono = 0, fails_runs = 0, fails_serial = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const auto b = fair(100000, 1000 + static_cast<std::uint64_t>(s));
    fails_mono += !monobit(b).pass;
    fails_runs += !runs_test(b).pass;
    fails_serial += !serial_correlation(b, 1).pass;
  }
  EXPECT_LE(fails_mono, seeds / 100);
  EXPECT_LE(fails_runs, seeds / 100);
  EXPECT_LE(fails_serial, seeds / 100);
}

TEST(TestKind, ParseRoundTrip) {
  for (auto k : SuiteConfig::full().tests) EXPECT_EQ(parse_test_kind(to_string(k)), k);
  EXPECT_THROW(parse_test_kind("spectral"), std::invalid_argument);
}

}  // namespace
}  // namespace qrng::stat
