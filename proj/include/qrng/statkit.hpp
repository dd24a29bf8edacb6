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

#pragma once

// Finite-sample randomness battery for bit and symbol streams.
//
// All p-values are two-sided. Normal approximations are used for N >= 100:
//   monobit   s = |#1 - #0| / sqrt(N),            p = erfc(s / sqrt 2)
//   runs      E = 2 N pi (1 - pi) + 1,
//             sigma = 2 sqrt(N) pi (1 - pi),      p = erfc(|V - E| / (sigma sqrt 2))
//   serial    rho = Pearson(x[0..N-L), x[L..N)),  p = erfc(|rho| sqrt(N - L) / sqrt 2)
//   chi^2     Pearson statistic, n - 1 dof,       p = Q((n - 1) / 2, chi^2 / 2)

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qrng/digest.hpp"
#include "qrng/extract.hpp"

namespace qrng::stat {

inline constexpr double kDefaultSignificance = 0.001;
inline constexpr std::size_t kMinBits = 100;

enum class Status { kPass, kFail, kNotApplicable };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::kPass: return "pass";
    case Status::kFail: return "fail";
    default: return "not-applicable";
  }
}

struct TestReport {
  std::string name;
  double statistic = 0.0;
  std::optional<double> p_value;  // absent for descriptive measures
  bool pass = true;
  Status status = Status::kPass;
  std::map<std::string, double> params;
  std::string note;
};

struct SuiteResult {
  std::vector<TestReport> reports;
  bool overall = true;
  std::string input_digest;

  const TestReport* find(std::string_view name) const {
    for (const auto& r : reports)
      if (r.name == name) return &r;
    return nullptr;
  }
};

namespace detail {

inline TestReport with_p(std::string name, double statistic, double p, double significance) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.pass = *r.p_value >= significance;
  r.status = r.pass ? Status::kPass : Status::kFail;
  r.params["significance"] = significance;
  return r;
}

inline TestReport not_applicable(std::string name, std::string note) {
  TestReport r;
  r.name = std::move(name);
  r.pass = true;
  r.status = Status::kNotApplicable;
  r.note = std::move(note);
  return r;
}

inline void require_length(std::size_t n, std::size_t min, std::string_view test) {
  if (n < min)
    throw std::invalid_argument(std::string(test) + ": stream too short (" + std::to_string(n) + " < " +
                                std::to_string(min) + ")");
}

}  // namespace detail

inline TestReport monobit(const BitStream& bits, double significance = kDefaultSignificance) {
  detail::require_length(bits.size(), kMinBits, "monobit");
  const double n = static_cast<double>(bits.size());
  const double ones = static_cast<double>(bits.count_ones());
  const double s = std::abs(2.0 * ones - n) / std::sqrt(n);
  auto r = detail::with_p("monobit", s, std::erfc(s / std::sqrt(2.0)), significance);
  r.params["n"] = n;
  r.params["ones"] = ones;
  return r;
}

/// Pearson chi-square against the uniform distribution over the alphabet.
inline TestReport chi_square_multinomial(const SymbolStream& stream, double significance = kDefaultSignificance) {
  const std::size_t k = stream.alphabet_size();
  detail::require_length(stream.size(), 5 * k, "chi_square_multinomial");
  std::vector<double> counts(k, 0.0);
  for (std::uint32_t s : stream.symbols()) counts[s] += 1.0;
  const double expected = static_cast<double>(stream.size()) / static_cast<double>(k);
  double chi2 = 0.0;
  for (double o : counts) chi2 += (o - expected) * (o - expected) / expected;
  const double dof = static_cast<double>(k - 1);
  const double p = chi2 == 0.0 ? 1.0 : boost::math::gamma_q(dof / 2.0, chi2 / 2.0);
  auto r = detail::with_p("chi_square", chi2, p, significance);
  r.params["n"] = static_cast<double>(stream.size());
  r.params["dof"] = dof;
  return r;
}

/// Wald-Wolfowitz style runs test. When the ones proportion is not within
/// 2/sqrt(N) of 1/2 the runs statistic is meaningless; the report is then a
/// failure with p = 0 and a note, since the stream already fails frequency.
inline TestReport runs_test(const BitStream& bits, double significance = kDefaultSignificance) {
  detail::require_length(bits.size(), kMinBits, "runs");
  const double n = static_cast<double>(bits.size());
  const double pi = static_cast<double>(bits.count_ones()) / n;
  std::size_t runs = 1;
  for (std::size_t i = 1; i < bits.size(); ++i) runs += bits[i] != bits[i - 1];
  const double v = static_cast<double>(runs);
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) {
    auto r = detail::with_p("runs", v, 0.0, significance);
    r.note = "frequency prerequisite not met";
    r.params["proportion"] = pi;
    return r;
  }
  const double q = pi * (1.0 - pi);
  const double expected = 2.0 * n * q + 1.0;
  const double sigma = 2.0 * std::sqrt(n) * q;
  const double z = std::abs(v - expected) / sigma;
  auto r = detail::with_p("runs", v, std::erfc(z / std::sqrt(2.0)), significance);
  r.params["expected"] = expected;
  r.params["z"] = z;
  return r;
}

/// Lag-L autocorrelation, computed as the Pearson correlation of x[0..N-L)
/// with x[L..N). A constant segment has no variance and is not applicable.
inline TestReport serial_correlation(const BitStream& bits, std::size_t lag = 1,
                                     double significance = kDefaultSignificance) {
  if (lag == 0) throw std::invalid_argument("serial_correlation: lag must be >= 1");
  if (bits.size() <= lag + 1)
    throw std::invalid_argument("serial_correlation: need more than lag + 1 bits");
  const std::size_t m = bits.size() - lag;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = bits[i];
    const double y = bits[i + lag];
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double md = static_cast<double>(m);
  const double cov = sxy - sx * sy / md;
  const double vx = sxx - sx * sx / md;
  const double vy = syy - sy * sy / md;
  if (vx <= 0.0 || vy <= 0.0) {
    auto r = detail::not_applicable("serial_correlation", "zero variance");
    r.params["lag"] = static_cast<double>(lag);
    return r;
  }
  const double rho = std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
  const double z = std::abs(rho) * std::sqrt(md);
  auto r = detail::with_p("serial_correlation", rho, std::erfc(z / std::sqrt(2.0)), significance);
  r.params["lag"] = static_cast<double>(lag);
  return r;
}

/// Empirical Shannon entropy of the symbol histogram, bits per symbol.
inline double entropy_rate(const SymbolStream& stream) {
  if (stream.empty()) throw std::invalid_argument("entropy_rate: empty stream");
  std::vector<double> counts(stream.alphabet_size(), 0.0);
  for (std::uint32_t s : stream.symbols()) counts[s] += 1.0;
  const double n = static_cast<double>(stream.size());
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= (c / n) * std::log2(c / n);
  return std::max(h, 0.0);
}

inline double entropy_rate(const BitStream& bits) { return entropy_rate(bits.as_symbols()); }

/// P(1) - 1/2.
inline double bias_estimate(const BitStream& bits) {
  if (bits.empty()) throw std::invalid_argument("bias_estimate: empty stream");
  return static_cast<double>(bits.count_ones()) / static_cast<double>(bits.size()) - 0.5;
}

/// Binomial standard error of bias_estimate.
inline double bias_std_error(std::size_t n) { return n == 0 ? 0.0 : 0.5 / std::sqrt(static_cast<double>(n)); }

enum class TestKind { kMonobit, kChiSquare, kRuns, kSerialCorrelation, kEntropy, kBias };

inline std::string_view to_string(TestKind k) {
  switch (k) {
    case TestKind::kMonobit: return "monobit";
    case TestKind::kChiSquare: return "chi_square";
    case TestKind::kRuns: return "runs";
    case TestKind::kSerialCorrelation: return "serial_correlation";
    case TestKind::kEntropy: return "entropy";
    default: return "bias";
  }
}

inline TestKind parse_test_kind(std::string_view name) {
  for (TestKind k : {TestKind::kMonobit, TestKind::kChiSquare, TestKind::kRuns, TestKind::kSerialCorrelation,
                     TestKind::kEntropy, TestKind::kBias})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown statistical test '" + std::string(name) + "'");
}

struct SuiteConfig {
  double significance = kDefaultSignificance;
  std::vector<TestKind> tests;
  std::size_t serial_lag = 1;

  static SuiteConfig full(double significance = kDefaultSignificance) {
    return {significance,
            {TestKind::kMonobit, TestKind::kChiSquare, TestKind::kRuns, TestKind::kSerialCorrelation,
             TestKind::kEntropy, TestKind::kBias},
            1};
  }
};

namespace detail {

inline TestReport descriptive(std::string name, double value) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = value;
  return r;
}

template <class Fn>
TestReport guarded(std::string_view name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return not_applicable(std::string(name), e.what());
  }
}

inline SuiteResult aggregate(std::vector<TestReport> reports, std::string digest) {
  SuiteResult out{std::move(reports), true, std::move(digest)};
  for (const auto& r : out.reports) out.overall = out.overall && r.pass;
  return out;
}

}  // namespace detail

/// Runs the selected tests in configured order. Tests whose preconditions
/// do not hold (too short, zero variance) are reported as not-applicable and
/// do not fail the suite.
inline SuiteResult run_suite(const BitStream& bits, const SuiteConfig& cfg) {
  if (bits.empty()) throw std::invalid_argument("run_suite: empty stream");
  std::vector<TestReport> reports;
  for (TestKind k : cfg.tests) {
    const auto name = to_string(k);
    switch (k) {
      case TestKind::kMonobit:
        reports.push_back(detail::guarded(name, [&] { return monobit(bits, cfg.significance); }));
        break;
      case TestKind::kChiSquare:
        reports.push_back(detail::guarded(name, [&] { return chi_square_multinomial(bits.as_symbols(), cfg.significance); }));
        break;
      case TestKind::kRuns:
        reports.push_back(detail::guarded(name, [&] { return runs_test(bits, cfg.significance); }));
        break;
      case TestKind::kSerialCorrelation:
        reports.push_back(detail::guarded(name, [&] { return serial_correlation(bits, cfg.serial_lag, cfg.significance); }));
        break;
      case TestKind::kEntropy: {
        auto r = detail::descriptive("entropy", entropy_rate(bits));
        r.params["max"] = 1.0;
        reports.push_back(std::move(r));
        break;
      }
      case TestKind::kBias: {
        auto r = detail::descriptive("bias", bias_estimate(bits));
        r.params["std_error"] = bias_std_error(bits.size());
        reports.push_back(std::move(r));
        break;
      }
    }
  }
  const auto packed = pack_bits(bits);
  return detail::aggregate(std::move(reports), sha256_hex(packed));
}

/// Symbol-stream variant; bit-only tests are reported as not-applicable.
inline SuiteResult run_suite(const SymbolStream& stream, const SuiteConfig& cfg) {
  if (stream.empty()) throw std::invalid_argument("run_suite: empty stream");
  std::vector<TestReport> reports;
  for (TestKind k : cfg.tests) {
    const auto name = to_string(k);
    switch (k) {
      case TestKind::kChiSquare:
        reports.push_back(detail::guarded(name, [&] { return chi_square_multinomial(stream, cfg.significance); }));
        break;
      case TestKind::kEntropy: {
        auto r = detail::descriptive("entropy", entropy_rate(stream));
        r.params["max"] = std::log2(static_cast<double>(stream.alphabet_size()));
        reports.push_back(std::move(r));
        break;
      }
      default:
        reports.push_back(detail::not_applicable(std::string(name), "requires a bit stream"));
    }
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(4 * stream.size());
  for (std::uint32_t s : stream.symbols())
    for (int sh = 0; sh < 32; sh += 8) bytes.push_back(static_cast<std::uint8_t>(s >> sh));
  return detail::aggregate(std::move(reports), sha256_hex(bytes));
}

}  // namespace qrng::stat
