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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "qrng/cli/app.hpp"
#include "qrng/extract.hpp"
#include "qrng/protocols.hpp"
#include "qrng/qcore.hpp"
#include "qrng/runner.hpp"
#include "qrng/statkit.hpp"

namespace {

using namespace qrng;
namespace fs = std::filesystem;

int failures = 0;

void verdict(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void correlation_law() {
  const RandomSource master(101);
  double worst = 0.0;
  double worst_angle = 0.0;
  for (int k = 0; k <= 18; ++k) {
    const double deg = 10.0 * k;
    const double e = correlation_blocked(0.0, degrees_to_radians(deg), 200000, master.substream(k),
                                         kDefaultBlockSize, 1);
    const double err = std::abs(e + std::cos(degrees_to_radians(deg)));
    if (err > worst) {
      worst = err;
      worst_angle = deg;
    }
  }
  verdict(1, "singlet correlation law", worst <= 0.01,
          fmt("max |E - (-cos)| = %.5f at %.0f deg over 19 angles, N=2e5 (tol 0.01)", worst, worst_angle));
}

void chsh_certificate() {
  cli::RunConfig rc;
  rc.events = 1000000;
  rc.seed = 202;
  const auto r = cli::cmd_chsh(rc);
  const auto& d = r.report["derived"];
  const double s = std::abs(d["S"].get<double>());
  const bool flagged = d["exceedsClassicalBound"].get<bool>();
  verdict(2, "CHSH certificate", s >= 2.808 && s <= 2.848 && flagged,
          fmt("|S| = %.4f +- %.4f in [2.808, 2.848], flagged = %s", s, d["stdError"].get<double>(),
              flagged ? "yes" : "no"));
}

void uniqueness() {
  std::uint64_t off = 0;
  std::uint64_t total = 0;
  std::uint64_t seed = 303;
  for (SpinLabel spin : {SpinLabel::half(), SpinLabel::one(), SpinLabel::three_halves()}) {
    for (double deg : {0.0, 30.0}) {
      ProtocolConfig cfg;
      cfg.kind = ProtocolKind::kEprXor;
      cfg.spin = spin;
      cfg.theta_a = cfg.theta_b = degrees_to_radians(deg);
      cfg.events = 1000000;
      cfg.seed = seed++;
      const std::size_t top = spin.dim() - 1;
      for (const auto& t : generate_trials(cfg)) {
        ++total;
        if (*t.b != top - *t.a) ++off;
      }
    }
  }
  verdict(3, "uniqueness", off == 0,
          fmt("%llu off-anti-diagonal pairs in %llu trials (j = 1/2, 1, 3/2 at 0 and 30 deg)",
              static_cast<unsigned long long>(off), static_cast<unsigned long long>(total)));
}

void rotational_invariance() {
  const std::array<double, 12> grid{0.0, 0.1, 0.5, 1.0, std::numbers::pi / 3, std::numbers::pi / 2, 2.0, 2.5,
                                    std::numbers::pi, 4.0, 5.5, -0.75};
  double worst = 0.0;
  for (SpinLabel spin : {SpinLabel::half(), SpinLabel::one(), SpinLabel::three_halves()}) {
    const JointState psi = singlet_state(spin);
    for (double theta : grid) {
      const auto u = spin_rotation(spin, theta);
      const JointState rotated = apply_local(u, u, psi);
      double sq = 0.0;
      for (std::size_t i = 0; i < spin.dim(); ++i)
        for (std::size_t j = 0; j < spin.dim(); ++j) sq += std::norm(rotated.amp(i, j) - psi.amp(i, j));
      worst = std::max(worst, std::sqrt(sq));
    }
  }
  verdict(4, "singlet rotational invariance", worst < 1e-9,
          fmt("max ||(U x U) psi - psi|| = %.3g over 12 angles x 3 spins (tol 1e-9)", worst));
}

void born_fidelity() {
  bool ok = true;
  std::string detail;
  for (std::size_t d : {std::size_t{3}, std::size_t{4}}) {
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::kSingleConjugate;
    cfg.dim = d;
    cfg.prep_basis = BasisChoice::kFourier;
    cfg.meas_basis = BasisChoice::kComputational;
    cfg.events = 100000;
    cfg.seed = 500 + d;
    const auto trials = generate_trials(cfg);
    const auto r = stat::chi_square_multinomial(side_a_symbols(trials, d));
    ok = ok && *r.p_value > 0.001;
    detail += fmt("d=%zu chi2 p = %.4f; ", d, *r.p_value);
  }
  verdict(5, "Born sampling fidelity", ok, detail + "N=1e5 (need p > 0.001)");
}

void xor_law(const fs::path& dir) {
  auto run = [&](double theta_b_deg, double beta, std::uint64_t seed) {
    cli::RunConfig rc;
    rc.protocol = "epr-xor";
    rc.events = 1000000;
    rc.seed = seed;
    rc.theta_b_deg = theta_b_deg;
    rc.detector_bias = beta;
    rc.out = (dir / "xor.bin").string();
    const auto r = cli::cmd_generate(rc);
    const auto bits = cli::read_bitstream(rc.out).bits;
    return std::pair{r.report["derived"]["bias"]["value"].get<double>(), bits};
  };
  const auto [biased, b1] = run(90.0, 0.1, 601);
  const auto [ideal, b2] = run(90.0, 0.0, 602);
  const auto [aligned, b3] = run(0.0, 0.0, 603);
  const bool constant = b3.count_ones() == b3.size();
  const bool ok = std::abs(std::abs(biased) - 0.005) <= 0.0015 && std::abs(ideal) <= 0.0015 && constant &&
                  aligned == 0.5;
  verdict(6, "XOR debiasing law", ok,
          fmt("beta=0.1: |bias| = %.5f (0.005 +- 0.0015); ideal: |bias| = %.5f (<= 0.0015); "
              "0 deg: bias = %+.6f, constant = %s",
              std::abs(biased), std::abs(ideal), aligned, constant ? "yes" : "no"));
}

void downgrading() {
  ProtocolConfig cfg;
  cfg.kind = ProtocolKind::kSingleConjugate;
  cfg.dim = 3;
  cfg.events = 300000;
  cfg.seed = 707;
  const auto symbols = side_a_symbols(generate_trials(cfg), 3);
  const BitStream bits = eliminate(symbols, {0, 1});
  const double n = static_cast<double>(cfg.events);
  const double tol = 3.0 * std::sqrt(n * 2.0 / 9.0);
  const double len = static_cast<double>(bits.size());
  const auto mono = stat::monobit(bits);
  const auto runs = stat::runs_test(bits);
  const auto serial = stat::serial_correlation(bits, 1);
  const double h = stat::entropy_rate(bits);
  const bool ok = std::abs(len - 200000.0) <= tol && mono.pass && runs.pass && serial.pass && h >= 0.999;
  verdict(7, "downgrading (eliminate)", ok,
          fmt("len = %.0f (2e5 +- %.0f); p monobit %.4f, runs %.4f, serial %.4f; entropy %.6f (>= 0.999)", len,
              tol, *mono.p_value, *runs.p_value, *serial.p_value, h));
}

void von_neumann() {
  RandomSource rng(808);
  const std::size_t n = 1000000;
  std::vector<std::uint8_t> raw(n);
  for (auto& b : raw) b = rng.bernoulli(0.7) ? 1 : 0;
  const BitStream out = von_neumann_debias(BitStream(std::move(raw)));
  // Each of the n/2 pairs is accepted with probability 2pq = 0.42, giving
  // 0.21 output bits per input bit.
  const double pairs = n / 2.0;
  const double q = 2.0 * 0.7 * 0.3;
  const double yield = static_cast<double>(out.size()) / n;
  const double sigma = std::sqrt(pairs * q * (1.0 - q)) / n;
  const auto mono = stat::monobit(out);
  const bool ok = mono.pass && std::abs(yield - 0.21) <= 3.0 * sigma;
  verdict(8, "von Neumann baseline", ok,
          fmt("yield = %.5f (0.21 +- %.5f); monobit p = %.4f", yield, 3.0 * sigma, *mono.p_value));
}

void calibration() {
  const auto cfg = stat::SuiteConfig::full();
  std::array<int, 4> fails{};
  const std::array<const char*, 4> names{"monobit", "chi_square", "runs", "serial_correlation"};
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    RandomSource rng(900000 + static_cast<std::uint64_t>(s));
    std::vector<std::uint8_t> raw(100000);
    for (auto& b : raw) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    const auto suite = stat::run_suite(BitStream(std::move(raw)), cfg);
    for (std::size_t t = 0; t < names.size(); ++t)
      if (!suite.find(names[t])->pass) ++fails[t];
  }
  const int worst = *std::max_element(fails.begin(), fails.end());
  verdict(9, "battery calibration", worst <= seeds / 100,
          fmt("failures per 1000 seeds: monobit %d, chi_square %d, runs %d, serial %d (max 10)", fails[0], fails[1],
              fails[2], fails[3]));
}

void determinism_and_rate(const fs::path& dir) {
  std::vector<std::string> files;
  for (unsigned w : {1u, 2u, 8u}) {
    cli::RunConfig rc;
    rc.protocol = "epr-xor";
    rc.spin = "3/2";
    rc.partition = "0,3|1,2";
    rc.events = 1000000;
    rc.seed = 1001;
    rc.theta_b_deg = 90;
    rc.detector_bias = 0.05;
    rc.no_click_prob = 0.02;
    rc.workers = w;
    rc.out = (dir / ("w" + std::to_string(w) + ".bin")).string();
    cli::cmd_generate(rc);
    files.push_back(cli::read_file(rc.out) + cli::read_file(cli::sidecar_path(rc.out)));
  }
  // The sidecar embeds the worker-independent config only, so both files must match.
  const bool identical = files[0] == files[1] && files[0] == files[2];

  ProtocolConfig cfg;
  cfg.kind = ProtocolKind::kEprXor;
  cfg.theta_b = std::numbers::pi / 2;
  cfg.events = 4000000;
  cfg.seed = 1002;
  const auto t0 = std::chrono::steady_clock::now();
  const auto trials = generate_trials(cfg, 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rate = static_cast<double>(trials.size()) / secs;
  verdict(10, "determinism / throughput", identical && rate >= 1e6,
          fmt("workers 1/2/8 byte-identical = %s; single-worker rate = %.3g spin-1/2 EPR trials/s (>= 1e6)",
              identical ? "yes" : "no", rate));
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "qrng_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  try {
    correlation_law();
    chsh_certificate();
    uniqueness();
    rotational_invariance();
    born_fidelity();
    xor_law(dir);
    downgrading();
    von_neumann();
    calibration();
    determinism_and_rate(dir);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(dir);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
