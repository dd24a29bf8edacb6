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

// Reduced-size invariant checks shared by `qrng selftest` and the test
// suites.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qrng/extract.hpp"
#include "qrng/protocols.hpp"
#include "qrng/qcore.hpp"
#include "qrng/runner.hpp"
#include "qrng/statkit.hpp"

namespace qrng {

struct SelftestCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline SelftestCheck check(std::string name, const std::function<std::string()>& body) {
  // body returns an empty string on success, a diagnostic otherwise.
  try {
    std::string msg = body();
    return {std::move(name), msg.empty(), std::move(msg)};
  } catch (const std::exception& e) {
    return {std::move(name), false, std::string("exception: ") + e.what()};
  }
}

inline const std::vector<SpinLabel>& all_spins() {
  static const std::vector<SpinLabel> spins{SpinLabel::half(), SpinLabel::one(), SpinLabel::three_halves()};
  return spins;
}

}  // namespace detail

inline std::vector<SelftestCheck> run_selftest(std::uint64_t seed = 20260101) {
  using std::numbers::pi;
  std::vector<SelftestCheck> out;
  const RandomSource master(seed);

  out.push_back(detail::check("basis unitarity", [] {
    for (std::size_t d = 2; d <= 6; ++d)
      if (fourier_basis(d).unitarity_residual() >= kUnitarityTolerance) return "fourier d=" + std::to_string(d);
    for (SpinLabel s : detail::all_spins())
      for (int k = 0; k < 12; ++k)
        if (spin_rotation_basis(s, k * pi / 6).unitarity_residual() >= kUnitarityTolerance)
          return "spin " + s.to_string();
    return std::string();
  }));

  out.push_back(detail::check("rotation group property", [] {
    for (SpinLabel s : detail::all_spins())
      for (double t1 : {0.3, 1.1, -2.0})
        for (double t2 : {0.7, 2.5}) {
          const ComplexMatrix lhs = spin_rotation(s, t1) * spin_rotation(s, t2);
          if ((lhs - spin_rotation(s, t1 + t2)).cwiseAbs().maxCoeff() >= 1e-9) return "spin " + s.to_string();
        }
    return std::string();
  }));

  out.push_back(detail::check("singlet rotational invariance", [] {
    for (SpinLabel s : detail::all_spins()) {
      const JointState psi = singlet_state(s);
      for (int k = 0; k < 12; ++k) {
        const ComplexMatrix u = spin_rotation(s, k * pi / 6);
        if ((apply_local(u, u, psi).amps() - psi.amps()).norm() >= 1e-9)
          return "spin " + s.to_string() + " at step " + std::to_string(k);
      }
    }
    return std::string();
  }));

  out.push_back(detail::check("uniqueness (same-angle anticorrelation)", [&] {
    std::uint64_t stream = 0;
    for (SpinLabel s : detail::all_spins())
      for (double deg : {0.0, 30.0}) {
        RandomSource rng = master.substream(stream++);
        const double t = degrees_to_radians(deg);
        const EprSampler sampler(s, t, t, DetectorModel::ideal(), DetectorModel::ideal());
        for (int i = 0; i < 20000; ++i) {
          const auto r = sampler(rng);
          if (*r.b != s.dim() - 1 - *r.a) return "spin " + s.to_string() + " at " + std::to_string(deg) + " deg";
        }
      }
    return std::string();
  }));

  out.push_back(detail::check("correlation law", [&] {
    const std::uint64_t n = 50000;
    for (int k = 0; k <= 6; ++k) {
      const double dt = k * pi / 6;
      RandomSource rng = master.substream(100 + static_cast<std::uint64_t>(k));
      const double e = correlation_estimate(dt, n, rng);
      if (std::abs(e + std::cos(dt)) > 5.0 / std::sqrt(static_cast<double>(n)))
        return "E(" + std::to_string(dt) + ") = " + std::to_string(e);
    }
    return std::string();
  }));

  out.push_back(detail::check("marginal uniformity", [&] {
    const std::uint64_t n = 50000;
    RandomSource rng = master.substream(200);
    const EprSampler sampler(SpinLabel::half(), 0.4, 1.3, DetectorModel::ideal(), DetectorModel::ideal());
    std::uint64_t ones_a = 0, ones_b = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto r = sampler(rng);
      ones_a += *r.a;
      ones_b += *r.b;
    }
    const double tol = 4.0 * 0.5 / std::sqrt(static_cast<double>(n));
    const double fa = static_cast<double>(ones_a) / n - 0.5, fb = static_cast<double>(ones_b) / n - 0.5;
    return (std::abs(fa) <= tol && std::abs(fb) <= tol) ? std::string() : "marginal bias " + std::to_string(fa);
  }));

  out.push_back(detail::check("detector bias law", [&] {
    const std::uint64_t n = 100000;
    for (double beta : {0.0, 0.1, 0.5, 1.0}) {
      RandomSource rng = master.substream(300 + static_cast<std::uint64_t>(beta * 10));
      const DetectorModel det{beta, 1, 0.0};
      std::uint64_t ones = 0;
      for (std::uint64_t i = 0; i < n; ++i) ones += *apply_detector(rng.bernoulli(0.5) ? 1 : 0, det, rng);
      const double bias = static_cast<double>(ones) / n - 0.5;
      if (std::abs(bias - beta / 2) > 4.0 * 0.5 / std::sqrt(static_cast<double>(n)))
        return "beta " + std::to_string(beta);
    }
    return std::string();
  }));

  out.push_back(detail::check("xor and packing identities", [&] {
    RandomSource rng = master.substream(400);
    std::vector<std::uint8_t> raw(1001);
    for (auto& b : raw) b = rng.bernoulli(0.5);
    const BitStream bits(raw);
    if (xor_combine(bits, bits).count_ones() != 0) return std::string("a xor a != 0");
    if (!(unpack_bits(pack_bits(bits), bits.size()) == bits)) return std::string("pack round trip");
    return std::string();
  }));

  out.push_back(detail::check("battery on simulated fair bits", [&] {
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::kEprXor;
    cfg.theta_b = pi / 2;
    cfg.events = 100000;
    cfg.seed = seed;
    const auto trials = generate_trials(cfg);
    const auto bits = xor_combine(to_bits(side_a_symbols(trials, 2)), to_bits(side_b_symbols(trials, 2)));
    const auto suite = stat::run_suite(bits, stat::SuiteConfig::full());
    return suite.overall ? std::string() : std::string("suite failed");
  }));

  return out;
}

}  // namespace qrng
