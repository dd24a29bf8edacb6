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

// Block-partitioned trial generation. Events are split into fixed-size
// blocks; block i draws from master.substream(i). Output is the blocks'
// results concatenated in block order, so it depends on the seed and the
// block size but not on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qrng/extract.hpp"
#include "qrng/protocols.hpp"
#include "qrng/qcore.hpp"
#include "qrng/random_source.hpp"

namespace qrng {

inline constexpr std::uint64_t kDefaultBlockSize = 1u << 16;

/// Calls fn(block_rng, first_index, count, out) for every block and
/// concatenates the per-block outputs in order.
template <class T, class BlockFn>
std::vector<T> run_blocks(std::uint64_t events, std::uint64_t block_size, const RandomSource& master,
                          unsigned workers, BlockFn&& fn) {
  if (block_size == 0) throw std::invalid_argument("block size must be >= 1");
  const std::uint64_t blocks = (events + block_size - 1) / block_size;
  std::vector<std::vector<T>> parts(blocks);
  auto run_one = [&](std::uint64_t i) {
    RandomSource rng = master.substream(i);
    const std::uint64_t first = i * block_size;
    const std::uint64_t count = std::min(block_size, events - first);
    fn(rng, first, count, parts[i]);
  };

  workers = std::max(1u, workers);
  if (workers == 1 || blocks <= 1) {
    for (std::uint64_t i = 0; i < blocks; ++i) run_one(i);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    const auto n = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
    for (unsigned w = 0; w < n; ++w)
      pool.emplace_back([&] {
        for (std::uint64_t i = next++; i < blocks; i = next++) {
          try {
            run_one(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    pool.clear();
    if (error) std::rethrow_exception(error);
  }

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<T> out;
  out.reserve(total);
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

enum class ProtocolKind { kSingleConjugate, kEprXor, kEprAdaptive };

inline std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::kSingleConjugate: return "single-conjugate";
    case ProtocolKind::kEprXor: return "epr-xor";
    default: return "epr-adaptive";
  }
}

inline ProtocolKind parse_protocol(std::string_view s) {
  if (s == "single-conjugate") return ProtocolKind::kSingleConjugate;
  if (s == "epr-xor") return ProtocolKind::kEprXor;
  if (s == "epr-adaptive") return ProtocolKind::kEprAdaptive;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "'");
}

enum class BasisChoice { kComputational, kFourier };

inline std::string_view to_string(BasisChoice b) { return b == BasisChoice::kFourier ? "fourier" : "computational"; }

inline BasisChoice parse_basis_choice(std::string_view s) {
  if (s == "computational") return BasisChoice::kComputational;
  if (s == "fourier") return BasisChoice::kFourier;
  throw std::invalid_argument("unknown basis '" + std::string(s) + "'");
}

inline Basis make_basis(BasisChoice b, std::size_t dim) {
  return b == BasisChoice::kFourier ? fourier_basis(dim) : Basis::computational(dim);
}

struct ProtocolConfig {
  ProtocolKind kind = ProtocolKind::kSingleConjugate;
  std::size_t dim = 3;                          // single-conjugate
  SpinLabel spin = SpinLabel::half();           // epr-*
  BasisChoice prep_basis = BasisChoice::kComputational;
  std::size_t prep_index = 0;
  BasisChoice meas_basis = BasisChoice::kFourier;
  double theta_a = 0.0;                         // radians
  double theta_b = 0.0;                         // radians, epr-xor
  AdaptationMap adapt;                          // epr-adaptive
  DetectorModel det_a;
  DetectorModel det_b;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  std::uint64_t block_size = kDefaultBlockSize;

  std::size_t outcome_dim() const { return kind == ProtocolKind::kSingleConjugate ? dim : spin.dim(); }

  void validate() const {
    if (events < 1) throw std::invalid_argument("events: N must be >= 1");
    if (block_size < 1) throw std::invalid_argument("block-size: must be >= 1");
    if (kind == ProtocolKind::kSingleConjugate) {
      if (dim < 2) throw std::invalid_argument("dim: must be >= 2");
      if (prep_index >= dim) throw std::invalid_argument("prep-index: out of range for dim");
    } else {
      if (!std::isfinite(theta_a) || !std::isfinite(theta_b)) throw std::invalid_argument("theta: angles must be finite");
      det_b.validate(spin.dim());
    }
    if (kind == ProtocolKind::kEprAdaptive) adapt.validate(spin.dim());
    det_a.validate(outcome_dim());
  }
};

/// Runs the configured protocol for cfg.events trials drawing from master
/// (cfg.seed is ignored).
inline std::vector<TrialRecord> generate_trials(const ProtocolConfig& cfg, const RandomSource& master,
                                                unsigned workers = 1) {
  cfg.validate();
  switch (cfg.kind) {
    case ProtocolKind::kSingleConjugate: {
      const StateVector prep = prepare_basis_state(make_basis(cfg.prep_basis, cfg.dim), cfg.prep_index);
      const SingleParticleSampler sampler(prep, make_basis(cfg.meas_basis, cfg.dim), cfg.det_a);
      return run_blocks<TrialRecord>(cfg.events, cfg.block_size, master, workers,
                                     [&](RandomSource& rng, std::uint64_t first, std::uint64_t count, auto& out) {
                                       out.reserve(count);
                                       for (std::uint64_t i = 0; i < count; ++i)
                                         out.push_back(TrialRecord{first + i, sampler(rng), std::nullopt, false, 0.0, 0.0});
                                     });
    }
    case ProtocolKind::kEprXor: {
      const EprSampler sampler(cfg.spin, cfg.theta_a, cfg.theta_b, cfg.det_a, cfg.det_b);
      return run_blocks<TrialRecord>(cfg.events, cfg.block_size, master, workers,
                                     [&](RandomSource& rng, std::uint64_t first, std::uint64_t count, auto& out) {
                                       out.reserve(count);
                                       for (std::uint64_t i = 0; i < count; ++i) out.push_back(sampler(rng, first + i));
                                     });
    }
    default: {
      const AdaptiveEprSampler sampler(cfg.spin, cfg.theta_a, cfg.adapt, cfg.det_a, cfg.det_b);
      return run_blocks<TrialRecord>(cfg.events, cfg.block_size, master, workers,
                                     [&](RandomSource& rng, std::uint64_t first, std::uint64_t count, auto& out) {
                                       out.reserve(count);
                                       for (std::uint64_t i = 0; i < count; ++i) out.push_back(sampler(rng, first + i));
                                     });
    }
  }
}

inline std::vector<TrialRecord> generate_trials(const ProtocolConfig& cfg, unsigned workers = 1) {
  return generate_trials(cfg, RandomSource(cfg.seed), workers);
}

/// Alice's outcomes of the trials that survived coincidence gating.
inline SymbolStream side_a_symbols(std::span<const TrialRecord> trials, std::size_t dim) {
  std::vector<std::uint32_t> out;
  out.reserve(trials.size());
  for (const auto& t : trials)
    if (!t.discarded()) out.push_back(static_cast<std::uint32_t>(*t.a));
  return SymbolStream(dim, std::move(out));
}

inline SymbolStream side_b_symbols(std::span<const TrialRecord> trials, std::size_t dim) {
  std::vector<std::uint32_t> out;
  out.reserve(trials.size());
  for (const auto& t : trials)
    if (!t.discarded() && t.two_sided) out.push_back(static_cast<std::uint32_t>(*t.b));
  return SymbolStream(dim, std::move(out));
}

/// Block-parallel counterpart of correlation_at.
inline double correlation_blocked(double theta_a, double theta_b, std::uint64_t n, const RandomSource& master,
                                  std::uint64_t block_size, unsigned workers) {
  if (n == 0) throw std::invalid_argument("correlation estimate needs N >= 1");
  const EprSampler sampler(SpinLabel::half(), theta_a, theta_b, DetectorModel::ideal(), DetectorModel::ideal());
  const auto sums = run_blocks<std::int64_t>(n, block_size, master, workers,
                                             [&](RandomSource& rng, std::uint64_t, std::uint64_t count, auto& out) {
                                               std::int64_t s = 0;
                                               for (std::uint64_t i = 0; i < count; ++i) {
                                                 const auto r = sampler(rng);
                                                 s += (*r.a == *r.b) ? 1 : -1;
                                               }
                                               out.push_back(s);
                                             });
  std::int64_t total = 0;
  for (auto s : sums) total += s;
  return static_cast<double>(total) / static_cast<double>(n);
}

}  // namespace qrng
