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

// Generation protocols: single-particle preparation/measurement mismatch,
// singlet-pair trials at fixed or adaptively chosen angles, a parametric
// detector channel and the correlation/CHSH estimators.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrng/qcore.hpp"
#include "qrng/random_source.hpp"

namespace qrng {

/// Outcome index, or std::nullopt for a no-click event.
using Outcome = std::optional<std::size_t>;

/// Imperfect detector: with probability no_click_prob the event is lost;
/// otherwise with probability stick_prob the detector reports
/// preferred_outcome regardless of the true one.
struct DetectorModel {
  double stick_prob = 0.0;
  std::size_t preferred_outcome = 0;
  double no_click_prob = 0.0;

  static DetectorModel ideal() { return {}; }

  bool is_ideal() const { return stick_prob == 0.0 && no_click_prob == 0.0; }

  void validate(std::size_t dim) const {
    if (!(stick_prob >= 0.0 && stick_prob <= 1.0))
      throw std::invalid_argument("detector stick probability must lie in [0,1]");
    if (!(no_click_prob >= 0.0 && no_click_prob < 1.0))
      throw std::invalid_argument("detector no-click probability must lie in [0,1)");
    if (preferred_outcome >= dim)
      throw std::invalid_argument("detector preferred outcome " + std::to_string(preferred_outcome) +
                                  " out of range for dim " + std::to_string(dim));
  }
};

/// One trial. For single-particle protocols b is empty and two_sided is false.
struct TrialRecord {
  std::uint64_t index = 0;
  Outcome a;
  Outcome b;
  bool two_sided = false;
  double theta_a = 0.0;
  double theta_b = 0.0;

  /// Coincidence gating: a no-click on any measured side discards the trial.
  bool discarded() const { return !a.has_value() || (two_sided && !b.has_value()); }
};

/// Bob's measurement angle as a function of Alice's outcome.
struct AdaptationMap {
  std::vector<double> angles;  // angles[a], radians

  static AdaptationMap constant(std::size_t dim, double theta) { return {std::vector<double>(dim, theta)}; }

  void validate(std::size_t dim) const {
    if (angles.size() != dim)
      throw std::invalid_argument("adaptation map must assign an angle to each of the " + std::to_string(dim) +
                                  " outcomes (got " + std::to_string(angles.size()) + ")");
    for (double t : angles)
      if (!std::isfinite(t)) throw std::invalid_argument("adaptation angles must be finite");
  }

  double operator()(std::size_t a) const { return angles.at(a); }
};

inline Outcome apply_detector(std::size_t outcome, const DetectorModel& det, RandomSource& rng) {
  if (det.no_click_prob > 0.0 && rng.bernoulli(det.no_click_prob)) return std::nullopt;
  if (det.stick_prob > 0.0 && rng.bernoulli(det.stick_prob)) return det.preferred_outcome;
  return outcome;
}

inline StateVector prepare_basis_state(const Basis& basis, std::size_t index) {
  if (index >= basis.dim())
    throw std::invalid_argument("preparation index " + std::to_string(index) + " out of range for dim " +
                                std::to_string(basis.dim()));
  return basis.column(index);
}

/// Born-rule sampler for a fixed preparation and measurement.
class SingleParticleSampler {
 public:
  SingleParticleSampler(const StateVector& prep, const Basis& meas, DetectorModel det)
      : dist_(born_probabilities(prep, meas)), det_(det) {
    det_.validate(meas.dim());
  }

  Outcome operator()(RandomSource& rng) const { return apply_detector(sample(dist_, rng), det_, rng); }

  const OutcomeDistribution& distribution() const { return dist_; }

 private:
  OutcomeDistribution dist_;
  DetectorModel det_;
};

inline Outcome single_trial(const StateVector& prep, const Basis& meas, const DetectorModel& det, RandomSource& rng) {
  return SingleParticleSampler(prep, meas, det)(rng);
}

/// Total-spin-zero state of two spin-j particles, computational order
/// m = +j ... -j on each side.
inline JointState singlet_state(SpinLabel spin) {
  const std::size_t d = spin.dim();
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d * d));
  auto at = [&](std::size_t a, std::size_t b) -> Complex& { return v(static_cast<Eigen::Index>(a * d + b)); };
#ifdef QRNG_MUTATION_FLIP_SINGLET_SIGN
  // Mutation build: second displayed term carries the wrong sign.
  constexpr double flip = -1.0;
#else
  constexpr double flip = 1.0;
#endif
  switch (spin.twice_j()) {
    case 1: {
      const double c = 1.0 / std::numbers::sqrt2;
      at(0, 1) = c;          // |+1/2, -1/2>
      at(1, 0) = -flip * c;  // |-1/2, +1/2>
      break;
    }
    case 2: {
      const double c = 1.0 / std::numbers::sqrt3;
      at(1, 1) = -c;        // |0, 0>
      at(2, 0) = flip * c;  // |-1, 1>
      at(0, 2) = c;         // |1, -1>
      break;
    }
    default: {
      at(0, 3) = 0.5;          // |3/2, -3/2>
      at(3, 0) = -flip * 0.5;  // |-3/2, 3/2>
      at(1, 2) = -0.5;         // |1/2, -1/2>
      at(2, 1) = 0.5;          // |-1/2, 1/2>
      break;
    }
  }
  return JointState(d, d, std::move(v));
}

/// Singlet pair measured at fixed angles. The joint distribution is built
/// once; each trial costs one uniform draw plus detector draws.
class EprSampler {
 public:
  EprSampler(SpinLabel spin, double theta_a, double theta_b, DetectorModel det_a, DetectorModel det_b)
      : spin_(spin),
        theta_a_(theta_a),
        theta_b_(theta_b),
        det_a_(det_a),
        det_b_(det_b),
        joint_(joint_born_probabilities(singlet_state(spin), spin_rotation_basis(spin, theta_a),
                                        spin_rotation_basis(spin, theta_b))) {
    det_a_.validate(spin.dim());
    det_b_.validate(spin.dim());
  }

  TrialRecord operator()(RandomSource& rng, std::uint64_t index = 0) const {
    const std::size_t pair = sample(joint_, rng);
    const std::size_t d = spin_.dim();
    TrialRecord rec{index, std::nullopt, std::nullopt, true, theta_a_, theta_b_};
    rec.a = apply_detector(pair / d, det_a_, rng);
    rec.b = apply_detector(pair % d, det_b_, rng);
    return rec;
  }

  const OutcomeDistribution& joint_distribution() const { return joint_; }
  SpinLabel spin() const { return spin_; }

 private:
  SpinLabel spin_;
  double theta_a_;
  double theta_b_;
  DetectorModel det_a_;
  DetectorModel det_b_;
  OutcomeDistribution joint_;
};

inline TrialRecord epr_trial(SpinLabel spin, double theta_a, double theta_b, const DetectorModel& det_a,
                             const DetectorModel& det_b, RandomSource& rng) {
  return EprSampler(spin, theta_a, theta_b, det_a, det_b)(rng);
}

/// Delayed-choice variant: Alice's outcome is drawn from her marginal, then
/// Bob measures at adapt(a) and his outcome is drawn from the exact
/// conditional distribution given a.
class AdaptiveEprSampler {
 public:
  AdaptiveEprSampler(SpinLabel spin, double theta_a, AdaptationMap adapt, DetectorModel det_a, DetectorModel det_b)
      : spin_(spin), theta_a_(theta_a), adapt_(std::move(adapt)), det_a_(det_a), det_b_(det_b) {
    const std::size_t d = spin.dim();
    adapt_.validate(d);
    det_a_.validate(d);
    det_b_.validate(d);
    const JointState psi = singlet_state(spin);
    const Basis basis_a = spin_rotation_basis(spin, theta_a);
    std::vector<double> marginal(d, 0.0);
    conditional_.reserve(d);
    for (std::size_t a = 0; a < d; ++a) {
      const OutcomeDistribution joint = joint_born_probabilities(psi, basis_a, spin_rotation_basis(spin, adapt_(a)));
      double pa = 0.0;
      for (std::size_t b = 0; b < d; ++b) pa += joint[a * d + b];
      marginal[a] = pa;
      std::vector<double> cond(d, 0.0);
      if (pa > 0.0) {
        for (std::size_t b = 0; b < d; ++b) cond[b] = joint[a * d + b] / pa;
      } else {
        cond[0] = 1.0;  // unreachable row
      }
      conditional_.emplace_back(detail::to_distribution(std::move(cond)));
    }
    marginal_.emplace(detail::to_distribution(std::move(marginal)));
  }

  TrialRecord operator()(RandomSource& rng, std::uint64_t index = 0) const {
    const std::size_t a = sample(*marginal_, rng);
    const std::size_t b = sample(conditional_[a], rng);
    TrialRecord rec{index, std::nullopt, std::nullopt, true, theta_a_, adapt_(a)};
    rec.a = apply_detector(a, det_a_, rng);
    rec.b = apply_detector(b, det_b_, rng);
    return rec;
  }

  const OutcomeDistribution& alice_marginal() const { return *marginal_; }
  const OutcomeDistribution& bob_conditional(std::size_t a) const { return conditional_.at(a); }

 private:
  SpinLabel spin_;
  double theta_a_;
  AdaptationMap adapt_;
  DetectorModel det_a_;
  DetectorModel det_b_;
  std::optional<OutcomeDistribution> marginal_;
  std::vector<OutcomeDistribution> conditional_;
};

inline TrialRecord adaptive_epr_trial(SpinLabel spin, double theta_a, const AdaptationMap& adapt,
                                      const DetectorModel& det_a, const DetectorModel& det_b, RandomSource& rng) {
  return AdaptiveEprSampler(spin, theta_a, adapt, det_a, det_b)(rng);
}

/// Spin-1/2 correlation <A B> with outcome 0 -> +1 and 1 -> -1, ideal
/// detectors, Alice at theta_a and Bob at theta_b.
inline double correlation_at(double theta_a, double theta_b, std::uint64_t n, RandomSource& rng) {
  if (n == 0) throw std::invalid_argument("correlation estimate needs N >= 1");
  const EprSampler sampler(SpinLabel::half(), theta_a, theta_b, DetectorModel::ideal(), DetectorModel::ideal());
  std::int64_t sum = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const TrialRecord r = sampler(rng, i);
    sum += (*r.a == *r.b) ? 1 : -1;
  }
  return static_cast<double>(sum) / static_cast<double>(n);
}

inline double correlation_estimate(double delta_theta, std::uint64_t n, RandomSource& rng) {
  return correlation_at(0.0, delta_theta, n, rng);
}

struct ChshResult {
  double s = 0.0;
  double std_error = 0.0;
  // E(a,b), E(a,b'), E(a',b), E(a',b')
  std::array<double, 4> correlations{};
};

/// Standard error of S from the per-setting variances (1 - E^2) / N.
inline double chsh_std_error(const std::array<double, 4>& e, std::uint64_t n) {
  double var = 0.0;
  for (double v : e) var += (1.0 - v * v) / static_cast<double>(n);
  return std::sqrt(var);
}

/// S = E(a,b) - E(a,b') + E(a',b) + E(a',b'), one independent substream per
/// setting.
inline ChshResult chsh_estimate(std::pair<double, double> angles_a, std::pair<double, double> angles_b,
                                std::uint64_t n, RandomSource& rng) {
  if (n == 0) throw std::invalid_argument("CHSH estimate needs N >= 1 per setting");
  const std::array<std::pair<double, double>, 4> settings{{{angles_a.first, angles_b.first},
                                                           {angles_a.first, angles_b.second},
                                                           {angles_a.second, angles_b.first},
                                                           {angles_a.second, angles_b.second}}};
  ChshResult out;
  for (std::size_t k = 0; k < 4; ++k) {
    RandomSource sub = rng.substream(k);
    out.correlations[k] = correlation_at(settings[k].first, settings[k].second, n, sub);
  }
  const auto& e = out.correlations;
  out.s = e[0] - e[1] + e[2] + e[3];
  out.std_error = chsh_std_error(e, n);
  return out;
}

inline constexpr double kClassicalChshBound = 2.0;
inline constexpr double kQuantumChshBound = 2.0 * std::numbers::sqrt2;

inline double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }
inline double radians_to_degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace qrng
