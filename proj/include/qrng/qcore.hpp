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

// Finite-dimensional Hilbert-space machinery: pure states, measurement
// bases, Born-rule probabilities and the two basis families the generators
// use (discrete Fourier and spin-j rotations about y).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qrng/random_source.hpp"

namespace qrng {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kUnitarityTolerance = 1e-10;
inline constexpr double kDistributionTolerance = 1e-10;

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline double unitarity_residual(const ComplexMatrix& u) {
  const auto n = u.cols();
  return (u.adjoint() * u - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Spin quantum number j in {1/2, 1, 3/2}, stored as 2j.
class SpinLabel {
 public:
  static SpinLabel half() { return SpinLabel(1); }
  static SpinLabel one() { return SpinLabel(2); }
  static SpinLabel three_halves() { return SpinLabel(3); }

  static SpinLabel from_twice_j(int twice_j) {
    detail::require(twice_j >= 1 && twice_j <= 3,
                    "unsupported spin: 2j = " + std::to_string(twice_j) + " (supported: 1/2, 1, 3/2)");
    return SpinLabel(twice_j);
  }

  /// Accepts "1/2", "1", "3/2" (also "0.5", "1.5").
  static SpinLabel parse(std::string_view text) {
    if (text == "1/2" || text == "0.5") return half();
    if (text == "1" || text == "1.0") return one();
    if (text == "3/2" || text == "1.5") return three_halves();
    throw std::invalid_argument("unsupported spin '" + std::string(text) + "' (supported: 1/2, 1, 3/2)");
  }

  static SpinLabel from_dim(std::size_t dim) { return from_twice_j(static_cast<int>(dim) - 1); }

  int twice_j() const { return twice_j_; }
  double j() const { return twice_j_ / 2.0; }
  std::size_t dim() const { return static_cast<std::size_t>(twice_j_) + 1; }
  /// Magnetic quantum number of computational index k (ordered +j ... -j).
  double m(std::size_t k) const { return j() - static_cast<double>(k); }

  std::string to_string() const {
    switch (twice_j_) {
      case 1: return "1/2";
      case 2: return "1";
      default: return "3/2";
    }
  }

  friend bool operator==(SpinLabel, SpinLabel) = default;

 private:
  explicit SpinLabel(int twice_j) : twice_j_(twice_j) {}
  int twice_j_;
};

/// Normalized pure state of a single d-level system.
class StateVector {
 public:
  explicit StateVector(ComplexVector amps) : amps_(std::move(amps)) {
    detail::require(amps_.size() >= 2, "state dimension must be >= 2");
    detail::require(amps_.allFinite(), "state amplitudes must be finite");
    detail::require(std::abs(amps_.squaredNorm() - 1.0) <= kNormTolerance,
                    "state is not normalized: |psi|^2 = " + std::to_string(amps_.squaredNorm()));
  }

  StateVector(std::initializer_list<Complex> amps)
      : StateVector(ComplexVector(Eigen::Map<const ComplexVector>(amps.begin(), static_cast<Eigen::Index>(amps.size())))) {}

  /// Computational basis vector e_k.
  static StateVector basis_vector(std::size_t dim, std::size_t k) {
    detail::require(k < dim, "basis index out of range");
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(k)) = 1.0;
    return StateVector(std::move(v));
  }

  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const ComplexVector& amps() const { return amps_; }
  Complex operator[](std::size_t k) const { return amps_(static_cast<Eigen::Index>(k)); }

 private:
  ComplexVector amps_;
};

/// A d x d unitary; column k is the state of outcome k.
class Basis {
 public:
  explicit Basis(ComplexMatrix columns) : u_(std::move(columns)) {
    detail::require(u_.rows() == u_.cols(), "basis matrix must be square");
    detail::require(u_.rows() >= 2, "basis dimension must be >= 2");
    detail::require(detail::all_finite(u_), "basis entries must be finite");
    const double residual = detail::unitarity_residual(u_);
    detail::require(residual < kUnitarityTolerance,
                    "basis is not unitary: residual " + std::to_string(residual));
  }

  static Basis computational(std::size_t dim) {
    detail::require(dim >= 2, "basis dimension must be >= 2");
    const auto n = static_cast<Eigen::Index>(dim);
    return Basis(ComplexMatrix::Identity(n, n));
  }

  std::size_t dim() const { return static_cast<std::size_t>(u_.rows()); }
  const ComplexMatrix& matrix() const { return u_; }

  StateVector column(std::size_t k) const {
    detail::require(k < dim(), "basis index " + std::to_string(k) + " out of range for dim " + std::to_string(dim()));
    return StateVector(u_.col(static_cast<Eigen::Index>(k)));
  }

  double unitarity_residual() const { return detail::unitarity_residual(u_); }

 private:
  ComplexMatrix u_;
};

/// Normalized pure state of a bipartite system; amplitude of |a>|b> is at
/// index a * dim_b + b.
class JointState {
 public:
  JointState(std::size_t dim_a, std::size_t dim_b, ComplexVector amps)
      : dim_a_(dim_a), dim_b_(dim_b), amps_(std::move(amps)) {
    detail::require(dim_a >= 2 && dim_b >= 2, "joint subsystem dimensions must be >= 2");
    detail::require(static_cast<std::size_t>(amps_.size()) == dim_a * dim_b, "joint amplitude count must be dim_a * dim_b");
    detail::require(amps_.allFinite(), "joint amplitudes must be finite");
    detail::require(std::abs(amps_.squaredNorm() - 1.0) <= kNormTolerance, "joint state is not normalized");
  }

  std::size_t dim_a() const { return dim_a_; }
  std::size_t dim_b() const { return dim_b_; }
  const ComplexVector& amps() const { return amps_; }
  Complex amp(std::size_t a, std::size_t b) const { return amps_(static_cast<Eigen::Index>(a * dim_b_ + b)); }

  /// Amplitudes arranged as a dim_a x dim_b matrix M(a, b).
  ComplexMatrix as_matrix() const {
    ComplexMatrix m(static_cast<Eigen::Index>(dim_a_), static_cast<Eigen::Index>(dim_b_));
    for (std::size_t a = 0; a < dim_a_; ++a)
      for (std::size_t b = 0; b < dim_b_; ++b) m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = amp(a, b);
    return m;
  }

  static JointState from_matrix(const ComplexMatrix& m) {
    const auto da = static_cast<std::size_t>(m.rows());
    const auto db = static_cast<std::size_t>(m.cols());
    ComplexVector v(m.size());
    for (std::size_t a = 0; a < da; ++a)
      for (std::size_t b = 0; b < db; ++b)
        v(static_cast<Eigen::Index>(a * db + b)) = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    return JointState(da, db, std::move(v));
  }

 private:
  std::size_t dim_a_;
  std::size_t dim_b_;
  ComplexVector amps_;
};

/// Probabilities over k outcomes, with a cumulative table for inverse-CDF
/// sampling.
class OutcomeDistribution {
 public:
  explicit OutcomeDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    detail::require(!probs_.empty(), "distribution must have at least one outcome");
    double total = 0.0;
    for (double p : probs_) {
      detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "probability outside [0,1]");
      total += p;
    }
    detail::require(std::abs(total - 1.0) <= kDistributionTolerance,
                    "probabilities sum to " + std::to_string(total) + ", not 1");
    cdf_.resize(probs_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      acc += probs_[k];
      cdf_[k] = acc;
    }
    last_nonzero_ = probs_.size() - 1;
    while (last_nonzero_ > 0 && probs_[last_nonzero_] == 0.0) --last_nonzero_;
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const { return probs_; }
  std::span<const double> cdf() const { return cdf_; }

  /// Inverse CDF over the stored order: first k with u < cdf_k.
  std::size_t quantile(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return last_nonzero_;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::size_t last_nonzero_ = 0;
};

namespace detail {

// Squared moduli with floating-point dust removed: entries in [-1e-12, 0)
// become 0, entries in (1, 1 + 1e-12] become 1, then the vector is
// renormalized.
inline OutcomeDistribution to_distribution(std::vector<double> probs) {
  double total = 0.0;
  for (double& p : probs) {
    if (p < 0.0 && p >= -kNormTolerance) p = 0.0;
    if (p > 1.0 && p <= 1.0 + kNormTolerance) p = 1.0;
    total += p;
  }
  if (total > 0.0)
    for (double& p : probs) p /= total;
  return OutcomeDistribution(std::move(probs));
}

}  // namespace detail

/// P(k) = |<column_k, state>|^2.
inline OutcomeDistribution born_probabilities(const StateVector& state, const Basis& basis) {
  detail::require(state.dim() == basis.dim(), "dimension mismatch: state dim " + std::to_string(state.dim()) +
                                                  " vs basis dim " + std::to_string(basis.dim()));
  const ComplexVector amps = basis.matrix().adjoint() * state.amps();
  std::vector<double> probs(state.dim());
  for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = std::norm(amps(static_cast<Eigen::Index>(k)));
  return detail::to_distribution(std::move(probs));
}

/// P(a, b) = |<colA_a (x) colB_b, joint>|^2, indexed a * dim_b + b.
inline OutcomeDistribution joint_born_probabilities(const JointState& joint, const Basis& basis_a, const Basis& basis_b) {
  detail::require(joint.dim_a() == basis_a.dim() && joint.dim_b() == basis_b.dim(),
                  "dimension mismatch between joint state and measurement bases");
  const ComplexMatrix amps = basis_a.matrix().adjoint() * joint.as_matrix() * basis_b.matrix().conjugate();
  std::vector<double> probs(joint.dim_a() * joint.dim_b());
  for (std::size_t a = 0; a < joint.dim_a(); ++a)
    for (std::size_t b = 0; b < joint.dim_b(); ++b)
      probs[a * joint.dim_b() + b] = std::norm(amps(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  return detail::to_distribution(std::move(probs));
}

inline std::size_t sample(const OutcomeDistribution& dist, RandomSource& rng) {
  return dist.quantile(rng.uniform());
}

/// Columns f_k with entries w^(jk) / sqrt(d), w = exp(2 pi i / d).
/// Mutually unbiased with the computational basis.
inline Basis fourier_basis(std::size_t d) {
  detail::require(d >= 2, "fourier_basis requires d >= 2");
  const auto n = static_cast<Eigen::Index>(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  ComplexMatrix u(n, n);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < d; ++k) {
      // Reduce the exponent mod d first so large products keep full accuracy.
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((j * k) % d) / static_cast<double>(d);
      u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = std::polar(scale, phase);
    }
  return Basis(std::move(u));
}

/// Standard J_y for spin j in the J_z basis ordered m = +j ... -j.
inline ComplexMatrix angular_momentum_y(SpinLabel spin) {
  const auto d = static_cast<Eigen::Index>(spin.dim());
  const double j = spin.j();
  ComplexMatrix jp = ComplexMatrix::Zero(d, d);
  // <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); row index of m+1 is one above m.
  for (Eigen::Index k = 1; k < d; ++k) {
    const double m = spin.m(static_cast<std::size_t>(k));
    jp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  const ComplexMatrix jm = jp.adjoint();
  return (jp - jm) / Complex(0.0, 2.0);
}

namespace detail {

struct SpinEigensystem {
  ComplexMatrix vectors;
  Eigen::VectorXd values;
};

inline const SpinEigensystem& spin_eigensystem(SpinLabel spin) {
  static const std::array<SpinEigensystem, 3> table = [] {
    std::array<SpinEigensystem, 3> out;
    for (int tj = 1; tj <= 3; ++tj) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(angular_momentum_y(SpinLabel::from_twice_j(tj)));
      out[static_cast<std::size_t>(tj - 1)] = {solver.eigenvectors(), solver.eigenvalues()};
    }
    return out;
  }();
  return table[static_cast<std::size_t>(spin.twice_j() - 1)];
}

}  // namespace detail

/// exp(-i theta J_y), computed from the eigendecomposition of J_y.
inline ComplexMatrix spin_rotation(SpinLabel spin, double theta) {
  detail::require(std::isfinite(theta), "rotation angle must be finite");
  const auto& eig = detail::spin_eigensystem(spin);
  ComplexVector phases(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) phases(k) = std::polar(1.0, -theta * eig.values(k));
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

/// Measurement basis whose columns are the rotated J_z eigenstates.
inline Basis spin_rotation_basis(SpinLabel spin, double theta) {
  return Basis(spin_rotation(spin, theta));
}

/// |<a_i, b_j>|^2 for every pair of basis vectors.
inline RealMatrix overlap_table(const Basis& a, const Basis& b) {
  detail::require(a.dim() == b.dim(), "overlap_table: dimension mismatch");
  return (a.matrix().adjoint() * b.matrix()).cwiseAbs2();
}

/// (U_A (x) U_B) |joint>.
inline JointState apply_local(const ComplexMatrix& u_a, const ComplexMatrix& u_b, const JointState& joint) {
  detail::require(static_cast<std::size_t>(u_a.rows()) == joint.dim_a() && static_cast<std::size_t>(u_b.rows()) == joint.dim_b(),
                  "apply_local: dimension mismatch");
  return JointState::from_matrix(u_a * joint.as_matrix() * u_b.transpose());
}

}  // namespace qrng
