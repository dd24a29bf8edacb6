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

// Test-only reference computations. Nothing here calls into the library's
// linear algebra: rotations come from closed forms or a power series, joint
// amplitudes from explicit Kronecker products.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace qrng::oracle {

using cd = std::complex<double>;
using Mat = std::vector<std::vector<cd>>;

inline Mat zeros(std::size_t n) { return Mat(n, std::vector<cd>(n, 0.0)); }

inline Mat multiply(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// exp(-i theta J_y) for spin 1/2: [[c, -s], [s, c]] with half angles.
inline Mat rotation_half(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {{c, -s}, {s, c}};
}

/// Wigner small-d matrix for j = 1, rows/cols ordered m = +1, 0, -1.
inline Mat rotation_one(double theta) {
  const double c = std::cos(theta), s = std::sin(theta), r = std::numbers::sqrt2;
  return {{(1 + c) / 2, -s / r, (1 - c) / 2}, {s / r, c, -s / r}, {(1 - c) / 2, s / r, (1 + c) / 2}};
}

/// J_y built from the ladder-operator matrix elements, order m = +j ... -j.
inline Mat jy(double j) {
  const auto n = static_cast<std::size_t>(2 * j + 1 + 0.5);
  Mat out = zeros(n);
  for (std::size_t k = 1; k < n; ++k) {
    const double m = j - static_cast<double>(k);
    const double e = std::sqrt(j * (j + 1) - m * (m + 1));
    // J_y = (J+ - J-) / 2i
    out[k - 1][k] = cd(0, -e / 2);
    out[k][k - 1] = cd(0, e / 2);
  }
  return out;
}

/// exp(-i theta J_y) by truncated Taylor series (enough terms for |theta| <= 2 pi).
inline Mat rotation_series(double j, double theta) {
  const Mat gen = jy(j);
  const std::size_t n = gen.size();
  Mat a = zeros(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a[r][c] = cd(0, -theta) * gen[r][c];
  Mat result = zeros(n), term = zeros(n);
  for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
  for (int k = 1; k < 80; ++k) {
    term = multiply(term, a);
    for (auto& row : term)
      for (auto& x : row) x /= static_cast<double>(k);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) result[r][c] += term[r][c];
  }
  return result;
}

/// |<u_a (x) v_b, psi>|^2 with psi indexed a * d + b, using column vectors
/// of the given unitaries.
inline std::vector<double> joint_probabilities(const Mat& ua, const Mat& ub, const std::vector<cd>& psi) {
  const std::size_t d = ua.size();
  std::vector<double> out(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      cd amp = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) amp += std::conj(ua[i][a] * ub[k][b]) * psi[i * d + k];
      out[a * d + b] = std::norm(amp);
    }
  return out;
}

/// Spin-1/2 singlet correlation with outcome 0 -> +1 and 1 -> -1.
inline double singlet_correlation(double delta_theta) { return -std::cos(delta_theta); }

/// Output bias of a XOR of independent bits with biases ea, eb.
inline double xor_bias(double ea, double eb) { return -2.0 * ea * eb; }

}  // namespace qrng::oracle
