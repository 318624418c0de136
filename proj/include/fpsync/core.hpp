// SPDX-License-Identifier: Apache-2.0
//
// fpsync — fingerprint-spectrum CFO/TO synchronization toolkit for OFDM
// passive sensing.
// Copyright (C) 2026 the fpsync authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>

#include "fpsync/types.hpp"

namespace fpsync {

/// Unitary DFT matrix: F[m,n] = e^{-j*2*pi*m*n/N} / sqrt(N), so F*F^H = I.
/// Angles are reduced modulo N before evaluation to keep unitarity tight
/// for large N.
inline Eigen::MatrixXcd dft_matrix(int n) {
    if (n < 1) throw std::invalid_argument("dft_matrix: N must be >= 1");
    Eigen::MatrixXcd f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double step = -kTwoPi / static_cast<double>(n);
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            const long long red = (static_cast<long long>(m) * k) % n;
            f(m, k) = std::polar(scale, step * static_cast<double>(red));
        }
    }
    return f;
}

/// Uniform linear array response: element m = e^{+j*2*pi*m*d*cos(theta)/lambda}.
inline Eigen::VectorXcd steering_vector(double theta_rad, int m_elems,
                                        double d_over_lambda = 0.5) {
    if (m_elems < 1) throw std::invalid_argument("steering_vector: M must be >= 1");
    Eigen::VectorXcd a(m_elems);
    const double phase = kTwoPi * d_over_lambda * std::cos(theta_rad);
    for (int m = 0; m < m_elems; ++m) a(m) = std::polar(1.0, phase * m);
    return a;
}

/// y[q] = x[(q+k) mod N]; shifting by 0 or N is the identity and shifts
/// compose additively modulo N.
template <typename Derived>
Eigen::VectorXcd cyclic_shift(const Eigen::MatrixBase<Derived>& x, long k) {
    const long n = static_cast<long>(x.size());
    Eigen::VectorXcd y(n);
    if (n == 0) return y;
    long off = k % n;
    if (off < 0) off += n;
    for (long q = 0; q < n; ++q) y(q) = x((q + off) % n);
    return y;
}

/// Signed representative of an index difference on a ring of the given
/// period, in (-period/2, period/2].
inline double wrap_signed(double diff, double period) {
    double w = std::fmod(diff, period);
    if (w > period / 2.0) w -= period;
    if (w <= -period / 2.0) w += period;
    return w;
}

inline long wrap_signed(long diff, long period) {
    long w = diff % period;
    if (w < 0) w += period;          // [0, period)
    if (w > period / 2) w -= period; // (-period/2, period/2]
    return w;
}

}  // namespace fpsync
