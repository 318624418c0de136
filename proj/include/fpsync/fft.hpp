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
#include <unsupported/Eigen/FFT>
#include <complex>
#include <vector>

#include "fpsync/types.hpp"

namespace fpsync {

/// Thread-local FFT engine so plans are cached per size and concurrent
/// Monte Carlo trials never share mutable state.
inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}

/// Forward DFT, no scaling: X[k] = sum_n x[n] e^{-j2*pi*n*k/N}.
inline Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& x) {
    const Eigen::Index n = x.size();
    if (n == 1) return x;
    Eigen::VectorXcd out(n);
    fft_engine().fwd(out, x);
    return out;
}

/// Inverse DFT with 1/N scaling: x[n] = (1/N) sum_k X[k] e^{+j2*pi*n*k/N}.
inline Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& x) {
    const Eigen::Index n = x.size();
    if (n == 1) return x;
    Eigen::VectorXcd out(n);
    fft_engine().inv(out, x);
    return out;
}

/// Zero-pads x to length n_out and applies the unitary conjugate transform
/// used along both spectrum axes:
///   out[k] = (1/sqrt(n_out)) * sum_n x[n] e^{+j2*pi*n*k/n_out}.
inline Eigen::VectorXcd padded_conj_dft_unitary(const Eigen::VectorXcd& x, Eigen::Index n_out) {
    Eigen::VectorXcd buf = Eigen::VectorXcd::Zero(n_out);
    buf.head(x.size()) = x;
    Eigen::VectorXcd out = fft_inverse(buf);
    out *= std::sqrt(static_cast<double>(n_out));
    return out;
}

/// Circular convolution of equal-length sequences via the transform domain.
inline Eigen::VectorXcd circular_convolve(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("circular_convolve: length mismatch");
    return fft_inverse(fft_forward(a).cwiseProduct(fft_forward(b)));
}

/// Circular cross-correlation r[q] = sum_p x[(p+q) mod N] * conj(y[p]).
inline Eigen::VectorXcd circular_correlate(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("circular_correlate: length mismatch");
    return fft_inverse(fft_forward(x).cwiseProduct(fft_forward(y).conjugate()));
}

}  // namespace fpsync
