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
#include <optional>
#include <utility>
#include <vector>

#include "fpsync/core.hpp"
#include "fpsync/fft.hpp"
#include "fpsync/spectrum.hpp"

namespace fpsync {

/// Normalized sliding cross-correlation between a spectrum and a reference
/// fingerprint: a[i, q] = sum_p xi[i, (q+p) mod N] conj(beta[p]) / ||beta||^2.
struct CorrelationSurface {
    Eigen::MatrixXcd a;
    int k0_ref = 0;  ///< row the fingerprint was taken from
};

inline CorrelationSurface cross_correlate(const DelayDopplerSpectrum& xi,
                                          const FingerprintSpectrum& beta) {
    if (xi.cols() != beta.beta.size())
        throw std::invalid_argument("cross_correlate: column count mismatch");
    if (!(beta.power > 0.0))
        throw std::invalid_argument("cross_correlate: zero-norm fingerprint");
    const Eigen::Index n = xi.cols();
    const Eigen::VectorXcd beta_f = fft_forward(beta.beta.transpose());
    CorrelationSurface surf;
    surf.a.resize(xi.rows(), n);
    surf.k0_ref = beta.k0;
    for (Eigen::Index i = 0; i < xi.rows(); ++i) {
        const Eigen::VectorXcd row_f = fft_forward(xi.xi.row(i).transpose());
        surf.a.row(i) =
            (fft_inverse(row_f.cwiseProduct(beta_f.conjugate())) / beta.power).transpose();
    }
    return surf;
}

/// Peak of the correlation surface mapped to drift estimates. The delay
/// shift is reported in signed wrapped form within (-N/2, N/2], and the
/// Doppler row offset relative to the reference row likewise.
struct EstimateResult {
    int i_hat = 0;             ///< Doppler row index of the peak
    long q_hat = 0;            ///< signed delay shift [bins]
    double drift_f_hat = 0.0;  ///< estimated CFO drift [Hz]
    double drift_tau_hat = 0.0;///< estimated TO drift [s]
    double peak_value = 0.0;   ///< |a| at the peak
};

/// Argmax of |a| with ties broken to the smallest row, then smallest
/// column. An optional row lock restricts the search to a single row.
inline EstimateResult estimate_drift(const CorrelationSurface& surface, const GridMeta& grid,
                                     std::optional<int> row_lock = std::nullopt) {
    const Eigen::Index rows = surface.a.rows();
    const Eigen::Index cols = surface.a.cols();
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("estimate_drift: empty surface");
    Eigen::Index i0 = 0, i1 = rows;
    if (row_lock.has_value()) {
        if (*row_lock < 0 || *row_lock >= rows)
            throw std::invalid_argument("estimate_drift: row lock out of range");
        i0 = *row_lock;
        i1 = i0 + 1;
    }
    EstimateResult best;
    double best_mag = -1.0;
    Eigen::Index best_i = i0, best_q = 0;
    for (Eigen::Index i = i0; i < i1; ++i) {
        for (Eigen::Index q = 0; q < cols; ++q) {
            const double mag = std::abs(surface.a(i, q));
            if (mag > best_mag) {
                best_mag = mag;
                best_i = i;
                best_q = q;
            }
        }
    }
    best.i_hat = static_cast<int>(best_i);
    best.q_hat = wrap_signed(static_cast<long>(best_q), static_cast<long>(cols));
    const long row_off =
        wrap_signed(static_cast<long>(best_i) - surface.k0_ref, static_cast<long>(rows));
    best.drift_f_hat = static_cast<double>(row_off) * grid.f_r_hz;
    best.drift_tau_hat = static_cast<double>(best.q_hat) * grid.t_grid_s;
    best.peak_value = best_mag;
    return best;
}

/// Average squared range error over trials: mean of [R * wrap(l_hat - l_true)]^2
/// with index differences wrapped to the shorter arc on a ring of
/// period_bins bins.
inline double empirical_mse(const std::vector<std::pair<double, double>>& trials,
                            double r_m_per_bin, double period_bins) {
    if (trials.empty()) throw std::invalid_argument("empirical_mse: no trials");
    if (!(r_m_per_bin > 0.0)) throw std::invalid_argument("empirical_mse: R must be > 0");
    double acc = 0.0;
    for (const auto& [l_hat, l_true] : trials) {
        const double d = wrap_signed(l_hat - l_true, period_bins);
        acc += (r_m_per_bin * d) * (r_m_per_bin * d);
    }
    return acc / static_cast<double>(trials.size());
}

}  // namespace fpsync
