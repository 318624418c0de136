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

#include "fpsync/channel.hpp"
#include "fpsync/fft.hpp"
#include "fpsync/window.hpp"

namespace fpsync {

/// Windowed, zero-padded 2D transform of a snapshot matrix. Rows are the
/// Doppler axis (k_f*G bins of size f_r), columns the delay axis
/// (k_tau*N_c bins of size t_r/k_tau).
struct DelayDopplerSpectrum {
    Eigen::MatrixXcd xi;
    GridMeta grid;
    int k_f = 1;
    int k_tau = 1;

    int rows() const { return static_cast<int>(xi.rows()); }
    int cols() const { return static_cast<int>(xi.cols()); }
};

/// The row of the spectrum at the static-object Doppler index: a
/// scene-specific signature that shifts cyclically when the clock offsets
/// drift.
struct FingerprintSpectrum {
    Eigen::RowVectorXcd beta;
    int k0 = 0;          ///< source row index
    double power = 0.0;  ///< squared L2 norm of beta
};

/// Applies the per-axis windows, zero-pads both axes and evaluates the
/// unitary conjugate transform along each. Equivalent to the literal
/// matrix product F*_{k_f G} diag(psi_G^pad) Gamma^pad diag(psi_Nc^pad)
/// F*_{k_tau N_c}, but computed with row/column FFTs.
inline DelayDopplerSpectrum windowed_2d_spectrum(const SnapshotMatrix& snap,
                                                 const WindowSpec& psi_g,
                                                 const WindowSpec& psi_nc, int k_f,
                                                 int k_tau, bool real_part = false) {
    const Eigen::Index g = snap.gamma.rows();
    const Eigen::Index nc = snap.gamma.cols();
    if (psi_g.size() != g || psi_nc.size() != nc)
        throw std::invalid_argument("windowed_2d_spectrum: window length mismatch");
    if (k_f < 1 || k_tau < 1)
        throw std::invalid_argument("windowed_2d_spectrum: zero-pad factors must be >= 1");

    Eigen::MatrixXcd tapered = real_part ? snap.gamma.real().cast<cplx>().eval()
                                         : snap.gamma;
    tapered.array().colwise() *= psi_g.samples.array();
    tapered.array().rowwise() *= psi_nc.samples.transpose().array();

    const Eigen::Index rows = g * k_f;
    const Eigen::Index cols = nc * k_tau;

    // delay axis first: transform each tapered row to k_tau*N_c bins
    Eigen::MatrixXcd stage(g, cols);
    for (Eigen::Index r = 0; r < g; ++r)
        stage.row(r) = padded_conj_dft_unitary(tapered.row(r).transpose(), cols).transpose();

    // Doppler axis: transform each column to k_f*G bins
    DelayDopplerSpectrum spec;
    spec.xi.resize(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        spec.xi.col(c) = padded_conj_dft_unitary(stage.col(c), rows);

    SystemConfig cfg = snap.config;
    cfg.k_f = k_f;
    cfg.k_tau = k_tau;
    spec.grid = GridMeta::from_config(cfg);
    spec.k_f = k_f;
    spec.k_tau = k_tau;
    return spec;
}

/// Index of the maximum-power row (squared L2 norm over columns); ties
/// break to the lowest index.
inline int max_power_row(const Eigen::MatrixXcd& xi) {
    int best = 0;
    double best_power = -1.0;
    for (int i = 0; i < xi.rows(); ++i) {
        const double p = xi.row(i).squaredNorm();
        if (p > best_power) {
            best_power = p;
            best = i;
        }
    }
    return best;
}

/// Returns the requested row, or the maximum-power row when none is given.
inline FingerprintSpectrum extract_fingerprint(const DelayDopplerSpectrum& spec,
                                               std::optional<int> k0 = std::nullopt) {
    if (spec.xi.size() == 0)
        throw std::invalid_argument("extract_fingerprint: empty spectrum");
    FingerprintSpectrum fp;
    fp.k0 = k0.has_value() ? *k0 : max_power_row(spec.xi);
    if (fp.k0 < 0 || fp.k0 >= spec.rows())
        throw std::invalid_argument("extract_fingerprint: row index out of range");
    fp.beta = spec.xi.row(fp.k0);
    fp.power = fp.beta.squaredNorm();
    return fp;
}

}  // namespace fpsync
