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

#include "fpsync/core.hpp"
#include "fpsync/rng.hpp"
#include "fpsync/types.hpp"

namespace fpsync {

/// Post-compensation observation at one receive antenna: G symbols by N_c
/// subcarriers of channel snapshots.
struct SnapshotMatrix {
    Eigen::MatrixXcd gamma;  ///< g_syms x n_c
    int antenna = 0;
    SystemConfig config;
};

/// Effective complex amplitude of one path at antenna m: the path gain,
/// the carrier phase of the absolute delay, the receive steering element
/// and the precoded transmit steering gain.
inline cplx path_amplitude(const PathParams& p, const ClockOffsets& off,
                           const SystemConfig& cfg, const Eigen::VectorXcd& precoder,
                           int m) {
    const cplx carrier = std::polar(1.0, -kTwoPi * cfg.f_c * (off.to_s + p.delay_s));
    const cplx rx = std::polar(1.0, kTwoPi * 0.5 * std::cos(p.aoa_rad) * m);
    const Eigen::VectorXcd tx = steering_vector(p.aod_rad, cfg.m_t);
    const cplx tx_gain = tx.transpose() * precoder;
    return p.gain * carrier * rx * tx_gain;
}

/// Doppler-axis phase sequence of a path: element g is
/// e^{-j*2*pi*(f_D + cfo)*(g)*t_sym} for g = 0..G-1.
inline Eigen::VectorXcd doppler_sequence(const PathParams& p, const ClockOffsets& off,
                                         const SystemConfig& cfg) {
    const double f_eff = p.doppler_hz(cfg) + off.cfo_hz;
    Eigen::VectorXcd theta(cfg.g_syms);
    for (int g = 0; g < cfg.g_syms; ++g)
        theta(g) = std::polar(1.0, -kTwoPi * f_eff * g * cfg.t_sym);
    return theta;
}

/// Delay-axis phase sequence of a path: element n is
/// e^{-j*2*pi*n*delta_f*(to + tau)} for n = 0..N_c-1.
inline Eigen::RowVectorXcd delay_sequence(const PathParams& p, const ClockOffsets& off,
                                          const SystemConfig& cfg) {
    const double tau_eff = off.to_s + p.delay_s;
    Eigen::RowVectorXcd tau(cfg.n_c);
    for (int n = 0; n < cfg.n_c; ++n)
        tau(n) = std::polar(1.0, -kTwoPi * n * cfg.delta_f * tau_eff);
    return tau;
}

/// Noiseless compact-model snapshot: the sum of per-path rank-one terms
/// amplitude * doppler_sequence * delay_sequence.
inline Eigen::MatrixXcd synthesize_gamma_noiseless(const Scenario& scn,
                                                   const SystemConfig& cfg, int m) {
    if (m < 0 || m >= cfg.m_r)
        throw std::invalid_argument("synthesize_gamma: antenna index out of range");
    scn.validate();
    Eigen::MatrixXcd gamma = Eigen::MatrixXcd::Zero(cfg.g_syms, cfg.n_c);
    for (const auto& p : scn.paths) {
        const cplx amp = path_amplitude(p, scn.offsets, cfg, scn.precoder, m);
        gamma.noalias() += amp * (doppler_sequence(p, scn.offsets, cfg) *
                                  delay_sequence(p, scn.offsets, cfg));
    }
    return gamma;
}

/// Compact-model snapshot with i.i.d. circular complex Gaussian noise of the
/// scenario's per-sample variance, drawn from the supplied stream.
inline SnapshotMatrix synthesize_gamma(const Scenario& scn, const SystemConfig& cfg,
                                       int m, Rng& rng) {
    SnapshotMatrix snap;
    snap.gamma = synthesize_gamma_noiseless(scn, cfg, m);
    snap.antenna = m;
    snap.config = cfg;
    if (scn.noise_var > 0.0) {
        for (int g = 0; g < cfg.g_syms; ++g)
            for (int n = 0; n < cfg.n_c; ++n)
                snap.gamma(g, n) += rng.complex_gaussian(scn.noise_var);
    }
    return snap;
}

/// Convenience overload seeding a dedicated stream from the scenario seed
/// and the antenna index.
inline SnapshotMatrix synthesize_gamma(const Scenario& scn, const SystemConfig& cfg, int m) {
    Rng rng(derive_seed(scn.seed, 0x67616d6dULL, static_cast<std::uint64_t>(m)));
    return synthesize_gamma(scn, cfg, m, rng);
}

/// Sampled received symbol g across antennas (m_r x n_c), walked sample by
/// sample. Keeps the intra-symbol Doppler/CFO phase terms that the compact
/// model drops, so the approximation gap is measurable.
inline Eigen::MatrixXcd synthesize_waveform_symbol(const Scenario& scn,
                                                   const SystemConfig& cfg, int g,
                                                   const Eigen::VectorXcd& data,
                                                   Rng* noise_rng = nullptr) {
    scn.validate();
    if (data.size() != cfg.n_c)
        throw std::invalid_argument("synthesize_waveform_symbol: data length != n_c");
    for (int n = 0; n < cfg.n_c; ++n)
        if (std::abs(data(n)) == 0.0)
            throw std::invalid_argument("synthesize_waveform_symbol: zero data symbol");

    const auto& off = scn.offsets;
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(cfg.m_r, cfg.n_c);
    const double inv_sqrt_nc = 1.0 / std::sqrt(static_cast<double>(cfg.n_c));
    for (const auto& p : scn.paths) {
        const double rel = 2.0 * p.velocity / kSpeedOfLight;
        const double tau_eff = off.to_s + p.delay_s;
        const Eigen::VectorXcd rx = steering_vector(p.aoa_rad, cfg.m_r);
        const cplx tx_gain =
            (steering_vector(p.aod_rad, cfg.m_t).transpose() * scn.precoder)(0, 0);
        const cplx amp = p.gain * tx_gain *
                         std::polar(1.0, -kTwoPi * cfg.f_c * tau_eff);
        for (int u = 0; u < cfg.n_c; ++u) {
            const double t_abs = u * cfg.t_sam + g * cfg.t_sym;
            cplx acc{0.0, 0.0};
            for (int n = 0; n < cfg.n_c; ++n) {
                // phases: carrier Doppler, subcarrier Doppler spread, CFO,
                // subcarrier delay, and the modulation kernel
                const double phase =
                    -kTwoPi * (cfg.f_c * rel * t_abs + n * cfg.delta_f * rel * t_abs +
                               off.cfo_hz * t_abs + n * cfg.delta_f * tau_eff +
                               static_cast<double>(n) * u / cfg.n_c);
                acc += data(n) * std::polar(inv_sqrt_nc, phase);
            }
            y.col(u) += amp * acc * rx;
        }
    }
    if (noise_rng != nullptr && scn.noise_var > 0.0) {
        for (int m = 0; m < cfg.m_r; ++m)
            for (int u = 0; u < cfg.n_c; ++u)
                y(m, u) += noise_rng->complex_gaussian(scn.noise_var);
    }
    return y;
}

/// Data compensation: Y_g * F^H * D^{-1} with D = diag(data). Requires
/// nonzero (typically unit-modulus) data symbols.
inline Eigen::MatrixXcd compensate(const Eigen::MatrixXcd& y_g, const Eigen::VectorXcd& data) {
    if (y_g.cols() != data.size())
        throw std::invalid_argument("compensate: dimension mismatch");
    for (Eigen::Index n = 0; n < data.size(); ++n)
        if (std::abs(data(n)) == 0.0)
            throw std::invalid_argument("compensate: singular data matrix");
    const Eigen::MatrixXcd f = dft_matrix(static_cast<int>(data.size()));
    Eigen::MatrixXcd out = y_g * f.adjoint();
    for (Eigen::Index n = 0; n < data.size(); ++n) out.col(n) /= data(n);
    return out;
}

/// Deterministic QPSK payload, symbols in {(+-1 +-j)/sqrt(2)}.
inline Eigen::VectorXcd qpsk_symbols(int n_c, std::uint64_t seed) {
    Eigen::VectorXcd c(n_c);
    Rng rng(derive_seed(seed, 0x7170736bULL));
    const double a = 1.0 / std::sqrt(2.0);
    for (int n = 0; n < n_c; ++n) {
        const auto bits = rng.next_u64() & 3u;
        const double re = (bits & 1u) ? a : -a;
        const double im = (bits & 2u) ? a : -a;
        c(n) = {re, im};
    }
    return c;
}

}  // namespace fpsync
