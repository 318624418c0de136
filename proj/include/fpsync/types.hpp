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
#include <complex>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fpsync {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// OFDM grid and array geometry shared by every stage of the pipeline.
///
/// t_sam and t_sym are derived on construction and kept consistent with
/// the invariants t_sam = 1/(n_c * delta_f) and
/// t_sym = (n_c + cp_len) * t_sam.
struct SystemConfig {
    double f_c = 0.0;      ///< carrier frequency [Hz]
    double delta_f = 0.0;  ///< subcarrier spacing [Hz]
    int n_c = 0;           ///< number of subcarriers
    int cp_len = 0;        ///< cyclic prefix length [samples]
    int g_syms = 0;        ///< OFDM symbols per packet
    int m_r = 1;           ///< receive antennas
    int m_t = 1;           ///< transmit antennas
    int k_f = 1;           ///< zero-pad factor, Doppler axis
    int k_tau = 1;         ///< zero-pad factor, delay axis
    double t_sam = 0.0;    ///< sampling interval [s], derived
    double t_sym = 0.0;    ///< full OFDM symbol duration [s], derived

    static SystemConfig create(double f_c, double delta_f, int n_c, int cp_len,
                               int g_syms, int m_r, int m_t, int k_f, int k_tau) {
        if (!(f_c > 0.0)) throw std::invalid_argument("SystemConfig: f_c must be > 0");
        if (!(delta_f > 0.0)) throw std::invalid_argument("SystemConfig: delta_f must be > 0");
        if (n_c < 1 || g_syms < 1 || m_r < 1 || m_t < 1)
            throw std::invalid_argument("SystemConfig: counts must be >= 1");
        if (cp_len < 0) throw std::invalid_argument("SystemConfig: cp_len must be >= 0");
        if (k_f < 1 || k_tau < 1)
            throw std::invalid_argument("SystemConfig: zero-pad factors must be >= 1");
        SystemConfig c;
        c.f_c = f_c;
        c.delta_f = delta_f;
        c.n_c = n_c;
        c.cp_len = cp_len;
        c.g_syms = g_syms;
        c.m_r = m_r;
        c.m_t = m_t;
        c.k_f = k_f;
        c.k_tau = k_tau;
        c.t_sam = 1.0 / (static_cast<double>(n_c) * delta_f);
        c.t_sym = static_cast<double>(n_c + cp_len) * c.t_sam;
        return c;
    }

    /// Delay resolution of the unpadded grid, 1/(n_c*delta_f) [s].
    double t_r() const { return 1.0 / (static_cast<double>(n_c) * delta_f); }
    int doppler_bins() const { return k_f * g_syms; }
    int delay_bins() const { return k_tau * n_c; }
};

/// One propagation path: complex gain, delay, radial velocity and angles.
struct PathParams {
    cplx gain{1.0, 0.0};      ///< complex path gain
    double delay_s = 0.0;     ///< propagation delay [s], >= 0
    double velocity = 0.0;    ///< radial velocity [m/s]
    double aoa_rad = kPi / 2; ///< angle of arrival
    double aod_rad = kPi / 2; ///< angle of departure

    /// Doppler frequency induced by the reflector motion, 2*v*f_c/c [Hz].
    double doppler_hz(const SystemConfig& cfg) const {
        return 2.0 * velocity * cfg.f_c / kSpeedOfLight;
    }
};

/// Receiver clock error relative to the transmitter: CFO/TO plus the
/// packet-to-packet drift that the estimator recovers.
struct ClockOffsets {
    double cfo_hz = 0.0;       ///< carrier frequency offset
    double to_s = 0.0;         ///< time offset
    double cfo_drift_hz = 0.0; ///< CFO drift between packets
    double to_drift_s = 0.0;   ///< TO drift between packets

    /// Offsets one packet later; drifts are constant within a packet and
    /// step between packets.
    ClockOffsets drifted() const {
        ClockOffsets o = *this;
        o.cfo_hz += cfo_drift_hz;
        o.to_s += to_drift_s;
        return o;
    }
};

/// Bin sizes of the zero-padded delay-Doppler grid.
struct GridMeta {
    double f_r_hz = 0.0;   ///< Doppler grid size, 1/(k_f*G*t_sym)
    double t_grid_s = 0.0; ///< delay grid size, t_r/k_tau

    static GridMeta from_config(const SystemConfig& cfg) {
        GridMeta m;
        m.f_r_hz = 1.0 / (static_cast<double>(cfg.k_f) * cfg.g_syms * cfg.t_sym);
        m.t_grid_s = cfg.t_r() / static_cast<double>(cfg.k_tau);
        if (!(m.f_r_hz > 0.0) || !(m.t_grid_s > 0.0))
            throw std::invalid_argument("GridMeta: grid sizes must be positive");
        return m;
    }
};

/// A propagation scene: paths (static ones first), clock offsets, transmit
/// precoder and the per-sample noise variance.
struct Scenario {
    std::vector<PathParams> paths;
    int static_count = 0;       ///< the first static_count paths have v = 0
    ClockOffsets offsets;
    Eigen::VectorXcd precoder;  ///< m_t-element transmit precoder
    double noise_var = 0.0;     ///< per-sample complex noise variance sigma^2
    std::uint64_t seed = 0;

    void validate() const {
        if (static_count < 0 || static_count > static_cast<int>(paths.size()))
            throw std::invalid_argument("Scenario: static_count out of range");
        for (int l = 0; l < static_count; ++l)
            if (paths[static_cast<size_t>(l)].velocity != 0.0)
                throw std::invalid_argument("Scenario: static path has nonzero velocity");
        for (const auto& p : paths)
            if (p.delay_s < 0.0)
                throw std::invalid_argument("Scenario: negative path delay");
        if (noise_var < 0.0)
            throw std::invalid_argument("Scenario: negative noise variance");
    }
};

}  // namespace fpsync
