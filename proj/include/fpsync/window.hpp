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
#include <string>

#include "fpsync/fft.hpp"
#include "fpsync/types.hpp"

namespace fpsync {

enum class WindowKind { rectangular, hamming, hann, blackman, custom };

inline const char* window_name(WindowKind k) {
    switch (k) {
        case WindowKind::rectangular: return "rectangular";
        case WindowKind::hamming: return "hamming";
        case WindowKind::hann: return "hann";
        case WindowKind::blackman: return "blackman";
        case WindowKind::custom: return "custom";
    }
    return "unknown";
}

/// Taper applied along one spectrum axis before the transform.
struct WindowSpec {
    WindowKind kind = WindowKind::rectangular;
    Eigen::VectorXcd samples;

    int size() const { return static_cast<int>(samples.size()); }
};

/// Canonical coefficients, symmetric convention (denominator N-1):
///   rectangular: w[i] = 1
///   hamming:     w[i] = 0.54 - 0.46 cos(2*pi*i/(N-1))
///   hann:        w[i] = 0.50 - 0.50 cos(2*pi*i/(N-1))
///   blackman:    w[i] = 0.42 - 0.50 cos(2*pi*i/(N-1)) + 0.08 cos(4*pi*i/(N-1))
/// N = 1 yields [1] for every kind.
inline WindowSpec make_window(WindowKind kind, int n) {
    if (n < 1) throw std::invalid_argument("make_window: N must be >= 1");
    WindowSpec w;
    w.kind = kind;
    w.samples.resize(n);
    if (n == 1) {
        w.samples(0) = 1.0;
        return w;
    }
    const double denom = static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = kTwoPi * i / denom;
        double v = 0.0;
        switch (kind) {
            case WindowKind::rectangular: v = 1.0; break;
            case WindowKind::hamming: v = 0.54 - 0.46 * std::cos(x); break;
            case WindowKind::hann: v = 0.5 - 0.5 * std::cos(x); break;
            case WindowKind::blackman:
                v = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
                break;
            case WindowKind::custom:
                throw std::invalid_argument("make_window: custom needs explicit samples");
        }
        w.samples(i) = v;
    }
    return w;
}

inline WindowSpec custom_window(const Eigen::VectorXcd& samples) {
    if (samples.size() < 1) throw std::invalid_argument("custom_window: empty samples");
    WindowSpec w;
    w.kind = WindowKind::custom;
    w.samples = samples;
    return w;
}

/// K-fold zero-padded transform of the window along the delay/Doppler axis
/// convention (unitary, conjugate kernel). Length K*N.
inline Eigen::VectorXcd window_dft_profile(const WindowSpec& psi, int k_pad) {
    if (k_pad < 1) throw std::invalid_argument("window_dft_profile: K must be >= 1");
    const Eigen::Index n_out = static_cast<Eigen::Index>(psi.size()) * k_pad;
    return padded_conj_dft_unitary(psi.samples, n_out);
}

enum class WidthMethod { first_minima, three_db };

/// Width of the lobe around the unique global maximum of a magnitude
/// profile, walking cyclically in both directions. first_minima returns the
/// null-to-null distance; three_db returns the distance between the
/// crossings of peak - 3 dB (linearly interpolated).
inline double mainlobe_width(const Eigen::VectorXd& magnitude,
                             WidthMethod method = WidthMethod::first_minima) {
    const Eigen::Index n = magnitude.size();
    if (n < 3) throw std::invalid_argument("mainlobe_width: profile too short");
    Eigen::Index peak = 0;
    magnitude.maxCoeff(&peak);
    const double peak_val = magnitude(peak);
    int peak_count = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (magnitude(i) == peak_val) ++peak_count;
    if (peak_count != 1)
        throw std::invalid_argument("mainlobe_width: global maximum is not unique");

    auto at = [&](Eigen::Index off) {
        Eigen::Index i = (peak + off) % n;
        if (i < 0) i += n;
        return magnitude(i);
    };

    if (method == WidthMethod::first_minima) {
        Eigen::Index right = 0;
        while (right < n - 1 && at(right + 1) < at(right)) ++right;
        Eigen::Index left = 0;
        while (left < n - 1 && at(-left - 1) < at(-left)) ++left;
        return static_cast<double>(left + right);
    }

    const double thresh = peak_val * std::pow(10.0, -3.0 / 20.0);
    auto crossing = [&](int dir) {
        for (Eigen::Index step = 1; step < n; ++step) {
            const double prev = at(dir * (step - 1));
            const double cur = at(dir * step);
            if (cur <= thresh) {
                const double frac = (prev - thresh) / (prev - cur);
                return static_cast<double>(step - 1) + frac;
            }
        }
        throw std::invalid_argument("mainlobe_width: no -3 dB crossing found");
    };
    return crossing(+1) + crossing(-1);
}

}  // namespace fpsync
