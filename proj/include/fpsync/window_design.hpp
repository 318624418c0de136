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
#include <vector>

#include "fpsync/channel.hpp"
#include "fpsync/fft.hpp"
#include "fpsync/window.hpp"

namespace fpsync {

/// The estimation-optimal correlation mean in the high-SNR limit: a single
/// unit pulse at the (rounded) true shift.
struct IdealFingerprint {
    Eigen::VectorXd s;
    int peak_index = 0;
};

inline IdealFingerprint ideal_s(int kn_c, double true_shift_bins) {
    if (kn_c < 1) throw std::invalid_argument("ideal_s: length must be >= 1");
    IdealFingerprint f;
    long peak = std::lround(true_shift_bins) % kn_c;
    if (peak < 0) peak += kn_c;
    f.peak_index = static_cast<int>(peak);
    f.s = Eigen::VectorXd::Zero(kn_c);
    f.s(f.peak_index) = 1.0;
    return f;
}

/// Circular autocorrelation of the zero-padded window transform,
///   rho[q] = sum_p h[(p+q) mod KN] conj(h[p]),  h = window_dft_profile.
/// Equivalently (by Parseval) the length-KN transform of |psi_pad|^2, so its
/// delay-domain image is supported on the window's support. The literal
/// (unconjugated) variant convolves h with its modular reversal instead.
inline Eigen::VectorXcd rho_autocorrelation(const WindowSpec& psi, int k_pad,
                                            bool conjugated = true) {
    const Eigen::VectorXcd h = window_dft_profile(psi, k_pad);
    if (conjugated) return circular_correlate(h, h);
    const Eigen::Index n = h.size();
    Eigen::VectorXcd h_rev(n);
    for (Eigen::Index i = 0; i < n; ++i) h_rev(i) = h((n - i) % n);
    return circular_convolve(h, h_rev);
}

/// Delay-domain image of a correlation-lag sequence: the sequence r with
/// rho[q] = sum_n r[n] e^{+j*2*pi*n*q/N}. For rho from rho_autocorrelation
/// this recovers |psi_pad[n]|^2.
inline Eigen::VectorXcd autocorrelation_delay_image(const Eigen::VectorXcd& rho) {
    return fft_forward(rho) / static_cast<double>(rho.size());
}

/// Pairwise path-gain products placed at their delay-difference bins on the
/// zero-padded delay grid.
struct PathCorrelationStructure {
    Eigen::VectorXcd phi;        ///< L^2 ordered pair products
    std::vector<long> shifts;    ///< pair shift bins, sorted ascending, in [0, KN)
    Eigen::VectorXcd phi_breve;  ///< products placed on the length-KN grid
};

/// Places gain * conj(gain') (or the literal unconjugated product) of every
/// ordered path pair at bin Round((tau_l - tau_l') * k_tau / t_r) mod KN,
/// summing coincident bins.
inline PathCorrelationStructure build_phi_breve(const std::vector<PathParams>& paths,
                                                int m, const SystemConfig& cfg,
                                                const Eigen::VectorXcd& precoder,
                                                const ClockOffsets& offsets = {},
                                                bool conjugated = true) {
    if (paths.empty()) throw std::invalid_argument("build_phi_breve: no paths");
    const long n = static_cast<long>(cfg.k_tau) * cfg.n_c;
    const double bins_per_second = static_cast<double>(cfg.k_tau) / cfg.t_r();
    const long l_count = static_cast<long>(paths.size());

    std::vector<cplx> amps(paths.size());
    for (size_t l = 0; l < paths.size(); ++l)
        amps[l] = path_amplitude(paths[l], offsets, cfg, precoder, m);

    PathCorrelationStructure out;
    out.phi.resize(l_count * l_count);
    out.shifts.resize(static_cast<size_t>(l_count * l_count));
    out.phi_breve = Eigen::VectorXcd::Zero(n);
    long idx = 0;
    for (long l = 0; l < l_count; ++l) {
        for (long lp = 0; lp < l_count; ++lp, ++idx) {
            const cplx value = conjugated ? amps[static_cast<size_t>(l)] *
                                                std::conj(amps[static_cast<size_t>(lp)])
                                          : amps[static_cast<size_t>(l)] *
                                                amps[static_cast<size_t>(lp)];
            const double delta =
                paths[static_cast<size_t>(l)].delay_s - paths[static_cast<size_t>(lp)].delay_s;
            long bin = std::lround(delta * bins_per_second) % n;
            if (bin < 0) bin += n;
            out.phi(idx) = value;
            out.shifts[static_cast<size_t>(idx)] = bin;
            out.phi_breve(bin) += value;
        }
    }
    std::sort(out.shifts.begin(), out.shifts.end());
    return out;
}

/// Circular convolution phi_breve (*) rho via transform-domain product.
inline Eigen::VectorXcd circulant_apply(const Eigen::VectorXcd& phi_breve,
                                        const Eigen::VectorXcd& rho) {
    if (phi_breve.size() != rho.size())
        throw std::invalid_argument("circulant_apply: length mismatch");
    return circular_convolve(phi_breve, rho);
}

/// Solves phi_breve (*) rho = s in the transform domain with a diagonal
/// pseudo-inverse: bins where |DFT(phi_breve)| <= eps_rank * max are zeroed,
/// yielding the minimum-norm consistent rho for rank-deficient systems.
inline Eigen::VectorXcd solve_rho(const Eigen::VectorXcd& s,
                                  const Eigen::VectorXcd& phi_breve,
                                  double eps_rank = 1e-10) {
    if (s.size() != phi_breve.size())
        throw std::invalid_argument("solve_rho: length mismatch");
    const Eigen::VectorXcd s_f = fft_forward(s);
    const Eigen::VectorXcd p_f = fft_forward(phi_breve);
    const double cutoff = eps_rank * p_f.cwiseAbs().maxCoeff();
    Eigen::VectorXcd prod(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k)
        prod(k) = (std::abs(p_f(k)) > cutoff) ? s_f(k) / p_f(k) : cplx{0.0, 0.0};
    return fft_inverse(prod);
}

inline Eigen::VectorXcd solve_rho(const IdealFingerprint& s,
                                  const Eigen::VectorXcd& phi_breve,
                                  double eps_rank = 1e-10) {
    return solve_rho(Eigen::VectorXcd(s.s.cast<cplx>()), phi_breve, eps_rank);
}

/// Achievability condition for a window against a target autocorrelation:
/// on the delay-domain image r of rho, |psi_pad[n]|^2 must equal r[n] on the
/// window support and r must vanish beyond it. Returns the max absolute
/// residual over all bins.
inline double verify_window_condition(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& rho,
                                      int n_c, int k_pad) {
    const Eigen::Index n = static_cast<Eigen::Index>(n_c) * k_pad;
    if (rho.size() != n)
        throw std::invalid_argument("verify_window_condition: rho length != k*n_c");
    if (psi.size() > n)
        throw std::invalid_argument("verify_window_condition: window longer than grid");
    const Eigen::VectorXcd r = autocorrelation_delay_image(rho);
    double residual = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx w = (i < psi.size()) ? psi(i) : cplx{0.0, 0.0};
        residual = std::max(residual, std::abs(w * std::conj(w) - r(i)));
    }
    return residual;
}

inline double verify_window_condition(const WindowSpec& psi, const Eigen::VectorXcd& rho,
                                      int n_c, int k_pad) {
    return verify_window_condition(psi.samples, rho, n_c, k_pad);
}

/// Outcome of the best-effort window synthesis from a target
/// autocorrelation: verification first, synthesis second.
struct WindowRecovery {
    bool feasible = false;
    WindowSpec window;
    double residual = 0.0;
    int iterations = 0;
    std::string reason;
};

/// Recovers a window whose autocorrelation matches rho, when one exists.
/// The delay-domain image of rho must vanish beyond the first n_c bins
/// (necessary condition); the remaining bins are solved by a damped
/// fixed-point iteration psi <- r / conj(psi) from a rectangular start,
/// guarded against small denominators.
inline WindowRecovery recover_window(const Eigen::VectorXcd& rho, int n_c, int k_pad,
                                     int max_iters = 10000, double tol = 1e-6) {
    const Eigen::Index n = static_cast<Eigen::Index>(n_c) * k_pad;
    if (rho.size() != n)
        throw std::invalid_argument("recover_window: rho length != k*n_c");
    WindowRecovery out;
    const Eigen::VectorXcd r = autocorrelation_delay_image(rho);
    const double scale = r.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        out.feasible = true;
        out.window = custom_window(Eigen::VectorXcd::Zero(n_c));
        out.residual = 0.0;
        out.reason = "all-zero target";
        return out;
    }
    const double tail_tol = 1e-9 * scale;
    for (Eigen::Index i = n_c; i < n; ++i) {
        if (std::abs(r(i)) > tail_tol) {
            out.feasible = false;
            out.residual = r.tail(n - n_c).cwiseAbs().maxCoeff();
            out.reason = "delay-domain image has nonzero tail beyond the window support";
            return out;
        }
    }

    Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(n_c);
    const double damping = 0.5;
    const double guard = 1e-12 * std::sqrt(scale);
    const double tail_residual =
        (n > n_c) ? r.tail(n - n_c).cwiseAbs().maxCoeff() : 0.0;
    double residual = 0.0;
    int it = 0;
    for (; it < max_iters; ++it) {
        for (int i = 0; i < n_c; ++i) {
            cplx denom = std::conj(psi(i));
            if (std::abs(denom) < guard) denom = guard;
            psi(i) = (1.0 - damping) * psi(i) + damping * (r(i) / denom);
        }
        residual = tail_residual;
        for (int i = 0; i < n_c; ++i)
            residual = std::max(residual, std::abs(psi(i) * std::conj(psi(i)) - r(i)));
        if (residual < tol) break;
    }
    out.window = custom_window(psi);
    out.residual = residual;
    out.iterations = std::min(it + 1, max_iters);
    out.feasible = residual < tol;
    out.reason = out.feasible ? "converged" : "fixed-point iteration stalled";
    return out;
}

}  // namespace fpsync
