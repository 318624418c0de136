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
#include <Eigen/Eigenvalues>
#include <vector>

#include "fpsync/spectrum.hpp"
#include "fpsync/types.hpp"

namespace fpsync {

/// Frequency-domain smoothing layout: length-seg_len subcarrier segments
/// taken from seg_count symbols spaced sym_stride apart, over sub_starts
/// subcarrier offsets.
struct SmoothingConfig {
    int seg_len = 0;     ///< smoothing-vector length in subcarriers (N_s)
    int sym_stride = 1;  ///< symbol-index stride between stacked segments (G_s)
    int seg_count = 1;   ///< segments stacked per super-vector (g_s)
    int sub_starts = 1;  ///< number of subcarrier start offsets (n_s)

    int dim() const { return seg_len * seg_count; }

    void validate(int g_syms, int n_c) const {
        if (seg_len < 1 || seg_len > n_c)
            throw std::invalid_argument("SmoothingConfig: seg_len out of range");
        if (sym_stride < 1 || seg_count < 1 || sub_starts < 1)
            throw std::invalid_argument("SmoothingConfig: counts must be >= 1");
        if (seg_count * sym_stride > g_syms)
            throw std::invalid_argument("SmoothingConfig: stacked span exceeds symbol count");
        if (sub_starts > n_c - seg_len + 1)
            throw std::invalid_argument("SmoothingConfig: too many subcarrier starts");
    }

    /// Number of symbol start indices admitting a full stack.
    int symbol_starts(int g_syms) const { return g_syms - (seg_count - 1) * sym_stride; }

    /// Defaults keeping the covariance dimension at n_c/2 * 4 while the
    /// sub-arrays stay much longer than typical path counts.
    static SmoothingConfig defaults_for(const SystemConfig& cfg) {
        SmoothingConfig s;
        s.seg_len = std::max(1, cfg.n_c / 2);
        s.sub_starts = cfg.n_c - s.seg_len + 1;
        s.sym_stride = std::max(1, std::min(4, cfg.g_syms / 4));
        s.seg_count = std::max(1, std::min(4, cfg.g_syms / s.sym_stride));
        return s;
    }
};

/// Stacked smoothing vectors as columns of a dim() x count matrix.
/// Column order: symbol start outer, subcarrier start inner.
inline Eigen::MatrixXcd fd_smooth(const SnapshotMatrix& snap, const SmoothingConfig& cfg) {
    const int g_syms = static_cast<int>(snap.gamma.rows());
    const int n_c = static_cast<int>(snap.gamma.cols());
    cfg.validate(g_syms, n_c);
    const int g_starts = cfg.symbol_starts(g_syms);
    Eigen::MatrixXcd vectors(cfg.dim(), static_cast<Eigen::Index>(g_starts) * cfg.sub_starts);
    Eigen::Index col = 0;
    for (int g = 0; g < g_starts; ++g) {
        for (int n = 0; n < cfg.sub_starts; ++n, ++col) {
            for (int s = 0; s < cfg.seg_count; ++s) {
                vectors.col(col).segment(static_cast<Eigen::Index>(s) * cfg.seg_len,
                                         cfg.seg_len) =
                    snap.gamma.row(g + s * cfg.sym_stride)
                        .segment(n, cfg.seg_len)
                        .transpose();
            }
        }
    }
    return vectors;
}

/// Sum of outer products of the smoothing vectors, exactly Hermitian.
inline Eigen::MatrixXcd covariance(const Eigen::MatrixXcd& vectors) {
    if (vectors.cols() == 0) throw std::invalid_argument("covariance: empty vector set");
    const Eigen::Index d = vectors.rows();
    Eigen::MatrixXcd lower = Eigen::MatrixXcd::Zero(d, d);
    lower.selfadjointView<Eigen::Lower>().rankUpdate(vectors);
    Eigen::MatrixXcd c = lower.selfadjointView<Eigen::Lower>();
    return 0.5 * (c + c.adjoint()).eval();
}

/// Same covariance computed without materializing the vectors: each block
/// (s1, s2) is a windowed row cross-correlation, filled along diagonals
/// with O(1) sliding updates. Equals covariance(fd_smooth(...)) to
/// round-off.
inline Eigen::MatrixXcd smoothed_covariance(const SnapshotMatrix& snap,
                                            const SmoothingConfig& cfg) {
    const int g_syms = static_cast<int>(snap.gamma.rows());
    const int n_c = static_cast<int>(snap.gamma.cols());
    cfg.validate(g_syms, n_c);
    const int g_starts = cfg.symbol_starts(g_syms);
    const int ns = cfg.seg_len;
    const int w = cfg.sub_starts;
    const Eigen::Index d = cfg.dim();
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);

    Eigen::MatrixXcd block(ns, ns);
    Eigen::MatrixXcd t(ns, ns);
    for (int s1 = 0; s1 < cfg.seg_count; ++s1) {
        for (int s2 = s1; s2 < cfg.seg_count; ++s2) {
            block.setZero();
            for (int g = 0; g < g_starts; ++g) {
                const auto x = snap.gamma.row(g + s1 * cfg.sym_stride);
                const auto y = snap.gamma.row(g + s2 * cfg.sym_stride);
                // windowed cross-correlation t[k1,k2] = sum_n x[n+k1] conj(y[n+k2]):
                // first row and column directly, interior by the sliding identity
                // t[k1,k2] = t[k1-1,k2-1] - x[k1-1] conj(y[k2-1]) + x[k1-1+w] conj(y[k2-1+w])
                for (int k2 = 0; k2 < ns; ++k2) {
                    cplx acc{0.0, 0.0};
                    for (int n = 0; n < w; ++n) acc += x(n) * std::conj(y(n + k2));
                    t(0, k2) = acc;
                }
                for (int k1 = 1; k1 < ns; ++k1) {
                    cplx acc{0.0, 0.0};
                    for (int n = 0; n < w; ++n) acc += x(n + k1) * std::conj(y(n));
                    t(k1, 0) = acc;
                }
                for (int k1 = 1; k1 < ns; ++k1)
                    for (int k2 = 1; k2 < ns; ++k2)
                        t(k1, k2) = t(k1 - 1, k2 - 1) -
                                    x(k1 - 1) * std::conj(y(k2 - 1)) +
                                    x(k1 - 1 + w) * std::conj(y(k2 - 1 + w));
                block += t;
            }
            c.block(static_cast<Eigen::Index>(s1) * ns, static_cast<Eigen::Index>(s2) * ns,
                    ns, ns) = block;
            if (s2 != s1)
                c.block(static_cast<Eigen::Index>(s2) * ns,
                        static_cast<Eigen::Index>(s1) * ns, ns, ns) = block.adjoint();
        }
    }
    c = 0.5 * (c + c.adjoint()).eval();
    return c;
}

/// Signal/noise subspace split of a Hermitian covariance, eigenvalues
/// descending.
struct SubspaceSplit {
    Eigen::MatrixXcd u_s;       ///< top-L eigenvectors
    Eigen::MatrixXcd u_n;       ///< remaining eigenvectors
    Eigen::VectorXd eigenvalues;///< descending

    Eigen::MatrixXcd noise_projector() const { return u_n * u_n.adjoint(); }
};

inline SubspaceSplit subspace_split(const Eigen::MatrixXcd& c, int l_sources) {
    const Eigen::Index d = c.rows();
    if (l_sources < 0 || l_sources >= d)
        throw std::invalid_argument("subspace_split: source count must be < dim");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("subspace_split: eigendecomposition failed");
    SubspaceSplit out;
    out.eigenvalues = eig.eigenvalues().reverse();
    Eigen::MatrixXcd v = eig.eigenvectors();
    Eigen::MatrixXcd v_desc(d, d);
    for (Eigen::Index i = 0; i < d; ++i) v_desc.col(i) = v.col(d - 1 - i);
    out.u_s = v_desc.leftCols(l_sources);
    out.u_n = v_desc.rightCols(d - l_sources);
    return out;
}

/// Largest-ratio eigenvalue gap heuristic for the source count, an
/// alternative to supplying it from scenario truth.
inline int estimate_source_count(const Eigen::VectorXd& eigenvalues_desc) {
    const Eigen::Index d = eigenvalues_desc.size();
    if (d < 2) return static_cast<int>(d);
    int best = 1;
    double best_ratio = -1.0;
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
        const double denom = std::max(eigenvalues_desc(k + 1), 1e-300);
        const double ratio = eigenvalues_desc(k) / denom;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = static_cast<int>(k) + 1;
        }
    }
    return best;
}

/// Steering vector of the smoothed observation: Doppler phase across the
/// stacked symbol strides, delay phase across the subcarriers of each
/// segment.
inline Eigen::VectorXcd smoothing_steering(double doppler_hz, double tau_s,
                                           const SmoothingConfig& cfg,
                                           const SystemConfig& sys) {
    Eigen::VectorXcd a(cfg.dim());
    for (int s = 0; s < cfg.seg_count; ++s) {
        const cplx th =
            std::polar(1.0, -kTwoPi * doppler_hz * s * cfg.sym_stride * sys.t_sym);
        for (int k = 0; k < cfg.seg_len; ++k) {
            const cplx tv = std::polar(1.0, -kTwoPi * k * sys.delta_f * tau_s);
            a(static_cast<Eigen::Index>(s) * cfg.seg_len + k) = th * tv;
        }
    }
    return a;
}

/// Subspace pseudo-spectrum 1/(a^H P_n a) over a Doppler x delay grid,
/// evaluated separably through the signal subspace. Denominators are
/// clamped at 1e-15.
inline Eigen::MatrixXd pseudo_spectrum(const SubspaceSplit& split, const SmoothingConfig& cfg,
                                       const SystemConfig& sys,
                                       const Eigen::VectorXd& delta_grid_hz,
                                       const Eigen::VectorXd& tau_grid_s) {
    if (delta_grid_hz.size() == 0 || tau_grid_s.size() == 0)
        throw std::invalid_argument("pseudo_spectrum: empty grid");
    const int n_delta = static_cast<int>(delta_grid_hz.size());
    const int n_tau = static_cast<int>(tau_grid_s.size());
    const int l = static_cast<int>(split.u_s.cols());
    const double norm_a = static_cast<double>(cfg.dim());

    // delay-axis response of each segment position
    Eigen::MatrixXcd t(cfg.seg_len, n_tau);
    for (int k = 0; k < cfg.seg_len; ++k)
        for (int p = 0; p < n_tau; ++p)
            t(k, p) = std::polar(1.0, -kTwoPi * k * sys.delta_f * tau_grid_s(p));

    // w_i = conj(reshape(u_i)) * t, one seg_count x n_tau sheet per eigenvector
    std::vector<Eigen::MatrixXcd> sheets(static_cast<size_t>(l));
    for (int i = 0; i < l; ++i) {
        Eigen::MatrixXcd v(cfg.seg_count, cfg.seg_len);
        for (int s = 0; s < cfg.seg_count; ++s)
            v.row(s) = split.u_s.col(i)
                           .segment(static_cast<Eigen::Index>(s) * cfg.seg_len, cfg.seg_len)
                           .transpose();
        sheets[static_cast<size_t>(i)] = v.conjugate() * t;
    }

    Eigen::MatrixXd b(n_delta, n_tau);
    Eigen::RowVectorXcd theta(cfg.seg_count);
    for (int di = 0; di < n_delta; ++di) {
        for (int s = 0; s < cfg.seg_count; ++s)
            theta(s) = std::polar(
                1.0, -kTwoPi * delta_grid_hz(di) * s * cfg.sym_stride * sys.t_sym);
        Eigen::RowVectorXd sig_power = Eigen::RowVectorXd::Zero(n_tau);
        for (int i = 0; i < l; ++i)
            sig_power += (theta * sheets[static_cast<size_t>(i)]).cwiseAbs2();
        for (int p = 0; p < n_tau; ++p) {
            const double denom = std::max(norm_a - sig_power(p), 1e-15);
            b(di, p) = 1.0 / denom;
        }
    }
    return b;
}

/// Caps the pseudo-spectrum dynamic range relative to its median level.
/// Exactly noiseless data drives pole denominators into round-off, where
/// relative pole heights carry no information and would dominate the
/// correlation arbitrarily; 90 dB over the floor is far beyond anything a
/// noise-regularized spectrum produces.
inline void limit_dynamic_range(Eigen::MatrixXd& b, double range = 1e9) {
    std::vector<double> values(b.data(), b.data() + b.size());
    std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
    const double cap = values[values.size() / 2] * range;
    b = b.cwiseMin(cap);
}

/// Full smoothing + covariance + subspace pipeline returning the
/// pseudo-spectrum over the standard zero-padded delay-Doppler grid,
/// normalized to unit peak and wrapped as a spectrum for the correlation
/// estimator.
inline DelayDopplerSpectrum music_spectrum_2d(const SnapshotMatrix& snap,
                                              const SmoothingConfig& cfg, int l_sources,
                                              int k_f, int k_tau) {
    SystemConfig sys = snap.config;
    sys.k_f = k_f;
    sys.k_tau = k_tau;
    const GridMeta grid = GridMeta::from_config(sys);
    Eigen::VectorXd delta_grid(sys.doppler_bins());
    for (int i = 0; i < sys.doppler_bins(); ++i) delta_grid(i) = i * grid.f_r_hz;
    Eigen::VectorXd tau_grid(sys.delay_bins());
    for (int p = 0; p < sys.delay_bins(); ++p) tau_grid(p) = p * grid.t_grid_s;

    const Eigen::MatrixXcd c = smoothed_covariance(snap, cfg);
    const SubspaceSplit split = subspace_split(c, l_sources);
    Eigen::MatrixXd b = pseudo_spectrum(split, cfg, sys, delta_grid, tau_grid);
    limit_dynamic_range(b);
    b /= b.maxCoeff();

    DelayDopplerSpectrum spec;
    spec.xi = b.cast<cplx>();
    spec.grid = grid;
    spec.k_f = k_f;
    spec.k_tau = k_tau;
    return spec;
}

/// Pseudo-spectrum row along delay at a fixed Doppler value, normalized to
/// unit peak; drops into the correlation estimator exactly like a
/// transform-based fingerprint.
inline FingerprintSpectrum music_fingerprint(const SnapshotMatrix& snap,
                                             const SmoothingConfig& cfg,
                                             const SystemConfig& sys, int l_sources,
                                             double delta_fixed_hz,
                                             const Eigen::VectorXd& tau_grid_s) {
    const Eigen::MatrixXcd c = smoothed_covariance(snap, cfg);
    const SubspaceSplit split = subspace_split(c, l_sources);
    Eigen::VectorXd delta(1);
    delta(0) = delta_fixed_hz;
    Eigen::MatrixXd b = pseudo_spectrum(split, cfg, sys, delta, tau_grid_s);
    limit_dynamic_range(b);
    const double peak = b.maxCoeff();
    FingerprintSpectrum fp;
    fp.beta = (b.row(0) / peak).cast<cplx>();
    fp.k0 = 0;
    fp.power = fp.beta.squaredNorm();
    return fp;
}

}  // namespace fpsync
