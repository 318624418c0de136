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

#include <catch2/catch_amalgamated.hpp>

#include "fpsync/channel.hpp"
#include "fpsync/spectrum.hpp"

using namespace fpsync;

namespace {

/// Literal product oracle: F*_{KG} diag(psi_G^pad) Gamma^pad diag(psi_N^pad) F*_{KN}.
Eigen::MatrixXcd spectrum_by_matrix_product(const Eigen::MatrixXcd& gamma,
                                            const Eigen::VectorXcd& psi_g,
                                            const Eigen::VectorXcd& psi_n, int k_f,
                                            int k_tau) {
    const Eigen::Index g = gamma.rows();
    const Eigen::Index nc = gamma.cols();
    const Eigen::Index rows = g * k_f;
    const Eigen::Index cols = nc * k_tau;
    Eigen::MatrixXcd padded = Eigen::MatrixXcd::Zero(rows, cols);
    padded.topLeftCorner(g, nc) = gamma;
    Eigen::VectorXcd pg = Eigen::VectorXcd::Zero(rows);
    pg.head(g) = psi_g;
    Eigen::VectorXcd pn = Eigen::VectorXcd::Zero(cols);
    pn.head(nc) = psi_n;
    const Eigen::MatrixXcd f_rows = dft_matrix(static_cast<int>(rows)).conjugate();
    const Eigen::MatrixXcd f_cols = dft_matrix(static_cast<int>(cols)).conjugate();
    return f_rows * pg.asDiagonal() * padded * pn.asDiagonal() * f_cols;
}

SystemConfig cfg_for(int n_c, int g, int k_f, int k_tau) {
    return SystemConfig::create(28e9, 100e3, n_c, 4, g, 2, 2, k_f, k_tau);
}

SnapshotMatrix snap_of(const Eigen::MatrixXcd& gamma, const SystemConfig& cfg) {
    SnapshotMatrix s;
    s.gamma = gamma;
    s.config = cfg;
    return s;
}

}  // namespace

TEST_CASE("window coefficients", "[spectrum]") {
    const auto rect = make_window(WindowKind::rectangular, 4);
    for (int i = 0; i < 4; ++i) REQUIRE(rect.samples(i) == cplx{1.0, 0.0});

    // symmetric convention: both endpoints evaluate to 0.08
    const auto ham2 = make_window(WindowKind::hamming, 2);
    REQUIRE(std::abs(ham2.samples(0) - cplx{0.08, 0.0}) < 1e-12);
    REQUIRE(std::abs(ham2.samples(1) - cplx{0.08, 0.0}) < 1e-12);

    for (auto kind : {WindowKind::rectangular, WindowKind::hamming, WindowKind::hann,
                      WindowKind::blackman}) {
        const auto w = make_window(kind, 33);
        for (int i = 0; i < 33; ++i) {
            REQUIRE(std::abs(w.samples(i)) <= 1.0 + 1e-12);
            REQUIRE(std::abs(w.samples(i) - w.samples(32 - i)) < 1e-12);
        }
    }
    REQUIRE_THROWS_AS(make_window(WindowKind::custom, 8), std::invalid_argument);
}

TEST_CASE("constant snapshot concentrates at the DC bin", "[spectrum]") {
    auto cfg = cfg_for(8, 4, 1, 1);
    const auto snap = snap_of(Eigen::MatrixXcd::Ones(4, 8), cfg);
    const auto spec = windowed_2d_spectrum(snap, make_window(WindowKind::rectangular, 4),
                                           make_window(WindowKind::rectangular, 8), 1, 1);
    REQUIRE(std::abs(spec.xi(0, 0) - cplx{std::sqrt(32.0), 0.0}) < 1e-10);
    for (int i = 0; i < spec.rows(); ++i)
        for (int p = 0; p < spec.cols(); ++p)
            if (i != 0 || p != 0) REQUIRE(std::abs(spec.xi(i, p)) < 1e-10);
}

TEST_CASE("single static path lands on its delay bin at zero Doppler", "[spectrum]") {
    auto cfg = cfg_for(16, 8, 2, 4);
    Scenario scn;
    PathParams p;
    p.delay_s = 3.0 * cfg.t_r() / 4.0;  // 3 grid bins at k_tau = 4
    scn.paths = {p};
    scn.static_count = 1;
    scn.precoder = Eigen::VectorXcd::Ones(cfg.m_t);
    const auto snap = snap_of(synthesize_gamma_noiseless(scn, cfg, 0), cfg);
    const auto spec =
        windowed_2d_spectrum(snap, make_window(WindowKind::rectangular, cfg.g_syms),
                             make_window(WindowKind::rectangular, cfg.n_c), 2, 4);
    Eigen::Index bi, bp;
    spec.xi.cwiseAbs().maxCoeff(&bi, &bp);
    REQUIRE(bi == 0);
    REQUIRE(bp == std::lround(p.delay_s * cfg.n_c * cfg.delta_f * cfg.k_tau));
}

TEST_CASE("fft spectrum equals the literal matrix product", "[spectrum]") {
    Rng rng(3);
    auto cfg = cfg_for(8, 8, 2, 2);
    Eigen::MatrixXcd gamma(8, 8);
    for (int g = 0; g < 8; ++g)
        for (int n = 0; n < 8; ++n) gamma(g, n) = rng.complex_gaussian(1.0);
    const auto psi_g = make_window(WindowKind::hamming, 8);
    const auto psi_n = make_window(WindowKind::hann, 8);
    const auto spec = windowed_2d_spectrum(snap_of(gamma, cfg), psi_g, psi_n, 2, 2);
    const auto oracle =
        spectrum_by_matrix_product(gamma, psi_g.samples, psi_n.samples, 2, 2);
    REQUIRE((spec.xi - oracle).cwiseAbs().maxCoeff() < 1e-10);

    // real-part shortcut follows the same product applied to Re(Gamma)
    const auto spec_re =
        windowed_2d_spectrum(snap_of(gamma, cfg), psi_g, psi_n, 2, 2, true);
    const auto oracle_re = spectrum_by_matrix_product(
        gamma.real().cast<cplx>(), psi_g.samples, psi_n.samples, 2, 2);
    REQUIRE((spec_re.xi - oracle_re).cwiseAbs().maxCoeff() < 1e-10);

    REQUIRE_THROWS_AS(windowed_2d_spectrum(snap_of(gamma, cfg),
                                           make_window(WindowKind::rectangular, 4),
                                           psi_n, 2, 2),
                      std::invalid_argument);
}

TEST_CASE("window transform profiles", "[spectrum]") {
    const auto rect = make_window(WindowKind::rectangular, 128);
    const auto prof = window_dft_profile(rect, 25).cwiseAbs().eval();
    // Dirichlet nulls at multiples of K
    REQUIRE(prof(0) > prof(1));
    REQUIRE(prof(25) < 1e-10);
    REQUIRE(prof(50) < 1e-10);
    REQUIRE(mainlobe_width(prof, WidthMethod::first_minima) ==
            Catch::Approx(50.0));

    const auto ham = make_window(WindowKind::hamming, 128);
    const auto prof_h = window_dft_profile(ham, 25).cwiseAbs().eval();
    const double w_rect = mainlobe_width(prof, WidthMethod::first_minima);
    const double w_ham = mainlobe_width(prof_h, WidthMethod::first_minima);
    REQUIRE(w_ham > 1.7 * w_rect);
    REQUIRE(w_ham < 2.3 * w_rect);

    Eigen::VectorXcd impulse = Eigen::VectorXcd::Zero(16);
    impulse(0) = 1.0;
    const auto flat = window_dft_profile(custom_window(impulse), 2).cwiseAbs().eval();
    for (int i = 0; i < flat.size(); ++i)
        REQUIRE(flat(i) == Catch::Approx(1.0 / std::sqrt(32.0)).epsilon(1e-12));
}

TEST_CASE("mainlobe width by -3 dB crossing and error cases", "[spectrum]") {
    // triangle profile: direct scan oracle says the -3 dB points sit where
    // the linear flanks cross peak * 10^(-3/20)
    const int n = 41;
    Eigen::VectorXd tri(n);
    for (int i = 0; i < n; ++i) tri(i) = 1.0 - std::abs(i - 20) / 20.0;
    const double level = std::pow(10.0, -3.0 / 20.0);
    const double expect = 2.0 * 20.0 * (1.0 - level);
    REQUIRE(mainlobe_width(tri, WidthMethod::three_db) ==
            Catch::Approx(expect).margin(1e-9));

    Eigen::VectorXd flat = Eigen::VectorXd::Ones(32);
    REQUIRE_THROWS_AS(mainlobe_width(flat), std::invalid_argument);
}

TEST_CASE("fingerprint row selection", "[spectrum]") {
    auto cfg = cfg_for(16, 8, 2, 2);
    Scenario scn;
    PathParams a, b;
    a.delay_s = 1.0 * cfg.t_r() / 2.0;
    b.delay_s = 5.0 * cfg.t_r() / 2.0;
    b.gain = {0.4, 0.1};
    scn.paths = {a, b};
    scn.static_count = 2;
    scn.precoder = Eigen::VectorXcd::Ones(cfg.m_t);

    const auto psi_g = make_window(WindowKind::rectangular, cfg.g_syms);
    const auto psi_n = make_window(WindowKind::rectangular, cfg.n_c);

    SECTION("all static, zero CFO selects the DC Doppler row") {
        const auto spec = windowed_2d_spectrum(
            snap_of(synthesize_gamma_noiseless(scn, cfg, 0), cfg), psi_g, psi_n, 2, 2);
        REQUIRE(extract_fingerprint(spec).k0 == 0);
    }

    SECTION("CFO shifts the selected row by its grid quotient") {
        const auto grid = GridMeta::from_config(cfg);
        scn.offsets.cfo_hz = 3.0 * grid.f_r_hz;
        const auto spec = windowed_2d_spectrum(
            snap_of(synthesize_gamma_noiseless(scn, cfg, 0), cfg), psi_g, psi_n, 2, 2);
        REQUIRE(extract_fingerprint(spec).k0 == 3);
    }

    SECTION("row ties break to the lower index") {
        DelayDopplerSpectrum spec;
        spec.xi = Eigen::MatrixXcd::Zero(4, 6);
        spec.xi.row(1).setConstant(cplx{1.0, 0.0});
        spec.xi.row(3).setConstant(cplx{1.0, 0.0});
        REQUIRE(extract_fingerprint(spec).k0 == 1);

        const auto forced = extract_fingerprint(spec, 3);
        REQUIRE(forced.k0 == 3);
        REQUIRE(forced.power == Catch::Approx(6.0));
    }

    SECTION("empty spectrum is rejected") {
        DelayDopplerSpectrum spec;
        REQUIRE_THROWS_AS(extract_fingerprint(spec), std::invalid_argument);
    }
}

TEST_CASE("integer drifts shift the fingerprint cyclically", "[spectrum]") {
    auto cfg = cfg_for(16, 8, 2, 4);
    Scenario scn;
    for (int i = 0; i < 3; ++i) {
        PathParams p;
        p.gain = std::polar(1.0 - 0.2 * i, 0.4 * i);
        p.delay_s = (2 + 3 * i) * cfg.t_r() / 4.0;
        scn.paths.push_back(p);
    }
    scn.static_count = 3;
    scn.precoder = Eigen::VectorXcd::Ones(cfg.m_t);
    scn.offsets.cfo_hz = 100.0;
    scn.offsets.to_s = 0.1 * cfg.t_r();

    const auto grid = GridMeta::from_config(cfg);
    const int row_shift = 2;
    const long col_shift = 5;
    scn.offsets.cfo_drift_hz = row_shift * grid.f_r_hz;
    scn.offsets.to_drift_s = col_shift * grid.t_grid_s;

    const auto psi_g = make_window(WindowKind::rectangular, cfg.g_syms);
    const auto psi_n = make_window(WindowKind::rectangular, cfg.n_c);
    const auto base = windowed_2d_spectrum(
        snap_of(synthesize_gamma_noiseless(scn, cfg, 0), cfg), psi_g, psi_n, 2, 4);
    Scenario moved = scn;
    moved.offsets = scn.offsets.drifted();
    const auto after = windowed_2d_spectrum(
        snap_of(synthesize_gamma_noiseless(moved, cfg, 0), cfg), psi_g, psi_n, 2, 4);

    const auto fp = extract_fingerprint(base);
    const auto fp_after = extract_fingerprint(after);
    REQUIRE(fp_after.k0 == fp.k0 + row_shift);

    // content moves to higher bins: beta_after[q] = phase * beta[q - shift],
    // i.e. beta removed of the known carrier phase equals the shifted row
    const cplx carrier = std::polar(1.0, -kTwoPi * cfg.f_c * scn.offsets.to_drift_s);
    const Eigen::RowVectorXcd shifted =
        cyclic_shift(fp.beta.transpose(), -col_shift).transpose() * carrier;
    REQUIRE((fp_after.beta - shifted).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fractional-shift residual decreases as the delay padding doubles",
          "[spectrum]") {
    auto base_cfg = cfg_for(16, 8, 1, 1);
    Scenario scn;
    for (int i = 0; i < 3; ++i) {
        PathParams p;
        p.gain = std::polar(1.0, 0.3 * i);
        p.delay_s = (1 + 2 * i) * base_cfg.t_r();  // on-grid for every k_tau
        scn.paths.push_back(p);
    }
    scn.static_count = 3;
    scn.precoder = Eigen::VectorXcd::Ones(base_cfg.m_t);
    scn.offsets.to_drift_s = base_cfg.t_r() / 3.0;  // never on-grid

    double prev = 1e300;
    for (int k_tau = 1; k_tau <= 32; k_tau *= 2) {
        auto cfg = cfg_for(16, 8, 1, k_tau);
        const auto psi_g = make_window(WindowKind::rectangular, cfg.g_syms);
        const auto psi_n = make_window(WindowKind::rectangular, cfg.n_c);
        const auto base = windowed_2d_spectrum(
            snap_of(synthesize_gamma_noiseless(scn, cfg, 0), cfg), psi_g, psi_n, 1, k_tau);
        Scenario moved = scn;
        moved.offsets = scn.offsets.drifted();
        const auto after = windowed_2d_spectrum(
            snap_of(synthesize_gamma_noiseless(moved, cfg, 0), cfg), psi_g, psi_n, 1,
            k_tau);

        const auto grid = GridMeta::from_config(cfg);
        const long bins = std::lround(scn.offsets.to_drift_s / grid.t_grid_s);
        const cplx carrier =
            std::polar(1.0, -kTwoPi * cfg.f_c * scn.offsets.to_drift_s);
        const Eigen::RowVectorXcd predicted =
            cyclic_shift(base.xi.row(0).transpose(), -bins).transpose() * carrier;
        const double residual =
            (after.xi.row(0) - predicted).norm() / base.xi.row(0).norm();
        INFO("k_tau = " << k_tau);
        REQUIRE(residual < prev);
        prev = residual;
    }
}

TEST_CASE("static paths share one Doppler profile", "[spectrum]") {
    auto cfg = cfg_for(16, 8, 2, 2);
    ClockOffsets off;
    off.cfo_hz = 240.0;
    PathParams p1, p2;
    p1.delay_s = 2.0 * cfg.t_sam;
    p2.delay_s = 7.0 * cfg.t_sam;
    p2.gain = {0.2, 0.9};
    const auto th1 = doppler_sequence(p1, off, cfg);
    const auto th2 = doppler_sequence(p2, off, cfg);
    REQUIRE((th1 - th2).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("windowed transform of a tone equals window profile convolution",
          "[spectrum]") {
    // convolution-theorem identity on the delay axis
    Rng rng(13);
    const int n_c = 16, k = 2, n = n_c * k;
    const auto psi = make_window(WindowKind::hamming, n_c);
    for (int rep = 0; rep < 5; ++rep) {
        const double tau = rng.uniform(0.0, 1.0);  // cycles across the band
        Eigen::VectorXcd tone(n_c);
        for (int i = 0; i < n_c; ++i) tone(i) = std::polar(1.0, -kTwoPi * i * tau);

        const Eigen::VectorXcd windowed =
            padded_conj_dft_unitary(psi.samples.cwiseProduct(tone), n);
        const Eigen::VectorXcd conv =
            circular_convolve(window_dft_profile(psi, k),
                              padded_conj_dft_unitary(tone, n)) /
            std::sqrt(static_cast<double>(n));
        REQUIRE((windowed - conv).cwiseAbs().maxCoeff() < 1e-9);
    }
}
