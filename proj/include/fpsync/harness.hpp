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

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fpsync/channel.hpp"
#include "fpsync/config.hpp"
#include "fpsync/csv.hpp"
#include "fpsync/estimator.hpp"
#include "fpsync/mse_theory.hpp"
#include "fpsync/music.hpp"
#include "fpsync/spectrum.hpp"
#include "fpsync/window_design.hpp"

namespace fpsync {

// ---------------------------------------------------------------------------
// experiment specification
// ---------------------------------------------------------------------------

/// Fixed scene parameters (used when randomization is off and by the
/// gallery/demo commands). Distances are one-way propagation lengths.
struct FixedScene {
    std::vector<double> gains_db{10.0, 4.0, 7.0, 1.0};
    std::vector<double> distances_m{40.0, 50.0, 75.0, 110.0};
    std::vector<double> phases_rad{0.0, 1.1, 2.2, 3.3};
    double cfo_hz = 0.0;
    double to_s = 0.0;
};

struct SceneSpec {
    bool randomize = true;
    int min_static = 2;
    int max_static = 4;
    double min_distance_m = 30.0;
    double max_distance_m = 120.0;
    double gain_spread_db = 10.0;  ///< per-path level within [-spread, 0] dB of peak
    FixedScene fixed;
};

enum class DriftMode { on_grid, continuous };

struct SweepSpec {
    std::vector<double> snr_db{-40, -35, -30, -25, -20, -15, -10, -5, 0};
    int trials = 500;
    std::vector<std::string> estimators{"rectangular", "hamming", "hann", "blackman",
                                        "bs-w-music"};
    bool row_lock = false;
    DriftMode drift_mode = DriftMode::on_grid;
    double max_drift_bins = 8.0;
    double max_drift_rows = 3.0;
};

struct MusicSpec {
    bool auto_cfg = true;        ///< derive smoothing from the system config
    SmoothingConfig smoothing;   ///< used when auto_cfg is false
    int source_count = 0;        ///< 0: use scenario truth
};

struct TheorySpec {
    int kn_c = 64;
    double true_shift_bins = 17.0;
    std::vector<double> snr_db{0,  2.5, 5,  7.5, 10, 12.5, 15, 17.5,
                               20, 22.5, 25, 27.5, 30, 32.5, 35, 37.5, 40};
    long mc_draws = 200000;
};

struct ExperimentSpec {
    SystemConfig sys =
        SystemConfig::create(28e9, 100e3, 128, 16, 64, 2, 2, 2, 8);
    SceneSpec scene;
    SweepSpec sweep;
    MusicSpec music;
    TheorySpec theory;
    std::string out_prefix = "fpsync";
    std::uint64_t seed = 1;
    int threads = 0;  ///< 0: hardware concurrency
    ArgmaxProbOptions prob_options;
};

/// One emitted sweep result. Wall time is reported on the console only so
/// that output files depend on nothing but (config, seed).
struct ResultRow {
    double snr_db = 0.0;
    std::string estimator;
    std::string window;
    int n_c = 0;
    int g_syms = 0;
    double mse_m2 = 0.0;
    double mse_bins2 = 0.0;
    int trials = 0;
    double wall_time_s = 0.0;
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

/// Deterministic pairwise summation; reduction order never depends on the
/// thread schedule.
inline double pairwise_sum(const std::vector<double>& v, size_t lo, size_t hi) {
    if (hi - lo <= 8) {
        double acc = 0.0;
        for (size_t i = lo; i < hi; ++i) acc += v[i];
        return acc;
    }
    const size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v, 0, v.size());
}

/// Runs fn(0..n-1) on a small worker pool; the first exception wins and is
/// rethrown on the calling thread.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            int i;
            while ((i = next.fetch_add(1)) < n) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    next.store(n);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Estimator selector: one of the standard windows or the subspace pipeline.
struct EstimatorKind {
    bool is_music = false;
    WindowKind window = WindowKind::rectangular;
    std::string label;
};

inline EstimatorKind parse_estimator(const std::string& name) {
    EstimatorKind e;
    e.label = name;
    if (name == "bs-w-music" || name == "music") {
        e.is_music = true;
        e.label = "bs-w-music";
        return e;
    }
    if (name == "rectangular") e.window = WindowKind::rectangular;
    else if (name == "hamming") e.window = WindowKind::hamming;
    else if (name == "hann") e.window = WindowKind::hann;
    else if (name == "blackman") e.window = WindowKind::blackman;
    else throw std::invalid_argument("unknown estimator '" + name + "'");
    return e;
}

/// Scene built from the fixed description.
inline Scenario scenario_from_fixed(const FixedScene& fx, const SystemConfig& cfg) {
    if (fx.gains_db.size() != fx.distances_m.size())
        throw std::invalid_argument("fixed scene: gains and distances differ in length");
    Scenario scn;
    for (size_t i = 0; i < fx.gains_db.size(); ++i) {
        PathParams p;
        const double phase = i < fx.phases_rad.size() ? fx.phases_rad[i] : 0.0;
        p.gain = std::polar(std::pow(10.0, fx.gains_db[i] / 20.0), phase);
        p.delay_s = fx.distances_m[i] / kSpeedOfLight;
        scn.paths.push_back(p);
    }
    scn.static_count = static_cast<int>(scn.paths.size());
    scn.precoder = Eigen::VectorXcd::Ones(cfg.m_t);
    scn.offsets.cfo_hz = fx.cfo_hz;
    scn.offsets.to_s = fx.to_s;
    return scn;
}

/// Strongest per-sample path power at the reference antenna; the SNR of a
/// sweep point is this power over the noise variance.
inline double strongest_path_power(const Scenario& scn, const SystemConfig& cfg, int m = 0) {
    double best = 0.0;
    for (const auto& p : scn.paths)
        best = std::max(best,
                        std::norm(path_amplitude(p, scn.offsets, cfg, scn.precoder, m)));
    return best;
}

/// Per-trial scene and ground-truth drift, all drawn from one substream so
/// a trial replays identically at every SNR point.
struct TrialDraw {
    Scenario scene;          ///< reference-packet scenario, noise_var unset
    double drift_bins = 0.0; ///< true delay drift on the fine grid
    double drift_rows = 0.0; ///< true Doppler drift in row units
};

inline TrialDraw draw_trial(const ExperimentSpec& spec, int trial) {
    const GridMeta grid = GridMeta::from_config(spec.sys);
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(trial), 0xA11CE5ULL));
    TrialDraw out;
    if (spec.scene.randomize) {
        Scenario scn;
        const int n_static = static_cast<int>(
            rng.uniform_int(spec.scene.min_static, spec.scene.max_static));
        for (int i = 0; i < n_static; ++i) {
            PathParams p;
            const double level_db = -rng.uniform(0.0, spec.scene.gain_spread_db);
            p.gain = std::pow(10.0, level_db / 20.0) * rng.unit_phase();
            p.delay_s =
                rng.uniform(spec.scene.min_distance_m, spec.scene.max_distance_m) /
                kSpeedOfLight;
            scn.paths.push_back(p);
        }
        scn.static_count = n_static;
        scn.precoder = Eigen::VectorXcd::Ones(spec.sys.m_t);
        scn.offsets.cfo_hz = rng.uniform(-3.0, 3.0) * grid.f_r_hz;
        scn.offsets.to_s = rng.uniform(0.0, 4.0) * grid.t_grid_s;
        out.scene = scn;
    } else {
        out.scene = scenario_from_fixed(spec.scene.fixed, spec.sys);
        rng.uniform();  // keep the stream aligned across modes
    }
    if (spec.sweep.drift_mode == DriftMode::on_grid) {
        out.drift_bins = static_cast<double>(
            rng.uniform_int(-static_cast<long>(spec.sweep.max_drift_bins),
                            static_cast<long>(spec.sweep.max_drift_bins)));
        out.drift_rows = static_cast<double>(
            rng.uniform_int(-static_cast<long>(spec.sweep.max_drift_rows),
                            static_cast<long>(spec.sweep.max_drift_rows)));
    } else {
        out.drift_bins = rng.uniform(-spec.sweep.max_drift_bins, spec.sweep.max_drift_bins);
        out.drift_rows = rng.uniform(-spec.sweep.max_drift_rows, spec.sweep.max_drift_rows);
    }
    out.scene.offsets.to_drift_s = out.drift_bins * grid.t_grid_s;
    out.scene.offsets.cfo_drift_hz = out.drift_rows * grid.f_r_hz;
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo sweep
// ---------------------------------------------------------------------------

inline std::vector<ResultRow> run_mse_sweep(const ExperimentSpec& spec) {
    const SystemConfig& sys = spec.sys;
    const GridMeta grid = GridMeta::from_config(sys);
    const double r_m_per_bin = kSpeedOfLight * grid.t_grid_s / 2.0;
    const long delay_bins = sys.delay_bins();
    const long doppler_bins = sys.doppler_bins();

    std::vector<EstimatorKind> estimators;
    for (const auto& name : spec.sweep.estimators)
        estimators.push_back(parse_estimator(name));
    std::vector<WindowSpec> psi_g(estimators.size()), psi_n(estimators.size());
    for (size_t e = 0; e < estimators.size(); ++e) {
        if (estimators[e].is_music) continue;
        psi_g[e] = make_window(estimators[e].window, sys.g_syms);
        psi_n[e] = make_window(estimators[e].window, sys.n_c);
    }
    const SmoothingConfig smoothing =
        spec.music.auto_cfg ? SmoothingConfig::defaults_for(sys) : spec.music.smoothing;

    std::vector<ResultRow> rows;
    for (size_t point = 0; point < spec.sweep.snr_db.size(); ++point) {
        const double snr_db = spec.sweep.snr_db[point];
        const double snr_lin = std::pow(10.0, snr_db / 10.0);
        const auto t_start = std::chrono::steady_clock::now();

        // per-trial squared errors, indexed so the reduction order is fixed
        std::vector<std::vector<double>> err_bins2(
            estimators.size(), std::vector<double>(spec.sweep.trials, 0.0));

        parallel_for(spec.sweep.trials, spec.threads, [&](int trial) {
            try {
                TrialDraw draw = draw_trial(spec, trial);
                Scenario scn = draw.scene;
                scn.noise_var = strongest_path_power(scn, sys) / snr_lin;

                Rng noise_rng(
                    derive_seed(spec.seed, static_cast<std::uint64_t>(trial), 0x4015EULL));
                const SnapshotMatrix pkt1 = synthesize_gamma(scn, sys, 0, noise_rng);
                Scenario drifted = scn;
                drifted.offsets = scn.offsets.drifted();
                const SnapshotMatrix pkt2 = synthesize_gamma(drifted, sys, 0, noise_rng);

                const int sources = spec.music.source_count > 0
                                        ? spec.music.source_count
                                        : scn.static_count;

                for (size_t e = 0; e < estimators.size(); ++e) {
                    DelayDopplerSpectrum spec1, spec2;
                    if (estimators[e].is_music) {
                        spec1 = music_spectrum_2d(pkt1, smoothing, sources, sys.k_f,
                                                  sys.k_tau);
                        spec2 = music_spectrum_2d(pkt2, smoothing, sources, sys.k_f,
                                                  sys.k_tau);
                    } else {
                        spec1 = windowed_2d_spectrum(pkt1, psi_g[e], psi_n[e], sys.k_f,
                                                     sys.k_tau);
                        spec2 = windowed_2d_spectrum(pkt2, psi_g[e], psi_n[e], sys.k_f,
                                                     sys.k_tau);
                    }
                    const FingerprintSpectrum fp = extract_fingerprint(spec1);
                    const CorrelationSurface surf = cross_correlate(spec2, fp);
                    std::optional<int> lock;
                    if (spec.sweep.row_lock) {
                        long locked =
                            (fp.k0 + std::lround(draw.drift_rows)) % doppler_bins;
                        if (locked < 0) locked += doppler_bins;
                        lock = static_cast<int>(locked);
                    }
                    const EstimateResult est = estimate_drift(surf, grid, lock);
                    const double err = wrap_signed(
                        static_cast<double>(est.q_hat) - draw.drift_bins,
                        static_cast<double>(delay_bins));
                    err_bins2[e][static_cast<size_t>(trial)] = err * err;
                }
            } catch (const std::exception& ex) {
                throw std::runtime_error("trial " + std::to_string(trial) + ": " +
                                         ex.what());
            }
        });

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count();
        for (size_t e = 0; e < estimators.size(); ++e) {
            ResultRow row;
            row.snr_db = snr_db;
            row.estimator = estimators[e].is_music ? "bs-w-music" : "dft-window";
            row.window = estimators[e].is_music ? "-" : window_name(estimators[e].window);
            row.n_c = sys.n_c;
            row.g_syms = sys.g_syms;
            row.trials = spec.sweep.trials;
            row.mse_bins2 = pairwise_sum(err_bins2[e]) / spec.sweep.trials;
            row.mse_m2 = row.mse_bins2 * r_m_per_bin * r_m_per_bin;
            row.wall_time_s = wall;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline void write_result_rows(const std::string& path, const std::vector<ResultRow>& rows) {
    csv::Writer w(path, {"snr_db", "estimator", "window", "n_c", "g_syms", "trials",
                         "mse_bins2", "mse_m2"});
    for (const auto& r : rows)
        w.row({csv::format_number(r.snr_db), r.estimator, r.window,
               std::to_string(r.n_c), std::to_string(r.g_syms), std::to_string(r.trials),
               csv::format_number(r.mse_bins2), csv::format_number(r.mse_m2)});
}

// ---------------------------------------------------------------------------
// window gallery
// ---------------------------------------------------------------------------

/// Profiles, widths and fingerprint autocorrelations for the standard
/// windows and the subspace fingerprint on the fixed scene.
struct GalleryEntry {
    std::string label;
    Eigen::VectorXd profile;         ///< transform magnitude (windows only)
    double profile_width_bins = 0.0; ///< first-minima width of the transform
    Eigen::VectorXd fingerprint;     ///< |beta| on the delay grid
    double fingerprint_width_bins = 0.0;  ///< -3 dB width of the strongest peak
    Eigen::VectorXd autocorr;        ///< |correlation of beta with itself|
};

struct GalleryResult {
    std::vector<GalleryEntry> entries;
    double gallery_snr_db = 0.0;
};

inline GalleryResult run_window_gallery(const ExperimentSpec& spec, double snr_db = 0.0) {
    const SystemConfig& sys = spec.sys;
    GalleryResult out;
    out.gallery_snr_db = snr_db;

    Scenario scn = scenario_from_fixed(spec.scene.fixed, sys);
    scn.noise_var = strongest_path_power(scn, sys) / std::pow(10.0, snr_db / 10.0);
    Rng rng(derive_seed(spec.seed, 0x6a11e7ULL));
    const SnapshotMatrix snap = synthesize_gamma(scn, sys, 0, rng);

    auto autocorr_of = [](const FingerprintSpectrum& fp) {
        return circular_correlate(fp.beta.transpose(), fp.beta.transpose())
            .cwiseAbs()
            .eval();
    };

    for (auto kind : {WindowKind::rectangular, WindowKind::hamming, WindowKind::hann,
                      WindowKind::blackman}) {
        GalleryEntry e;
        e.label = window_name(kind);
        const auto psi = make_window(kind, sys.n_c);
        e.profile = window_dft_profile(psi, sys.k_tau).cwiseAbs();
        e.profile_width_bins = mainlobe_width(e.profile, WidthMethod::first_minima);
        const auto spec2d = windowed_2d_spectrum(snap, make_window(kind, sys.g_syms), psi,
                                                 sys.k_f, sys.k_tau);
        const auto fp = extract_fingerprint(spec2d);
        e.fingerprint = fp.beta.cwiseAbs().transpose();
        e.fingerprint_width_bins = mainlobe_width(e.fingerprint, WidthMethod::three_db);
        e.autocorr = autocorr_of(fp);
        out.entries.push_back(std::move(e));
    }

    {
        GalleryEntry e;
        e.label = "bs-w-music";
        const SmoothingConfig smoothing =
            spec.music.auto_cfg ? SmoothingConfig::defaults_for(sys) : spec.music.smoothing;
        const auto mspec = music_spectrum_2d(snap, smoothing, scn.static_count, sys.k_f,
                                             sys.k_tau);
        const auto fp = extract_fingerprint(mspec);
        e.fingerprint = fp.beta.cwiseAbs().transpose();
        e.fingerprint_width_bins = mainlobe_width(e.fingerprint, WidthMethod::three_db);
        e.autocorr = autocorr_of(fp);
        out.entries.push_back(std::move(e));
    }
    return out;
}

inline void write_gallery(const std::string& prefix, const GalleryResult& g) {
    {
        csv::Writer w(prefix + "_window_profiles.csv", {"window", "bin", "magnitude"});
        for (const auto& e : g.entries) {
            for (int b = 0; b < e.profile.size(); ++b)
                w.row({e.label, std::to_string(b), csv::format_number(e.profile(b))});
        }
    }
    {
        csv::Writer w(prefix + "_window_widths.csv",
                      {"window", "metric", "width_bins"});
        for (const auto& e : g.entries) {
            if (e.profile.size() > 0)
                w.row({e.label, "transform_first_minima",
                       csv::format_number(e.profile_width_bins)});
            w.row({e.label, "fingerprint_peak_3db",
                   csv::format_number(e.fingerprint_width_bins)});
        }
    }
    {
        csv::Writer w(prefix + "_fingerprint_autocorr.csv",
                      {"window", "lag", "magnitude"});
        for (const auto& e : g.entries)
            for (int q = 0; q < e.autocorr.size(); ++q)
                w.row({e.label, std::to_string(q), csv::format_number(e.autocorr(q))});
    }
}

// ---------------------------------------------------------------------------
// theory curves
// ---------------------------------------------------------------------------

struct TheoryRow {
    double snr_db = 0.0;
    double sigma_bar = 0.0;
    double mse_bins2 = 0.0;
    double mse_m2 = 0.0;
    double mc_mse_bins2 = 0.0;
    double mc_se_bins2 = 0.0;
};

/// Expected argmax error of the unit-pulse correlation mean over the noise
/// ladder implied by the SNR sweep, with a Monte Carlo overlay drawn from
/// the same Gaussian model.
inline std::vector<TheoryRow> run_theory_curves(const ExperimentSpec& spec) {
    const int kn_c = spec.theory.kn_c;
    const double shift = spec.theory.true_shift_bins;
    const auto s = ideal_s(kn_c, shift);
    const GridMeta grid = GridMeta::from_config(spec.sys);
    const double r_m_per_bin = kSpeedOfLight * grid.t_grid_s / 2.0;

    std::vector<TheoryRow> rows;
    for (size_t point = 0; point < spec.theory.snr_db.size(); ++point) {
        const double snr_db = spec.theory.snr_db[point];
        const double sigma2_tilde = std::pow(10.0, -snr_db / 10.0);
        TheoryRow row;
        row.snr_db = snr_db;
        row.sigma_bar = std::sqrt(sigma_bar_sq(sigma2_tilde, 1.0, kn_c));
        row.mse_bins2 = theoretical_mse(s.s, row.sigma_bar, shift, spec.prob_options);
        row.mse_m2 = row.mse_bins2 * r_m_per_bin * r_m_per_bin;

        Rng rng(derive_seed(spec.seed, point, 0x7e0cULL));
        double acc = 0.0, acc2 = 0.0;
        for (long d = 0; d < spec.theory.mc_draws; ++d) {
            int best = 0;
            double best_val = s.s(0) + row.sigma_bar * rng.gaussian();
            for (int i = 1; i < kn_c; ++i) {
                const double v = s.s(i) + row.sigma_bar * rng.gaussian();
                if (v > best_val) {
                    best_val = v;
                    best = i;
                }
            }
            const double e =
                wrap_signed(static_cast<double>(best) - shift, static_cast<double>(kn_c));
            acc += e * e;
            acc2 += e * e * e * e;
        }
        row.mc_mse_bins2 = acc / static_cast<double>(spec.theory.mc_draws);
        const double var =
            acc2 / static_cast<double>(spec.theory.mc_draws) - row.mc_mse_bins2 * row.mc_mse_bins2;
        row.mc_se_bins2 =
            std::sqrt(std::max(var, 0.0) / static_cast<double>(spec.theory.mc_draws));
        rows.push_back(row);
    }
    return rows;
}

inline void write_theory_rows(const std::string& path, const std::vector<TheoryRow>& rows) {
    csv::Writer w(path, {"snr_db", "sigma_bar", "mse_bins2", "mse_m2", "mc_mse_bins2",
                         "mc_se_bins2"});
    for (const auto& r : rows)
        w.row({csv::format_number(r.snr_db), csv::format_number(r.sigma_bar),
               csv::format_number(r.mse_bins2), csv::format_number(r.mse_m2),
               csv::format_number(r.mc_mse_bins2), csv::format_number(r.mc_se_bins2)});
}

// ---------------------------------------------------------------------------
// bound table
// ---------------------------------------------------------------------------

struct BoundRow {
    int n_c = 0;
    int path = 0;
    std::string param;  ///< "velocity" or "delay"
    double value = 0.0;
};

/// Estimation bound diagonals across subcarrier counts for a fixed two-path
/// scene with one mover.
inline std::vector<BoundRow> run_crlb(const ExperimentSpec& spec,
                                      const std::vector<int>& subcarriers = {64, 128, 256},
                                      double sigma2 = 1.0) {
    std::vector<BoundRow> rows;
    for (int n_c : subcarriers) {
        SystemConfig cfg = SystemConfig::create(
            spec.sys.f_c, spec.sys.delta_f, n_c, spec.sys.cp_len, spec.sys.g_syms,
            spec.sys.m_r, spec.sys.m_t, spec.sys.k_f, spec.sys.k_tau);
        std::vector<PathParams> paths(2);
        paths[0].gain = {1.0, 0.2};
        paths[0].delay_s = 45.0 / kSpeedOfLight;
        paths[0].velocity = 3.0;
        paths[1].gain = {0.5, -0.4};
        paths[1].delay_s = 90.0 / kSpeedOfLight;
        paths[1].velocity = -6.0;
        ClockOffsets off;
        const Eigen::VectorXcd precoder = Eigen::VectorXcd::Ones(cfg.m_t);
        const Eigen::MatrixXcd bound = crlb(paths, cfg, sigma2, off, precoder);
        const int l_count = static_cast<int>(paths.size());
        for (int l = 0; l < l_count; ++l) {
            rows.push_back({n_c, l, "velocity", bound(l, l).real()});
            rows.push_back({n_c, l, "delay", bound(l_count + l, l_count + l).real()});
        }
    }
    return rows;
}

inline void write_bound_rows(const std::string& path, const std::vector<BoundRow>& rows) {
    csv::Writer w(path, {"n_c", "path", "param", "crlb"});
    for (const auto& r : rows)
        w.row({std::to_string(r.n_c), std::to_string(r.path), r.param,
               csv::format_number(r.value)});
}

// ---------------------------------------------------------------------------
// configuration loading
// ---------------------------------------------------------------------------

inline ExperimentSpec experiment_from_config(const ConfigFile& c) {
    ExperimentSpec spec;
    spec.sys = SystemConfig::create(
        c.get_double("system", "f_c_hz", 28e9), c.get_double("system", "delta_f_hz", 100e3),
        static_cast<int>(c.get_int("system", "n_c", 128)),
        static_cast<int>(c.get_int("system", "cp_len", 16)),
        static_cast<int>(c.get_int("system", "g_syms", 64)),
        static_cast<int>(c.get_int("system", "m_r", 2)),
        static_cast<int>(c.get_int("system", "m_t", 2)),
        static_cast<int>(c.get_int("system", "k_f", 2)),
        static_cast<int>(c.get_int("system", "k_tau", 8)));

    spec.scene.randomize = c.get_bool("scenario", "randomize", true);
    spec.scene.min_static = static_cast<int>(c.get_int("scenario", "min_static", 2));
    spec.scene.max_static = static_cast<int>(c.get_int("scenario", "max_static", 4));
    spec.scene.min_distance_m = c.get_double("scenario", "min_distance_m", 30.0);
    spec.scene.max_distance_m = c.get_double("scenario", "max_distance_m", 120.0);
    spec.scene.gain_spread_db = c.get_double("scenario", "gain_spread_db", 10.0);
    spec.scene.fixed.gains_db =
        c.get_double_list("scenario", "gains_db", spec.scene.fixed.gains_db);
    spec.scene.fixed.distances_m =
        c.get_double_list("scenario", "distances_m", spec.scene.fixed.distances_m);
    spec.scene.fixed.phases_rad =
        c.get_double_list("scenario", "phases_rad", spec.scene.fixed.phases_rad);
    spec.scene.fixed.cfo_hz = c.get_double("scenario", "cfo_hz", 0.0);
    spec.scene.fixed.to_s = c.get_double("scenario", "to_s", 0.0);

    spec.sweep.snr_db = c.get_double_list("sweep", "snr_db", spec.sweep.snr_db);
    spec.sweep.trials = static_cast<int>(c.get_int("sweep", "trials", 500));
    spec.sweep.estimators =
        c.get_string_list("sweep", "estimators", spec.sweep.estimators);
    spec.sweep.row_lock = c.get_bool("sweep", "row_lock", false);
    const std::string mode = c.get_string("sweep", "drift_mode", "on_grid");
    if (mode == "on_grid") spec.sweep.drift_mode = DriftMode::on_grid;
    else if (mode == "continuous") spec.sweep.drift_mode = DriftMode::continuous;
    else throw std::runtime_error("config: drift_mode must be on_grid or continuous");
    spec.sweep.max_drift_bins = c.get_double("sweep", "max_drift_bins", 8.0);
    spec.sweep.max_drift_rows = c.get_double("sweep", "max_drift_rows", 3.0);

    spec.music.auto_cfg = c.get_bool("music", "auto", true);
    if (!spec.music.auto_cfg) {
        spec.music.smoothing.seg_len =
            static_cast<int>(c.get_int("music", "seg_len", 64));
        spec.music.smoothing.sym_stride =
            static_cast<int>(c.get_int("music", "sym_stride", 4));
        spec.music.smoothing.seg_count =
            static_cast<int>(c.get_int("music", "seg_count", 4));
        spec.music.smoothing.sub_starts =
            static_cast<int>(c.get_int("music", "sub_starts", 65));
    }
    spec.music.source_count = static_cast<int>(c.get_int("music", "source_count", 0));

    spec.theory.kn_c = static_cast<int>(c.get_int("theory", "kn_c", 64));
    spec.theory.true_shift_bins = c.get_double("theory", "true_shift_bins", 17.0);
    spec.theory.snr_db = c.get_double_list("theory", "snr_db", spec.theory.snr_db);
    spec.theory.mc_draws = c.get_int("theory", "mc_draws", 200000);

    spec.out_prefix = c.get_string("output", "prefix", "fpsync");
    spec.seed = static_cast<std::uint64_t>(c.get_int("output", "seed", 1));
    spec.threads = static_cast<int>(c.get_int("output", "threads", 0));

    const std::string qc = c.get_string("theory", "q_convention", "cdf");
    if (qc == "cdf") spec.prob_options.q_convention = QConvention::cdf;
    else if (qc == "tail") spec.prob_options.q_convention = QConvention::tail;
    else throw std::runtime_error("config: q_convention must be cdf or tail");
    return spec;
}

}  // namespace fpsync
