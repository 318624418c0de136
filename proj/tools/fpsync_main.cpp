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

#include <CLI11.hpp>
#include <json.hpp>
#include <iostream>

#include "fpsync/harness.hpp"

namespace {

using namespace fpsync;

struct CliOverrides {
    std::string config_path;
    std::string out_prefix;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    std::vector<double> snr_db;
    std::string estimator;
    bool row_lock = false;
    std::string q_convention;
};

ExperimentSpec build_spec(const CliOverrides& cli) {
    ExperimentSpec spec = cli.config_path.empty()
                              ? ExperimentSpec{}
                              : experiment_from_config(ConfigFile::parse_file(cli.config_path));
    if (!cli.out_prefix.empty()) spec.out_prefix = cli.out_prefix;
    if (cli.seed_set) spec.seed = cli.seed;
    if (cli.trials > 0) spec.sweep.trials = cli.trials;
    if (!cli.snr_db.empty()) spec.sweep.snr_db = cli.snr_db;
    if (!cli.estimator.empty()) spec.sweep.estimators = {cli.estimator};
    if (cli.row_lock) spec.sweep.row_lock = true;
    if (!cli.q_convention.empty()) {
        if (cli.q_convention == "cdf") spec.prob_options.q_convention = QConvention::cdf;
        else if (cli.q_convention == "tail")
            spec.prob_options.q_convention = QConvention::tail;
        else throw std::runtime_error("--q-convention must be cdf or tail");
    }
    return spec;
}

void cmd_simulate(const ExperimentSpec& spec, const std::string& window_name_arg) {
    const SystemConfig& sys = spec.sys;
    Scenario scn = scenario_from_fixed(spec.scene.fixed, sys);
    scn.seed = spec.seed;
    const SnapshotMatrix snap = synthesize_gamma(scn, sys, 0);
    const EstimatorKind kind =
        parse_estimator(window_name_arg.empty() ? "rectangular" : window_name_arg);

    DelayDopplerSpectrum spec2d;
    if (kind.is_music) {
        const SmoothingConfig smoothing = spec.music.auto_cfg
                                              ? SmoothingConfig::defaults_for(sys)
                                              : spec.music.smoothing;
        spec2d = music_spectrum_2d(snap, smoothing, scn.static_count, sys.k_f, sys.k_tau);
    } else {
        spec2d = windowed_2d_spectrum(snap, make_window(kind.window, sys.g_syms),
                                      make_window(kind.window, sys.n_c), sys.k_f,
                                      sys.k_tau);
    }
    const FingerprintSpectrum fp = extract_fingerprint(spec2d);

    {
        csv::Writer w(spec.out_prefix + "_grid.csv",
                      {"f_r_hz", "t_grid_s", "doppler_bins", "delay_bins", "k_f", "k_tau",
                       "k0"});
        w.row({csv::format_number(spec2d.grid.f_r_hz),
               csv::format_number(spec2d.grid.t_grid_s), std::to_string(spec2d.rows()),
               std::to_string(spec2d.cols()), std::to_string(spec2d.k_f),
               std::to_string(spec2d.k_tau), std::to_string(fp.k0)});
    }
    {
        csv::Writer w(spec.out_prefix + "_spectrum.csv", {"row", "col", "re", "im"});
        for (int i = 0; i < spec2d.rows(); ++i)
            for (int p = 0; p < spec2d.cols(); ++p)
                w.row({std::to_string(i), std::to_string(p),
                       csv::format_number(spec2d.xi(i, p).real()),
                       csv::format_number(spec2d.xi(i, p).imag())});
    }
    {
        csv::Writer w(spec.out_prefix + "_fingerprint.csv",
                      {"bin", "re", "im", "magnitude"});
        for (int p = 0; p < fp.beta.size(); ++p)
            w.row({std::to_string(p), csv::format_number(fp.beta(p).real()),
                   csv::format_number(fp.beta(p).imag()),
                   csv::format_number(std::abs(fp.beta(p)))});
    }
    std::cout << "wrote " << spec.out_prefix << "_{grid,spectrum,fingerprint}.csv (k0="
              << fp.k0 << ")\n";
}

void cmd_mse_sweep(const ExperimentSpec& spec) {
    const auto rows = run_mse_sweep(spec);
    write_result_rows(spec.out_prefix + "_mse.csv", rows);
    for (const auto& r : rows)
        std::cout << "snr " << r.snr_db << " dB  " << r.estimator << "/" << r.window
                  << "  mse " << r.mse_m2 << " m^2  (" << r.trials << " trials, "
                  << r.wall_time_s << " s)\n";
    std::cout << "wrote " << spec.out_prefix << "_mse.csv\n";
}

void cmd_windows(const ExperimentSpec& spec) {
    const auto gallery = run_window_gallery(spec);
    write_gallery(spec.out_prefix, gallery);
    for (const auto& e : gallery.entries)
        std::cout << e.label << ": fingerprint -3dB width " << e.fingerprint_width_bins
                  << " bins\n";
    std::cout << "wrote " << spec.out_prefix
              << "_{window_profiles,window_widths,fingerprint_autocorr}.csv\n";
}

void cmd_theory(const ExperimentSpec& spec) {
    const auto rows = run_theory_curves(spec);
    write_theory_rows(spec.out_prefix + "_theory.csv", rows);
    std::cout << "wrote " << spec.out_prefix << "_theory.csv (" << rows.size()
              << " points)\n";
}

void cmd_crlb(const ExperimentSpec& spec) {
    const auto rows = run_crlb(spec);
    write_bound_rows(spec.out_prefix + "_crlb.csv", rows);
    std::cout << "wrote " << spec.out_prefix << "_crlb.csv\n";
}

void cmd_music_demo(const ExperimentSpec& spec) {
    const SystemConfig& sys = spec.sys;
    Scenario scn = scenario_from_fixed(spec.scene.fixed, sys);
    scn.noise_var = strongest_path_power(scn, sys);  // 0 dB demo
    Rng rng(derive_seed(spec.seed, 0xdeceULL));
    const SnapshotMatrix snap = synthesize_gamma(scn, sys, 0, rng);
    const SmoothingConfig smoothing =
        spec.music.auto_cfg ? SmoothingConfig::defaults_for(sys) : spec.music.smoothing;
    const auto mspec =
        music_spectrum_2d(snap, smoothing, scn.static_count, sys.k_f, sys.k_tau);
    csv::Writer w(spec.out_prefix + "_music_spectrum.csv", {"row", "col", "value"});
    for (int i = 0; i < mspec.rows(); ++i)
        for (int p = 0; p < mspec.cols(); ++p)
            w.row({std::to_string(i), std::to_string(p),
                   csv::format_number(mspec.xi(i, p).real())});
    std::cout << "wrote " << spec.out_prefix << "_music_spectrum.csv (" << mspec.rows()
              << "x" << mspec.cols() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fingerprint-spectrum CFO/TO synchronization toolkit"};
    app.require_subcommand(1);

    CliOverrides cli;
    app.add_option("--config", cli.config_path, "configuration file (key=value or JSON)");
    app.add_option("--out", cli.out_prefix, "output file prefix");
    app.add_option("--seed", cli.seed, "master seed")->each([&cli](const std::string&) {
        cli.seed_set = true;
    });
    app.add_option("--trials", cli.trials, "Monte Carlo trials per sweep point");
    app.add_option("--snr", cli.snr_db, "SNR list in dB")->delimiter(',');
    app.add_option("--estimator", cli.estimator,
                   "rectangular|hamming|hann|blackman|bs-w-music");
    app.add_flag("--row-lock", cli.row_lock, "lock the row search to the true drift row");
    app.add_option("--q-convention", cli.q_convention, "cdf|tail");

    std::string sim_window;
    auto* sim = app.add_subcommand("simulate", "synthesize one packet and export its "
                                               "spectrum and fingerprint");
    sim->add_option("--window", sim_window, "spectrum window (or bs-w-music)");
    auto* sweep = app.add_subcommand("mse-sweep", "Monte Carlo synchronization MSE sweep");
    auto* windows = app.add_subcommand("windows", "window gallery: profiles, widths, "
                                                  "fingerprint autocorrelations");
    auto* theory = app.add_subcommand("theory", "argmax-error theory curves with Monte "
                                                "Carlo overlay");
    auto* crlb_cmd = app.add_subcommand("crlb", "estimation bound table across "
                                                "subcarrier counts");
    auto* demo = app.add_subcommand("music-demo", "subspace pseudo-spectrum export");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentSpec spec = build_spec(cli);
        if (sim->parsed()) cmd_simulate(spec, sim_window);
        if (sweep->parsed()) cmd_mse_sweep(spec);
        if (windows->parsed()) cmd_windows(spec);
        if (theory->parsed()) cmd_theory(spec);
        if (crlb_cmd->parsed()) cmd_crlb(spec);
        if (demo->parsed()) cmd_music_demo(spec);
    } catch (const std::exception& ex) {
        nlohmann::json err{{"error", ex.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
