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

#include "fpsync/mse_theory.hpp"
#include "fpsync/rng.hpp"
#include "fpsync/window_design.hpp"

using namespace fpsync;

namespace {

struct ArgmaxMc {
    Eigen::VectorXd p;      ///< empirical win probabilities
    double mse = 0.0;       ///< empirical wrapped squared error, bins^2
    double mse_se = 0.0;    ///< standard error of the mse estimate
    long draws = 0;
};

/// Sampling oracle: argmax over independent Gaussians with means s and
/// common standard deviation sigma.
ArgmaxMc argmax_monte_carlo(const Eigen::VectorXd& s, double sigma, double shift,
                            long draws, std::uint64_t seed) {
    const int n = static_cast<int>(s.size());
    Rng rng(seed);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    double acc = 0.0, acc2 = 0.0;
    for (long d = 0; d < draws; ++d) {
        int best = 0;
        double best_val = s(0) + sigma * rng.gaussian();
        for (int i = 1; i < n; ++i) {
            const double v = s(i) + sigma * rng.gaussian();
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        counts(best) += 1.0;
        const double e = wrap_signed(static_cast<double>(best) - shift,
                                     static_cast<double>(n));
        acc += e * e;
        acc2 += e * e * e * e;
    }
    ArgmaxMc out;
    out.p = counts / static_cast<double>(draws);
    out.mse = acc / static_cast<double>(draws);
    const double var = acc2 / draws - out.mse * out.mse;
    out.mse_se = std::sqrt(std::max(var, 0.0) / static_cast<double>(draws));
    out.draws = draws;
    return out;
}

}  // namespace

TEST_CASE("gaussian cdf basics", "[mse_theory]") {
    REQUIRE(gaussian_cdf(0.0) == Catch::Approx(0.5));
    REQUIRE(gaussian_cdf(40.0) == Catch::Approx(1.0));
    REQUIRE(gaussian_cdf(-40.0) == Catch::Approx(0.0).margin(1e-300));

    // quadrature oracle: integrate the density from far left up to x
    auto phi_by_quadrature = [](double x) {
        std::vector<double> pts{-12.0};
        for (double b : {-6.0, -3.0, 0.0, 3.0})
            if (b < x) pts.push_back(b);
        pts.push_back(x);
        const auto f = [](double t) { return gaussian_pdf(t); };
        return detail::integrate_adaptive(f, pts, 1e-10);
    };
    REQUIRE(gaussian_cdf(1.6449) == Catch::Approx(0.95).margin(1e-4));
    REQUIRE(gaussian_cdf(1.6449) ==
            Catch::Approx(phi_by_quadrature(1.6449)).margin(1e-8));

    for (double x : {-3.0, -1.0, 0.3, 2.4})
        REQUIRE(gaussian_cdf(x) == Catch::Approx(phi_by_quadrature(x)).margin(1e-8));

    // monotone
    double prev = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.25) {
        REQUIRE(gaussian_cdf(x) >= prev);
        prev = gaussian_cdf(x);
    }

    // stable log tail
    REQUIRE(log_gaussian_cdf(-5.0) ==
            Catch::Approx(std::log(gaussian_cdf(-5.0))).epsilon(1e-10));
    REQUIRE(std::isfinite(log_gaussian_cdf(-300.0)));
    REQUIRE(log_gaussian_cdf(-300.0) < -44000.0);
}

TEST_CASE("noise variance forms", "[mse_theory]") {
    REQUIRE(sigma_bar_sq(0.0, 1.0, 128) == 0.0);
    // direct substitution: 2*0.01/1 + 128*0.01/2 = 0.02 + 0.64
    REQUIRE(sigma_bar_sq(0.01, 1.0, 128) == Catch::Approx(0.66));
    REQUIRE_THROWS_AS(sigma_bar_sq(0.01, 0.0, 128), std::invalid_argument);

    const auto forms = noise_variance_forms(0.01, 2.0, 1.9, 2.1, 64);
    REQUIRE(forms.exact_literal ==
            Catch::Approx((2.1 * 0.01 + 1.9 * 0.01 + 32 * 0.01) / 4.0));
    REQUIRE(forms.exact_quartic ==
            Catch::Approx((2.1 * 0.01 + 1.9 * 0.01 + 64 * 0.0001) / 4.0));

    const auto model = NoiseModel::create(0.01, 1.0, 128);
    REQUIRE(model.sigma2_bar == Catch::Approx(0.66));
}

TEST_CASE("argmax probability symmetry and limits", "[mse_theory]") {
    SECTION("uniform means give the exchangeable 1/N") {
        const int n = 6;
        const Eigen::VectorXd s = Eigen::VectorXd::Constant(n, 0.3);
        for (int q = 0; q < n; ++q)
            REQUIRE(p_argmax(s, 0.7, q) == Catch::Approx(1.0 / n).margin(1e-7));
    }

    SECTION("vanishing noise concentrates on the peak") {
        const auto s = ideal_s(8, 5.0);
        REQUIRE(p_argmax(s.s, 1e-3, 5) == Catch::Approx(1.0).margin(1e-9));
        REQUIRE(p_argmax(s.s, 1e-3, 2) == Catch::Approx(0.0).margin(1e-9));
    }

    SECTION("invalid inputs") {
        const auto s = ideal_s(8, 5.0);
        REQUIRE_THROWS_AS(p_argmax(s.s, 0.0, 5), std::invalid_argument);
        REQUIRE_THROWS_AS(p_argmax(s.s, -1.0, 5), std::invalid_argument);
        REQUIRE_THROWS_AS(p_argmax(s.s, 1.0, 9), std::invalid_argument);
    }
}

TEST_CASE("argmax probability against the sampling oracle", "[mse_theory]") {
    const auto s = ideal_s(4, 0.0);
    const double sigma = 1.0;  // sigma_bar^2 = 1
    const long draws = 1000000;
    const auto mc = argmax_monte_carlo(s.s, sigma, 0.0, draws, 20240901);

    for (int q = 0; q < 4; ++q) {
        const double p = p_argmax(s.s, sigma, q);
        const double se = std::sqrt(mc.p(q) * (1.0 - mc.p(q)) / draws);
        INFO("q = " << q << " theory " << p << " mc " << mc.p(q));
        REQUIRE(std::abs(p - mc.p(q)) < 3.0 * se + 1e-8);
    }

    // the batch path agrees with the scalar integrals
    const auto all = p_argmax_all(s.s, sigma);
    for (int q = 0; q < 4; ++q)
        REQUIRE(all(q) == Catch::Approx(p_argmax(s.s, sigma, q)).margin(1e-7));
}

TEST_CASE("theoretical mse contract", "[mse_theory]") {
    SECTION("noiseless limit with integer shift") {
        const auto s = ideal_s(16, 7.0);
        REQUIRE(theoretical_mse(s.s, 1e-3, 7.0) == Catch::Approx(0.0).margin(1e-9));
    }

    SECTION("rounding residual with fractional shift") {
        const auto s = ideal_s(16, 3.4);
        REQUIRE(theoretical_mse(s.s, 1e-3, 3.4) == Catch::Approx(0.16).margin(1e-6));
    }

    SECTION("matches the sampling oracle at moderate noise") {
        const auto s = ideal_s(8, 2.0);
        const double sigma = std::sqrt(0.5);
        const auto mc = argmax_monte_carlo(s.s, sigma, 2.0, 1000000, 77);
        const double theory = theoretical_mse(s.s, sigma, 2.0);
        INFO("theory " << theory << " mc " << mc.mse << " se " << mc.mse_se);
        REQUIRE(std::abs(theory - mc.mse) < 3.0 * mc.mse_se + 1e-6);
    }
}

TEST_CASE("argmax probabilities normalize and mse is monotone in noise",
          "[mse_theory]") {
    Rng rng(17);
    Eigen::VectorXd s(12);
    for (int i = 0; i < 12; ++i) s(i) = rng.uniform(0.0, 0.4);
    s(5) = 1.0;
    for (double sigma : {0.05, 0.2, 0.8, 2.0}) {
        const auto p = p_argmax_all(s, sigma);
        REQUIRE(std::abs(p.sum() - 1.0) < 1e-6);
        for (int q = 0; q < 12; ++q) REQUIRE(p(q) >= 0.0);
    }

    const auto ideal = ideal_s(16, 6.0);
    double prev = -1.0;
    for (double sigma : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
        const double mse = theoretical_mse(ideal.s, sigma, 6.0);
        REQUIRE(mse >= prev - 1e-9);
        prev = mse;
    }
}

TEST_CASE("asymptotic limits of the ideal fingerprint mse", "[mse_theory]") {
    const int n = 16;
    const double shift = 6.0;
    const auto s = ideal_s(n, shift);

    REQUIRE(theoretical_mse(s.s, 1e-3, shift) == Catch::Approx(0.0).margin(1e-9));

    // infinite-noise limit: uniform argmax
    double uniform_mse = 0.0;
    for (int q = 0; q < n; ++q) {
        const double d = wrap_signed(static_cast<double>(q) - shift,
                                     static_cast<double>(n));
        uniform_mse += d * d / n;
    }
    REQUIRE(theoretical_mse(s.s, 300.0, shift) ==
            Catch::Approx(uniform_mse).epsilon(1e-3));
}

TEST_CASE("cdf-product gap vanishes at finite noise, found by bisection",
          "[mse_theory]") {
    // perturbed target against the ideal one: the largest gap between the
    // two CDF products falls below epsilon at a finite noise level
    const int n = 8;
    const auto s_ap = ideal_s(n, 3.0);
    Eigen::VectorXd s_op = s_ap.s;
    s_op(1) = 0.25;
    s_op(6) = 0.15;

    auto product_gap = [&](double sigma) {
        double gap = 0.0;
        for (double b = -2.0; b <= 3.0; b += 0.01) {
            double lp_ap = 0.0, lp_op = 0.0;
            for (int i = 0; i < n; ++i) {
                if (i == s_ap.peak_index) continue;
                lp_ap += log_gaussian_cdf((b - s_ap.s(i)) / sigma);
                lp_op += log_gaussian_cdf((b - s_op(i)) / sigma);
            }
            gap = std::max(gap, std::abs(std::exp(lp_ap) - std::exp(lp_op)));
        }
        return gap;
    };

    const double eps = 1e-3;
    double lo = 1e-3, hi = 1e3;
    REQUIRE(product_gap(hi) < eps);   // heavy noise flattens both products
    REQUIRE(product_gap(lo) >= eps);  // sharp products differ near the bumps
    for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (product_gap(mid) < eps)
            hi = mid;
        else
            lo = mid;
    }
    REQUIRE(hi < 1e3);
    REQUIRE(std::isfinite(hi));
    REQUIRE(product_gap(hi * 1.01) < eps);
}

TEST_CASE("crlb scaling and finite-difference oracle", "[mse_theory]") {
    auto cfg = SystemConfig::create(28e9, 100e3, 64, 8, 16, 2, 2, 1, 1);
    const Eigen::VectorXcd precoder = Eigen::VectorXcd::Ones(cfg.m_t);
    ClockOffsets off;
    off.cfo_hz = 120.0;
    off.to_s = 15.0 / kSpeedOfLight;

    std::vector<PathParams> paths(2);
    paths[0].gain = {1.0, 0.2};
    paths[0].delay_s = 45.0 / kSpeedOfLight;
    paths[0].velocity = 3.0;
    paths[1].gain = {0.5, -0.4};
    paths[1].delay_s = 90.0 / kSpeedOfLight;
    paths[1].velocity = -6.0;

    SECTION("noise scaling is linear") {
        const auto c1 = crlb(paths, cfg, 1.0, off, precoder);
        const auto c2 = crlb(paths, cfg, 2.0, off, precoder);
        REQUIRE((c2 - 2.0 * c1).cwiseAbs().maxCoeff() <
                1e-10 * c1.cwiseAbs().maxCoeff());
    }

    SECTION("more subcarriers shrink every diagonal entry") {
        auto cfg2 = SystemConfig::create(28e9, 100e3, 128, 8, 16, 2, 2, 1, 1);
        const auto c1 = crlb(paths, cfg, 1.0, off, precoder);
        const auto c2 = crlb(paths, cfg2, 1.0, off, precoder);
        for (int i = 0; i < c1.rows(); ++i)
            REQUIRE(c2(i, i).real() < c1(i, i).real());
    }

    SECTION("analytic jacobian matches central differences") {
        // five-point central differences on the noiseless model; steps
        // scaled to the parameter's natural unit (1 m/s and one sample)
        Scenario scn;
        scn.paths = paths;
        scn.static_count = 0;
        scn.precoder = precoder;
        scn.offsets = off;

        auto model = [&](const std::vector<PathParams>& p) {
            Scenario s = scn;
            s.paths = p;
            return synthesize_gamma_noiseless(s, cfg, 0);
        };

        for (size_t l = 0; l < paths.size(); ++l) {
            Eigen::MatrixXcd d_v, d_tau;
            gamma_jacobian_terms(paths[l], off, cfg, precoder, 0, d_v, d_tau);

            auto fd = [&](auto setter, double h) {
                auto pp = paths, pm = paths, pp2 = paths, pm2 = paths;
                setter(pp[l], h);
                setter(pm[l], -h);
                setter(pp2[l], 2.0 * h);
                setter(pm2[l], -2.0 * h);
                return ((8.0 * (model(pp) - model(pm)) - (model(pp2) - model(pm2))) /
                        (12.0 * h))
                    .eval();
            };

            const auto fd_v = fd([](PathParams& p, double h) { p.velocity += h; },
                                 1e-7 * 1.0e4);
            const double err_v =
                (fd_v - d_v).cwiseAbs().maxCoeff() / d_v.cwiseAbs().maxCoeff();
            REQUIRE(err_v < 1e-5);

            const auto fd_tau = fd([](PathParams& p, double h) { p.delay_s += h; },
                                   1e-7 * cfg.t_sam);
            const double err_tau =
                (fd_tau - d_tau).cwiseAbs().maxCoeff() / d_tau.cwiseAbs().maxCoeff();
            REQUIRE(err_tau < 1e-5);
        }
    }

    SECTION("coincident paths are singular") {
        auto dup = paths;
        dup[1] = dup[0];
        REQUIRE_THROWS_AS(crlb(dup, cfg, 1.0, off, precoder), std::runtime_error);
    }
}
