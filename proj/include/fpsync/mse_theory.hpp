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
#include <algorithm>
#include <functional>
#include <vector>

#include "fpsync/channel.hpp"
#include "fpsync/core.hpp"
#include "fpsync/types.hpp"

namespace fpsync {

/// Standard normal CDF.
inline double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// log of the standard normal CDF, stable far into the left tail.
inline double log_gaussian_cdf(double x) {
    if (x > -36.0) return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
    // asymptotic expansion of the Mills ratio
    const double x2 = x * x;
    return -0.5 * x2 - std::log(-x) - 0.5 * std::log(kTwoPi) +
           std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

inline double gaussian_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

// ---------------------------------------------------------------------------
// adaptive Gauss-Kronrod quadrature (15-point Kronrod, embedded 7-point Gauss)
// ---------------------------------------------------------------------------
namespace detail {

inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGk15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kG7Weights[4] = {0.129484966168870, 0.279705391489277,
                                         0.381830050505119, 0.417959183673469};

template <typename F>
void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = kGk15Nodes[i] * h;
        const double fv = (i == 7) ? f(c) : f(c - x) + f(c + x);
        resk += kGk15Weights[i] * fv;
        // the embedded 7-point Gauss rule shares the odd nodes and the center
        if (i % 2 == 1 || i == 7) resg += kG7Weights[i / 2] * fv;
    }
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

template <typename F>
double integrate_adaptive(const F& f, std::vector<double> breakpoints, double abs_tol,
                          int max_depth = 48) {
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                      breakpoints.end());
    struct Panel {
        double a, b;
        int depth;
    };
    std::vector<Panel> stack;
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
        stack.push_back({breakpoints[i], breakpoints[i + 1], 0});
    double total = 0.0;
    const double panel_tol = abs_tol / std::max<size_t>(1, stack.size());
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        double val = 0.0, err = 0.0;
        gk15(f, p.a, p.b, val, err);
        if (err <= panel_tol || p.depth >= max_depth) {
            total += val;
        } else {
            const double mid = 0.5 * (p.a + p.b);
            stack.push_back({p.a, mid, p.depth + 1});
            stack.push_back({mid, p.b, p.depth + 1});
        }
    }
    return total;
}

}  // namespace detail

/// Reading of the Gaussian-CDF factor inside the argmax probability
/// integral: plain CDF (matches argmax-of-Gaussians sampling) or the
/// complementary tail.
enum class QConvention { cdf, tail };

struct ArgmaxProbOptions {
    QConvention q_convention = QConvention::cdf;
    /// When set, the CDF argument divides by the variance instead of the
    /// standard deviation (the literal printed form).
    bool literal_variance_arg = false;
    double abs_tol = 1e-9;
};

namespace detail {

inline double cdf_scale(double sigma_bar, const ArgmaxProbOptions& opt) {
    return opt.literal_variance_arg ? sigma_bar * sigma_bar : sigma_bar;
}

/// Sum over i != q of the log CDF terms at threshold b.
inline double log_cdf_product(const Eigen::VectorXd& s, double b, int q, double scale,
                              QConvention conv) {
    double acc = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        if (i == q) continue;
        const double arg = (b - s(i)) / scale;
        acc += (conv == QConvention::cdf) ? log_gaussian_cdf(arg) : log_gaussian_cdf(-arg);
    }
    return acc;
}

inline std::vector<double> argmax_breakpoints(const Eigen::VectorXd& s, double sigma_bar) {
    const double lo = s.minCoeff() - 10.0 * sigma_bar;
    const double hi = s.maxCoeff() + 10.0 * sigma_bar;
    std::vector<double> pts{lo, hi};
    for (int i = 0; i < s.size(); ++i) {
        for (double k : {-6.0, -2.0, 0.0, 2.0, 6.0}) {
            const double x = s(i) + k * sigma_bar;
            if (x > lo && x < hi) pts.push_back(x);
        }
    }
    return pts;
}

}  // namespace detail

/// Probability that bin q carries the maximum of independent Gaussians with
/// means s[i] and common standard deviation sigma_bar, computed as a 1-D
/// integral with the CDF product evaluated in the log domain.
inline double p_argmax(const Eigen::VectorXd& s, double sigma_bar, int q,
                       const ArgmaxProbOptions& opt = {}) {
    if (!(sigma_bar > 0.0)) throw std::invalid_argument("p_argmax: sigma_bar must be > 0");
    if (q < 0 || q >= s.size()) throw std::invalid_argument("p_argmax: index out of range");
    const double scale = detail::cdf_scale(sigma_bar, opt);
    auto integrand = [&](double b) {
        const double lp = detail::log_cdf_product(s, b, q, scale, opt.q_convention);
        return gaussian_pdf((b - s(q)) / sigma_bar) / sigma_bar * std::exp(lp);
    };
    const double p = detail::integrate_adaptive(
        integrand, detail::argmax_breakpoints(s, sigma_bar), opt.abs_tol);
    return std::clamp(p, 0.0, 1.0);
}

/// All argmax probabilities at once on a shared composite grid; the log-CDF
/// sum is evaluated once per node and reused for every q.
inline Eigen::VectorXd p_argmax_all(const Eigen::VectorXd& s, double sigma_bar,
                                    const ArgmaxProbOptions& opt = {}) {
    if (!(sigma_bar > 0.0))
        throw std::invalid_argument("p_argmax_all: sigma_bar must be > 0");
    const int n = static_cast<int>(s.size());
    const double scale = detail::cdf_scale(sigma_bar, opt);

    std::vector<double> pts = detail::argmax_breakpoints(s, sigma_bar);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    // composite Gauss-Kronrod panels, refined to a fraction of sigma_bar.
    // Long panels only occur between breakpoints where every integrand has
    // sub-1e-8 tail mass, so the cap does not cost accuracy.
    std::vector<std::pair<double, double>> panels;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double len = pts[i + 1] - pts[i];
        const int pieces = std::min(
            256, std::max(1, static_cast<int>(std::ceil(len / (0.25 * sigma_bar)))));
        for (int p = 0; p < pieces; ++p) {
            const double a = pts[i] + len * p / pieces;
            const double b = pts[i] + len * (p + 1) / pieces;
            panels.emplace_back(a, b);
        }
    }

    Eigen::VectorXd result = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd log_terms(n);
    for (const auto& [a, b] : panels) {
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        for (int i = 0; i < 8; ++i) {
            for (int side = 0; side < ((i == 7) ? 1 : 2); ++side) {
                const double x = c + (side == 0 ? -1.0 : 1.0) * detail::kGk15Nodes[i] * h;
                const double w = detail::kGk15Weights[i] * h;
                double log_sum = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double arg = (x - s(j)) / scale;
                    log_terms(j) = (opt.q_convention == QConvention::cdf)
                                       ? log_gaussian_cdf(arg)
                                       : log_gaussian_cdf(-arg);
                    log_sum += log_terms(j);
                }
                for (int q = 0; q < n; ++q) {
                    const double lp = log_sum - log_terms(q);
                    result(q) += w * gaussian_pdf((x - s(q)) / sigma_bar) / sigma_bar *
                                 std::exp(lp);
                }
            }
        }
    }
    return result;
}

/// Expected squared bin error of the argmax estimator:
/// sum_q P_q * wrap(q - true_shift)^2, in bins^2. Throws when the
/// probabilities fail to normalize to 1 within 1e-6.
inline double theoretical_mse(const Eigen::VectorXd& s, double sigma_bar,
                              double true_shift_bins, const ArgmaxProbOptions& opt = {}) {
    const int n = static_cast<int>(s.size());
    const Eigen::VectorXd p = p_argmax_all(s, sigma_bar, opt);
    const double total = p.sum();
    if (std::abs(total - 1.0) > 1e-6)
        throw std::runtime_error("theoretical_mse: probabilities do not normalize (" +
                                 std::to_string(total) + ")");
    double mse = 0.0;
    for (int q = 0; q < n; ++q) {
        const double d = wrap_signed(static_cast<double>(q) - true_shift_bins,
                                     static_cast<double>(n));
        mse += p(q) * d * d;
    }
    return mse;
}

// ---------------------------------------------------------------------------
// noise model of the normalized correlation
// ---------------------------------------------------------------------------

/// The three candidate expressions for the normalized correlation noise
/// variance, given the post-transform noise variance and the fingerprint
/// powers. eq38_approx folds both fingerprint norms into beta_n_power;
/// exact_literal keeps them separate with the printed KN/2 noise-product
/// term; exact_quartic replaces that term with the dimensionally consistent
/// KN * sigma_tilde^4.
struct NoiseVarianceForms {
    double eq38_approx = 0.0;
    double exact_literal = 0.0;
    double exact_quartic = 0.0;
};

/// Literal approximate form: 2*st2/P + KN*st2/(2*P^2).
inline double sigma_bar_sq(double sigma2_tilde, double beta_power, int kn_c) {
    if (!(beta_power > 0.0))
        throw std::invalid_argument("sigma_bar_sq: zero fingerprint power");
    return 2.0 * sigma2_tilde / beta_power +
           static_cast<double>(kn_c) * sigma2_tilde / (2.0 * beta_power * beta_power);
}

inline NoiseVarianceForms noise_variance_forms(double sigma2_tilde, double beta_n_power,
                                               double beta_power, double beta_c_power,
                                               int kn_c) {
    if (!(beta_n_power > 0.0))
        throw std::invalid_argument("noise_variance_forms: zero fingerprint power");
    NoiseVarianceForms f;
    const double p2 = beta_n_power * beta_n_power;
    f.eq38_approx = sigma_bar_sq(sigma2_tilde, beta_n_power, kn_c);
    f.exact_literal = (beta_c_power * sigma2_tilde + beta_power * sigma2_tilde +
                       0.5 * kn_c * sigma2_tilde) /
                      p2;
    f.exact_quartic = (beta_c_power * sigma2_tilde + beta_power * sigma2_tilde +
                       static_cast<double>(kn_c) * sigma2_tilde * sigma2_tilde) /
                      p2;
    return f;
}

/// Noise bookkeeping for one fingerprint/spectrum pair.
struct NoiseModel {
    double sigma2_tilde = 0.0;  ///< post-transform noise variance
    double sigma2_bar = 0.0;    ///< normalized correlation noise variance
    double beta_power = 0.0;    ///< ||beta_n||^2
    int kn_c = 0;

    static NoiseModel create(double sigma2_tilde, double beta_power, int kn_c) {
        NoiseModel m;
        m.sigma2_tilde = sigma2_tilde;
        m.beta_power = beta_power;
        m.kn_c = kn_c;
        m.sigma2_bar = sigma_bar_sq(sigma2_tilde, beta_power, kn_c);
        return m;
    }
};

/// Per-bin variance of the transformed noise on the zero-padded grid.
inline double xi_bin_noise_variance(double sigma2, const Eigen::VectorXcd& psi_g,
                                    const Eigen::VectorXcd& psi_nc, int k_f, int k_tau) {
    const double g = static_cast<double>(psi_g.size());
    const double nc = static_cast<double>(psi_nc.size());
    return sigma2 * psi_g.squaredNorm() * psi_nc.squaredNorm() / (k_f * g * k_tau * nc);
}

/// Effective noise variance entering the fingerprint correlation. The
/// zero-padded spectrum bins are correlated (they interpolate an
/// N_c-support sequence), and the length-KN correlation sum collapses back
/// onto that support, so the variance that matters is the unpadded one.
inline double row_noise_effective_variance(double sigma2, const Eigen::VectorXcd& psi_g,
                                           int k_f) {
    const double g = static_cast<double>(psi_g.size());
    return sigma2 * psi_g.squaredNorm() / (k_f * g);
}

// ---------------------------------------------------------------------------
// Cramer-Rao lower bound for the compact observation model
// ---------------------------------------------------------------------------

/// Analytic partial derivatives of the noiseless snapshot with respect to
/// velocity and delay of path l.
inline void gamma_jacobian_terms(const PathParams& p, const ClockOffsets& off,
                                 const SystemConfig& cfg, const Eigen::VectorXcd& precoder,
                                 int m, Eigen::MatrixXcd& d_v, Eigen::MatrixXcd& d_tau) {
    const cplx amp = path_amplitude(p, off, cfg, precoder, m);
    const Eigen::VectorXcd theta = doppler_sequence(p, off, cfg);
    const Eigen::RowVectorXcd tau = delay_sequence(p, off, cfg);
    const cplx j{0.0, 1.0};

    Eigen::VectorXcd dtheta(cfg.g_syms);
    for (int g = 0; g < cfg.g_syms; ++g)
        dtheta(g) =
            theta(g) * (-j) *
            (kTwoPi * cfg.f_c * (2.0 / kSpeedOfLight) * static_cast<double>(g) * cfg.t_sym);
    d_v = amp * (dtheta * tau);

    // tau enters the carrier phase of the amplitude and every subcarrier phase
    Eigen::RowVectorXcd dtau_row(cfg.n_c);
    for (int n = 0; n < cfg.n_c; ++n)
        dtau_row(n) = tau(n) * (-j) * (kTwoPi * (cfg.f_c + n * cfg.delta_f));
    d_tau = amp * (theta * dtau_row);
}

/// CRLB matrix sigma^2 * (sum_n H_n^H H_n)^{-1} for the stacked parameter
/// vector [v_1..v_L, tau_1..tau_L]. Throws when the Fisher matrix is
/// numerically singular (coincident paths).
inline Eigen::MatrixXcd crlb(const std::vector<PathParams>& paths, const SystemConfig& cfg,
                             double sigma2, const ClockOffsets& offsets,
                             const Eigen::VectorXcd& precoder, int m = 0) {
    const int l_count = static_cast<int>(paths.size());
    if (l_count < 1) throw std::invalid_argument("crlb: no paths");
    // parameter order: velocities first, then delays
    std::vector<Eigen::MatrixXcd> ordered(2 * static_cast<size_t>(l_count));
    for (int l = 0; l < l_count; ++l) {
        Eigen::MatrixXcd d_v, d_tau;
        gamma_jacobian_terms(paths[static_cast<size_t>(l)], offsets, cfg, precoder, m, d_v,
                             d_tau);
        ordered[static_cast<size_t>(l)] = std::move(d_v);
        ordered[static_cast<size_t>(l_count + l)] = std::move(d_tau);
    }
    const int dim = 2 * l_count;
    Eigen::MatrixXcd fisher(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            fisher(a, b) = (ordered[static_cast<size_t>(a)].conjugate().cwiseProduct(
                                ordered[static_cast<size_t>(b)]))
                               .sum();
    // velocity and delay columns live on vastly different physical scales;
    // balance to unit diagonal before judging invertibility
    Eigen::VectorXd scale(dim);
    for (int a = 0; a < dim; ++a) {
        const double d = fisher(a, a).real();
        if (!(d > 0.0))
            throw std::runtime_error("crlb: singular Fisher matrix (degenerate path)");
        scale(a) = 1.0 / std::sqrt(d);
    }
    Eigen::MatrixXcd balanced(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) balanced(a, b) = fisher(a, b) * scale(a) * scale(b);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(balanced);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible())
        throw std::runtime_error("crlb: singular Fisher matrix (coincident paths)");
    const Eigen::MatrixXcd inv_balanced = lu.inverse();
    Eigen::MatrixXcd out(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            out(a, b) = sigma2 * inv_balanced(a, b) * scale(a) * scale(b);
    return out;
}

}  // namespace fpsync
