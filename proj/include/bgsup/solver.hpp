#pragma once

// Three-term decomposition D = B + X + E of a column-stacked video:
// low-rank background B, sparse foreground X, dense Gaussian noise E.
//
//   min ||B||_* + xi ||X||_1 + gamma ||E||_F^2   s.t.  D = B + X + E
//
// solved by ADMM on the augmented Lagrangian with multiplier Y and a
// geometrically increasing penalty mu. One sweep is
//
//   B <- svt(D - X - E + Y/mu, 1/mu)
//   X <- soft_threshold(D - B - E + Y/mu, xi/mu)
//   E <- (D - B - X + Y/mu) / (1 + 2 gamma/mu)
//   Y <- Y + mu (D - B - X - E),   mu <- min(rho mu, mu_max)
//
// starting from B = X = E = Y = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"
#include "bgsup/prox.hpp"

namespace bgsup {

/// Noise level assumed by the default gamma, for data scaled to [0, 1].
inline constexpr double kDefaultNoiseSigma = 0.01;

/// Unset optionals are resolved from the data in resolve().
struct SolverConfig {
    std::optional<double> xi;      // default 1/sqrt(max(m, n))
    // Default 1 / (2 sigma (sqrt(m) + sqrt(n))) with sigma = kDefaultNoiseSigma,
    // i.e. the noise penalty balances the spectral norm of Gaussian noise.
    // Any |E_ij| above xi / (2 gamma) is pushed into X instead.
    std::optional<double> gamma;
    double rho = 1.5;
    std::optional<double> mu0;     // default 1.25 / sigma_1(D)
    std::optional<double> mu_max;  // default 1e7 * mu0
    double tol = 1e-7;
    int max_iter = 500;
};

/// Every hyperparameter pinned to a number.
struct ResolvedConfig {
    double xi = 0.0;
    double gamma = 0.0;
    double rho = 0.0;
    double mu0 = 0.0;
    double mu_max = 0.0;
    double tol = 0.0;
    int max_iter = 0;
};

struct IterationTrace {
    int iter = 0;
    double residual = 0.0;  // ||D - B - X - E||_F / ||D||_F
    Eigen::Index rank_b = 0;
    Eigen::Index nnz_x = 0;
    double mu = 0.0;  // penalty used during this sweep
};

struct DecompositionResult {
    Matrix background;  // B
    Matrix foreground;  // X
    Matrix noise;       // E
    Matrix multiplier;  // Y
    std::vector<IterationTrace> trace;
    ResolvedConfig config;
    bool converged = false;
    int iterations = 0;

    /// D - B - X - E for the D this result was computed from.
    Matrix residual(const Matrix& d) const { return d - background - foreground - noise; }
};

inline void validate(const SolverConfig& cfg) {
    auto positive = [](const std::optional<double>& v) { return !v || (*v > 0.0 && std::isfinite(*v)); };
    if (!positive(cfg.xi)) throw InputError("xi must be positive");
    if (cfg.gamma && !(*cfg.gamma >= 0.0 && std::isfinite(*cfg.gamma))) {
        throw InputError("gamma must be nonnegative");
    }
    if (!(cfg.rho > 1.0) || !std::isfinite(cfg.rho)) throw InputError("rho must be > 1");
    if (!positive(cfg.mu0)) throw InputError("mu0 must be positive");
    if (!positive(cfg.mu_max)) throw InputError("mu_max must be positive");
    if (cfg.mu0 && cfg.mu_max && *cfg.mu_max < *cfg.mu0) {
        throw InputError("mu_max must be >= mu0");
    }
    if (!(cfg.tol > 0.0)) throw InputError("tol must be positive");
    if (cfg.max_iter <= 0) throw InputError("max_iter must be positive");
}

/// Fills defaults. sigma1 is the largest singular value of D.
inline ResolvedConfig resolve(const SolverConfig& cfg, Eigen::Index m, Eigen::Index n,
                              double sigma1) {
    validate(cfg);
    ResolvedConfig r;
    r.xi = cfg.xi.value_or(1.0 / std::sqrt(static_cast<double>(std::max(m, n))));
    r.gamma = cfg.gamma.value_or(
        1.0 / (2.0 * kDefaultNoiseSigma *
               (std::sqrt(static_cast<double>(m)) + std::sqrt(static_cast<double>(n)))));
    r.rho = cfg.rho;
    if (cfg.mu0) {
        r.mu0 = *cfg.mu0;
    } else {
        r.mu0 = sigma1 > 0.0 ? 1.25 / sigma1 : 1.0;
    }
    r.mu_max = cfg.mu_max.value_or(1e7 * r.mu0);
    if (r.mu_max < r.mu0) throw InputError("mu_max must be >= mu0");
    r.tol = cfg.tol;
    r.max_iter = cfg.max_iter;
    return r;
}

namespace detail {

inline void require_same_shape(const Matrix& ref, std::initializer_list<const Matrix*> others,
                               const char* op) {
    for (const Matrix* m : others) {
        if (m->rows() != ref.rows() || m->cols() != ref.cols()) {
            throw InputError(std::string(op) + ": dimension mismatch (" +
                             std::to_string(ref.rows()) + "x" + std::to_string(ref.cols()) +
                             " vs " + std::to_string(m->rows()) + "x" +
                             std::to_string(m->cols()) + ")");
        }
    }
}

inline void require_positive_mu(double mu, const char* op) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw InputError(std::string(op) + ": mu must be positive");
    }
}

}  // namespace detail

/// B-step: nuclear-norm prox of D - X - E + Y/mu with threshold 1/mu.
inline SvtResult update_background_detailed(const Matrix& d, const Matrix& x, const Matrix& e,
                                            const Matrix& y, double mu) {
    detail::require_same_shape(d, {&x, &e, &y}, "update_background");
    detail::require_positive_mu(mu, "update_background");
    return svt_detailed(d - x - e + y / mu, 1.0 / mu);
}

inline Matrix update_background(const Matrix& d, const Matrix& x, const Matrix& e,
                                const Matrix& y, double mu) {
    return update_background_detailed(d, x, e, y, mu).value;
}

/// X-step: soft threshold of D - B - E + Y/mu at xi/mu.
inline Matrix update_foreground(const Matrix& d, const Matrix& b, const Matrix& e,
                                const Matrix& y, double mu, double xi) {
    detail::require_same_shape(d, {&b, &e, &y}, "update_foreground");
    detail::require_positive_mu(mu, "update_foreground");
    if (!(xi > 0.0)) throw InputError("update_foreground: xi must be positive");
    return soft_threshold(d - b - e + y / mu, xi / mu);
}

/// E-step: closed-form minimizer of gamma ||E||^2 + mu/2 ||E - R||^2,
/// R = D - B - X + Y/mu.
inline Matrix update_noise(const Matrix& d, const Matrix& b, const Matrix& x, const Matrix& y,
                           double mu, double gamma) {
    detail::require_same_shape(d, {&b, &x, &y}, "update_noise");
    detail::require_positive_mu(mu, "update_noise");
    if (!(gamma >= 0.0)) throw InputError("update_noise: gamma must be nonnegative");
    Matrix r = d - b - x + y / mu;
    if (gamma == 0.0) return r;
    return r / (1.0 + 2.0 * gamma / mu);
}

struct MultiplierUpdate {
    Matrix y;
    double mu = 0.0;
};

/// Dual ascent on Y and the geometric penalty increase, capped at mu_max.
inline MultiplierUpdate update_multiplier(const Matrix& y, double mu, const Matrix& d,
                                          const Matrix& b, const Matrix& x, const Matrix& e,
                                          double rho, double mu_max) {
    detail::require_same_shape(d, {&y, &b, &x, &e}, "update_multiplier");
    if (!(rho > 1.0)) throw InputError("update_multiplier: rho must be > 1");
    return {y + mu * (d - b - x - e), std::min(rho * mu, mu_max)};
}

inline double relative_residual(const Matrix& d, const Matrix& b, const Matrix& x,
                                const Matrix& e, double d_norm) {
    const double r = (d - b - x - e).norm();
    if (d_norm == 0.0) return r;
    return r / d_norm;
}

inline DecompositionResult solve(const Matrix& d, const SolverConfig& cfg = {}) {
    if (d.cols() < 2) throw InputError("solve: need at least 2 frames (columns)");
    if (d.rows() < 1) throw InputError("solve: empty frames");
    if (!d.allFinite()) throw InputError("solve: input has non-finite entries");
    validate(cfg);

    const Eigen::Index m = d.rows();
    const Eigen::Index n = d.cols();
    const double sigma1 = svd(d).singular_values(0);

    DecompositionResult res;
    res.config = resolve(cfg, m, n, sigma1);
    res.background = Matrix::Zero(m, n);
    res.foreground = Matrix::Zero(m, n);
    res.noise = Matrix::Zero(m, n);
    res.multiplier = Matrix::Zero(m, n);

    const double d_norm = d.norm();
    if (sigma1 == 0.0) {
        res.trace.push_back({1, 0.0, 0, 0, res.config.mu0});
        res.converged = true;
        res.iterations = 1;
        return res;
    }

    const ResolvedConfig& c = res.config;
    double mu = c.mu0;
    for (int k = 1; k <= c.max_iter; ++k) {
        SvtResult bstep = update_background_detailed(d, res.foreground, res.noise,
                                                     res.multiplier, mu);
        res.background = std::move(bstep.value);
        res.foreground = update_foreground(d, res.background, res.noise, res.multiplier, mu, c.xi);
        res.noise = update_noise(d, res.background, res.foreground, res.multiplier, mu, c.gamma);

        const double residual =
            relative_residual(d, res.background, res.foreground, res.noise, d_norm);
        if (!std::isfinite(residual) || !res.background.allFinite() ||
            !res.foreground.allFinite() || !res.noise.allFinite()) {
            throw NumericError("solve: non-finite values at iteration " + std::to_string(k));
        }

        IterationTrace t;
        t.iter = k;
        t.residual = residual;
        t.rank_b = bstep.rank;
        t.nnz_x = static_cast<Eigen::Index>((res.foreground.array() != 0.0).count());
        t.mu = mu;
        res.trace.push_back(t);
        res.iterations = k;

        auto upd = update_multiplier(res.multiplier, mu, d, res.background, res.foreground,
                                     res.noise, c.rho, c.mu_max);
        res.multiplier = std::move(upd.y);
        mu = upd.mu;
        if (!res.multiplier.allFinite()) {
            throw NumericError("solve: non-finite multiplier at iteration " + std::to_string(k));
        }

        if (residual <= c.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace bgsup
