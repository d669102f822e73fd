#pragma once

#include <cstddef>
#include <vector>

#include "hsm/rng.hpp"

namespace hsm {

/// Parameter of the hidden autoregression X_{i+1} = phi X_i + eta_{i+1},
/// eta ~ N(0, sigma2).
struct Theta {
    double phi = 0.0;
    double sigma2 = 0.0;
};

/// Closed rectangle of admissible parameters.
struct ParamBox {
    double phi_lo = -0.99;
    double phi_hi = 0.99;
    double s2_lo = 0.01;
    double s2_hi = 3.0;

    [[nodiscard]] bool contains(const Theta& t) const noexcept {
        return t.phi >= phi_lo && t.phi <= phi_hi && t.sigma2 >= s2_lo &&
               t.sigma2 <= s2_hi;
    }
    void validate() const;
};

/// Coordinate-wise clamp of theta into the box (idempotent).
Theta project_into_box(const Theta& theta, const ParamBox& box);

/// Stationary variance gamma^2 = sigma2 / (1 - phi^2); requires |phi| < 1.
double stationary_variance(const Theta& theta);

enum class ModelKind { GaussianAR1, LogSV };

/// Observation scheme sitting on top of the hidden autoregression.
///
/// GaussianAR1:  Z_i = X_i + eps_i, eps ~ N(0, sigma_eps2).
/// LogSV:        Y_i = e^{X_i/2} xi_i^beta observed; working observation
///               Z_i = log Y_i^2 - beta E[log xi^2] = X_i + eps_i with
///               eps_i = beta (log xi_i^2 - E[log xi^2]) centered,
///               Var(eps) = beta^2 pi^2 / 2.
struct ModelSpec {
    ModelKind kind = ModelKind::GaussianAR1;
    double sigma_eps2 = 0.1;
    double beta = 0.0;  // LogSV only
    ParamBox box;

    static ModelSpec ar1(double sigma_eps2 = 0.1);
    static ModelSpec log_sv(double beta = default_sv_beta());

    /// beta with Var(eps) = 0.1, the benchmark calibration: 1 / (sqrt(5) pi).
    static double default_sv_beta();

    /// log p(z | x): Gaussian for GaussianAR1, the exact scaled/centered
    /// log-chi-square(1) law for LogSV.  Used by the particle filters.
    [[nodiscard]] double obs_logpdf(double z, double x) const;

    void validate() const;
};

/// Simulated path: hidden states x, observations z, and for LogSV the raw
/// series y (empty otherwise).  All vectors have equal length.
struct Trajectory {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> y;

    [[nodiscard]] std::size_t n() const noexcept { return z.size(); }
};

/// Stationary draw of the hidden path plus Gaussian observation noise.
Trajectory simulate_ar1(const Theta& theta, std::size_t n, double sigma_eps2,
                        Rng& rng);

/// Stationary draw of the stochastic-volatility model; returns the raw Y and
/// the transformed, centered Z.
Trajectory simulate_sv(const Theta& theta, std::size_t n, double beta, Rng& rng);

/// Dispatch on model.kind.
Trajectory simulate(const ModelSpec& model, const Theta& theta, std::size_t n,
                    Rng& rng);

}  // namespace hsm
