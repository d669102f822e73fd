#pragma once

#include <complex>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "hsm/model.hpp"
#include "hsm/nelder_mead.hpp"

namespace hsm {

/// Raised when a Fourier-quadrature rule cannot meet its tail tolerance.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rule for the inverse-Fourier integrals: midpoint nodes on [-T, T].
struct QuadratureConfig {
    int nodes = 2048;       // base node count, >= 64, even
    double halfwidth = 0.0; // T; 0 selects T per theta from the tail bound
    double tol = 1e-12;     // tail bound that +-T must satisfy
    void validate() const;
};

/// ||l_theta||^2 = phi^2 gamma / (4 sqrt(pi)) with l = b_phi * stationary density.
double l2_norm_sq(const Theta& theta);

/// Deconvolution kernel u*_{l_theta} for Gaussian observation noise:
/// u*(y) = phi gamma^2 (gamma^2-sigma_eps2)^{-3/2} y e^{-y^2/(2(gamma^2-sigma_eps2))}
///         / sqrt(2 pi).
/// Requires gamma^2 > sigma_eps2.
double u_star_gaussian(const Theta& theta, double sigma_eps2, double y);

/// Characteristic function of the centered, scaled log-chi-square noise:
/// f*(y) = e^{-i E y} 2^{i beta y} Gamma(1/2 + i beta y) / sqrt(pi),
/// E = beta E[log xi^2].  |f*(y)| = cosh(pi beta y)^{-1/2}.
std::complex<double> f_star_eps_sv(double beta, double y);

/// Fourier numerator of the deconvolution integrals: all kernels used here
/// have transform v*(t) = i (c1 t + c3 t^3) e^{-t^2 gamma2 / 2}.
struct DeconvKernel {
    double c1 = 0.0;
    double c3 = 0.0;
    double gamma2 = 0.0;
};

DeconvKernel deconv_kernel_l(const Theta& theta);        // c1 = phi gamma^2
DeconvKernel deconv_kernel_dphi(const Theta& theta);     // d l / d phi
DeconvKernel deconv_kernel_dsigma2(const Theta& theta);  // d l / d sigma2

/// u*_v(y) = int e^{iyt} (1/2pi) v*(-t)/f*_eps(t) dt evaluated by midpoint
/// quadrature for every y, against the observation noise of `model`.
/// The real part is the value; the largest |imaginary residual| across the
/// evaluations is written to *im_residual (exactly 0 on the symmetric rule
/// only up to round-off) and must stay below 100 * q.tol.
std::vector<double> u_star_quadrature(const DeconvKernel& kernel,
                                      const ModelSpec& model,
                                      std::span<const double> y,
                                      const QuadratureConfig& q = {},
                                      double* im_residual = nullptr);

/// Scalar u*_{l_theta} for the log-volatility noise, by quadrature.
double u_star_sv(const Theta& theta, double beta, double y,
                 const QuadratureConfig& q = {});

/// Population contrast P m_theta for the Gaussian AR(1) target theta0:
/// phi^2 gamma/(4 sqrt pi) - sqrt(2/pi) phi phi0 gamma^2 gamma0^2
/// (gamma^2+gamma0^2)^{-3/2}; minimized exactly at theta0.
double population_contrast_ar1(const Theta& theta, const Theta& theta0);

/// Empirical contrast
///   P_n m_theta = ||l_theta||^2 - 2/(n-1) sum_i Z_{i+1} u*_{l_theta}(Z_i).
/// One instance owns the data; for quadrature-based noise the data-dependent
/// Fourier sums are cached per node grid, so repeated evaluations during
/// optimization cost one exp per node.  Not safe for concurrent use; give
/// each worker its own instance.
class ContrastObjective {
public:
    ContrastObjective(const ModelSpec& model, std::vector<double> z,
                      const QuadratureConfig& q = {});

    /// Closed form for Gaussian noise, cached quadrature for LogSV.
    double operator()(const Theta& theta) const;

    /// Always the generic quadrature path, regardless of noise kind.
    double quadrature_value(const Theta& theta) const;

    [[nodiscard]] const std::vector<double>& data() const noexcept { return z_; }
    [[nodiscard]] const ModelSpec& model() const noexcept { return model_; }

private:
    struct Level {
        double halfwidth = 0.0;
        double step = 0.0;
        std::vector<double> t;          // nodes
        std::vector<double> log_invf;   // log |1/f*_eps| at nodes
        std::vector<std::complex<double>> phase_s;  // phase(1/f*) * S(t)
    };

    const Level& level_for(double t_exact) const;
    double quadrature_term(const Theta& theta) const;  // 2/(n-1) sum z u*

    ModelSpec model_;
    std::vector<double> z_;
    QuadratureConfig quad_;
    mutable std::map<int, Level> levels_;
};

/// Convenience one-shot evaluation (no cache reuse across calls).
double objective(const Theta& theta, const std::vector<double>& z,
                 const ModelSpec& model, const QuadratureConfig& q = {});

struct ContrastEstimate {
    Theta theta_hat;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    int starts = 0;
};

/// Multi-start projected Nelder-Mead minimization of the empirical contrast
/// over model.box.  Deterministic given (z, model, options).
ContrastEstimate estimate_contrast(const std::vector<double>& z,
                                   const ModelSpec& model,
                                   const NmOptions& opt = {},
                                   const QuadratureConfig& q = {});

}  // namespace hsm
