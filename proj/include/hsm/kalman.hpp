#pragma once

#include <vector>

#include "hsm/model.hpp"
#include "hsm/nelder_mead.hpp"

namespace hsm {

/// One pass of the scalar Kalman filter in prediction-error form.
struct KalmanRun {
    std::vector<double> nu;      // one-step prediction errors
    std::vector<double> F;       // prediction-error variances
    std::vector<double> x_pred;  // E[X_i | Z_{1:i-1}]
    std::vector<double> P_pred;
    std::vector<double> x_filt;  // E[X_i | Z_{1:i}]
    std::vector<double> P_filt;
    double loglik = 0.0;
};

/// Gaussian likelihood filter for Z_i = X_i + eps_i, eps ~ N(0, sigma_eps2),
/// initialized at the stationary law (x_1^- = 0, P_1^- = gamma^2).
/// loglik = -n/2 log 2pi - 1/2 sum (log F_i + nu_i^2 / F_i).
KalmanRun kalman_filter(const Theta& theta, const std::vector<double>& z,
                        double sigma_eps2);

/// Same recursion with per-observation noise mean m_i and variance v2_i
/// (eps_i ~ N(m_i, v2_i)); the plain filter is the m = 0, v2 = sigma_eps2
/// case and shares this code path bit for bit.
KalmanRun kalman_filter_offsets(const Theta& theta, const std::vector<double>& z,
                                const std::vector<double>& m,
                                const std::vector<double>& v2);

struct QmlFit {
    Theta theta_hat;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    int starts = 0;
};

/// Quasi-maximum-likelihood: maximize the Gaussian filter likelihood over
/// model.box.  For LogSV the observations are the transformed, centered Z and
/// the (misspecified) Gaussian noise variance is model.sigma_eps2.
QmlFit qml_estimate(const std::vector<double>& z, const ModelSpec& model,
                    const NmOptions& opt = {});

}  // namespace hsm
