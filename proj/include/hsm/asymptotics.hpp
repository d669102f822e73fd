#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hsm/contrast.hpp"
#include "hsm/mat2.hpp"
#include "hsm/model.hpp"

namespace hsm {

/// Gradient of ||l_theta||^2 in (phi, sigma2).
Vec2 grad_l2_norm_sq(const Theta& theta);

/// Hessian V of the population contrast at its minimizer,
/// V_jk = 2 <d_j l, d_k l>; positive definite away from phi = 0.
Mat2 hessian_V(const Theta& theta);

/// P1 = E[b grad l] E[b grad l]' = (1/4) grad||l||^2 (grad||l||^2)'; rank one.
Mat2 p1_matrix(const Theta& theta);

/// P2 = E[Z_2^2 u*_{grad l}(Z_1) u*_{grad l}(Z_1)'] in closed form for
/// Gaussian observation noise; requires gamma^2 > sigma_eps2.
Mat2 p2_matrix_ar1(const Theta& theta, double sigma_eps2);

/// Plug-in P2_hat = 1/(n-1) sum_i Z_{i+1}^2 u*_{grad l}(Z_i) u*_{grad l}(Z_i)'
/// with u* evaluated by quadrature against the model's noise; used when no
/// closed form exists (LogSV).
Mat2 p2_hat_plugin(const ModelSpec& model, const std::vector<double>& z,
                   const Theta& theta, const QuadratureConfig& q = {});

/// Lag matrix C~_j = E[b(X_1) grad l(X_1) (b(X_j) grad l(X_j))'] where the
/// pair (X_1, X_j) has correlation phi^{j-1}.  C~_j -> P1 as j grows.
Mat2 c_tilde(const Theta& theta, int j);

/// Omega_j for j >= 2: the state-level part of the lag-(j-1) covariance of
/// the moment gradient g_i = grad||l||^2 - 2 Z_{i+1} u*_{grad l}(Z_i),
/// symmetrized.  Beyond 4 (C~_j - P1) it carries the coupling between the
/// drift innovation inside Z_2 and the later state X_j; both pieces depend
/// only on the state law.  Cancellations run in extended precision so the
/// geometric decay survives down to ~1e-17.
Mat2 omega_lag(const Theta& theta, int j);

struct SandwichParts {
    Mat2 V;
    Mat2 Omega1;     // 4 (P2 - P1)
    Mat2 OmegaTail;  // 2 [sum_{j=2}^{q_trunc} Omega_j + lag-one noise term]
    Mat2 Sigma;      // V^{-1} (Omega1 + OmegaTail) V^{-1}
    int q_trunc = 0;
};

/// Closed-form sandwich for Gaussian observation noise.  The tail includes
/// the lag-one coupling through the shared observation, which for Gaussian
/// noise is 4 phi sigma_eps2 E[X_2 grad l(X_1) grad l'(X_2)'] in closed form.
/// Throws std::domain_error when cond(V) > 1e12 or Sigma has an eigenvalue
/// below -1e-10 (smaller negativity is clipped to zero).
SandwichParts sandwich_ar1(const Theta& theta, double sigma_eps2,
                           int q_trunc = 100);

/// Sandwich with the plug-in P2_hat; V, P1, and the state-level lag matrices
/// stay closed-form in theta, while the noise-dependent pieces (P2 and the
/// lag-one observation coupling) are estimated from the data by the same
/// quadrature pass.
SandwichParts sandwich_plugin(const ModelSpec& model,
                              const std::vector<double>& z, const Theta& theta,
                              int q_trunc = 100, const QuadratureConfig& q = {});

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double v) const noexcept {
        return v >= lo && v <= hi;
    }
    [[nodiscard]] double width() const noexcept { return hi - lo; }
};

/// Per-coordinate asymptotic confidence intervals
/// theta_hat_k -+ z_{1-alpha/2} sqrt(Sigma_kk / n).
std::array<Interval, 2> confidence_interval(const Theta& theta_hat,
                                            const Mat2& sigma, std::size_t n,
                                            double alpha);

}  // namespace hsm
