#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hsm/model.hpp"
#include "hsm/nelder_mead.hpp"
#include "hsm/rng.hpp"

namespace hsm {

/// Finite Gaussian mixture standing in for the observation-noise law,
/// already scaled and centered for the model at hand:
/// eps ~ sum_j q_j N(m_j, v2_j) with sum_j q_j m_j = 0 (up to rounding).
struct MixtureApprox {
    std::vector<double> q;
    std::vector<double> m;
    std::vector<double> v2;

    [[nodiscard]] std::size_t components() const noexcept { return q.size(); }
    void validate() const;

    /// Center a raw log-chi-square(1) mixture at its own mean and scale by
    /// beta: components become (q_j, beta (m_j - mbar), beta^2 v2_j).
    static MixtureApprox from_raw(const std::vector<double>& q,
                                  const std::vector<double>& m,
                                  const std::vector<double>& v2, double beta);

    /// Seven-component log-chi-square(1) reference mixture of Kim, Shephard
    /// and Chib (1998), centered and scaled for noise beta (log xi^2 - E).
    static MixtureApprox log_chisq1_ksc(double beta);

    /// Read a raw mixture table (header "q,m,v2", '#' comments allowed) and
    /// apply from_raw with the given beta.
    static MixtureApprox from_csv(const std::string& path, double beta);
};

struct SiemleConfig {
    int m_tilde = 100;         // indicator draws retained per EM iteration
    double burnin_frac = 0.2;  // leading fraction of each sweep block dropped
    double stop_tol = 1e-3;    // sup-norm EM step tolerance, two hits in a row
    int max_em_iters = 60;
    Theta start{0.5, 0.5};
    NmOptions mstep{};
    void validate() const;
};

/// Gibbs draw of the mixture indicators, s_i ~ p(. | x_i, z_i) independently
/// across i.  s is resized to z.size().
void sample_indicators(const std::vector<double>& z,
                       const std::vector<double>& x, const MixtureApprox& mix,
                       std::vector<int>& s, Rng& rng);

/// Forward-filter backward-sampling draw of the hidden path given the
/// indicators.  x is resized to z.size().
void sample_states_ffbs(const Theta& theta, const std::vector<double>& z,
                        const std::vector<int>& s, const MixtureApprox& mix,
                        std::vector<double>& x, Rng& rng);

/// Monte Carlo intermediate quantity: the mean over stored indicator draws
/// of the offset-filter log likelihood log p(z | s, theta).  With a single
/// mixture component this is exactly the plain Gaussian filter likelihood.
double q_tilde(const Theta& theta, const std::vector<double>& z,
               const std::vector<std::vector<int>>& draws,
               const MixtureApprox& mix);

struct SiemleFit {
    Theta theta_hat;
    bool converged = false;
    int em_iters = 0;
    int sweeps_total = 0;
    /// q_tilde on iteration k's draws at theta_k (before) and at theta_{k+1}
    /// (after); the M-step guarantees after >= before on the same draws.
    std::vector<double> q_before;
    std::vector<double> q_after;
};

/// Simulated EM: alternate blocks of indicator/state Gibbs sweeps with an
/// M-step maximizing q_tilde over model.box, until the parameter step falls
/// below stop_tol.  The chain warm-starts at x = z and carries its state
/// across EM iterations.
SiemleFit siemle_estimate(const ModelSpec& model, const std::vector<double>& z,
                          const MixtureApprox& mix, const SiemleConfig& config,
                          Rng& rng);

}  // namespace hsm
