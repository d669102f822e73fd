#include "hsm/siemle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hsm/kalman.hpp"

namespace hsm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void MixtureApprox::validate() const {
    const std::size_t j = q.size();
    if (j == 0 || m.size() != j || v2.size() != j)
        throw std::invalid_argument("MixtureApprox: q, m, v2 must have equal size >= 1");
    double sum = 0.0;
    for (std::size_t k = 0; k < j; ++k) {
        if (!(q[k] >= 0.0))
            throw std::invalid_argument("MixtureApprox: weights must be >= 0");
        if (!(v2[k] > 0.0))
            throw std::invalid_argument("MixtureApprox: variances must be > 0");
        sum += q[k];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("MixtureApprox: weights must sum to 1");
}

MixtureApprox MixtureApprox::from_raw(const std::vector<double>& q,
                                      const std::vector<double>& m,
                                      const std::vector<double>& v2,
                                      double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("MixtureApprox: beta must be > 0");
    MixtureApprox mix{q, m, v2};
    mix.validate();
    double mbar = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) mbar += q[k] * m[k];
    for (std::size_t k = 0; k < q.size(); ++k) {
        mix.m[k] = beta * (m[k] - mbar);
        mix.v2[k] = beta * beta * v2[k];
    }
    return mix;
}

MixtureApprox MixtureApprox::log_chisq1_ksc(double beta) {
    // Kim, Shephard and Chib (1998), table 4: seven-component normal mixture
    // fitted to the log-chi-square(1) density.
    static const std::vector<double> q = {0.00730, 0.10556, 0.00002, 0.04395,
                                          0.34001, 0.24566, 0.25750};
    static const std::vector<double> m = {-10.12999, -3.97281, -8.56686, 2.77786,
                                          0.61942,   1.79518,  -1.08819};
    static const std::vector<double> v2 = {5.79596, 2.61369, 5.17950, 0.16735,
                                           0.64009, 0.34023, 1.26261};
    return from_raw(q, m, v2, beta);
}

MixtureApprox MixtureApprox::from_csv(const std::string& path, double beta) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("MixtureApprox: cannot open " + path);
    std::vector<double> q, m, v2;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            std::string h = line;
            h.erase(std::remove(h.begin(), h.end(), ' '), h.end());
            if (h != "q,m,v2")
                throw std::runtime_error("MixtureApprox: expected header q,m,v2 in " + path);
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        double vals[3];
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error("MixtureApprox: short row in " + path);
            vals[c] = std::stod(cell);
        }
        if (std::getline(row, cell, ','))
            throw std::runtime_error("MixtureApprox: too many columns in " + path);
        q.push_back(vals[0]);
        m.push_back(vals[1]);
        v2.push_back(vals[2]);
    }
    if (!header_seen)
        throw std::runtime_error("MixtureApprox: missing header in " + path);
    return from_raw(q, m, v2, beta);
}

void SiemleConfig::validate() const {
    if (m_tilde < 1) throw std::invalid_argument("SiemleConfig: m_tilde must be >= 1");
    if (!(burnin_frac >= 0.0 && burnin_frac < 1.0))
        throw std::invalid_argument("SiemleConfig: burnin_frac must lie in [0, 1)");
    if (!(stop_tol > 0.0))
        throw std::invalid_argument("SiemleConfig: stop_tol must be > 0");
    if (max_em_iters < 1)
        throw std::invalid_argument("SiemleConfig: max_em_iters must be >= 1");
}

void sample_indicators(const std::vector<double>& z,
                       const std::vector<double>& x, const MixtureApprox& mix,
                       std::vector<int>& s, Rng& rng) {
    if (x.size() != z.size())
        throw std::invalid_argument("sample_indicators: x and z sizes differ");
    const std::size_t j = mix.components();
    std::vector<double> logq(j), p(j);
    for (std::size_t k = 0; k < j; ++k)
        logq[k] = std::log(mix.q[k]) - 0.5 * std::log(2.0 * kPi * mix.v2[k]);
    s.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double e = z[i] - x[i];
        double top = -1e300;
        for (std::size_t k = 0; k < j; ++k) {
            const double d = e - mix.m[k];
            p[k] = logq[k] - 0.5 * d * d / mix.v2[k];
            top = std::max(top, p[k]);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < j; ++k) {
            p[k] = std::exp(p[k] - top);
            sum += p[k];
        }
        const double u = rng.uniform() * sum;
        double acc = 0.0;
        int pick = static_cast<int>(j) - 1;
        for (std::size_t k = 0; k < j; ++k) {
            acc += p[k];
            if (u <= acc) {
                pick = static_cast<int>(k);
                break;
            }
        }
        s[i] = pick;
    }
}

void sample_states_ffbs(const Theta& theta, const std::vector<double>& z,
                        const std::vector<int>& s, const MixtureApprox& mix,
                        std::vector<double>& x, Rng& rng) {
    const std::size_t n = z.size();
    if (s.size() != n)
        throw std::invalid_argument("sample_states_ffbs: s and z sizes differ");
    std::vector<double> m(n), v2(n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = mix.m[static_cast<std::size_t>(s[i])];
        v2[i] = mix.v2[static_cast<std::size_t>(s[i])];
    }
    const KalmanRun run = kalman_filter_offsets(theta, z, m, v2);
    x.resize(n);
    x[n - 1] = rng.normal(run.x_filt[n - 1], std::sqrt(run.P_filt[n - 1]));
    for (std::size_t i = n - 1; i-- > 0;) {
        // Backward kernel: X_i | X_{i+1}, Z_{1:i} with gain
        // J = phi P_filt / P_pred_{i+1}.
        const double j = theta.phi * run.P_filt[i] / run.P_pred[i + 1];
        const double mean = run.x_filt[i] + j * (x[i + 1] - run.x_pred[i + 1]);
        const double var = run.P_filt[i] * (1.0 - j * theta.phi);
        x[i] = rng.normal(mean, std::sqrt(std::max(var, 0.0)));
    }
}

double q_tilde(const Theta& theta, const std::vector<double>& z,
               const std::vector<std::vector<int>>& draws,
               const MixtureApprox& mix) {
    if (draws.empty()) throw std::invalid_argument("q_tilde: no draws");
    const std::size_t n = z.size();
    std::vector<double> m(n), v2(n);
    double acc = 0.0;
    for (const auto& s : draws) {
        if (s.size() != n)
            throw std::invalid_argument("q_tilde: draw and z sizes differ");
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = mix.m[static_cast<std::size_t>(s[i])];
            v2[i] = mix.v2[static_cast<std::size_t>(s[i])];
        }
        acc += kalman_filter_offsets(theta, z, m, v2).loglik;
    }
    return acc / static_cast<double>(draws.size());
}

SiemleFit siemle_estimate(const ModelSpec& model, const std::vector<double>& z,
                          const MixtureApprox& mix, const SiemleConfig& config,
                          Rng& rng) {
    model.validate();
    mix.validate();
    config.validate();
    if (z.size() < 2)
        throw std::invalid_argument("siemle_estimate: need at least 2 observations");

    const int sweeps_per_iter = static_cast<int>(std::ceil(
        static_cast<double>(config.m_tilde) / (1.0 - config.burnin_frac)));
    const int burnin = sweeps_per_iter - config.m_tilde;

    SiemleFit fit;
    Theta theta = project_into_box(config.start, model.box);
    std::vector<double> x = z;  // warm start at the observations
    std::vector<int> s;
    std::vector<std::vector<int>> draws;
    draws.reserve(static_cast<std::size_t>(config.m_tilde));

    int small_moves = 0;
    for (int iter = 0; iter < config.max_em_iters; ++iter) {
        draws.clear();
        for (int sweep = 0; sweep < sweeps_per_iter; ++sweep) {
            sample_indicators(z, x, mix, s, rng);
            sample_states_ffbs(theta, z, s, mix, x, rng);
            if (sweep >= burnin) draws.push_back(s);
        }
        fit.sweeps_total += sweeps_per_iter;

        fit.q_before.push_back(q_tilde(theta, z, draws, mix));
        const MinimizeResult step = nelder_mead_box(
            [&](const Theta& t) { return -q_tilde(t, z, draws, mix); }, theta,
            model.box, config.mstep);
        fit.q_after.push_back(-step.value);

        const double move = std::max(std::abs(step.theta.phi - theta.phi),
                                     std::abs(step.theta.sigma2 - theta.sigma2));
        theta = step.theta;
        ++fit.em_iters;
        // Stop only on two consecutive sub-threshold moves: with Monte Carlo
        // noise in the draws a single small step can be chance.
        small_moves = move <= config.stop_tol ? small_moves + 1 : 0;
        if (small_moves >= 2) {
            fit.converged = true;
            break;
        }
    }
    fit.theta_hat = theta;
    return fit;
}

}  // namespace hsm
