#include "hsm/particle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "hsm/mat2.hpp"

namespace hsm {

namespace {

// Fold a proposal back into [lo, hi]; steps are small relative to the box,
// so one fold almost always suffices.  Clamp guards pathological walks.
double reflect_into(double v, double lo, double hi) {
    for (int pass = 0; pass < 64 && (v < lo || v > hi); ++pass) {
        if (v < lo) v = lo + (lo - v);
        if (v > hi) v = hi - (v - hi);
    }
    return std::clamp(v, lo, hi);
}

// Exponentiate shifted log weights and normalize.  Returns false (uniform
// weights) when every log weight is -inf, i.e. total collapse.
bool normalize_log_weights(const std::vector<double>& logw,
                           std::vector<double>& w) {
    const std::size_t m = logw.size();
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(m));
        return false;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        w[k] = std::exp(logw[k] - top);
        sum += w[k];
    }
    for (std::size_t k = 0; k < m; ++k) w[k] /= sum;
    return true;
}

void evolve_parameters(std::vector<double>& phi, std::vector<double>& sigma2,
                       const ParamBox& box, const FilterConfig& config,
                       Rng& rng) {
    const double sd_phi = std::sqrt(config.q_phi);
    const double sd_s2 = std::sqrt(config.q_sigma2);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        phi[k] = reflect_into(phi[k] + sd_phi * rng.normal(), box.phi_lo,
                              box.phi_hi);
        sigma2[k] = reflect_into(sigma2[k] + sd_s2 * rng.normal(), box.s2_lo,
                                 box.s2_hi);
    }
}

void gather(ParticleCloud& cloud, const std::vector<std::uint32_t>& idx) {
    const std::size_t m = idx.size();
    std::vector<double> x(m), phi(m), sigma2(m);
    for (std::size_t k = 0; k < m; ++k) {
        x[k] = cloud.x[idx[k]];
        phi[k] = cloud.phi[idx[k]];
        sigma2[k] = cloud.sigma2[idx[k]];
    }
    cloud.x = std::move(x);
    cloud.phi = std::move(phi);
    cloud.sigma2 = std::move(sigma2);
    std::fill(cloud.w.begin(), cloud.w.end(),
              1.0 / static_cast<double>(cloud.w.size()));
}

}  // namespace

void FilterConfig::validate() const {
    if (particles < 2) throw std::invalid_argument("need at least 2 particles");
    if (ess_frac <= 0.0 || ess_frac > 1.0)
        throw std::invalid_argument("ess_frac must lie in (0, 1]");
    if (q_phi < 0.0 || q_sigma2 < 0.0)
        throw std::invalid_argument("random-walk variances must be >= 0");
    if (h <= 0.0 || h >= 1.0)
        throw std::invalid_argument("kernel width h must lie in (0, 1)");
    prior.validate();
}

double ParticleCloud::ess() const {
    double s = 0.0;
    for (double wk : w) s += wk * wk;
    return 1.0 / s;
}

Theta ParticleCloud::weighted_theta_mean() const {
    Theta mean{0.0, 0.0};
    for (std::size_t k = 0; k < w.size(); ++k) {
        mean.phi += w[k] * phi[k];
        mean.sigma2 += w[k] * sigma2[k];
    }
    return mean;
}

double ParticleCloud::weighted_x_mean() const {
    double mean = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) mean += w[k] * x[k];
    return mean;
}

ParticleCloud init_cloud(const ModelSpec& model, const FilterConfig& config,
                         Rng& rng) {
    config.validate();
    model.validate();
    const auto m = static_cast<std::size_t>(config.particles);
    ParticleCloud cloud;
    cloud.x.resize(m);
    cloud.phi.resize(m);
    cloud.sigma2.resize(m);
    cloud.w.assign(m, 1.0 / static_cast<double>(m));
    const ParamBox& prior = config.prior;
    for (std::size_t k = 0; k < m; ++k) {
        cloud.phi[k] = prior.phi_lo + (prior.phi_hi - prior.phi_lo) * rng.uniform();
        cloud.sigma2[k] = prior.s2_lo + (prior.s2_hi - prior.s2_lo) * rng.uniform();
        const Theta theta{cloud.phi[k], cloud.sigma2[k]};
        cloud.x[k] = rng.normal(0.0, std::sqrt(stationary_variance(theta)));
    }
    return cloud;
}

bool weight_cloud(ParticleCloud& cloud, double z, const ModelSpec& model) {
    std::vector<double> logw(cloud.w.size());
    for (std::size_t k = 0; k < cloud.w.size(); ++k)
        logw[k] = std::log(cloud.w[k]) + model.obs_logpdf(z, cloud.x[k]);
    return normalize_log_weights(logw, cloud.w);
}

std::vector<std::uint32_t> resample_indices(const std::vector<double>& w,
                                            Resampling scheme,
                                            std::size_t count, Rng& rng) {
    if (w.empty() || count == 0)
        throw std::invalid_argument("resample_indices needs weights and count");
    const std::size_t m = w.size();
    std::vector<double> cum(m);
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        acc += w[k];
        cum[k] = acc;
    }
    cum[m - 1] = 1.0;  // absorb rounding so every draw lands

    std::vector<std::uint32_t> idx(count);
    if (scheme == Resampling::Systematic) {
        const double offset = rng.uniform();  // one draw positions the comb
        std::size_t j = 0;
        for (std::size_t k = 0; k < count; ++k) {
            const double u = (static_cast<double>(k) + offset) /
                             static_cast<double>(count);
            while (j + 1 < m && cum[j] < u) ++j;
            idx[k] = static_cast<std::uint32_t>(j);
        }
    } else {
        for (std::size_t k = 0; k < count; ++k) {
            const double u = rng.uniform();
            const auto it = std::lower_bound(cum.begin(), cum.end(), u);
            idx[k] = static_cast<std::uint32_t>(it - cum.begin());
        }
    }
    return idx;
}

void bootstrap_step(ParticleCloud& cloud, double z_next, const ModelSpec& model,
                    const FilterConfig& config, Rng& rng, StepDiag* diag) {
    const std::size_t m = cloud.w.size();
    evolve_parameters(cloud.phi, cloud.sigma2, model.box, config, rng);
    std::vector<double> logw(m);
    for (std::size_t k = 0; k < m; ++k) {
        cloud.x[k] = cloud.phi[k] * cloud.x[k] +
                     rng.normal(0.0, std::sqrt(cloud.sigma2[k]));
        logw[k] = std::log(cloud.w[k]) + model.obs_logpdf(z_next, cloud.x[k]);
    }
    const bool ok = normalize_log_weights(logw, cloud.w);
    const double ess = cloud.ess();
    const bool thin = ess < config.ess_frac * static_cast<double>(m);
    if (thin) gather(cloud, resample_indices(cloud.w, config.resampling, m, rng));
    if (diag != nullptr) {
        diag->ess_after_weight = ess;
        diag->resampled = thin;
        diag->weight_collapse = !ok;
    }
}

void apf_step(ParticleCloud& cloud, double z_next, const ModelSpec& model,
              const FilterConfig& config, Rng& rng, StepDiag* diag) {
    const std::size_t m = cloud.w.size();

    // First stage: score each particle by the likelihood of its point
    // prediction mu_k = phi_k x_k (Pitt-Shephard auxiliary weights).
    std::vector<double> mu(m), logg(m), g(m);
    for (std::size_t k = 0; k < m; ++k) {
        mu[k] = cloud.phi[k] * cloud.x[k];
        logg[k] = std::log(cloud.w[k]) + model.obs_logpdf(z_next, mu[k]);
    }
    const bool stage_ok = normalize_log_weights(logg, g);
    const auto parents = resample_indices(g, config.resampling, m, rng);
    gather(cloud, parents);

    // Second stage: propagate from the chosen parents and correct for the
    // first-stage scores.
    evolve_parameters(cloud.phi, cloud.sigma2, model.box, config, rng);
    std::vector<double> logw(m);
    for (std::size_t k = 0; k < m; ++k) {
        cloud.x[k] = cloud.phi[k] * cloud.x[k] +
                     rng.normal(0.0, std::sqrt(cloud.sigma2[k]));
        logw[k] = model.obs_logpdf(z_next, cloud.x[k]) -
                  model.obs_logpdf(z_next, mu[parents[k]]);
    }
    const bool ok = normalize_log_weights(logw, cloud.w);
    if (diag != nullptr) {
        diag->ess_after_weight = cloud.ess();
        diag->resampled = true;
        diag->weight_collapse = !(ok && stage_ok);
    }
}

void liu_west_shrink(std::vector<double>& phi, std::vector<double>& sigma2,
                     const std::vector<double>& w, double h) {
    const double a = std::sqrt(1.0 - h * h);
    double mean_phi = 0.0;
    double mean_s2 = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        mean_phi += w[k] * phi[k];
        mean_s2 += w[k] * sigma2[k];
    }
    for (std::size_t k = 0; k < w.size(); ++k) {
        phi[k] = a * phi[k] + (1.0 - a) * mean_phi;
        sigma2[k] = a * sigma2[k] + (1.0 - a) * mean_s2;
    }
}

void ksapf_step(ParticleCloud& cloud, double z_next, const ModelSpec& model,
                const FilterConfig& config, Rng& rng, StepDiag* diag) {
    const std::size_t m = cloud.w.size();

    // Weighted parameter covariance before shrinkage; the Liu-West kernel
    // mixture keeps mean and covariance of the parameter cloud unchanged.
    const Theta bar = cloud.weighted_theta_mean();
    Mat2 vtheta{};
    for (std::size_t k = 0; k < m; ++k) {
        const double dp = cloud.phi[k] - bar.phi;
        const double ds = cloud.sigma2[k] - bar.sigma2;
        vtheta = vtheta + Mat2{dp * dp, dp * ds, ds * dp, ds * ds} * cloud.w[k];
    }
    const Mat2 jitter_chol = (vtheta * (config.h * config.h)).cholesky();

    liu_west_shrink(cloud.phi, cloud.sigma2, cloud.w, config.h);

    std::vector<double> mu(m), logg(m), g(m);
    for (std::size_t k = 0; k < m; ++k) {
        mu[k] = cloud.phi[k] * cloud.x[k];
        logg[k] = std::log(cloud.w[k]) + model.obs_logpdf(z_next, mu[k]);
    }
    const bool stage_ok = normalize_log_weights(logg, g);
    const auto parents = resample_indices(g, config.resampling, m, rng);
    gather(cloud, parents);

    std::vector<double> logw(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double n1 = rng.normal();
        const double n2 = rng.normal();
        cloud.phi[k] = reflect_into(
            cloud.phi[k] + jitter_chol.a11 * n1, model.box.phi_lo,
            model.box.phi_hi);
        cloud.sigma2[k] = reflect_into(
            cloud.sigma2[k] + jitter_chol.a21 * n1 + jitter_chol.a22 * n2,
            model.box.s2_lo, model.box.s2_hi);
        cloud.x[k] = cloud.phi[k] * cloud.x[k] +
                     rng.normal(0.0, std::sqrt(cloud.sigma2[k]));
        logw[k] = model.obs_logpdf(z_next, cloud.x[k]) -
                  model.obs_logpdf(z_next, mu[parents[k]]);
    }
    const bool ok = normalize_log_weights(logw, cloud.w);
    if (diag != nullptr) {
        diag->ess_after_weight = cloud.ess();
        diag->resampled = true;
        diag->weight_collapse = !(ok && stage_ok);
    }
}

FilterResult run_filter(FilterKind kind, const ModelSpec& model,
                        const std::vector<double>& z,
                        const FilterConfig& config, Rng& rng) {
    if (z.empty()) throw std::invalid_argument("run_filter needs observations");
    ParticleCloud cloud = init_cloud(model, config, rng);

    FilterResult result;
    result.x_mean.reserve(z.size());
    result.ess.reserve(z.size());
    result.theta_mean.reserve(z.size());

    if (!weight_cloud(cloud, z[0], model)) ++result.weight_collapses;
    result.x_mean.push_back(cloud.weighted_x_mean());
    result.ess.push_back(cloud.ess());
    result.theta_mean.push_back(cloud.weighted_theta_mean());
    result.resampled.push_back(0);

    for (std::size_t i = 1; i < z.size(); ++i) {
        StepDiag diag;
        switch (kind) {
            case FilterKind::Bootstrap:
                bootstrap_step(cloud, z[i], model, config, rng, &diag);
                break;
            case FilterKind::Apf:
                apf_step(cloud, z[i], model, config, rng, &diag);
                break;
            case FilterKind::Ksapf:
                ksapf_step(cloud, z[i], model, config, rng, &diag);
                break;
        }
        result.x_mean.push_back(cloud.weighted_x_mean());
        result.ess.push_back(diag.ess_after_weight);
        result.theta_mean.push_back(cloud.weighted_theta_mean());
        result.resampled.push_back(diag.resampled ? 1 : 0);
        if (diag.resampled) ++result.resamples;
        if (diag.weight_collapse) ++result.weight_collapses;
    }
    result.theta_hat = result.theta_mean.back();
    return result;
}

}  // namespace hsm
