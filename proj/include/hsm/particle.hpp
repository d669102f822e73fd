#pragma once

#include <cstdint>
#include <vector>

#include "hsm/model.hpp"
#include "hsm/rng.hpp"

namespace hsm {

enum class Resampling { Systematic, Multinomial };
enum class FilterKind { Bootstrap, Apf, Ksapf };

/// Self-organizing state-space configuration: the parameter ride along as
/// extra state coordinates (Kitagawa 1998), with an artificial random walk
/// theta_{i+1} = theta_i + N(0, Q) for the bootstrap/APF variants and the
/// Liu-West shrinkage kernel for KSAPF.
struct FilterConfig {
    int particles = 5000;
    Resampling resampling = Resampling::Systematic;
    double ess_frac = 0.5;       // bootstrap resamples when ESS < ess_frac * M
    double q_phi = 0.6e-6;       // random-walk variance of phi
    double q_sigma2 = 0.1e-6;    // random-walk variance of sigma2
    double h = 0.1;              // KSAPF kernel width
    ParamBox prior{0.5, 0.9, 0.1, 0.4};  // uniform prior for theta_1
    void validate() const;
};

struct ParticleCloud {
    std::vector<double> x;       // hidden state
    std::vector<double> phi;     // parameter particles
    std::vector<double> sigma2;
    std::vector<double> w;       // normalized weights

    [[nodiscard]] double ess() const;
    [[nodiscard]] Theta weighted_theta_mean() const;
    [[nodiscard]] double weighted_x_mean() const;
};

/// Draw theta from the uniform prior box and X_1 from each particle's
/// stationary law; weights uniform.
ParticleCloud init_cloud(const ModelSpec& model, const FilterConfig& config,
                         Rng& rng);

/// Multiply weights by the observation density of z at the current states
/// and renormalize (the time-1 update after init_cloud).  Returns false and
/// resets weights to uniform when every weight underflows.
bool weight_cloud(ParticleCloud& cloud, double z, const ModelSpec& model);

/// Indices sampled proportional to w, deterministic given rng.
std::vector<std::uint32_t> resample_indices(const std::vector<double>& w,
                                            Resampling scheme, std::size_t count,
                                            Rng& rng);

struct StepDiag {
    double ess_after_weight = 0.0;
    bool resampled = false;
    bool weight_collapse = false;
};

/// One prediction/update step of each filter flavor, advancing the cloud
/// from time i to i+1 with observation z_next.
void bootstrap_step(ParticleCloud& cloud, double z_next, const ModelSpec& model,
                    const FilterConfig& config, Rng& rng,
                    StepDiag* diag = nullptr);
void apf_step(ParticleCloud& cloud, double z_next, const ModelSpec& model,
              const FilterConfig& config, Rng& rng, StepDiag* diag = nullptr);
void ksapf_step(ParticleCloud& cloud, double z_next, const ModelSpec& model,
                const FilterConfig& config, Rng& rng, StepDiag* diag = nullptr);

/// Liu-West shrinkage of the parameter particles toward their weighted mean
/// with a = sqrt(1 - h^2); exposed for its exact mean-preservation property.
void liu_west_shrink(std::vector<double>& phi, std::vector<double>& sigma2,
                     const std::vector<double>& w, double h);

struct FilterResult {
    Theta theta_hat;              // final-time weighted posterior mean
    std::vector<double> x_mean;   // filtered state mean per time
    std::vector<double> ess;      // ESS per time (after weighting)
    std::vector<Theta> theta_mean;  // posterior theta mean per time
    std::vector<std::uint8_t> resampled;  // 1 when that step resampled
    int resamples = 0;
    int weight_collapses = 0;
};

FilterResult run_filter(FilterKind kind, const ModelSpec& model,
                        const std::vector<double>& z,
                        const FilterConfig& config, Rng& rng);

}  // namespace hsm
