#include "hsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hsm/special.hpp"

namespace hsm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void ParamBox::validate() const {
    if (!(phi_lo > -1.0 && phi_hi < 1.0 && phi_lo <= phi_hi))
        throw std::invalid_argument("ParamBox: phi bounds must satisfy -1 < lo <= hi < 1");
    if (!(s2_lo > 0.0 && s2_lo <= s2_hi))
        throw std::invalid_argument("ParamBox: sigma2 bounds must satisfy 0 < lo <= hi");
}

Theta project_into_box(const Theta& theta, const ParamBox& box) {
    box.validate();
    return {std::clamp(theta.phi, box.phi_lo, box.phi_hi),
            std::clamp(theta.sigma2, box.s2_lo, box.s2_hi)};
}

double stationary_variance(const Theta& theta) {
    if (!(std::abs(theta.phi) < 1.0))
        throw std::domain_error("stationary_variance: requires |phi| < 1");
    return theta.sigma2 / (1.0 - theta.phi * theta.phi);
}

ModelSpec ModelSpec::ar1(double sigma_eps2) {
    ModelSpec m;
    m.kind = ModelKind::GaussianAR1;
    m.sigma_eps2 = sigma_eps2;
    m.beta = 0.0;
    // sigma2 floor keeps gamma^2 - sigma_eps2 bounded away from zero, which
    // the deconvolution closed forms require.
    m.box = ParamBox{-0.99, 0.99, sigma_eps2 + 0.05, 3.0};
    m.validate();
    return m;
}

ModelSpec ModelSpec::log_sv(double beta) {
    ModelSpec m;
    m.kind = ModelKind::LogSV;
    m.beta = beta;
    m.sigma_eps2 = beta * beta * kPi * kPi / 2.0;
    m.box = ParamBox{-0.99, 0.99, 0.01, 3.0};
    m.validate();
    return m;
}

double ModelSpec::default_sv_beta() { return 1.0 / (std::sqrt(5.0) * kPi); }

void ModelSpec::validate() const {
    box.validate();
    if (!(sigma_eps2 >= 0.0))
        throw std::invalid_argument("ModelSpec: sigma_eps2 must be >= 0");
    if (kind == ModelKind::LogSV) {
        if (!(beta > 0.0))
            throw std::invalid_argument("ModelSpec: LogSV requires beta > 0");
        const double implied = beta * beta * kPi * kPi / 2.0;
        if (std::abs(sigma_eps2 - implied) > 1e-12 * std::max(1.0, implied))
            throw std::invalid_argument(
                "ModelSpec: LogSV requires sigma_eps2 = beta^2 pi^2 / 2");
    }
}

double ModelSpec::obs_logpdf(double z, double x) const {
    if (kind == ModelKind::GaussianAR1) {
        const double d = z - x;
        return -0.5 * std::log(2.0 * kPi * sigma_eps2) - 0.5 * d * d / sigma_eps2;
    }
    // eps = beta (W - E[W]) with W = log xi^2: change of variables in W.
    const double w = (z - x) / beta + kLogChisq1Mean;
    return log_chisq1_logpdf(w) - std::log(beta);
}

namespace {

// Stationary hidden path; requires |phi| < 1 so X_1 has a finite law.
std::vector<double> simulate_hidden(const Theta& theta, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("simulate: n must be >= 1");
    if (!(theta.sigma2 >= 0.0))
        throw std::invalid_argument("simulate: sigma2 must be >= 0");
    const double gamma2 = stationary_variance(theta);
    std::vector<double> x(n);
    x[0] = rng.normal(0.0, std::sqrt(gamma2));
    const double sd = std::sqrt(theta.sigma2);
    for (std::size_t i = 1; i < n; ++i)
        x[i] = theta.phi * x[i - 1] + rng.normal(0.0, sd);
    return x;
}

}  // namespace

Trajectory simulate_ar1(const Theta& theta, std::size_t n, double sigma_eps2,
                        Rng& rng) {
    if (!(sigma_eps2 >= 0.0))
        throw std::invalid_argument("simulate_ar1: sigma_eps2 must be >= 0");
    Trajectory t;
    t.x = simulate_hidden(theta, n, rng);
    t.z.resize(n);
    const double sd = std::sqrt(sigma_eps2);
    for (std::size_t i = 0; i < n; ++i) t.z[i] = t.x[i] + rng.normal(0.0, sd);
    return t;
}

Trajectory simulate_sv(const Theta& theta, std::size_t n, double beta, Rng& rng) {
    if (!(beta > 0.0)) throw std::invalid_argument("simulate_sv: beta must be > 0");
    Trajectory t;
    t.x = simulate_hidden(theta, n, rng);
    t.z.resize(n);
    t.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double xi = rng.normal();
        // log(xi^2) must stay finite; an exactly-zero draw has probability ~0
        // but would poison the whole series.
        if (std::abs(xi) < 1e-300) xi = 1e-300;
        const double logxi2 = 2.0 * std::log(std::abs(xi));
        t.y[i] = std::exp(0.5 * t.x[i]) * std::copysign(std::pow(std::abs(xi), beta), xi);
        t.z[i] = t.x[i] + beta * (logxi2 - kLogChisq1Mean);
    }
    return t;
}

Trajectory simulate(const ModelSpec& model, const Theta& theta, std::size_t n,
                    Rng& rng) {
    return model.kind == ModelKind::GaussianAR1
               ? simulate_ar1(theta, n, model.sigma_eps2, rng)
               : simulate_sv(theta, n, model.beta, rng);
}

}  // namespace hsm
