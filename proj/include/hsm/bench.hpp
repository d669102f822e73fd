#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsm/asymptotics.hpp"
#include "hsm/contrast.hpp"
#include "hsm/model.hpp"
#include "hsm/nelder_mead.hpp"
#include "hsm/particle.hpp"

namespace hsm {

enum class Method { Contrast, Qml, Bootstrap, Apf, Ksapf };

const char* method_name(Method m) noexcept;

/// Parse "contrast", "qml", "bootstrap", "apf", "ksapf" (case-sensitive);
/// throws std::invalid_argument otherwise.
Method method_from_name(const std::string& name);

struct StudyConfig {
    ModelSpec model = ModelSpec::ar1();
    Theta theta0{0.7, 0.3};
    std::size_t n = 1000;
    int reps = 100;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    std::vector<Method> methods{Method::Contrast, Method::Qml};
    QuadratureConfig quad{};
    NmOptions nm{};
    FilterConfig filter{};
    int q_trunc = 100;
    void validate() const;
};

struct RepRecord {
    int rep = 0;
    Theta theta_hat;
    bool ok = false;        // estimate produced; failures leave defaults
    double seconds = 0.0;
    bool has_ci = false;    // contrast only, and only when assembly succeeded
    Interval ci_phi;
    Interval ci_sigma2;
};

struct MethodReport {
    Method method = Method::Contrast;
    std::vector<RepRecord> reps;
    int failures = 0;        // estimates that threw or failed to converge
    int ci_failures = 0;     // covariance assemblies that threw
    double mse = 0.0;        // mean squared distance to theta0, both coordinates
    double bias_phi = 0.0;
    double bias_sigma2 = 0.0;
    double coverage_phi = -1.0;    // -1 when the method carries no intervals
    double coverage_sigma2 = -1.0;
    double mean_width_phi = 0.0;
    double mean_width_sigma2 = 0.0;
    double seconds_total = 0.0;    // exact sum of per-replicate seconds
};

struct McStudyReport {
    StudyConfig config;
    std::vector<MethodReport> methods;
};

/// Scalar benchmark loss: (1/N) sum_j |theta_hat_j - truth|^2 summed over
/// both coordinates.
double mse(const std::vector<Theta>& estimates, const Theta& truth);

/// Per-coordinate fraction of intervals containing the true value.
struct CoverageRate {
    double phi = 0.0;
    double sigma2 = 0.0;
};
CoverageRate coverage(const std::vector<std::array<Interval, 2>>& cis,
                      const Theta& truth);

/// Replicate r simulates its trajectory on stream 16r and method k runs on
/// stream 16r + 1 + k, so adding or removing methods never changes the data
/// or any other method's draws.  Failures are recorded and skipped in the
/// aggregates.  Deterministic given config.
McStudyReport run_study(const StudyConfig& config);

/// Stable-key-order JSON payload of the full report (config echo, per-method
/// aggregates, per-replicate rows).  Doubles survive a round trip exactly.
std::string study_to_json(const McStudyReport& report);

/// One row per (method, replicate): method, rep, ok, phi_hat, sigma2_hat,
/// seconds, ci bounds where present.
void write_replicate_csv(const McStudyReport& report, const std::string& path);

struct CoveragePoint {
    std::size_t n = 0;
    CoverageRate rate;
    double mean_width_phi = 0.0;
    double mean_width_sigma2 = 0.0;
    int ci_failures = 0;
};

/// Contrast-estimator coverage against sample size: one contrast-only study
/// per grid point (seed offset by the grid index).  Widths shrink as n grows.
std::vector<CoveragePoint> coverage_curve(const ModelSpec& model,
                                          const Theta& theta0,
                                          const std::vector<std::size_t>& n_grid,
                                          int reps, double alpha,
                                          std::uint64_t seed,
                                          const StudyConfig& base = {});

}  // namespace hsm
