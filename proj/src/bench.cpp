#include "hsm/bench.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hsm/kalman.hpp"
#include "hsm/rng.hpp"
#include "json.hpp"

namespace hsm {

namespace {

using SteadyClock = std::chrono::steady_clock;

double seconds_between(SteadyClock::time_point a, SteadyClock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

FilterKind to_filter_kind(Method m) {
    switch (m) {
        case Method::Bootstrap: return FilterKind::Bootstrap;
        case Method::Apf: return FilterKind::Apf;
        case Method::Ksapf: return FilterKind::Ksapf;
        default: throw std::logic_error("not a particle method");
    }
}

}  // namespace

const char* method_name(Method m) noexcept {
    switch (m) {
        case Method::Contrast: return "contrast";
        case Method::Qml: return "qml";
        case Method::Bootstrap: return "bootstrap";
        case Method::Apf: return "apf";
        case Method::Ksapf: return "ksapf";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::Contrast, Method::Qml, Method::Bootstrap,
                     Method::Apf, Method::Ksapf})
        if (name == method_name(m)) return m;
    throw std::invalid_argument("unknown method: " + name);
}

void StudyConfig::validate() const {
    model.validate();
    quad.validate();
    filter.validate();
    if (n < 2) throw std::invalid_argument("StudyConfig: n must be >= 2");
    if (reps < 1) throw std::invalid_argument("StudyConfig: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("StudyConfig: alpha must lie in (0, 1)");
    if (methods.empty())
        throw std::invalid_argument("StudyConfig: methods must be non-empty");
    if (q_trunc < 1) throw std::invalid_argument("StudyConfig: q_trunc must be >= 1");
    if (!(std::abs(theta0.phi) < 1.0 && theta0.sigma2 > 0.0))
        throw std::invalid_argument("StudyConfig: theta0 must be stationary");
}

double mse(const std::vector<Theta>& estimates, const Theta& truth) {
    if (estimates.empty()) throw std::invalid_argument("mse: empty estimate list");
    double acc = 0.0;
    for (const Theta& t : estimates) {
        const double dp = t.phi - truth.phi;
        const double ds = t.sigma2 - truth.sigma2;
        acc += dp * dp + ds * ds;
    }
    return acc / static_cast<double>(estimates.size());
}

CoverageRate coverage(const std::vector<std::array<Interval, 2>>& cis,
                      const Theta& truth) {
    if (cis.empty()) throw std::invalid_argument("coverage: empty interval list");
    CoverageRate rate;
    for (const auto& ci : cis) {
        if (ci[0].contains(truth.phi)) rate.phi += 1.0;
        if (ci[1].contains(truth.sigma2)) rate.sigma2 += 1.0;
    }
    rate.phi /= static_cast<double>(cis.size());
    rate.sigma2 /= static_cast<double>(cis.size());
    return rate;
}

McStudyReport run_study(const StudyConfig& config) {
    config.validate();
    McStudyReport report;
    report.config = config;
    report.methods.resize(config.methods.size());
    for (std::size_t k = 0; k < config.methods.size(); ++k)
        report.methods[k].method = config.methods[k];

    for (int r = 0; r < config.reps; ++r) {
        Rng traj_rng(config.seed, 16u * static_cast<std::uint64_t>(r));
        const Trajectory traj =
            simulate(config.model, config.theta0, config.n, traj_rng);

        for (std::size_t k = 0; k < config.methods.size(); ++k) {
            const Method m = config.methods[k];
            MethodReport& out = report.methods[k];
            Rng method_rng(config.seed,
                           16u * static_cast<std::uint64_t>(r) + 1u +
                               static_cast<std::uint64_t>(m));
            RepRecord rec;
            rec.rep = r;
            const auto t0 = SteadyClock::now();
            try {
                switch (m) {
                    case Method::Contrast: {
                        const ContrastEstimate est = estimate_contrast(
                            traj.z, config.model, config.nm, config.quad);
                        rec.theta_hat = est.theta_hat;
                        rec.ok = est.converged;
                        if (rec.ok) {
                            try {
                                const SandwichParts parts =
                                    config.model.kind == ModelKind::GaussianAR1
                                        ? sandwich_ar1(est.theta_hat,
                                                       config.model.sigma_eps2,
                                                       config.q_trunc)
                                        : sandwich_plugin(config.model, traj.z,
                                                          est.theta_hat,
                                                          config.q_trunc,
                                                          config.quad);
                                const auto ci = confidence_interval(
                                    est.theta_hat, parts.Sigma, traj.z.size(),
                                    config.alpha);
                                rec.has_ci = true;
                                rec.ci_phi = ci[0];
                                rec.ci_sigma2 = ci[1];
                            } catch (const std::exception&) {
                                ++out.ci_failures;
                            }
                        }
                        break;
                    }
                    case Method::Qml: {
                        const QmlFit fit =
                            qml_estimate(traj.z, config.model, config.nm);
                        rec.theta_hat = fit.theta_hat;
                        rec.ok = fit.converged;
                        break;
                    }
                    default: {
                        const FilterResult run =
                            run_filter(to_filter_kind(m), config.model, traj.z,
                                       config.filter, method_rng);
                        rec.theta_hat = run.theta_hat;
                        rec.ok = true;
                        break;
                    }
                }
            } catch (const std::exception&) {
                rec.ok = false;
            }
            rec.seconds = seconds_between(t0, SteadyClock::now());
            if (!rec.ok) ++out.failures;
            out.seconds_total += rec.seconds;
            out.reps.push_back(rec);
        }
    }

    for (MethodReport& out : report.methods) {
        std::vector<Theta> hats;
        std::vector<std::array<Interval, 2>> cis;
        for (const RepRecord& rec : out.reps) {
            if (!rec.ok) continue;
            hats.push_back(rec.theta_hat);
            if (rec.has_ci) cis.push_back({rec.ci_phi, rec.ci_sigma2});
        }
        if (!hats.empty()) {
            out.mse = mse(hats, config.theta0);
            for (const Theta& t : hats) {
                out.bias_phi += (t.phi - config.theta0.phi);
                out.bias_sigma2 += (t.sigma2 - config.theta0.sigma2);
            }
            out.bias_phi /= static_cast<double>(hats.size());
            out.bias_sigma2 /= static_cast<double>(hats.size());
        }
        if (!cis.empty()) {
            const CoverageRate rate = coverage(cis, config.theta0);
            out.coverage_phi = rate.phi;
            out.coverage_sigma2 = rate.sigma2;
            for (const auto& ci : cis) {
                out.mean_width_phi += ci[0].width();
                out.mean_width_sigma2 += ci[1].width();
            }
            out.mean_width_phi /= static_cast<double>(cis.size());
            out.mean_width_sigma2 /= static_cast<double>(cis.size());
        }
    }
    return report;
}

std::string study_to_json(const McStudyReport& report) {
    using json = nlohmann::ordered_json;
    const StudyConfig& c = report.config;
    json root;
    root["config"] = {
        {"model", c.model.kind == ModelKind::GaussianAR1 ? "ar1" : "log_sv"},
        {"sigma_eps2", c.model.sigma_eps2},
        {"beta", c.model.beta},
        {"theta0", {{"phi", c.theta0.phi}, {"sigma2", c.theta0.sigma2}}},
        {"n", c.n},
        {"reps", c.reps},
        {"seed", c.seed},
        {"alpha", c.alpha},
        {"particles", c.filter.particles},
        {"q_trunc", c.q_trunc},
    };
    json methods = json::array();
    for (const MethodReport& out : report.methods) {
        json m;
        m["method"] = method_name(out.method);
        m["failures"] = out.failures;
        m["ci_failures"] = out.ci_failures;
        m["mse"] = out.mse;
        m["bias_phi"] = out.bias_phi;
        m["bias_sigma2"] = out.bias_sigma2;
        if (out.coverage_phi >= 0.0) {
            m["coverage_phi"] = out.coverage_phi;
            m["coverage_sigma2"] = out.coverage_sigma2;
            m["mean_width_phi"] = out.mean_width_phi;
            m["mean_width_sigma2"] = out.mean_width_sigma2;
        }
        m["seconds_total"] = out.seconds_total;
        json reps = json::array();
        for (const RepRecord& rec : out.reps) {
            json row;
            row["rep"] = rec.rep;
            row["ok"] = rec.ok;
            row["phi_hat"] = rec.theta_hat.phi;
            row["sigma2_hat"] = rec.theta_hat.sigma2;
            row["seconds"] = rec.seconds;
            if (rec.has_ci) {
                row["ci_phi"] = {rec.ci_phi.lo, rec.ci_phi.hi};
                row["ci_sigma2"] = {rec.ci_sigma2.lo, rec.ci_sigma2.hi};
            }
            reps.push_back(std::move(row));
        }
        m["replicates"] = std::move(reps);
        methods.push_back(std::move(m));
    }
    root["methods"] = std::move(methods);
    return root.dump(2);
}

void write_replicate_csv(const McStudyReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "method,rep,ok,phi_hat,sigma2_hat,seconds,ci_phi_lo,ci_phi_hi,"
           "ci_sigma2_lo,ci_sigma2_hi\n";
    out.precision(17);
    for (const MethodReport& m : report.methods) {
        for (const RepRecord& rec : m.reps) {
            out << method_name(m.method) << ',' << rec.rep << ','
                << (rec.ok ? 1 : 0) << ',' << rec.theta_hat.phi << ','
                << rec.theta_hat.sigma2 << ',' << rec.seconds;
            if (rec.has_ci)
                out << ',' << rec.ci_phi.lo << ',' << rec.ci_phi.hi << ','
                    << rec.ci_sigma2.lo << ',' << rec.ci_sigma2.hi;
            else
                out << ",,,,";
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<CoveragePoint> coverage_curve(const ModelSpec& model,
                                          const Theta& theta0,
                                          const std::vector<std::size_t>& n_grid,
                                          int reps, double alpha,
                                          std::uint64_t seed,
                                          const StudyConfig& base) {
    if (n_grid.empty())
        throw std::invalid_argument("coverage_curve: empty n grid");
    std::vector<CoveragePoint> curve;
    curve.reserve(n_grid.size());
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        StudyConfig config = base;
        config.model = model;
        config.theta0 = theta0;
        config.n = n_grid[g];
        config.reps = reps;
        config.alpha = alpha;
        config.seed = seed + g;  // decouple grid points
        config.methods = {Method::Contrast};
        const McStudyReport report = run_study(config);
        const MethodReport& m = report.methods.front();
        CoveragePoint point;
        point.n = n_grid[g];
        point.rate.phi = m.coverage_phi;
        point.rate.sigma2 = m.coverage_sigma2;
        point.mean_width_phi = m.mean_width_phi;
        point.mean_width_sigma2 = m.mean_width_sigma2;
        point.ci_failures = m.ci_failures;
        curve.push_back(point);
    }
    return curve;
}

}  // namespace hsm
