// Command-line driver: simulate | estimate | mc-study | coverage | ingest.
// Machine-readable output: results as JSON on stdout, errors as JSON on
// stderr.  Exit codes: 0 ok, 1 malformed input, 2 estimation failure.

#include <chrono>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hsm/asymptotics.hpp"
#include "hsm/bench.hpp"
#include "hsm/config.hpp"
#include "hsm/contrast.hpp"
#include "hsm/io.hpp"
#include "hsm/kalman.hpp"
#include "hsm/model.hpp"
#include "hsm/particle.hpp"
#include "hsm/rng.hpp"
#include "hsm/siemle.hpp"

namespace {

using json = nlohmann::ordered_json;
using SteadyClock = std::chrono::steady_clock;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string model = "ar1";
    double sigma_eps2 = 0.1;
    double beta = hsm::ModelSpec::default_sv_beta();
    double phi = 0.7;
    double sigma2 = 0.3;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    int particles = 0;      // 0 keeps the config default
    std::string config_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags* f) {
    cmd->add_option("--model", f->model, "ar1 or log_sv")
        ->check(CLI::IsMember({"ar1", "log_sv"}));
    cmd->add_option("--sigma-eps2", f->sigma_eps2,
                    "observation noise variance (ar1)");
    cmd->add_option("--beta", f->beta, "noise scale (log_sv)");
    cmd->add_option("--phi", f->phi, "true phi for simulation");
    cmd->add_option("--sigma2", f->sigma2, "true sigma2 for simulation");
    cmd->add_option("--seed", f->seed, "RNG seed");
    cmd->add_option("--alpha", f->alpha, "CI level is 1 - alpha");
    cmd->add_option("--particles", f->particles, "particle count override");
    cmd->add_option("--config", f->config_path, "key = value tuning file");
}

hsm::ModelSpec make_model(const CommonFlags& f) {
    try {
        return f.model == "ar1" ? hsm::ModelSpec::ar1(f.sigma_eps2)
                                : hsm::ModelSpec::log_sv(f.beta);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
}

hsm::RunConfig make_run_config(const CommonFlags& f) {
    hsm::RunConfig rc;
    if (!f.config_path.empty()) {
        try {
            rc = hsm::parse_config_file(f.config_path);
        } catch (const std::exception& e) {
            throw InputError(e.what());
        }
    }
    if (f.particles > 0) rc.filter.particles = f.particles;
    return rc;
}

json theta_json(const hsm::Theta& t) {
    return {{"phi", t.phi}, {"sigma2", t.sigma2}};
}

json mat_json(const hsm::Mat2& m) {
    return json::array({json::array({m.a11, m.a12}),
                        json::array({m.a21, m.a22})});
}

int cmd_simulate(const CommonFlags& f, std::size_t n, const std::string& out) {
    const hsm::ModelSpec model = make_model(f);
    hsm::Rng rng(f.seed, 0);
    hsm::Trajectory traj;
    try {
        traj = hsm::simulate(model, {f.phi, f.sigma2}, n, rng);
        hsm::write_trajectory_csv(out, traj);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    json report{{"command", "simulate"},
                {"model", f.model},
                {"n", traj.n()},
                {"seed", f.seed},
                {"out", out}};
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_estimate(const CommonFlags& f, const std::string& method,
                 const std::string& file) {
    const hsm::ModelSpec model = make_model(f);
    const hsm::RunConfig rc = make_run_config(f);
    std::vector<double> z;
    try {
        z = hsm::read_z_csv(file);
        if (z.size() < 2) throw InputError("need at least 2 observations");
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }

    json out{{"command", "estimate"}, {"method", method}, {"n", z.size()}};
    const auto t0 = SteadyClock::now();
    try {
        if (method == "contrast") {
            const hsm::ContrastEstimate est =
                hsm::estimate_contrast(z, model, rc.nm, rc.quad);
            if (!est.converged) throw EstimationError("contrast did not converge");
            out["theta_hat"] = theta_json(est.theta_hat);
            try {
                const hsm::SandwichParts parts =
                    model.kind == hsm::ModelKind::GaussianAR1
                        ? hsm::sandwich_ar1(est.theta_hat, model.sigma_eps2,
                                            rc.q_trunc)
                        : hsm::sandwich_plugin(model, z, est.theta_hat,
                                               rc.q_trunc, rc.quad);
                const auto ci = hsm::confidence_interval(
                    est.theta_hat, parts.Sigma, z.size(), f.alpha);
                out["sigma_matrix"] = mat_json(parts.Sigma);
                out["ci"] = {{"phi", json::array({ci[0].lo, ci[0].hi})},
                             {"sigma2", json::array({ci[1].lo, ci[1].hi})}};
            } catch (const EstimationError&) {
                throw;
            } catch (const std::exception& e) {
                out["sigma_matrix"] = nullptr;
                out["ci"] = nullptr;
                out["sigma_error"] = e.what();
            }
        } else if (method == "qml") {
            const hsm::QmlFit fit = hsm::qml_estimate(z, model, rc.nm);
            if (!fit.converged) throw EstimationError("qml did not converge");
            out["theta_hat"] = theta_json(fit.theta_hat);
            out["loglik"] = fit.loglik;
        } else if (method == "siemle") {
            const hsm::MixtureApprox mix =
                model.kind == hsm::ModelKind::LogSV
                    ? hsm::MixtureApprox::log_chisq1_ksc(model.beta)
                    : hsm::MixtureApprox{{1.0}, {0.0}, {model.sigma_eps2}};
            hsm::Rng rng(f.seed, 0);
            const hsm::SiemleFit fit =
                hsm::siemle_estimate(model, z, mix, rc.siemle, rng);
            // Hitting the EM iteration cap still yields a usable estimate;
            // the converged flag carries the distinction.
            out["theta_hat"] = theta_json(fit.theta_hat);
            out["converged"] = fit.converged;
            out["em_iters"] = fit.em_iters;
        } else {
            const hsm::Method m = hsm::method_from_name(method);
            hsm::Rng rng(f.seed, 0);
            const hsm::FilterKind kind =
                m == hsm::Method::Bootstrap  ? hsm::FilterKind::Bootstrap
                : m == hsm::Method::Apf      ? hsm::FilterKind::Apf
                                             : hsm::FilterKind::Ksapf;
            const hsm::FilterResult run =
                hsm::run_filter(kind, model, z, rc.filter, rng);
            out["theta_hat"] = theta_json(run.theta_hat);
            out["resamples"] = run.resamples;
            out["weight_collapses"] = run.weight_collapses;
        }
    } catch (const EstimationError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    } catch (const std::exception& e) {
        throw EstimationError(e.what());
    }
    out["seconds"] =
        std::chrono::duration<double>(SteadyClock::now() - t0).count();
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_mc_study(const CommonFlags& f, const std::string& methods_csv,
                 std::size_t n, int reps, const std::string& out_path,
                 const std::string& csv_path) {
    hsm::StudyConfig config;
    config.model = make_model(f);
    config.theta0 = {f.phi, f.sigma2};
    config.n = n;
    config.reps = reps;
    config.seed = f.seed;
    config.alpha = f.alpha;
    const hsm::RunConfig rc = make_run_config(f);
    config.quad = rc.quad;
    config.nm = rc.nm;
    config.filter = rc.filter;
    config.q_trunc = rc.q_trunc;
    config.methods.clear();
    std::stringstream ss(methods_csv);
    std::string name;
    try {
        while (std::getline(ss, name, ','))
            config.methods.push_back(hsm::method_from_name(name));
        config.validate();
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }

    const hsm::McStudyReport report = hsm::run_study(config);
    const std::string payload = hsm::study_to_json(report);
    std::ofstream out(out_path);
    if (!out) throw InputError("cannot open " + out_path);
    out << payload << '\n';
    if (!out) throw InputError("write failed: " + out_path);
    if (!csv_path.empty()) hsm::write_replicate_csv(report, csv_path);
    std::cout << payload << '\n';
    return 0;
}

int cmd_coverage(const CommonFlags& f, const std::string& grid_csv, int reps,
                 const std::string& out_path) {
    std::vector<std::size_t> grid;
    try {
        std::stringstream ss(grid_csv);
        std::string cell;
        while (std::getline(ss, cell, ','))
            grid.push_back(static_cast<std::size_t>(std::stoull(cell)));
    } catch (const std::exception&) {
        throw InputError("bad --n-grid: " + grid_csv);
    }
    const hsm::ModelSpec model = make_model(f);
    const hsm::RunConfig rc = make_run_config(f);
    hsm::StudyConfig base;
    base.quad = rc.quad;
    base.nm = rc.nm;
    base.filter = rc.filter;
    base.q_trunc = rc.q_trunc;
    const auto curve = hsm::coverage_curve(model, {f.phi, f.sigma2}, grid, reps,
                                           f.alpha, f.seed, base);
    json rows = json::array();
    for (const auto& p : curve)
        rows.push_back({{"n", p.n},
                        {"coverage_phi", p.rate.phi},
                        {"coverage_sigma2", p.rate.sigma2},
                        {"mean_width_phi", p.mean_width_phi},
                        {"mean_width_sigma2", p.mean_width_sigma2},
                        {"ci_failures", p.ci_failures}});
    json report{{"command", "coverage"},
                {"alpha", f.alpha},
                {"reps", reps},
                {"points", rows}};
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw InputError("cannot open " + out_path);
        out << report.dump(2) << '\n';
    }
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_ingest(const std::string& prices_path, const std::string& kappa_mode,
               const std::string& out_path) {
    hsm::LogChisqTransform transform;
    std::size_t n_prices = 0;
    try {
        const hsm::PriceSeries series = hsm::read_price_csv(prices_path);
        n_prices = series.s.size();
        const std::vector<double> returns = hsm::to_returns(series);
        transform = hsm::to_log_chisq(returns,
                                      kappa_mode == "exact"
                                          ? hsm::KappaMode::Exact
                                          : hsm::KappaMode::PaperLiteral);
        if (!out_path.empty()) hsm::write_z_csv(out_path, transform.z);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    json report{{"command", "ingest"},
                {"prices", n_prices},
                {"observations", transform.z.size()},
                {"floored", transform.floored},
                {"kappa", hsm::kappa_value(kappa_mode == "exact"
                                               ? hsm::KappaMode::Exact
                                               : hsm::KappaMode::PaperLiteral)},
                {"out", out_path}};
    std::cout << report.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hidden-state model estimation toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* sim = app.add_subcommand("simulate", "write a simulated trajectory CSV");
    std::size_t sim_n = 1000;
    std::string sim_out = "trajectory.csv";
    add_common_flags(sim, &flags);
    sim->add_option("--n", sim_n, "series length");
    sim->add_option("--out", sim_out, "output CSV path");

    auto* est = app.add_subcommand("estimate", "estimate theta from a Z CSV");
    std::string est_method = "contrast";
    std::string est_file;
    add_common_flags(est, &flags);
    est->add_option("--method", est_method,
                    "contrast qml bootstrap apf ksapf siemle")
        ->check(CLI::IsMember(
            {"contrast", "qml", "bootstrap", "apf", "ksapf", "siemle"}));
    est->add_option("--file", est_file, "observation CSV")->required();

    auto* mc = app.add_subcommand("mc-study", "Monte Carlo benchmark study");
    std::string mc_methods = "contrast,qml";
    std::size_t mc_n = 1000;
    int mc_reps = 100;
    std::string mc_out = "mc_report.json";
    std::string mc_csv;
    add_common_flags(mc, &flags);
    mc->add_option("--methods", mc_methods, "comma-separated method list");
    mc->add_option("--n", mc_n, "series length");
    mc->add_option("--reps", mc_reps, "replicate count");
    mc->add_option("--out", mc_out, "report JSON path");
    mc->add_option("--csv", mc_csv, "optional per-replicate CSV path");

    auto* cov = app.add_subcommand("coverage", "coverage against sample size");
    std::string cov_grid = "500,1000,2000";
    int cov_reps = 100;
    std::string cov_out;
    add_common_flags(cov, &flags);
    cov->add_option("--n-grid", cov_grid, "comma-separated series lengths");
    cov->add_option("--reps", cov_reps, "replicates per grid point");
    cov->add_option("--out", cov_out, "optional report JSON path");

    auto* ing = app.add_subcommand("ingest", "prices CSV -> observation CSV");
    std::string ing_prices;
    std::string ing_kappa = "paper";
    std::string ing_out = "z.csv";
    ing->add_option("--prices", ing_prices, "price CSV path")->required();
    ing->add_option("--kappa-mode", ing_kappa, "paper (1.27) or exact")
        ->check(CLI::IsMember({"paper", "exact"}));
    ing->add_option("--out", ing_out, "output observation CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(flags, sim_n, sim_out);
        if (est->parsed()) return cmd_estimate(flags, est_method, est_file);
        if (mc->parsed())
            return cmd_mc_study(flags, mc_methods, mc_n, mc_reps, mc_out, mc_csv);
        if (cov->parsed()) return cmd_coverage(flags, cov_grid, cov_reps, cov_out);
        if (ing->parsed()) return cmd_ingest(ing_prices, ing_kappa, ing_out);
    } catch (const InputError& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
        return 1;
    } catch (const EstimationError& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
        return 2;
    }
    return 0;
}
