// Benchmark harness tests.  The aggregate formulas have tiny exact cases,
// and the replicate seeding scheme has a strong invariant worth pinning:
// every (replicate, method) pair owns a private generator stream, so the
// method list can change without perturbing anyone else's draws.
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "hsm/bench.hpp"
#include "json.hpp"

namespace {

// Small all-method study used by several cases.  Values chosen so a full
// run stays around a second: estimation quality is asserted elsewhere.
hsm::StudyConfig smoke_config() {
    hsm::StudyConfig config;
    config.model = hsm::ModelSpec::ar1(0.1);
    config.theta0 = {0.7, 0.3};
    config.n = 150;
    config.reps = 2;
    config.seed = 41;
    config.methods = {hsm::Method::Contrast, hsm::Method::Qml,
                      hsm::Method::Bootstrap, hsm::Method::Apf,
                      hsm::Method::Ksapf};
    config.filter.particles = 300;
    return config;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("method names round trip") {
    using hsm::Method;
    for (Method m : {Method::Contrast, Method::Qml, Method::Bootstrap,
                     Method::Apf, Method::Ksapf})
        CHECK(hsm::method_from_name(hsm::method_name(m)) == m);
    CHECK_THROWS_AS(hsm::method_from_name("kalman"), std::invalid_argument);
    CHECK_THROWS_AS(hsm::method_from_name("Contrast"), std::invalid_argument);
}

TEST_CASE("mse matches hand-computed values") {
    // Differences picked representable in binary so sums are exact.
    const hsm::Theta truth{0.5, 0.25};
    CHECK(hsm::mse({{0.5, 0.25}}, truth) == 0.0);
    CHECK(hsm::mse({{0.75, 0.25}}, truth) == 0.0625);
    CHECK(hsm::mse({{0.75, 0.75}}, truth) == 0.0625 + 0.25);
    const std::vector<hsm::Theta> fwd{{0.5, 0.25}, {0.75, 0.25}, {0.5, 0.75}};
    const std::vector<hsm::Theta> rev{{0.5, 0.75}, {0.75, 0.25}, {0.5, 0.25}};
    CHECK(hsm::mse(fwd, truth) == hsm::mse(rev, truth));
    CHECK_THROWS_AS(hsm::mse({}, truth), std::invalid_argument);
}

TEST_CASE("coverage counts per coordinate") {
    const hsm::Theta truth{0.7, 0.3};
    const hsm::Interval hit_phi{0.6, 0.8}, miss_phi{0.8, 0.9};
    const hsm::Interval hit_s2{0.2, 0.4}, miss_s2{0.0, 0.1};
    std::vector<std::array<hsm::Interval, 2>> cis;
    cis.push_back({hit_phi, hit_s2});
    cis.push_back({hit_phi, miss_s2});
    cis.push_back({miss_phi, hit_s2});
    cis.push_back({miss_phi, miss_s2});
    const auto rate = hsm::coverage(cis, truth);
    CHECK(rate.phi == 0.5);
    CHECK(rate.sigma2 == 0.5);
    CHECK(hsm::coverage({{hit_phi, hit_s2}}, truth).phi == 1.0);
    CHECK(hsm::coverage({{miss_phi, miss_s2}}, truth).sigma2 == 0.0);
    CHECK_THROWS_AS(hsm::coverage({}, truth), std::invalid_argument);
}

TEST_CASE("config validation") {
    hsm::StudyConfig config = smoke_config();
    CHECK_NOTHROW(config.validate());
    config.n = 1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = smoke_config();
    config.reps = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = smoke_config();
    config.alpha = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = smoke_config();
    config.methods.clear();
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = smoke_config();
    config.q_trunc = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = smoke_config();
    config.theta0.phi = 1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("study records are structurally consistent") {
    const auto config = smoke_config();
    const auto report = hsm::run_study(config);
    REQUIRE(report.methods.size() == 5);
    for (const auto& m : report.methods) {
        REQUIRE(int(m.reps.size()) == config.reps);
        int ok = 0, with_ci = 0;
        double seconds = 0.0;
        for (const auto& rec : m.reps) {
            if (rec.ok) ++ok;
            if (rec.has_ci) ++with_ci;
            CHECK(rec.seconds >= 0.0);
            seconds += rec.seconds;
            CHECK(std::isfinite(rec.theta_hat.phi));
            CHECK(std::isfinite(rec.theta_hat.sigma2));
        }
        CHECK(m.failures == config.reps - ok);
        // seconds_total accumulates in replicate order, so re-summing the
        // records reproduces it bitwise.
        CHECK(m.seconds_total == seconds);
        if (m.method == hsm::Method::Contrast)
            CHECK(with_ci == ok - m.ci_failures);
        else
            CHECK(with_ci == 0);
        // Aggregates are recomputable from the surviving records.
        std::vector<hsm::Theta> hats;
        for (const auto& rec : m.reps)
            if (rec.ok) hats.push_back(rec.theta_hat);
        if (!hats.empty())
            CHECK(m.mse == hsm::mse(hats, config.theta0));
        if (m.coverage_phi >= 0.0) {
            std::vector<std::array<hsm::Interval, 2>> cis;
            for (const auto& rec : m.reps)
                if (rec.has_ci) cis.push_back({rec.ci_phi, rec.ci_sigma2});
            const auto rate = hsm::coverage(cis, config.theta0);
            CHECK(m.coverage_phi == rate.phi);
            CHECK(m.coverage_sigma2 == rate.sigma2);
        }
    }
}

TEST_CASE("reruns reproduce every estimate bitwise") {
    const auto config = smoke_config();
    const auto a = hsm::run_study(config);
    const auto b = hsm::run_study(config);
    REQUIRE(a.methods.size() == b.methods.size());
    for (std::size_t k = 0; k < a.methods.size(); ++k) {
        REQUIRE(a.methods[k].reps.size() == b.methods[k].reps.size());
        for (std::size_t r = 0; r < a.methods[k].reps.size(); ++r) {
            const auto& ra = a.methods[k].reps[r];
            const auto& rb = b.methods[k].reps[r];
            CHECK(ra.ok == rb.ok);
            CHECK(ra.theta_hat.phi == rb.theta_hat.phi);
            CHECK(ra.theta_hat.sigma2 == rb.theta_hat.sigma2);
            CHECK(ra.has_ci == rb.has_ci);
            if (ra.has_ci && rb.has_ci) {
                CHECK(ra.ci_phi.lo == rb.ci_phi.lo);
                CHECK(ra.ci_phi.hi == rb.ci_phi.hi);
                CHECK(ra.ci_sigma2.lo == rb.ci_sigma2.lo);
                CHECK(ra.ci_sigma2.hi == rb.ci_sigma2.hi);
            }
        }
    }
}

TEST_CASE("removing a method leaves the others' draws untouched") {
    // Replicate r simulates on stream 16r and method m runs on stream
    // 16r + 1 + m, so the bootstrap results cannot depend on whether the
    // other filters ran.
    hsm::StudyConfig lean;
    lean.model = hsm::ModelSpec::ar1(0.1);
    lean.theta0 = {0.7, 0.3};
    lean.n = 100;
    lean.reps = 2;
    lean.seed = 42;
    lean.methods = {hsm::Method::Bootstrap};
    lean.filter.particles = 200;
    hsm::StudyConfig full = lean;
    full.methods = {hsm::Method::Bootstrap, hsm::Method::Apf,
                    hsm::Method::Ksapf};
    const auto a = hsm::run_study(lean);
    const auto b = hsm::run_study(full);
    REQUIRE(a.methods.size() == 1);
    REQUIRE(b.methods.size() == 3);
    REQUIRE(b.methods[0].method == hsm::Method::Bootstrap);
    for (std::size_t r = 0; r < a.methods[0].reps.size(); ++r) {
        CHECK(a.methods[0].reps[r].theta_hat.phi ==
              b.methods[0].reps[r].theta_hat.phi);
        CHECK(a.methods[0].reps[r].theta_hat.sigma2 ==
              b.methods[0].reps[r].theta_hat.sigma2);
    }
}

TEST_CASE("json payload is parseable and faithful") {
    const auto config = smoke_config();
    const auto report = hsm::run_study(config);
    const auto text = hsm::study_to_json(report);
    const auto root = nlohmann::json::parse(text);
    CHECK(root["config"]["model"] == "ar1");
    CHECK(root["config"]["n"] == config.n);
    CHECK(root["config"]["reps"] == config.reps);
    CHECK(root["config"]["seed"] == config.seed);
    REQUIRE(root["methods"].size() == 5);
    const auto& contrast = root["methods"][0];
    CHECK(contrast["method"] == "contrast");
    REQUIRE(contrast["replicates"].size() == std::size_t(config.reps));
    // Doubles survive the serialization round trip exactly.
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
        const auto& mjson = root["methods"][k];
        CHECK(mjson["mse"].get<double>() == report.methods[k].mse);
        for (std::size_t r = 0; r < report.methods[k].reps.size(); ++r) {
            const auto& rec = report.methods[k].reps[r];
            const auto& row = mjson["replicates"][r];
            CHECK(row["phi_hat"].get<double>() == rec.theta_hat.phi);
            CHECK(row["sigma2_hat"].get<double>() == rec.theta_hat.sigma2);
            CHECK(row.contains("ci_phi") == rec.has_ci);
        }
        const bool carries_intervals = report.methods[k].coverage_phi >= 0.0;
        CHECK(mjson.contains("coverage_phi") == carries_intervals);
    }
}

TEST_CASE("replicate csv round trips the estimates") {
    const auto config = smoke_config();
    const auto report = hsm::run_study(config);
    const std::string path = "bench_reps_test.csv";
    hsm::write_replicate_csv(report, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "method,rep,ok,phi_hat,sigma2_hat,seconds,ci_phi_lo,ci_phi_hi,"
          "ci_sigma2_lo,ci_sigma2_hi");
    int rows = 0;
    std::size_t k = 0, r = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        CHECK(field == hsm::method_name(report.methods[k].method));
        std::getline(ss, field, ',');  // rep
        std::getline(ss, field, ',');  // ok
        std::getline(ss, field, ',');
        // precision 17 makes the printed value re-read bitwise equal
        CHECK(std::stod(field) == report.methods[k].reps[r].theta_hat.phi);
        std::getline(ss, field, ',');
        CHECK(std::stod(field) == report.methods[k].reps[r].theta_hat.sigma2);
        if (++r == report.methods[k].reps.size()) {
            r = 0;
            ++k;
        }
    }
    CHECK(rows == 5 * config.reps);
    in.close();
    std::remove(path.c_str());
    CHECK_THROWS_AS(hsm::write_replicate_csv(report, "no_dir/x.csv"),
                    std::runtime_error);
}

TEST_CASE("interval widths shrink along the coverage curve") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    hsm::StudyConfig base;
    const auto curve = hsm::coverage_curve(model, {0.7, 0.3}, {300, 1200}, 25,
                                           0.05, 7, base);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].n == 300);
    CHECK(curve[1].n == 1200);
    for (const auto& point : curve) {
        CHECK(point.ci_failures == 0);
        CHECK(point.rate.phi >= 0.6);
        CHECK(point.rate.phi <= 1.0);
        CHECK(point.rate.sigma2 >= 0.6);
        CHECK(point.rate.sigma2 <= 1.0);
        CHECK(point.mean_width_phi > 0.0);
        CHECK(point.mean_width_sigma2 > 0.0);
    }
    // Quadrupling n should halve the widths; strict decrease is the
    // conservative check.
    CHECK(curve[1].mean_width_phi < curve[0].mean_width_phi);
    CHECK(curve[1].mean_width_sigma2 < curve[0].mean_width_sigma2);
    CHECK_THROWS_AS(hsm::coverage_curve(model, {0.7, 0.3}, {}, 10, 0.05, 7, base),
                    std::invalid_argument);
    // Single-point grids are legal.
    const auto single = hsm::coverage_curve(model, {0.7, 0.3}, {250}, 3, 0.05,
                                            11, base);
    CHECK(single.size() == 1);
    CHECK(single[0].n == 250);
}

}  // TEST_SUITE
