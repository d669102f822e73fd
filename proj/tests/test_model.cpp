// Model-layer tests: stationary moments, simulator laws against their
// analytic first and second moments, the box projection, and the exact
// observation densities used by the particle filters.
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hsm/model.hpp"
#include "hsm/special.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Standard error of the mean of a's entries estimated by batch means, which
// stays honest when entries are serially correlated (sample paths are).
double batch_se(const std::vector<double>& a, int batches = 200) {
    const std::size_t len = a.size() / batches;
    std::vector<double> bm(batches);
    for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += a[b * len + i];
        bm[b] = s / static_cast<double>(len);
    }
    return std::sqrt(var_of(bm) / batches);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("stationary variance closed form") {
    CHECK(hsm::stationary_variance({0.0, 0.3}) ==
          doctest::Approx(0.3).epsilon(1e-15));
    CHECK(hsm::stationary_variance({0.7, 0.3}) ==
          doctest::Approx(0.3 / 0.51).epsilon(1e-12));
    // Near-unit-root: sigma2 / (1 - 0.99^2) = 1e-6 / 0.0199.
    CHECK(hsm::stationary_variance({0.99, 1e-6}) ==
          doctest::Approx(5.02512562814e-5).epsilon(1e-9));
    CHECK_THROWS_AS((void)hsm::stationary_variance({1.0, 0.3}),
                    std::domain_error);
    CHECK_THROWS_AS((void)hsm::stationary_variance({-1.2, 0.3}),
                    std::domain_error);
}

TEST_CASE("box projection clamps coordinatewise and is idempotent") {
    const hsm::ParamBox box;  // [-0.99, 0.99] x [0.01, 3]
    const hsm::Theta inside{0.5, 0.2};
    const auto p = hsm::project_into_box(inside, box);
    CHECK(p.phi == inside.phi);
    CHECK(p.sigma2 == inside.sigma2);

    const auto q = hsm::project_into_box({1.7, -4.0}, box);
    CHECK(q.phi == box.phi_hi);
    CHECK(q.sigma2 == box.s2_lo);

    const auto r = hsm::project_into_box({-3.0, 100.0}, box);
    CHECK(r.phi == box.phi_lo);
    CHECK(r.sigma2 == box.s2_hi);

    const auto rr = hsm::project_into_box(r, box);
    CHECK(rr.phi == r.phi);
    CHECK(rr.sigma2 == r.sigma2);
}

TEST_CASE("param box validation") {
    hsm::ParamBox ok;
    CHECK_NOTHROW(ok.validate());
    hsm::ParamBox bad_phi{-1.0, 0.9, 0.1, 0.4};
    CHECK_THROWS_AS(bad_phi.validate(), std::invalid_argument);
    hsm::ParamBox bad_s2{0.5, 0.9, 0.0, 0.4};
    CHECK_THROWS_AS(bad_s2.validate(), std::invalid_argument);
    // Degenerate point boxes are allowed (point-mass particle priors).
    hsm::ParamBox point{0.7, 0.7, 0.3, 0.3};
    CHECK_NOTHROW(point.validate());
}

TEST_CASE("ar1 sample variance matches the stationary law") {
    const hsm::Theta theta{0.7, 0.3};
    hsm::Rng rng(101, 0);
    const auto traj = hsm::simulate_ar1(theta, 100000, 0.0, rng);
    REQUIRE(traj.n() == 100000);
    // With no observation noise Z = X, Var = gamma^2 = 0.588235...
    std::vector<double> sq(traj.z.size());
    const double zbar = mean_of(traj.z);
    for (std::size_t i = 0; i < traj.z.size(); ++i)
        sq[i] = (traj.z[i] - zbar) * (traj.z[i] - zbar);
    const double gamma2 = hsm::stationary_variance(theta);
    CHECK(std::abs(mean_of(sq) - gamma2) < 3.0 * batch_se(sq));
}

TEST_CASE("observation noise adds to the observed variance") {
    const hsm::Theta theta{0.7, 0.3};
    hsm::Rng rng(102, 0);
    const auto traj = hsm::simulate_ar1(theta, 100000, 0.1, rng);
    const double target = hsm::stationary_variance(theta) + 0.1;
    std::vector<double> sq(traj.z.size());
    const double zbar = mean_of(traj.z);
    for (std::size_t i = 0; i < traj.z.size(); ++i)
        sq[i] = (traj.z[i] - zbar) * (traj.z[i] - zbar);
    CHECK(std::abs(mean_of(sq) - target) < 3.0 * batch_se(sq));
}

TEST_CASE("independent case has no serial correlation") {
    hsm::Rng rng(103, 0);
    const auto traj = hsm::simulate_ar1({0.0, 1.0}, 100000, 0.0, rng);
    const double zbar = mean_of(traj.z);
    std::vector<double> prod(traj.n() - 1);
    for (std::size_t i = 0; i + 1 < traj.n(); ++i)
        prod[i] = (traj.z[i] - zbar) * (traj.z[i + 1] - zbar);
    CHECK(std::abs(mean_of(prod)) < 3.0 * batch_se(prod));
}

TEST_CASE("lag-1 autocovariance of observations equals phi gamma^2") {
    // Observation noise is independent across time, so it drops out of the
    // lag-1 covariance: Cov(Z_i, Z_{i+1}) = phi gamma^2.
    const hsm::Theta theta{0.7, 0.3};
    hsm::Rng rng(104, 0);
    const auto traj = hsm::simulate_ar1(theta, 100000, 0.1, rng);
    const double zbar = mean_of(traj.z);
    std::vector<double> prod(traj.n() - 1);
    for (std::size_t i = 0; i + 1 < traj.n(); ++i)
        prod[i] = (traj.z[i] - zbar) * (traj.z[i + 1] - zbar);
    const double target = theta.phi * hsm::stationary_variance(theta);
    CHECK(std::abs(mean_of(prod) - target) < 3.0 * batch_se(prod));
}

TEST_CASE("simulation is deterministic in the seed") {
    hsm::Rng a(7, 0), b(7, 0);
    const auto ta = hsm::simulate_ar1({0.5, 0.2}, 1000, 0.1, a);
    const auto tb = hsm::simulate_ar1({0.5, 0.2}, 1000, 0.1, b);
    CHECK(ta.x == tb.x);
    CHECK(ta.z == tb.z);

    hsm::Rng c(7, 0), d(8, 0);
    const auto tc = hsm::simulate_ar1({0.5, 0.2}, 1000, 0.1, c);
    const auto td = hsm::simulate_ar1({0.5, 0.2}, 1000, 0.1, d);
    CHECK(tc.z != td.z);
}

TEST_CASE("sv transform identity links y and z") {
    const double beta = hsm::ModelSpec::default_sv_beta();
    hsm::Rng rng(105, 0);
    const auto traj = hsm::simulate_sv({0.7, 0.3}, 5000, beta, rng);
    REQUIRE(traj.y.size() == traj.z.size());
    // Z = log Y^2 - beta E[log xi^2] by construction.
    for (std::size_t i = 0; i < traj.n(); ++i) {
        const double z = std::log(traj.y[i] * traj.y[i]) -
                         beta * hsm::kLogChisq1Mean;
        CHECK(std::abs(z - traj.z[i]) < 1e-10);
    }
}

TEST_CASE("sv noise variance tracks beta^2 pi^2 / 2") {
    // eps = Z - X is centered with Var = beta^2 pi^2 / 2; the benchmark
    // beta = 1/(sqrt(5) pi) gives exactly 0.1.
    hsm::Rng rng(106, 0);
    const std::size_t n = 1000000;

    const double beta_bench = hsm::ModelSpec::default_sv_beta();
    const auto tb = hsm::simulate_sv({0.7, 0.3}, n, beta_bench, rng);
    std::vector<double> eps(n);
    for (std::size_t i = 0; i < n; ++i) eps[i] = tb.z[i] - tb.x[i];
    const double se_mean = std::sqrt(var_of(eps) / n);
    CHECK(std::abs(mean_of(eps)) < 3.0 * se_mean);
    std::vector<double> eps2(n);
    for (std::size_t i = 0; i < n; ++i) eps2[i] = eps[i] * eps[i];
    const double se_var = std::sqrt(var_of(eps2) / n);
    CHECK(std::abs(mean_of(eps2) - 0.1) < 3.0 * se_var);

    hsm::Rng rng2(107, 0);
    const auto t1 = hsm::simulate_sv({0.7, 0.3}, n, 1.0, rng2);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = t1.z[i] - t1.x[i];
        eps2[i] = e * e;
    }
    const double se1 = std::sqrt(var_of(eps2) / n);
    CHECK(std::abs(mean_of(eps2) - kPi * kPi / 2.0) < 3.0 * se1);
}

TEST_CASE("sv and ar1 observations share first and second moments") {
    // The benchmark SV calibration matches the AR(1) noise variance, so the
    // two observation series agree in mean and variance (not in law).
    const hsm::Theta theta{0.7, 0.3};
    hsm::Rng ra(108, 0), rs(108, 1);
    const std::size_t n = 100000;
    const auto ta = hsm::simulate_ar1(theta, n, 0.1, ra);
    const auto ts =
        hsm::simulate_sv(theta, n, hsm::ModelSpec::default_sv_beta(), rs);

    const double ma = mean_of(ta.z), ms = mean_of(ts.z);
    std::vector<double> sqa(n), sqs(n);
    for (std::size_t i = 0; i < n; ++i) {
        sqa[i] = (ta.z[i] - ma) * (ta.z[i] - ma);
        sqs[i] = (ts.z[i] - ms) * (ts.z[i] - ms);
    }
    const double se = std::hypot(batch_se(sqa), batch_se(sqs));
    CHECK(std::abs(mean_of(sqa) - mean_of(sqs)) < 3.0 * se);

    const double se_m =
        std::hypot(batch_se(ta.z), batch_se(ts.z));
    CHECK(std::abs(ma - ms) < 3.0 * se_m);
}

TEST_CASE("gaussian observation log-density") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    // N(x, 0.1) log-density at z.
    const double z = 0.4, x = 0.1;
    const double exact =
        -0.5 * std::log(2.0 * kPi * 0.1) - (z - x) * (z - x) / (2.0 * 0.1);
    CHECK(model.obs_logpdf(z, x) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("sv observation density is a proper, centered law") {
    const auto model = hsm::ModelSpec::log_sv();
    const double x = 0.3;
    // Trapezoid over z: the density of x + beta(log xi^2 - E) integrates to
    // one, has mean x, and variance beta^2 pi^2/2 = 0.1.
    const double lo = x - 12.0, hi = x + 4.0;
    const int nn = 200000;
    const double h = (hi - lo) / nn;
    double mass = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i <= nn; ++i) {
        const double z = lo + i * h;
        double w = std::exp(model.obs_logpdf(z, x));
        if (i == 0 || i == nn) w *= 0.5;
        mass += w;
        m1 += w * z;
        m2 += w * (z - x) * (z - x);
    }
    mass *= h;
    m1 *= h;
    m2 *= h;
    CHECK(std::abs(mass - 1.0) < 1e-6);
    CHECK(std::abs(m1 - x) < 1e-5);
    CHECK(std::abs(m2 - 0.1) < 1e-5);
}

TEST_CASE("model validation rejects bad specs") {
    auto m = hsm::ModelSpec::ar1();
    CHECK_NOTHROW(m.validate());
    m.sigma_eps2 = -0.1;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);

    auto sv = hsm::ModelSpec::log_sv();
    CHECK_NOTHROW(sv.validate());
    sv.beta = 0.0;
    CHECK_THROWS_AS(sv.validate(), std::invalid_argument);

    hsm::Rng rng(1, 0);
    CHECK_THROWS_AS((void)hsm::simulate_ar1({0.5, -1.0}, 10, 0.1, rng),
                    std::invalid_argument);
}

TEST_CASE("simulate dispatches on model kind") {
    hsm::Rng r1(9, 0), r2(9, 0);
    const auto via_spec =
        hsm::simulate(hsm::ModelSpec::ar1(0.1), {0.7, 0.3}, 100, r1);
    const auto direct = hsm::simulate_ar1({0.7, 0.3}, 100, 0.1, r2);
    CHECK(via_spec.z == direct.z);
    CHECK(via_spec.y.empty());

    hsm::Rng r3(9, 0);
    const auto sv = hsm::simulate(hsm::ModelSpec::log_sv(), {0.7, 0.3}, 100, r3);
    CHECK(sv.y.size() == 100);
}

}  // TEST_SUITE("model")
