// Contrast-estimator tests.  Every closed form is checked against an
// independent quadrature oracle coded here (plain Simpson sums, no shared
// code with the library's Fourier machinery), and the optimizer is checked
// against the analytic population minimum.
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hsm/contrast.hpp"
#include "hsm/model.hpp"
#include "hsm/rng.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

template <typename F>
double simpson(F f, double a, double b, int intervals) {
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// ||l_theta||^2 by direct x-space integration of |b_phi(x) f_theta(x)|^2,
// f_theta the stationary N(0, gamma^2) density.
double l2_oracle(const hsm::Theta& theta) {
    const double g2 = hsm::stationary_variance(theta);
    auto integrand = [&](double x) {
        const double fx =
            std::exp(-x * x / (2.0 * g2)) / std::sqrt(2.0 * kPi * g2);
        const double lx = theta.phi * x * fx;
        return lx * lx;
    };
    const double span = 12.0 * std::sqrt(g2);
    return simpson(integrand, -span, span, 20000);
}

// u*_{l_theta}(y) for Gaussian noise by direct Fourier inversion:
// (1/2pi) int e^{iyt} l*(-t) / f*_eps(t) dt with
// l*(t) = i phi gamma^2 t e^{-t^2 gamma^2/2}, f*_eps(t) = e^{-sigma_eps2 t^2/2}.
// Only the sine part survives; integrate it on a wide symmetric window.
double u_star_oracle(const hsm::Theta& theta, double sigma_eps2, double y) {
    const double g2 = hsm::stationary_variance(theta);
    auto integrand = [&](double t) {
        return theta.phi * g2 * t * std::sin(y * t) *
               std::exp(-t * t * (g2 - sigma_eps2) / 2.0) / (2.0 * kPi);
    };
    const double span = 14.0 / std::sqrt(g2 - sigma_eps2);
    return simpson(integrand, -span, span, 40000);
}

// Same inversion against the log-chi-square noise law, using the separately
// validated characteristic function; Simpson instead of the library's
// midpoint rule, so node placement and windowing are independent.
double u_star_sv_oracle(const hsm::Theta& theta, double beta, double y) {
    const double g2 = hsm::stationary_variance(theta);
    auto integrand = [&](double t) {
        const std::complex<double> lstar_neg(
            0.0, -theta.phi * g2 * t * std::exp(-g2 * t * t / 2.0));
        const std::complex<double> val = std::exp(std::complex<double>(0.0, y * t)) *
                                         lstar_neg / hsm::f_star_eps_sv(beta, t);
        return val.real() / (2.0 * kPi);
    };
    return simpson(integrand, -14.0, 14.0, 20000);
}

}  // namespace

TEST_SUITE("contrast") {

TEST_CASE("l2 norm closed form against x-space integration") {
    CHECK(hsm::l2_norm_sq({0.0, 0.3}) == 0.0);

    const hsm::Theta theta{0.7, 0.3};
    const double val = hsm::l2_norm_sq(theta);
    CHECK(val == doctest::Approx(0.05301).epsilon(2e-4));
    CHECK(std::abs(val - l2_oracle(theta)) < 1e-5);

    const hsm::Theta other{0.4, 1.1};
    CHECK(std::abs(hsm::l2_norm_sq(other) - l2_oracle(other)) < 1e-5);
}

TEST_CASE("l2 norm scales as phi^2 at fixed gamma") {
    // Fix gamma^2 = 1 by setting sigma2 = 1 - phi^2.
    const double lo = hsm::l2_norm_sq({0.3, 1.0 - 0.09});
    const double hi = hsm::l2_norm_sq({0.6, 1.0 - 0.36});
    CHECK(hi == doctest::Approx(4.0 * lo).epsilon(1e-12));
}

TEST_CASE("gaussian deconvolution kernel closed form") {
    const hsm::Theta theta{0.7, 0.3};
    CHECK(hsm::u_star_gaussian(theta, 0.1, 0.0) == 0.0);
    CHECK(hsm::u_star_gaussian({0.0, 0.3}, 0.1, 1.7) == 0.0);

    const double val = hsm::u_star_gaussian(theta, 0.1, 1.0);
    CHECK(val == doctest::Approx(0.17291).epsilon(6e-4));
    CHECK(std::abs(val - u_star_oracle(theta, 0.1, 1.0)) < 1e-6);
}

TEST_CASE("gaussian kernel is odd and matches the oracle on a grid") {
    hsm::Rng rng(21, 0);
    const hsm::ParamBox box;
    for (int k = 0; k < 20; ++k) {
        const hsm::Theta theta{-0.9 + 1.8 * rng.uniform(),
                               0.15 + 2.0 * rng.uniform()};
        const double y = -3.0 + 6.0 * rng.uniform();
        REQUIRE(box.contains(theta));
        const double plus = hsm::u_star_gaussian(theta, 0.1, y);
        const double minus = hsm::u_star_gaussian(theta, 0.1, -y);
        CHECK(plus == doctest::Approx(-minus).epsilon(1e-12));
        CHECK(std::abs(plus - u_star_oracle(theta, 0.1, y)) < 1e-6);
    }
}

TEST_CASE("gaussian kernel rejects noise variance above the state variance") {
    // gamma^2 = 0.3/0.51 = 0.588; sigma_eps2 beyond that is out of domain.
    CHECK_THROWS_AS(
        (void)hsm::u_star_gaussian({0.7, 0.3}, 0.6, 1.0), std::domain_error);
}

TEST_CASE("sv noise characteristic function") {
    CHECK(std::abs(hsm::f_star_eps_sv(1.0, 0.0) -
                   std::complex<double>(1.0, 0.0)) < 1e-14);
    // |Gamma(1/2+it)|^2 = pi/cosh(pi t) gives |f*|(y) = cosh(pi beta y)^{-1/2}.
    for (double y : {0.5, 1.0, 5.0}) {
        const double mod = std::abs(hsm::f_star_eps_sv(1.0, y));
        CHECK(std::abs(mod - 1.0 / std::sqrt(std::cosh(kPi * y))) < 1e-10);
    }
    for (double y : {0.3, 1.3, 4.2}) {
        const auto plus = hsm::f_star_eps_sv(0.7, y);
        const auto minus = hsm::f_star_eps_sv(0.7, -y);
        CHECK(std::abs(minus - std::conj(plus)) < 1e-12);
    }
}

TEST_CASE("generic quadrature reproduces the gaussian closed form") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    const hsm::Theta theta{0.7, 0.3};
    const auto kernel = hsm::deconv_kernel_l(theta);
    const std::vector<double> ys{-2.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.5};
    double resid = 0.0;
    const auto vals = hsm::u_star_quadrature(kernel, model, ys, {}, &resid);
    REQUIRE(vals.size() == ys.size());
    CHECK(resid < 1e-10);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double exact = hsm::u_star_gaussian(theta, 0.1, ys[i]);
        CHECK(std::abs(vals[i] - exact) < 1e-8 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("sv kernel transform against the independent inversion oracle") {
    const double beta = hsm::ModelSpec::default_sv_beta();
    const hsm::Theta theta{0.7, 0.3};
    CHECK(hsm::u_star_sv({0.0, 0.3}, beta, 1.0) == 0.0);

    // The log-chi-square noise is skewed, so 1/f*_eps carries an odd
    // imaginary part and u* is not an odd function: it does not vanish at
    // the origin the way the Gaussian-noise kernel does.
    const double at0 = hsm::u_star_sv(theta, beta, 0.0);
    CHECK(at0 == doctest::Approx(u_star_sv_oracle(theta, beta, 0.0))
                     .epsilon(1e-8));
    CHECK(at0 < -0.01);

    for (double y : {-1.0, 0.5, 1.0, 2.5}) {
        const double lib = hsm::u_star_sv(theta, beta, y);
        const double ora = u_star_sv_oracle(theta, beta, y);
        CHECK(std::abs(lib - ora) < 1e-8 * std::max(1.0, std::abs(ora)));
    }
    // Asymmetry is material, not round-off.
    CHECK(std::abs(hsm::u_star_sv(theta, beta, 1.0) +
                   hsm::u_star_sv(theta, beta, -1.0)) > 0.01);
}

TEST_CASE("sv kernel transform: two-rule cross-validation") {
    const double beta = hsm::ModelSpec::default_sv_beta();
    const hsm::Theta theta{0.7, 0.3};

    // Same value from a finer rule on a hand-picked window.
    const double v1 = hsm::u_star_sv(theta, beta, 1.0);
    hsm::QuadratureConfig alt;
    alt.nodes = 6144;
    alt.halfwidth = 18.0;
    const double v2 = hsm::u_star_sv(theta, beta, 1.0, alt);
    CHECK(std::abs(v1 - v2) < 1e-6 * std::abs(v1));

    // Node-halving convergence at the default window.
    hsm::QuadratureConfig dense;
    dense.nodes = 4096;
    const double v3 = hsm::u_star_sv(theta, beta, 1.0, dense);
    CHECK(std::abs(v1 - v3) < 1e-6 * std::abs(v1));
}

TEST_CASE("quadrature error paths") {
    hsm::QuadratureConfig bad;
    bad.nodes = 30;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.nodes = 101;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    // A window far too narrow for the SV integrand's tail bound.
    hsm::QuadratureConfig narrow;
    narrow.halfwidth = 0.4;
    CHECK_THROWS_AS(
        (void)hsm::u_star_sv({0.7, 0.3}, hsm::ModelSpec::default_sv_beta(), 1.0,
                             narrow),
        hsm::QuadratureError);
}

TEST_CASE("objective on degenerate data") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    const std::vector<double> zeros(50, 0.0);
    const hsm::Theta theta{0.7, 0.3};
    CHECK(hsm::objective(theta, zeros, model) ==
          doctest::Approx(hsm::l2_norm_sq(theta)).epsilon(1e-12));

    hsm::Rng rng(3, 0);
    std::vector<double> z(50);
    for (double& v : z) v = rng.normal();
    CHECK(hsm::objective({0.0, 0.5}, z, model) == 0.0);
}

TEST_CASE("closed form and generic quadrature agree on random data") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    hsm::Rng rng(22, 0);
    std::vector<double> z(50);
    for (double& v : z) v = rng.normal() * 0.8;
    const hsm::ContrastObjective obj(model, z);
    for (int k = 0; k < 10; ++k) {
        const hsm::Theta theta{-0.9 + 1.8 * rng.uniform(),
                               0.15 + 2.0 * rng.uniform()};
        const double closed = obj(theta);
        const double quad = obj.quadrature_value(theta);
        CHECK(std::abs(closed - quad) <
              1e-6 * std::max(1.0, std::abs(closed)));
    }
}

TEST_CASE("cached sv objective equals the one-shot evaluation") {
    const auto model = hsm::ModelSpec::log_sv();
    hsm::Rng rng(23, 0);
    const auto traj = hsm::simulate(model, {0.7, 0.3}, 200, rng);
    const hsm::ContrastObjective obj(model, traj.z);
    for (const auto& theta :
         {hsm::Theta{0.7, 0.3}, hsm::Theta{0.4, 0.8}, hsm::Theta{-0.5, 1.5}}) {
        const double cached = obj(theta);
        const double oneshot = hsm::objective(theta, traj.z, model);
        CHECK(std::abs(cached - oneshot) <
              1e-9 * std::max(1.0, std::abs(oneshot)));
    }
}

TEST_CASE("population contrast anchors") {
    const hsm::Theta theta0{0.7, 0.3};
    CHECK(hsm::population_contrast_ar1(theta0, theta0) ==
          doctest::Approx(-hsm::l2_norm_sq(theta0)).epsilon(1e-12));
    CHECK(hsm::population_contrast_ar1(theta0, theta0) ==
          doctest::Approx(-0.05301).epsilon(2e-4));
    CHECK(hsm::population_contrast_ar1({0.0, 0.4}, theta0) == 0.0);
}

TEST_CASE("population contrast is stationary and minimal at the truth") {
    const hsm::Theta theta0{0.7, 0.3};
    const double f0 = hsm::population_contrast_ar1(theta0, theta0);
    // Central finite differences.
    const double hphi = 1e-5, hs2 = 1e-5;
    const double dphi = (hsm::population_contrast_ar1({0.7 + hphi, 0.3}, theta0) -
                         hsm::population_contrast_ar1({0.7 - hphi, 0.3}, theta0)) /
                        (2.0 * hphi);
    const double ds2 = (hsm::population_contrast_ar1({0.7, 0.3 + hs2}, theta0) -
                        hsm::population_contrast_ar1({0.7, 0.3 - hs2}, theta0)) /
                       (2.0 * hs2);
    CHECK(std::abs(dphi) < 1e-6);
    CHECK(std::abs(ds2) < 1e-6);

    for (double phi = -0.9; phi <= 0.91; phi += 0.2)
        for (double s2 = 0.05; s2 <= 2.9; s2 += 0.4)
            CHECK(hsm::population_contrast_ar1({phi, s2}, theta0) >=
                  f0 - 1e-12);
}

TEST_CASE("empirical argmin lands near the truth on a grid") {
    const hsm::Theta theta0{0.7, 0.3};
    const auto model = hsm::ModelSpec::ar1(0.1);
    hsm::Rng rng(24, 0);
    const auto traj = hsm::simulate(model, theta0, 10000, rng);
    const hsm::ContrastObjective obj(model, traj.z);
    // 0.05-spaced grid around the truth; argmin must sit within one step.
    double best = 1e300;
    hsm::Theta arg{};
    for (double phi = 0.5; phi <= 0.9001; phi += 0.05)
        for (double s2 = 0.1; s2 <= 0.5001; s2 += 0.05) {
            const double v = obj({phi, s2});
            if (v < best) {
                best = v;
                arg = {phi, s2};
            }
        }
    CHECK(std::abs(arg.phi - theta0.phi) <= 0.05 + 1e-9);
    CHECK(std::abs(arg.sigma2 - theta0.sigma2) <= 0.05 + 1e-9);
}

TEST_CASE("estimator recovers the truth across replicates") {
    const hsm::Theta theta0{0.7, 0.3};
    const auto model = hsm::ModelSpec::ar1(0.1);
    int hits = 0;
    for (int r = 0; r < 100; ++r) {
        hsm::Rng rng(500, static_cast<std::uint64_t>(r));
        const auto traj = hsm::simulate(model, theta0, 1000, rng);
        const auto fit = hsm::estimate_contrast(traj.z, model);
        hits += std::abs(fit.theta_hat.phi - 0.7) <= 0.15 &&
                std::abs(fit.theta_hat.sigma2 - 0.3) <= 0.15;

        // Objective at the estimate never exceeds the value at the truth.
        const hsm::ContrastObjective obj(model, traj.z);
        CHECK(fit.objective <= obj(theta0) + 1e-12);
    }
    // The hit rate over 1000 independent replicates is 96.9%; a 100-draw
    // batch at p = 0.95 has binomial sd 2.2, so accept down to 95 - 3 sd.
    CHECK(hits >= 89);
}

TEST_CASE("all-zero data drives phi to zero") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    const std::vector<double> zeros(100, 0.0);
    const auto fit = hsm::estimate_contrast(zeros, model);
    CHECK(std::abs(fit.theta_hat.phi) < 1e-3);
}

TEST_CASE("estimate is deterministic") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    hsm::Rng rng(25, 0);
    const auto traj = hsm::simulate(model, {0.7, 0.3}, 500, rng);
    const auto a = hsm::estimate_contrast(traj.z, model);
    const auto b = hsm::estimate_contrast(traj.z, model);
    CHECK(a.theta_hat.phi == b.theta_hat.phi);
    CHECK(a.theta_hat.sigma2 == b.theta_hat.sigma2);
    CHECK(a.objective == b.objective);
}

TEST_CASE("objective rejects undersized data") {
    const auto model = hsm::ModelSpec::ar1(0.1);
    CHECK_THROWS_AS(hsm::ContrastObjective(model, {1.0}),
                    std::invalid_argument);
}

}  // TEST_SUITE("contrast")
