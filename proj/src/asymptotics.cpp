#include "hsm/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

#include "hsm/special.hpp"

namespace hsm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;

// Polynomial coefficients of grad l: d l/d theta_k = (p1 x + p3 x^3) g_theta(x)
// with g_theta the stationary N(0, gamma^2) density.
struct GradPoly {
    double a1, a2;  // phi component
    double b1, b2;  // sigma2 component
};

GradPoly grad_poly(const Theta& theta) {
    const double gamma2 = stationary_variance(theta);
    const double omp = 1.0 - theta.phi * theta.phi;
    GradPoly p;
    p.a1 = (1.0 - 2.0 * theta.phi * theta.phi) / omp;
    p.a2 = theta.phi * theta.phi / (omp * gamma2);
    p.b1 = -theta.phi / (2.0 * omp * gamma2);
    p.b2 = theta.phi / (2.0 * omp * gamma2 * gamma2);
    return p;
}

// E[X_1^p X_j^q e^{-(X_1^2+X_j^2)/(2 gamma^2)}] for the bivariate normal pair
// with common variance gamma^2 and correlation r, via completing the square:
// the tilted pair is centered normal with variance vd and covariance cd, and
// the exact moments follow from Isserlis' theorem.  Extended precision keeps
// the deviation from the r = 0 limit meaningful down to ~1e-2 * r^2.
struct TiltedMoments {
    long double m11, m13, m15, m22, m24, m33, m35, m44;
};

TiltedMoments tilted_moments(long double gamma2, long double r) {
    const long double r2 = r * r;
    const long double d = (2.0L - r2) * (2.0L - r2) - r2;
    const long double common = gamma2 * (1.0L - r2) / d;
    const long double vd = common * (2.0L - r2);
    const long double cd = common * r;
    const long double k = std::sqrt((1.0L - r2) / d);
    TiltedMoments m;
    m.m11 = k * cd;
    m.m13 = k * 3.0L * vd * cd;
    m.m15 = k * 15.0L * vd * vd * cd;
    m.m22 = k * (vd * vd + 2.0L * cd * cd);
    m.m24 = k * (3.0L * vd * vd * vd + 12.0L * cd * cd * vd);
    m.m33 = k * (9.0L * vd * vd * cd + 6.0L * cd * cd * cd);
    m.m35 = k * (45.0L * vd * vd * vd * cd + 60.0L * vd * cd * cd * cd);
    m.m44 = k * (9.0L * vd * vd * vd * vd + 72.0L * vd * vd * cd * cd +
                 24.0L * cd * cd * cd * cd);
    return m;
}

// C~ entries from the tilted moments: each entry is
// phi^2/(2 pi gamma^2) * sum of polynomial cross terms.
struct LongMat2 {
    long double a11, a12, a22;
};

LongMat2 c_tilde_long(const Theta& theta, const TiltedMoments& m) {
    const GradPoly p = grad_poly(theta);
    const long double gamma2 = stationary_variance(theta);
    const long double pref =
        (long double)(theta.phi) * theta.phi / (2.0L * kPi * gamma2);
    LongMat2 c;
    c.a11 = pref * (p.a1 * p.a1 * m.m22 + 2.0L * p.a1 * p.a2 * m.m24 +
                    p.a2 * p.a2 * m.m44);
    c.a12 = pref * (p.a1 * p.b1 * m.m22 +
                    ((long double)p.a1 * p.b2 + (long double)p.a2 * p.b1) * m.m24 +
                    p.a2 * p.b2 * m.m44);
    c.a22 = pref * (p.b1 * p.b1 * m.m22 + 2.0L * p.b1 * p.b2 * m.m24 +
                    p.b2 * p.b2 * m.m44);
    return c;
}

struct LongFull2 {
    long double a11, a12, a21, a22;
};

// E[X_j^2 (d_a l)(X_1) (d_b l)(X_j)] over the correlated state pair: the
// X_j^2 factor attaches to the second coordinate, so the matrix is not
// symmetric.  Row index a runs over (phi, sigma2) on X_1.
LongFull2 cross_t2_long(const Theta& theta, const TiltedMoments& m) {
    const GradPoly p = grad_poly(theta);
    const long double gamma2 = stationary_variance(theta);
    const long double pref = 1.0L / (2.0L * kPi * gamma2);
    auto entry = [&](long double ca1, long double ca2, long double cb1,
                     long double cb2) {
        // (ca1 S + ca2 S^3)(cb1 T^3 + cb2 T^5)
        return pref * (ca1 * cb1 * m.m13 + ca1 * cb2 * m.m15 +
                       ca2 * cb1 * m.m33 + ca2 * cb2 * m.m35);
    };
    return {entry(p.a1, p.a2, p.a1, p.a2), entry(p.a1, p.a2, p.b1, p.b2),
            entry(p.b1, p.b2, p.a1, p.a2), entry(p.b1, p.b2, p.b1, p.b2)};
}

// E[X_1 X_j (d_a l)(X_1) (d_b l)(X_j)]; equals c_tilde / phi^2 but is kept
// phi-free so the phi = 0 limit stays exact.
LongMat2 cross_st_long(const Theta& theta, const TiltedMoments& m) {
    const GradPoly p = grad_poly(theta);
    const long double gamma2 = stationary_variance(theta);
    const long double pref = 1.0L / (2.0L * kPi * gamma2);
    LongMat2 c;
    c.a11 = pref * (p.a1 * p.a1 * m.m22 + 2.0L * p.a1 * p.a2 * m.m24 +
                    p.a2 * p.a2 * m.m44);
    c.a12 = pref * (p.a1 * p.b1 * m.m22 +
                    ((long double)p.a1 * p.b2 + (long double)p.a2 * p.b1) * m.m24 +
                    p.a2 * p.b2 * m.m44);
    c.a22 = pref * (p.b1 * p.b1 * m.m22 + 2.0L * p.b1 * p.b2 * m.m24 +
                    p.b2 * p.b2 * m.m44);
    return c;
}

// E[X_j (d_a l)(X_1) (d_b l)'(X_j)] with the x-derivative on the second
// factor: (d_b l)'(t) = (cb1 + (3 cb2 - cb1/gamma^2) t^2 - (cb2/gamma^2) t^4)
// times the stationary density.
LongFull2 cross_deriv_long(const Theta& theta, const TiltedMoments& m) {
    const GradPoly p = grad_poly(theta);
    const long double gamma2 = stationary_variance(theta);
    const long double pref = 1.0L / (2.0L * kPi * gamma2);
    auto entry = [&](long double ca1, long double ca2, long double cb1,
                     long double cb2) {
        const long double q0 = cb1;
        const long double q2 = 3.0L * cb2 - cb1 / gamma2;
        const long double q4 = -cb2 / gamma2;
        // (ca1 S + ca2 S^3)(q0 T + q2 T^3 + q4 T^5); E[S^3 T] = E[S T^3]
        // for the equal-variance pair, so m13 serves both cross terms.
        return pref * (ca1 * q0 * m.m11 + ca1 * q2 * m.m13 + ca1 * q4 * m.m15 +
                       ca2 * q0 * m.m13 + ca2 * q2 * m.m33 + ca2 * q4 * m.m35);
    };
    return {entry(p.a1, p.a2, p.a1, p.a2), entry(p.a1, p.a2, p.b1, p.b2),
            entry(p.b1, p.b2, p.a1, p.a2), entry(p.b1, p.b2, p.b1, p.b2)};
}

Mat2 sym(double a11, double a12, double a22) { return {a11, a12, a12, a22}; }

}  // namespace

Vec2 grad_l2_norm_sq(const Theta& theta) {
    const double gamma2 = stationary_variance(theta);
    const double gamma = std::sqrt(gamma2);
    const double omp = 1.0 - theta.phi * theta.phi;
    return {theta.phi * gamma * (2.0 - theta.phi * theta.phi) /
                (4.0 * kSqrtPi * omp),
            theta.phi * theta.phi / (8.0 * kSqrtPi * gamma * omp)};
}

Mat2 hessian_V(const Theta& theta) {
    const double gamma = std::sqrt(stationary_variance(theta));
    const double phi = theta.phi;
    const double phi2 = phi * phi;
    const double omp = 1.0 - phi2;
    const double pref = 1.0 / (8.0 * kSqrtPi * omp * omp);
    const double v11 = pref * gamma * (7.0 * phi2 * phi2 - 4.0 * phi2 + 4.0);
    const double v12 = pref *
                       (-5.0 * phi2 * phi2 * phi + 3.0 * phi2 * phi + 2.0 * phi) /
                       (2.0 * gamma * omp);
    const double v22 = pref * 7.0 * phi2 / (4.0 * gamma * gamma * gamma);
    return sym(v11, v12, v22);
}

Mat2 p1_matrix(const Theta& theta) {
    const Vec2 g = grad_l2_norm_sq(theta);
    return Mat2::outer(g, g) * 0.25;
}

Mat2 p2_matrix_ar1(const Theta& theta, double sigma_eps2) {
    const double gamma2 = stationary_variance(theta);
    const double c = gamma2 - sigma_eps2;
    if (!(c > 0.0))
        throw std::domain_error("p2_matrix_ar1: requires gamma^2 > sigma_eps2");

    // u*_{grad l}(z) = (Psi1 z + Psi2 z^3) e^{-z^2/(2c)} per coordinate.
    const double v = 1.0 / c;
    const double cbar = 1.0 / std::sqrt(2.0 * kPi * c);
    const double omp = 1.0 - theta.phi * theta.phi;
    const double a1c = gamma2 * (1.0 + theta.phi * theta.phi) / omp;
    const double a2c = gamma2 * gamma2 * theta.phi * theta.phi / omp;
    const double b1c = theta.phi / omp;
    const double b2c = gamma2 * theta.phi / (2.0 * omp);
    const double psi1_phi = cbar * (a1c * v - 3.0 * a2c * v * v);
    const double psi2_phi = cbar * a2c * v * v * v;
    const double psi1_s2 = cbar * (b1c * v - 3.0 * b2c * v * v);
    const double psi2_s2 = cbar * b2c * v * v * v;

    // E[Z_2^2 Z_1^{2k} e^{-Z_1^2/c}]: condition Z_2 on Z_1, tilt the Z_1
    // marginal to variance w with 1/w = 2/c + 1/s, and use normal moments.
    const double s = gamma2 + sigma_eps2;
    const double rho = theta.phi * gamma2;            // Cov(Z_1, Z_2)
    const double v2 = (s * s - rho * rho) / s;        // Var(Z_2 | Z_1)
    const double slope2 = (rho / s) * (rho / s);      // squared cond. mean slope
    const double w = 1.0 / (2.0 / c + 1.0 / s);
    const double scale = std::sqrt(w / s);
    const double w2 = w * w;
    const double e1 = scale * (v2 * w + 3.0 * slope2 * w2);
    const double e2 = scale * (3.0 * v2 * w2 + 15.0 * slope2 * w2 * w);
    const double e3 = scale * (15.0 * v2 * w2 * w + 105.0 * slope2 * w2 * w2);

    auto entry = [&](double p1a, double p2a, double p1b, double p2b) {
        return p1a * p1b * e1 + (p1a * p2b + p2a * p1b) * e2 + p2a * p2b * e3;
    };
    return sym(entry(psi1_phi, psi2_phi, psi1_phi, psi2_phi),
               entry(psi1_phi, psi2_phi, psi1_s2, psi2_s2),
               entry(psi1_s2, psi2_s2, psi1_s2, psi2_s2));
}

Mat2 p2_hat_plugin(const ModelSpec& model, const std::vector<double>& z,
                   const Theta& theta, const QuadratureConfig& q) {
    if (z.size() < 2)
        throw std::invalid_argument("p2_hat_plugin: need at least 2 observations");
    const std::span<const double> pts(z.data(), z.size() - 1);
    const std::vector<double> up =
        u_star_quadrature(deconv_kernel_dphi(theta), model, pts, q);
    const std::vector<double> us =
        u_star_quadrature(deconv_kernel_dsigma2(theta), model, pts, q);
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const double z2 = z[i + 1] * z[i + 1];
        s11 += z2 * up[i] * up[i];
        s12 += z2 * up[i] * us[i];
        s22 += z2 * us[i] * us[i];
    }
    const double n = double(z.size() - 1);
    return sym(s11 / n, s12 / n, s22 / n);
}

Mat2 c_tilde(const Theta& theta, int j) {
    if (j < 2) throw std::invalid_argument("c_tilde: requires j >= 2");
    const long double r = std::pow((long double)theta.phi, j - 1);
    const LongMat2 c =
        c_tilde_long(theta, tilted_moments(stationary_variance(theta), r));
    return sym(double(c.a11), double(c.a12), double(c.a22));
}

Mat2 omega_lag(const Theta& theta, int j) {
    // The moment gradient at the truth is g_i = grad||l||^2 - 2 Z_{i+1}
    // u*_{grad l}(Z_i); writing Z_{j+1} = b(X_j) + eta_{j+1} + eps_{j+1} and
    // conditioning on the states, its lag covariance splits into the
    // state-pair product term E[b(X_1) b(X_j) grad l(X_1) grad l(X_j)'] and a
    // drift-innovation coupling: eta_2 inside Z_2 = b(X_1) + eta_2 + eps_2 is
    // correlated with X_j, and projecting it onto the pair (X_1, X_j) leaves
    //   phi * c * E[(X_j - r X_1) X_j grad l(X_1) grad l(X_j)'],
    // with r = phi^{j-1} and c = phi^{j-2} sigma^2 / (gamma^2 (1 - r^2)).
    // Both pieces depend only on the state law, so the same expression serves
    // every observation model; the remaining lag-one coupling through the
    // shared observation Z_2 is noise-dependent and added by the sandwich
    // assembly.  Symmetrized, since the long-run sum pairs each lag with its
    // transpose.
    if (j < 2) throw std::invalid_argument("omega_lag: requires j >= 2");
    const long double gamma2 = stationary_variance(theta);
    const long double phi = theta.phi;
    const long double r = std::pow(phi, j - 1);
    const TiltedMoments mr = tilted_moments(gamma2, r);
    const LongMat2 st = cross_st_long(theta, mr);
    const LongMat2 st0 = cross_st_long(theta, tilted_moments(gamma2, 0.0L));
    const LongFull2 t2 = cross_t2_long(theta, mr);
    const long double c = (j == 2 ? 1.0L : std::pow(phi, j - 2)) *
                          (long double)theta.sigma2 /
                          (gamma2 * (1.0L - r * r));
    const long double w_st = phi * phi - phi * c * r;
    const long double w_t2 = phi * c;
    const long double g11 = w_st * st.a11 + w_t2 * t2.a11 - phi * phi * st0.a11;
    const long double g22 = w_st * st.a22 + w_t2 * t2.a22 - phi * phi * st0.a22;
    const long double g12 = w_st * st.a12 +
                            w_t2 * 0.5L * (t2.a12 + t2.a21) -
                            phi * phi * st0.a12;
    return sym(double(4.0L * g11), double(4.0L * g12), double(4.0L * g22));
}

namespace {

// Lag-one coupling through the shared observation: in Cov(g_1, g_2) both
// factors touch Z_2, and E_eps[(x + eps) u*_h(x + eps)] = x h(x) +
// sigma_eps2 h'(x) for Gaussian noise, so the extra term beyond the
// state-level lag matrix is 4 phi sigma_eps2 E[X_2 grad l(X_1) grad l'(X_2)'].
Mat2 lag1_noise_ar1(const Theta& theta, double sigma_eps2) {
    const long double gamma2 = stationary_variance(theta);
    const LongFull2 d =
        cross_deriv_long(theta, tilted_moments(gamma2, theta.phi));
    const long double w = 4.0L * (long double)theta.phi * sigma_eps2;
    return sym(double(w * d.a11), double(w * 0.5L * (d.a12 + d.a21)),
               double(w * d.a22));
}

SandwichParts assemble(const Theta& theta, const Mat2& p2,
                       const Mat2& lag1_noise, int q_trunc) {
    if (q_trunc < 1)
        throw std::invalid_argument("sandwich: q_trunc must be >= 1");
    SandwichParts parts;
    parts.q_trunc = q_trunc;
    parts.V = hessian_V(theta);

    const auto ev = parts.V.sym_eigenvalues();
    const double lo = std::min(std::abs(ev[0]), std::abs(ev[1]));
    const double hi = std::max(std::abs(ev[0]), std::abs(ev[1]));
    if (!(lo > 0.0) || hi / lo > 1e12)
        throw std::domain_error("sandwich: V is ill-conditioned (cond > 1e12)");

    parts.Omega1 = (p2 - p1_matrix(theta)) * 4.0;
    Mat2 tail = lag1_noise;
    for (int j = 2; j <= q_trunc; ++j) tail = tail + omega_lag(theta, j);
    parts.OmegaTail = tail * 2.0;

    const Mat2 vinv = parts.V.inverse();
    Mat2 sigma = vinv * (parts.Omega1 + parts.OmegaTail) * vinv;
    sigma = (sigma + sigma.transpose()) * 0.5;

    const auto sev = sigma.sym_eigenvalues();
    if (sev[0] < -1e-10)
        throw std::domain_error("sandwich: Sigma has a significantly negative eigenvalue");
    if (sev[0] < 0.0) {
        // Round-off negativity: clip the small eigenvalue to zero keeping the
        // other eigenpair, via Sigma' = l2 (Sigma - l1 I) / (l2 - l1).
        sigma = (sev[1] > sev[0])
                    ? (sigma - Mat2::identity() * sev[0]) *
                          (sev[1] / (sev[1] - sev[0]))
                    : Mat2{};
        if (sev[1] < 0.0) sigma = Mat2{};
    }
    parts.Sigma = sigma;
    return parts;
}

}  // namespace

SandwichParts sandwich_ar1(const Theta& theta, double sigma_eps2, int q_trunc) {
    return assemble(theta, p2_matrix_ar1(theta, sigma_eps2),
                    lag1_noise_ar1(theta, sigma_eps2), q_trunc);
}

SandwichParts sandwich_plugin(const ModelSpec& model,
                              const std::vector<double>& z, const Theta& theta,
                              int q_trunc, const QuadratureConfig& q) {
    // One quadrature pass serves both the plug-in P2 and the empirical lag-one
    // moment; the state-level part of the latter is known in closed form, so
    // only the residual noise coupling is taken from the data.
    if (z.size() < 2)
        throw std::invalid_argument("sandwich_plugin: need at least 2 observations");
    const std::span<const double> pts(z.data(), z.size() - 1);
    const std::vector<double> up =
        u_star_quadrature(deconv_kernel_dphi(theta), model, pts, q);
    const std::vector<double> us =
        u_star_quadrature(deconv_kernel_dsigma2(theta), model, pts, q);

    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const double z2 = z[i + 1] * z[i + 1];
        s11 += z2 * up[i] * up[i];
        s12 += z2 * up[i] * us[i];
        s22 += z2 * us[i] * us[i];
    }
    const double n1 = double(z.size() - 1);
    const Mat2 p2 = sym(s11 / n1, s12 / n1, s22 / n1);

    Mat2 lag1_noise{};
    if (z.size() >= 3) {
        double l11 = 0.0, l12 = 0.0, l21 = 0.0, l22 = 0.0;
        for (std::size_t i = 0; i + 2 < z.size(); ++i) {
            const double w = z[i + 1] * z[i + 2];
            l11 += w * up[i] * up[i + 1];
            l12 += w * up[i] * us[i + 1];
            l21 += w * us[i] * up[i + 1];
            l22 += w * us[i] * us[i + 1];
        }
        const double n2 = double(z.size() - 2);
        const Mat2 lag1_full =
            (sym(l11 / n2, 0.5 * (l12 + l21) / n2, l22 / n2) -
             p1_matrix(theta)) *
            4.0;
        lag1_noise = lag1_full - omega_lag(theta, 2);
    }
    return assemble(theta, p2, lag1_noise, q_trunc);
}

std::array<Interval, 2> confidence_interval(const Theta& theta_hat,
                                            const Mat2& sigma, std::size_t n,
                                            double alpha) {
    if (n < 2) throw std::invalid_argument("confidence_interval: n must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("confidence_interval: alpha must be in (0,1)");
    if (sigma.a11 < 0.0 || sigma.a22 < 0.0)
        throw std::domain_error("confidence_interval: negative variance entry");
    const double zq = normal_quantile(1.0 - alpha / 2.0);
    const double h1 = zq * std::sqrt(sigma.a11 / double(n));
    const double h2 = zq * std::sqrt(sigma.a22 / double(n));
    return {Interval{theta_hat.phi - h1, theta_hat.phi + h1},
            Interval{theta_hat.sigma2 - h2, theta_hat.sigma2 + h2}};
}

}  // namespace hsm
