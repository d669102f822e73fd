#include "hsm/contrast.hpp"

#include <algorithm>
#include <cmath>

#include "hsm/special.hpp"

namespace hsm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrt2Pi = 2.5066282746310005024;

double gamma2_checked(const Theta& theta) { return stationary_variance(theta); }

// log |1/f*_eps| and arg(1/f*_eps) at frequency t, overflow-free.
// Gaussian:  1/f*(t) = exp(+ sigma_eps2 t^2 / 2), real positive.
// LogSV:     1/f*(t) = sqrt(pi) e^{i E t} 2^{-i beta t} / Gamma(1/2 + i beta t).
void inv_noise_cf(const ModelSpec& model, double t, double* log_mag,
                  double* arg) {
    if (model.kind == ModelKind::GaussianAR1) {
        *log_mag = 0.5 * model.sigma_eps2 * t * t;
        *arg = 0.0;
        return;
    }
    const double u = model.beta * t;
    const double e_tilde = model.beta * kLogChisq1Mean;
    const std::complex<double> lg = complex_log_gamma({0.5, u});
    *log_mag = 0.5 * std::log(kPi) - lg.real();
    *arg = e_tilde * t - u * std::log(2.0) - lg.imag();
}

// Conservative envelope of the integrand magnitude at frequency t: polynomial
// factor times Gaussian decay times the noise-inverse growth.  For LogSV the
// growth envelope is sqrt(2) e^{pi beta |t| / 2} >= cosh(pi beta t)^{1/2}.
double tail_bound(const DeconvKernel& k, const ModelSpec& model, double t) {
    const double poly = std::abs(k.c1) * t + std::abs(k.c3) * t * t * t;
    double log_growth;
    if (model.kind == ModelKind::GaussianAR1) {
        log_growth = 0.5 * model.sigma_eps2 * t * t;
    } else {
        log_growth = 0.5 * std::log(2.0) + 0.5 * kPi * model.beta * t;
    }
    const double e = -0.5 * k.gamma2 * t * t + log_growth;
    return poly * std::exp(e);
}

// Smallest T (1% resolution) past the envelope's peak with bound <= tol.
double auto_halfwidth(const DeconvKernel& k, const ModelSpec& model, double tol) {
    if (k.c1 == 0.0 && k.c3 == 0.0) return 1.0;  // integrand identically zero
    if (model.kind == ModelKind::GaussianAR1 && k.gamma2 <= model.sigma_eps2)
        throw std::domain_error(
            "deconvolution: requires gamma^2 > sigma_eps2 for Gaussian noise");
    double hi = 1.0;
    int guard = 0;
    while (tail_bound(k, model, hi) > tol || tail_bound(k, model, 0.99 * hi) >
                                                 tail_bound(k, model, 0.95 * hi)) {
        hi *= 2.0;
        if (++guard > 60)
            throw QuadratureError("quadrature: tail bound never reaches tolerance");
    }
    double lo = hi / 2.0;
    for (int i = 0; i < 40 && (hi - lo) > 0.01 * lo; ++i) {
        const double mid = 0.5 * (lo + hi);
        const bool ok = tail_bound(k, model, mid) <= tol &&
                        tail_bound(k, model, mid) <= tail_bound(k, model, 0.95 * mid);
        (ok ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

void QuadratureConfig::validate() const {
    if (nodes < 64 || nodes % 2 != 0)
        throw std::invalid_argument("QuadratureConfig: nodes must be even and >= 64");
    if (!(tol > 0.0))
        throw std::invalid_argument("QuadratureConfig: tol must be > 0");
    if (halfwidth < 0.0)
        throw std::invalid_argument("QuadratureConfig: halfwidth must be >= 0");
}

double l2_norm_sq(const Theta& theta) {
    const double gamma2 = gamma2_checked(theta);
    return theta.phi * theta.phi * std::sqrt(gamma2) / (4.0 * kSqrtPi);
}

double u_star_gaussian(const Theta& theta, double sigma_eps2, double y) {
    const double gamma2 = gamma2_checked(theta);
    const double c = gamma2 - sigma_eps2;
    if (!(c > 0.0))
        throw std::domain_error("u_star_gaussian: requires gamma^2 > sigma_eps2");
    return theta.phi * gamma2 / (kSqrt2Pi * c * std::sqrt(c)) * y *
           std::exp(-0.5 * y * y / c);
}

std::complex<double> f_star_eps_sv(double beta, double y) {
    if (!(beta > 0.0)) throw std::invalid_argument("f_star_eps_sv: beta must be > 0");
    const double u = beta * y;
    const std::complex<double> lg = complex_log_gamma({0.5, u});
    const double log_mag = lg.real() - 0.5 * std::log(kPi);
    const double arg = beta * kLogChisq1Mean * (-y) + u * std::log(2.0) + lg.imag();
    return std::polar(std::exp(log_mag), arg);
}

DeconvKernel deconv_kernel_l(const Theta& theta) {
    const double gamma2 = gamma2_checked(theta);
    return {theta.phi * gamma2, 0.0, gamma2};
}

DeconvKernel deconv_kernel_dphi(const Theta& theta) {
    const double gamma2 = gamma2_checked(theta);
    const double omp = 1.0 - theta.phi * theta.phi;
    // d/dphi of i phi gamma^2 y e^{-y^2 gamma^2/2}, with gamma^2 = sigma2/(1-phi^2).
    const double a1 = gamma2 * (1.0 + theta.phi * theta.phi) / omp;
    const double a2 = gamma2 * gamma2 * theta.phi * theta.phi / omp;
    return {a1, -a2, gamma2};
}

DeconvKernel deconv_kernel_dsigma2(const Theta& theta) {
    const double gamma2 = gamma2_checked(theta);
    const double omp = 1.0 - theta.phi * theta.phi;
    const double b1 = theta.phi / omp;
    const double b2 = gamma2 * theta.phi / (2.0 * omp);
    return {b1, -b2, gamma2};
}

std::vector<double> u_star_quadrature(const DeconvKernel& kernel,
                                      const ModelSpec& model,
                                      std::span<const double> y,
                                      const QuadratureConfig& q,
                                      double* im_residual) {
    q.validate();
    model.validate();
    double T = q.halfwidth;
    if (T == 0.0) {
        T = auto_halfwidth(kernel, model, q.tol);
    } else if (tail_bound(kernel, model, T) > q.tol) {
        throw QuadratureError("quadrature: tail bound at +-T exceeds tol");
    }

    const int n = q.nodes;
    const double h = 2.0 * T / n;
    // u(t) = (1/2pi) v*(-t)/f*(t) = -i (c1 t + c3 t^3) e^{-t^2 g/2} invf(t)/2pi.
    std::vector<double> coef(n);
    std::vector<double> ph(n);
    for (int j = 0; j < n; ++j) {
        const double t = -T + (j + 0.5) * h;
        double lm, ar;
        inv_noise_cf(model, t, &lm, &ar);
        const double p = kernel.c1 * t + kernel.c3 * t * t * t;
        coef[j] = p * std::exp(-0.5 * kernel.gamma2 * t * t + lm) * h / (2.0 * kPi);
        ph[j] = ar;
    }

    std::vector<double> out(y.size());
    double worst_im = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < n; ++j) {
            const double t = -T + (j + 0.5) * h;
            // e^{iyt} * (-i) * coef * e^{i ph} = coef * [sin(a) - i cos(a)], a = yt + ph
            const double a = y[i] * t + ph[j];
            re += coef[j] * std::sin(a);
            im -= coef[j] * std::cos(a);
        }
        out[i] = re;
        worst_im = std::max(worst_im, std::abs(im));
    }
    if (im_residual) *im_residual = worst_im;
    if (worst_im > 100.0 * q.tol)
        throw QuadratureError("quadrature: imaginary residual exceeds 100 * tol");
    return out;
}

double u_star_sv(const Theta& theta, double beta, double y,
                 const QuadratureConfig& q) {
    const double ys[1] = {y};
    return u_star_quadrature(deconv_kernel_l(theta), ModelSpec::log_sv(beta), ys,
                             q)[0];
}

double population_contrast_ar1(const Theta& theta, const Theta& theta0) {
    const double g2 = gamma2_checked(theta);
    const double g02 = gamma2_checked(theta0);
    const double s = g2 + g02;
    return l2_norm_sq(theta) - std::sqrt(2.0 / kPi) * theta.phi * theta0.phi *
                                   g2 * g02 / (s * std::sqrt(s));
}

ContrastObjective::ContrastObjective(const ModelSpec& model,
                                     std::vector<double> z,
                              const QuadratureConfig& q)
    : model_(model), z_(std::move(z)), quad_(q) {
    model_.validate();
    quad_.validate();
    if (z_.size() < 2)
        throw std::invalid_argument("ContrastObjective: need at least 2 observations");
}

// Node grids come in dyadic halfwidth levels with a fixed step, so the cached
// data transform S(t) = sum_i z_{i+1} e^{i z_i t} is reused across theta and
// frequency resolution never degrades when T grows.
const ContrastObjective::Level& ContrastObjective::level_for(double t_exact) const {
    constexpr double kBaseT = 16.0;
    int lvl = 0;
    double T = kBaseT;
    while (T < t_exact) {
        T *= 2.0;
        if (++lvl > 7) throw QuadratureError("quadrature: halfwidth beyond grid range");
    }
    auto it = levels_.find(lvl);
    if (it != levels_.end()) return it->second;

    Level L;
    L.halfwidth = T;
    const int n = quad_.nodes << lvl;
    L.step = 2.0 * T / n;
    L.t.resize(n);
    L.log_invf.resize(n);
    L.phase_s.resize(n);
    const std::size_t m = z_.size();
    for (int j = 0; j < n; ++j) {
        const double t = -T + (j + 0.5) * L.step;
        L.t[j] = t;
        double lm, ar;
        inv_noise_cf(model_, t, &lm, &ar);
        L.log_invf[j] = lm;
        // S(t): one pass over the data per node.
        double sre = 0.0, sim = 0.0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            sre += z_[i + 1] * std::cos(z_[i] * t);
            sim += z_[i + 1] * std::sin(z_[i] * t);
        }
        L.phase_s[j] = std::polar(1.0, ar) * std::complex<double>(sre, sim);
    }
    return levels_.emplace(lvl, std::move(L)).first->second;
}

double ContrastObjective::quadrature_term(const Theta& theta) const {
    const DeconvKernel k = deconv_kernel_l(theta);
    if (k.c1 == 0.0) return 0.0;
    double T = quad_.halfwidth;
    if (T == 0.0) T = auto_halfwidth(k, model_, quad_.tol);
    const Level& L = level_for(T);

    // sum_i z_{i+1} u*(z_i) = sum_j u_j S(t_j); with u_j = -i c_j e^{i ph_j}
    // the real part reduces to c_j * Im(e^{i ph_j} S_j), cached as phase_s.
    double acc = 0.0;
    const std::size_t n = L.t.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double t = L.t[j];
        const double c =
            k.c1 * t * std::exp(-0.5 * k.gamma2 * t * t + L.log_invf[j]);
        acc += c * L.phase_s[j].imag();
    }
    acc *= L.step / (2.0 * kPi);
    return 2.0 * acc / double(z_.size() - 1);
}

double ContrastObjective::operator()(const Theta& theta) const {
    if (model_.kind == ModelKind::GaussianAR1) {
        const double gamma2 = gamma2_checked(theta);
        const double c = gamma2 - model_.sigma_eps2;
        if (!(c > 0.0))
            throw std::domain_error("contrast: requires gamma^2 > sigma_eps2");
        const double pref = theta.phi * gamma2 / (kSqrt2Pi * c * std::sqrt(c));
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < z_.size(); ++i)
            s += z_[i + 1] * z_[i] * std::exp(-0.5 * z_[i] * z_[i] / c);
        return l2_norm_sq(theta) - 2.0 * pref * s / double(z_.size() - 1);
    }
    return l2_norm_sq(theta) - quadrature_term(theta);
}

double ContrastObjective::quadrature_value(const Theta& theta) const {
    return l2_norm_sq(theta) - quadrature_term(theta);
}

double objective(const Theta& theta, const std::vector<double>& z,
                 const ModelSpec& model, const QuadratureConfig& q) {
    return ContrastObjective(model, z, q)(theta);
}

ContrastEstimate estimate_contrast(const std::vector<double>& z,
                                   const ModelSpec& model, const NmOptions& opt,
                                   const QuadratureConfig& q) {
    const ContrastObjective f(model, z, q);
    const MinimizeResult r = minimize_multistart(
        [&f](const Theta& t) { return f(t); }, model.box, opt);
    return {r.theta, r.value, r.converged, r.iterations, r.starts};
}

}  // namespace hsm
