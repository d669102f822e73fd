#pragma once

#include <complex>

namespace hsm {

/// Mean of log(chi-square with 1 df): psi(1/2) + log 2 = -(euler_gamma + log 2).
inline constexpr double kLogChisq1Mean = -1.2703628454614782;

/// Variance of log(chi-square with 1 df): psi'(1/2)/1 = pi^2 / 2.
inline constexpr double kLogChisq1Var = 4.934802200544679;

/// Gamma function for complex argument via the Lanczos approximation
/// (g = 7, 9 coefficients), with the reflection formula for Re(z) < 1/2.
/// Relative accuracy ~1e-13 on the strips used here.
std::complex<double> complex_gamma(std::complex<double> z);

/// log Gamma(z) for Re(z) >= 1/2; stays finite far up the critical strip
/// where Gamma itself under/overflows.  Imaginary part is some branch of
/// arg Gamma, adequate wherever only exp(log Gamma) phases are consumed.
std::complex<double> complex_log_gamma(std::complex<double> z);

/// Log-density of W = log(xi^2), xi standard normal:
/// log f(w) = w/2 - e^w/2 - log(2 pi)/2.
double log_chisq1_logpdf(double w);

/// Standard normal CDF via erfc.
double normal_cdf(double x);

/// Standard normal quantile.  Acklam's rational approximation polished with
/// one Newton step against normal_cdf; absolute error < 1e-14 on (1e-300, 1).
double normal_quantile(double p);

}  // namespace hsm
