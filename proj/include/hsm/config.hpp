#pragma once

#include <string>

#include "hsm/contrast.hpp"
#include "hsm/nelder_mead.hpp"
#include "hsm/particle.hpp"
#include "hsm/siemle.hpp"

namespace hsm {

/// Tuning knobs the CLI exposes through --config; everything here has a
/// working default, so a config file only lists what it overrides.
struct RunConfig {
    NmOptions nm;
    QuadratureConfig quad;
    FilterConfig filter;
    SiemleConfig siemle;
    int q_trunc = 100;
};

/// Strict key = value parser: '#' starts a comment, blank lines are skipped,
/// unknown keys and malformed values are errors (never silently ignored).
/// Keys: nm.tol, nm.max_iter, nm.starts_per_dim, quad.nodes, quad.halfwidth,
/// quad.tol, filter.particles, filter.resampling (systematic|multinomial),
/// filter.ess_frac, filter.q_phi, filter.q_sigma2, filter.h,
/// filter.prior.phi_lo, filter.prior.phi_hi, filter.prior.s2_lo,
/// filter.prior.s2_hi, siemle.m_tilde, siemle.burnin_frac, siemle.stop_tol,
/// siemle.max_em_iters, siemle.start_phi, siemle.start_sigma2, q_trunc.
RunConfig parse_config_file(const std::string& path);

/// One parsed assignment applied to config; exposed for the parser tests.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

}  // namespace hsm
