#pragma once

#include <functional>

#include "hsm/model.hpp"

namespace hsm {

struct NmOptions {
    double tol = 1e-7;   // simplex-diameter stopping tolerance
    int max_iter = 500;  // iteration cap per start
    int starts_per_dim = 3;
};

struct MinimizeResult {
    Theta theta;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;  // iterations spent by the winning start
    int starts = 0;      // starts actually run
};

/// Nelder-Mead from a single start; every candidate vertex is projected into
/// the box before evaluation, so f is only ever called inside the box.
MinimizeResult nelder_mead_box(const std::function<double(const Theta&)>& f,
                               const Theta& start, const ParamBox& box,
                               const NmOptions& opt = {});

/// Multi-start wrapper: starts on the tensor grid at box fractions
/// {1/4, 2/4, 3/4} per dimension (starts_per_dim = k gives fractions
/// i/(k+1)), visited in row-major order (phi outer, sigma2 inner).
/// The best final value wins; exact ties keep the earliest start.
MinimizeResult minimize_multistart(const std::function<double(const Theta&)>& f,
                                   const ParamBox& box,
                                   const NmOptions& opt = {});

}  // namespace hsm
