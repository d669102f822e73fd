#pragma once

#include <string>
#include <vector>

#include "hsm/model.hpp"

namespace hsm {

/// Daily price series; dates are optional labels (empty or one per price).
struct PriceSeries {
    std::vector<std::string> dates;
    std::vector<double> s;
    void validate() const;  // all prices > 0, at least 2 of them
};

/// CSV with a header row; one or two columns per line, the last column being
/// the price and an optional leading column a date label.
PriceSeries read_price_csv(const std::string& path);

/// Compounded returns centered at their sample mean:
/// y_i = 100 log(S_{i+1}/S_i) - c.  Length shrinks by one; the centering
/// makes the output mean 0 to machine precision.
std::vector<double> to_returns(const PriceSeries& series);

/// Additive constant of the log-square transform: the rounded literal 1.27
/// used in published replications, or the exact -psi(1/2) - log 2.
enum class KappaMode { PaperLiteral, Exact };
double kappa_value(KappaMode mode) noexcept;

struct LogChisqTransform {
    std::vector<double> z;
    int floored = 0;  // returns clamped to |y| = 1e-8 before squaring
};

/// Z_i = log(y_i^2) + kappa.  Zero and near-zero returns are floored at
/// |y| = 1e-8 so the log stays finite; the count is reported, not fatal.
LogChisqTransform to_log_chisq(const std::vector<double>& returns,
                               KappaMode mode);

/// Trajectory CSV: header "x,z" or "x,z,y" (y only when present), one row
/// per time point, 17 significant digits so values round-trip exactly.
void write_trajectory_csv(const std::string& path, const Trajectory& t);

/// Observation CSV: header "z", one value per line.
void write_z_csv(const std::string& path, const std::vector<double>& z);

/// Filter diagnostics CSV: header "i,nu,F", one row per observation with the
/// one-step prediction error and its variance.
void write_kalman_csv(const std::string& path, const struct KalmanRun& run);

/// Particle diagnostics CSV: header "i,ess,resampled", the per-time effective
/// sample size and whether that step resampled.
void write_filter_diag_csv(const std::string& path,
                           const struct FilterResult& result);

/// Read the observation column from a CSV whose header names a column "z"
/// (plain "z" files and trajectory files both qualify).
std::vector<double> read_z_csv(const std::string& path);

}  // namespace hsm
