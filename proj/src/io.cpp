#include "hsm/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hsm/kalman.hpp"
#include "hsm/particle.hpp"
#include "hsm/special.hpp"

namespace hsm {

namespace {

constexpr double kReturnFloor = 1e-8;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

double parse_double(const std::string& cell, const std::string& path, int row) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ": not a number: '" + cell + "'");
    }
    if (used != cell.size())
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ": trailing junk in '" + cell + "'");
    return v;
}

}  // namespace

void PriceSeries::validate() const {
    if (s.size() < 2)
        throw std::invalid_argument("PriceSeries: need at least 2 prices");
    if (!dates.empty() && dates.size() != s.size())
        throw std::invalid_argument("PriceSeries: dates must match prices");
    for (double v : s)
        if (!(v > 0.0))
            throw std::invalid_argument("PriceSeries: prices must be > 0");
}

PriceSeries read_price_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    PriceSeries series;
    std::string line;
    int row = 0;
    bool header_seen = false;
    bool with_dates = false;
    while (std::getline(in, line)) {
        ++row;
        line = strip(line);
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (!header_seen) {
            if (cells.empty() || cells.size() > 2)
                throw std::runtime_error(path + ": header must have 1 or 2 columns");
            with_dates = cells.size() == 2;
            header_seen = true;
            continue;
        }
        if (cells.size() != (with_dates ? 2u : 1u))
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": wrong column count");
        if (with_dates) series.dates.push_back(strip(cells[0]));
        series.s.push_back(parse_double(strip(cells.back()), path, row));
    }
    if (!header_seen) throw std::runtime_error(path + ": missing header row");
    series.validate();
    return series;
}

std::vector<double> to_returns(const PriceSeries& series) {
    series.validate();
    const std::size_t n = series.s.size() - 1;
    std::vector<double> y(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = 100.0 * (std::log(series.s[i + 1]) - std::log(series.s[i]));
        mean += y[i];
    }
    mean /= static_cast<double>(n);
    for (double& v : y) v -= mean;
    return y;
}

double kappa_value(KappaMode mode) noexcept {
    // Exact mode: -E[log chi^2_1] = -psi(1/2) - log 2; the literal 1.27 is
    // its two-decimal rounding.
    return mode == KappaMode::PaperLiteral ? 1.27 : -kLogChisq1Mean;
}

LogChisqTransform to_log_chisq(const std::vector<double>& returns,
                               KappaMode mode) {
    const double kappa = kappa_value(mode);
    LogChisqTransform out;
    out.z.resize(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) {
        double y = returns[i];
        if (!std::isfinite(y))
            throw std::invalid_argument("to_log_chisq: returns must be finite");
        if (std::abs(y) < kReturnFloor) {
            y = kReturnFloor;
            ++out.floored;
        }
        out.z[i] = std::log(y * y) + kappa;
    }
    return out;
}

void write_trajectory_csv(const std::string& path, const Trajectory& t) {
    if (t.x.size() != t.z.size() || (!t.y.empty() && t.y.size() != t.z.size()))
        throw std::invalid_argument("write_trajectory_csv: ragged trajectory");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << (t.y.empty() ? "x,z\n" : "x,z,y\n");
    for (std::size_t i = 0; i < t.z.size(); ++i) {
        out << t.x[i] << ',' << t.z[i];
        if (!t.y.empty()) out << ',' << t.y[i];
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_z_csv(const std::string& path, const std::vector<double>& z) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "z\n";
    for (double v : z) out << v << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_kalman_csv(const std::string& path, const KalmanRun& run) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "i,nu,F\n";
    for (std::size_t i = 0; i < run.nu.size(); ++i)
        out << i + 1 << ',' << run.nu[i] << ',' << run.F[i] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_filter_diag_csv(const std::string& path,
                           const FilterResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "i,ess,resampled\n";
    for (std::size_t i = 0; i < result.ess.size(); ++i)
        out << i + 1 << ',' << result.ess[i] << ','
            << int(result.resampled[i]) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<double> read_z_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> z;
    std::string line;
    int row = 0;
    std::size_t z_col = 0;
    std::size_t n_cols = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        line = strip(line);
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (!header_seen) {
            n_cols = cells.size();
            bool found = false;
            for (std::size_t c = 0; c < cells.size(); ++c)
                if (strip(cells[c]) == "z") {
                    z_col = c;
                    found = true;
                    break;
                }
            if (!found)
                throw std::runtime_error(path + ": header has no 'z' column");
            header_seen = true;
            continue;
        }
        if (cells.size() != n_cols)
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": wrong column count");
        z.push_back(parse_double(strip(cells[z_col]), path, row));
    }
    if (!header_seen) throw std::runtime_error(path + ": missing header row");
    return z;
}

}  // namespace hsm
