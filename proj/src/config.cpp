#include "hsm/config.hpp"

#include <fstream>
#include <stdexcept>

namespace hsm {

namespace {

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

double parse_num(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad value for " + key + ": '" +
                                    value + "'");
    }
    if (used != value.size())
        throw std::invalid_argument("config: bad value for " + key + ": '" +
                                    value + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_num(key, value);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::invalid_argument("config: " + key + " must be an integer");
    return i;
}

}  // namespace

void apply_config_entry(RunConfig& c, const std::string& key,
                        const std::string& value) {
    if (key == "nm.tol") c.nm.tol = parse_num(key, value);
    else if (key == "nm.max_iter") c.nm.max_iter = parse_int(key, value);
    else if (key == "nm.starts_per_dim") c.nm.starts_per_dim = parse_int(key, value);
    else if (key == "quad.nodes") c.quad.nodes = parse_int(key, value);
    else if (key == "quad.halfwidth") c.quad.halfwidth = parse_num(key, value);
    else if (key == "quad.tol") c.quad.tol = parse_num(key, value);
    else if (key == "filter.particles") c.filter.particles = parse_int(key, value);
    else if (key == "filter.resampling") {
        if (value == "systematic") c.filter.resampling = Resampling::Systematic;
        else if (value == "multinomial") c.filter.resampling = Resampling::Multinomial;
        else throw std::invalid_argument("config: filter.resampling must be systematic or multinomial");
    }
    else if (key == "filter.ess_frac") c.filter.ess_frac = parse_num(key, value);
    else if (key == "filter.q_phi") c.filter.q_phi = parse_num(key, value);
    else if (key == "filter.q_sigma2") c.filter.q_sigma2 = parse_num(key, value);
    else if (key == "filter.h") c.filter.h = parse_num(key, value);
    else if (key == "filter.prior.phi_lo") c.filter.prior.phi_lo = parse_num(key, value);
    else if (key == "filter.prior.phi_hi") c.filter.prior.phi_hi = parse_num(key, value);
    else if (key == "filter.prior.s2_lo") c.filter.prior.s2_lo = parse_num(key, value);
    else if (key == "filter.prior.s2_hi") c.filter.prior.s2_hi = parse_num(key, value);
    else if (key == "siemle.m_tilde") c.siemle.m_tilde = parse_int(key, value);
    else if (key == "siemle.burnin_frac") c.siemle.burnin_frac = parse_num(key, value);
    else if (key == "siemle.stop_tol") c.siemle.stop_tol = parse_num(key, value);
    else if (key == "siemle.max_em_iters") c.siemle.max_em_iters = parse_int(key, value);
    else if (key == "siemle.start_phi") c.siemle.start.phi = parse_num(key, value);
    else if (key == "siemle.start_sigma2") c.siemle.start.sigma2 = parse_num(key, value);
    else if (key == "q_trunc") c.q_trunc = parse_int(key, value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    RunConfig config;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ": line " + std::to_string(row) +
                                        ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument(path + ": line " + std::to_string(row) +
                                        ": expected key = value");
        apply_config_entry(config, key, value);
    }
    return config;
}

}  // namespace hsm
