#include "hsm/kalman.hpp"

#include <cmath>
#include <stdexcept>

namespace hsm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

KalmanRun kalman_core(const Theta& theta, const std::vector<double>& z,
                      const double* m, const double* v2, double v2_scalar) {
    const std::size_t n = z.size();
    if (n == 0) throw std::invalid_argument("kalman_filter: empty series");
    const double gamma2 = stationary_variance(theta);

    KalmanRun run;
    run.nu.resize(n);
    run.F.resize(n);
    run.x_pred.resize(n);
    run.P_pred.resize(n);
    run.x_filt.resize(n);
    run.P_filt.resize(n);

    double xp = 0.0;
    double pp = gamma2;
    double ll = -0.5 * double(n) * kLog2Pi;
    for (std::size_t i = 0; i < n; ++i) {
        const double vi = v2 ? v2[i] : v2_scalar;
        const double fi = pp + vi;
        const double nui = z[i] - xp - (m ? m[i] : 0.0);
        run.x_pred[i] = xp;
        run.P_pred[i] = pp;
        run.F[i] = fi;
        run.nu[i] = nui;
        ll -= 0.5 * (std::log(fi) + nui * nui / fi);
        const double k = pp / fi;
        const double xf = xp + k * nui;
        const double pf = (1.0 - k) * pp;
        run.x_filt[i] = xf;
        run.P_filt[i] = pf;
        xp = theta.phi * xf;
        pp = theta.phi * theta.phi * pf + theta.sigma2;
    }
    run.loglik = ll;
    return run;
}

}  // namespace

KalmanRun kalman_filter(const Theta& theta, const std::vector<double>& z,
                        double sigma_eps2) {
    if (!(sigma_eps2 >= 0.0))
        throw std::invalid_argument("kalman_filter: sigma_eps2 must be >= 0");
    return kalman_core(theta, z, nullptr, nullptr, sigma_eps2);
}

KalmanRun kalman_filter_offsets(const Theta& theta, const std::vector<double>& z,
                                const std::vector<double>& m,
                                const std::vector<double>& v2) {
    if (m.size() != z.size() || v2.size() != z.size())
        throw std::invalid_argument("kalman_filter_offsets: size mismatch");
    return kalman_core(theta, z, m.data(), v2.data(), 0.0);
}

QmlFit qml_estimate(const std::vector<double>& z, const ModelSpec& model,
                    const NmOptions& opt) {
    if (z.size() < 2)
        throw std::invalid_argument("qml_estimate: need at least 2 observations");
    model.validate();
    const MinimizeResult r = minimize_multistart(
        [&](const Theta& t) {
            return -kalman_filter(t, z, model.sigma_eps2).loglik;
        },
        model.box, opt);
    return {r.theta, -r.value, r.converged, r.iterations, r.starts};
}

}  // namespace hsm
