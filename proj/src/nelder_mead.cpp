#include "hsm/nelder_mead.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hsm {

namespace {

struct Vertex {
    Theta t;
    double f;
};

double diameter(const std::array<Vertex, 3>& v) {
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double dp = v[i].t.phi - v[j].t.phi;
            const double ds = v[i].t.sigma2 - v[j].t.sigma2;
            d = std::max(d, std::sqrt(dp * dp + ds * ds));
        }
    return d;
}

Theta combine(const Theta& a, double wa, const Theta& b, double wb) {
    return {wa * a.phi + wb * b.phi, wa * a.sigma2 + wb * b.sigma2};
}

}  // namespace

MinimizeResult nelder_mead_box(const std::function<double(const Theta&)>& f,
                               const Theta& start, const ParamBox& box,
                               const NmOptions& opt) {
    box.validate();
    const Theta s = project_into_box(start, box);

    // Initial simplex: offsets of 5% of each box width, flipped away from a
    // boundary so the simplex never starts degenerate.
    const double hp = 0.05 * (box.phi_hi - box.phi_lo);
    const double hs = 0.05 * (box.s2_hi - box.s2_lo);
    const double dp = (s.phi + hp <= box.phi_hi) ? hp : -hp;
    const double ds = (s.sigma2 + hs <= box.s2_hi) ? hs : -hs;

    std::array<Vertex, 3> v;
    v[0] = {s, f(s)};
    Theta t1 = project_into_box({s.phi + dp, s.sigma2}, box);
    Theta t2 = project_into_box({s.phi, s.sigma2 + ds}, box);
    v[1] = {t1, f(t1)};
    v[2] = {t2, f(t2)};

    MinimizeResult res;
    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        std::stable_sort(v.begin(), v.end(),
                         [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (diameter(v) < opt.tol) {
            res.converged = true;
            break;
        }

        const Theta centroid = combine(v[0].t, 0.5, v[1].t, 0.5);
        auto eval_at = [&](double coef) {
            Theta t = project_into_box(combine(centroid, 1.0 + coef, v[2].t, -coef), box);
            return Vertex{t, f(t)};
        };

        const Vertex refl = eval_at(1.0);
        if (refl.f < v[0].f) {
            const Vertex exp = eval_at(2.0);
            v[2] = (exp.f < refl.f) ? exp : refl;
            continue;
        }
        if (refl.f < v[1].f) {
            v[2] = refl;
            continue;
        }
        if (refl.f < v[2].f) {
            const Vertex outc = eval_at(0.5);
            if (outc.f <= refl.f) {
                v[2] = outc;
                continue;
            }
        } else {
            const Vertex inc = eval_at(-0.5);
            if (inc.f < v[2].f) {
                v[2] = inc;
                continue;
            }
        }
        // Shrink toward the best vertex (stays in the box by convexity).
        for (int i = 1; i < 3; ++i) {
            v[i].t = combine(v[0].t, 0.5, v[i].t, 0.5);
            v[i].f = f(v[i].t);
        }
    }

    std::stable_sort(v.begin(), v.end(),
                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    res.theta = v[0].t;
    res.value = v[0].f;
    res.iterations = iter;
    res.starts = 1;
    return res;
}

MinimizeResult minimize_multistart(const std::function<double(const Theta&)>& f,
                                   const ParamBox& box, const NmOptions& opt) {
    box.validate();
    const int k = std::max(1, opt.starts_per_dim);
    MinimizeResult best;
    bool first = true;
    int starts = 0;
    for (int i = 1; i <= k; ++i) {
        const double fp = double(i) / double(k + 1);
        for (int j = 1; j <= k; ++j) {
            const double fs = double(j) / double(k + 1);
            const Theta start{box.phi_lo + fp * (box.phi_hi - box.phi_lo),
                              box.s2_lo + fs * (box.s2_hi - box.s2_lo)};
            MinimizeResult r = nelder_mead_box(f, start, box, opt);
            ++starts;
            if (first || r.value < best.value) {
                best = r;
                first = false;
            }
        }
    }
    best.starts = starts;
    return best;
}

}  // namespace hsm
