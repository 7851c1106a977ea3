#include "bsdekit/lattice.hpp"

#include "bsdekit/io.hpp"

#include <algorithm>
#include <cmath>

namespace bsdekit {

TimeGrid make_time_grid(double horizon, int n_steps) {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (n_steps < 1) throw ConfigError("n_steps must be at least 1");
    return TimeGrid{0.0, horizon, n_steps};
}

int StateGrid::nearest(double x) const {
    const double j = (x - x_min) / dx();
    const long r = std::lround(j);
    return static_cast<int>(std::clamp(r, 0l, static_cast<long>(n_points - 1)));
}

StateGrid make_state_grid(double x_min, double x_max, int n_points) {
    if (!(x_min < x_max)) throw ConfigError("state grid requires x_min < x_max");
    if (n_points < 3) throw ConfigError("state grid needs at least 3 points");
    return StateGrid{x_min, x_max, n_points};
}

SliceKernel Lattice::kernel(int step, int a_idx) const {
    const double a = vol(a_idx);
    const double b = drift(step, a_idx);
    const double dt = tg.dt();
    const double dx = sg.dx();
    const double nu = b * dt / dx;
    const double mu = (a * dt + b * dt * b * dt) / (dx * dx);

    SliceKernel k{};
    k.pu = 0.5 * (mu + nu);
    k.pd = 0.5 * (mu - nu);
    k.pm = 1.0 - mu;
    k.m1 = b * dt;

    // One-sided edge rows: match the first moment when the drift points
    // toward the interior, otherwise stay put (zero first moment).
    if (nu >= 0.0) {
        k.lo_up = nu;
        k.lo_stay = 1.0 - nu;
        k.lo_m1 = b * dt;
        k.hi_down = 0.0;
        k.hi_stay = 1.0;
        k.hi_m1 = 0.0;
    } else {
        k.lo_up = 0.0;
        k.lo_stay = 1.0;
        k.lo_m1 = 0.0;
        k.hi_down = -nu;
        k.hi_stay = 1.0 + nu;
        k.hi_m1 = b * dt;
    }
    return k;
}

double Lattice::cond_exp(int step, int a_idx, const double* next, int j) const {
    const SliceKernel k = kernel(step, a_idx);
    const int last = sg.n_points - 1;
    if (j == 0) return k.lo_stay * next[0] + k.lo_up * next[1];
    if (j == last) return k.hi_down * next[last - 1] + k.hi_stay * next[last];
    return k.pd * next[j - 1] + k.pm * next[j] + k.pu * next[j + 1];
}

double Lattice::z_coeff(int step, int a_idx, const double* next, int j) const {
    const SliceKernel k = kernel(step, a_idx);
    const double a = vol(a_idx);
    const double dt = tg.dt();
    const double dx = sg.dx();
    const int last = sg.n_points - 1;
    double cov;
    if (j == 0) {
        cov = k.lo_stay * next[0] * (0.0 - k.lo_m1) +
              k.lo_up * next[1] * (dx - k.lo_m1);
    } else if (j == last) {
        cov = k.hi_down * next[last - 1] * (-dx - k.hi_m1) +
              k.hi_stay * next[last] * (0.0 - k.hi_m1);
    } else {
        cov = k.pd * next[j - 1] * (-dx - k.m1) + k.pm * next[j] * (0.0 - k.m1) +
              k.pu * next[j + 1] * (dx - k.m1);
    }
    return cov / (a * dt);
}

Lattice build_lattice(const TimeGrid& tg, const StateGrid& sg,
                      const UncertaintySet& unc) {
    if (unc.vol_grid.empty()) throw ConfigError("empty uncertainty set");
    Lattice lat{tg, sg, unc};
    const double dt = tg.dt();
    const double dx = sg.dx();
    for (std::size_t k = 0; k < unc.vol_grid.size(); ++k) {
        const double a = unc.vol_grid[k];
        if (a * dt > dx * dx * (1.0 + 1e-12))
            throw ConfigError("lattice stability violated: a=" + fmt17(a) +
                              ", dt=" + fmt17(dt) + ", dx=" + fmt17(dx) +
                              " (needs a*dt <= dx^2)");
        for (int i = 0; i <= tg.n_steps; ++i) {
            const SliceKernel kr = lat.kernel(i, static_cast<int>(k));
            const double tol = -1e-15;
            if (kr.pd < tol || kr.pm < tol || kr.pu < tol ||
                kr.lo_up < tol || kr.lo_up > 1.0 + 1e-15 ||
                kr.hi_down < tol || kr.hi_down > 1.0 + 1e-15)
                throw ConfigError(
                    "lattice kernel weight negative: a=" + fmt17(a) +
                    ", dt=" + fmt17(dt) + ", dx=" + fmt17(dx) +
                    ", drift=" + fmt17(lat.drift(i, static_cast<int>(k))) +
                    " at step " + std::to_string(i));
            if (!unc.drift_fn) break; // kernels are time-invariant without drift
        }
    }
    return lat;
}

double conditional_expectation(const Lattice& lat, int step, int a_idx,
                               const std::vector<double>& next_slice, int node) {
    if (a_idx < 0 || a_idx >= lat.n_vols())
        throw ConfigError("volatility index outside the uncertainty grid");
    if (static_cast<int>(next_slice.size()) != lat.sg.n_points)
        throw ConfigError("slice size does not match the state grid");
    return lat.cond_exp(step, a_idx, next_slice.data(), node);
}

} // namespace bsdekit
