#include "bsdekit/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bsdekit {
namespace oracle {

namespace {

// Recursive adaptive Simpson.
double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

GeometricValue closed_form_geometric(double eta0,
                                     const std::function<double(double)>& b_fn,
                                     double theta, double horizon, double t) {
    if (!(theta > 1.0)) throw ConfigError("closed form needs exponent > 1");
    if (!(t < horizon)) throw ConfigError("closed form needs t < horizon");
    const double qm1 = 1.0 / (theta - 1.0); // conjugate exponent minus one

    const auto drift_integral = [&](double s) {
        return adaptive_simpson([&](double u) { return b_fn ? b_fn(u) : 0.0; },
                                0.0, s, 1e-12);
    };
    const auto inv_a = [&](double s) {
        return std::exp(-qm1 * drift_integral(s));
    };
    const double i_t = adaptive_simpson(inv_a, t, horizon, 1e-10);
    const double i_0 =
        t == 0.0 ? i_t : adaptive_simpson(inv_a, 0.0, horizon, 1e-10);
    const double a_t = std::exp(qm1 * drift_integral(t));

    GeometricValue out;
    out.y = eta0 / std::pow(a_t * i_t, theta - 1.0);
    out.inventory_ratio = i_t / i_0;
    return out;
}

double OdeSolution::eval(double t) const {
    if (ts.empty()) throw NumericError("empty oracle table");
    if (t <= ts.front()) return ys.front();
    if (t >= ts.back()) return ys.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return ys[lo] * (1.0 - w) + ys[hi] * w;
}

OdeSolution ode_oracle(const std::function<double(double)>& eta_t,
                       const std::function<double(double)>& gamma_t,
                       double theta, double horizon,
                       std::optional<double> cap, long n_fine) {
    if (n_fine < 100000)
        throw ConfigError("ode oracle requires n_fine >= 1e5");
    if (!(theta > 1.0)) throw ConfigError("ode oracle needs exponent > 1");
    const double q = theta / (theta - 1.0);

    const auto rhs = [&](double t, double y) {
        const double eta = eta_t(t);
        const double g = gamma_t ? gamma_t(t) : 0.0;
        return pow_abs(y, q) * (y < 0 ? -1.0 : 1.0) /
                   ((q - 1.0) * pow_abs(eta, q - 1.0)) -
               g;
    };

    double t_start, y_start;
    if (cap) {
        t_start = horizon;
        y_start = *cap;
    } else {
        const double delta = 1e-4 * horizon;
        t_start = horizon - delta;
        y_start = eta_t(horizon) * std::pow(delta, -(theta - 1.0));
        if (!std::isfinite(y_start))
            throw NumericError("ode oracle: blow-up seed overflowed near the "
                               "horizon (window [" + std::to_string(t_start) +
                               ", " + std::to_string(horizon) + "])");
    }

    const double h = t_start / static_cast<double>(n_fine); // step toward 0
    OdeSolution sol;
    sol.ts.resize(static_cast<std::size_t>(n_fine) + 1);
    sol.ys.resize(static_cast<std::size_t>(n_fine) + 1);
    double t = t_start, y = y_start;
    sol.ts.back() = t;
    sol.ys.back() = y;
    for (long i = n_fine - 1; i >= 0; --i) {
        const double k1 = rhs(t, y);
        const double k2 = rhs(t - 0.5 * h, y - 0.5 * h * k1);
        const double k3 = rhs(t - 0.5 * h, y - 0.5 * h * k2);
        const double k4 = rhs(t - h, y - h * k3);
        y -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t_start * static_cast<double>(i) / static_cast<double>(n_fine);
        if (!std::isfinite(y))
            throw NumericError("ode oracle: integration overflowed in window [" +
                               std::to_string(t) + ", " +
                               std::to_string(t_start) + "]");
        sol.ts[static_cast<std::size_t>(i)] = t;
        sol.ys[static_cast<std::size_t>(i)] = y;
    }
    return sol;
}

Field snell_oracle(double horizon, int n_steps, double x_min, double x_max,
                   int n_points, double a, double b,
                   const std::function<double(double, double)>& obstacle,
                   const std::vector<double>& terminal,
                   const std::function<double(double, double)>& reward) {
    if (n_steps > 15) throw ConfigError("snell oracle size cap is 15 steps");
    if (static_cast<int>(terminal.size()) != n_points)
        throw ConfigError("snell oracle terminal size mismatch");

    const double dt = horizon / n_steps;
    const double dx = (x_max - x_min) / (n_points - 1);
    const double nu = b * dt / dx;
    const double mu = (a * dt + b * dt * b * dt) / (dx * dx);
    const double pu = 0.5 * (mu + nu);
    const double pd = 0.5 * (mu - nu);
    const double pm = 1.0 - mu;
    if (pu < -1e-15 || pd < -1e-15 || pm < -1e-15)
        throw ConfigError("snell oracle: tree weights negative");

    Field v(static_cast<std::size_t>(n_steps) + 1,
            static_cast<std::size_t>(n_points));
    for (int j = 0; j < n_points; ++j)
        v.at(static_cast<std::size_t>(n_steps), static_cast<std::size_t>(j)) =
            terminal[static_cast<std::size_t>(j)];

    for (int i = n_steps - 1; i >= 0; --i) {
        const double t = dt * i;
        const double* nxt = v.slice(static_cast<std::size_t>(i) + 1);
        double* cur = v.slice(static_cast<std::size_t>(i));
        for (int j = 0; j < n_points; ++j) {
            const double x = j == n_points - 1 ? x_max : x_min + dx * j;
            double cont;
            if (j == 0) {
                const double up = std::max(nu, 0.0);
                cont = (1.0 - up) * nxt[0] + up * nxt[1];
            } else if (j == n_points - 1) {
                const double dn = std::max(-nu, 0.0);
                cont = dn * nxt[j - 1] + (1.0 - dn) * nxt[j];
            } else {
                cont = pd * nxt[j - 1] + pm * nxt[j] + pu * nxt[j + 1];
            }
            const double f0 = reward ? reward(t, x) : 0.0;
            const double hold = f0 * dt + cont;
            const double stop = obstacle ? obstacle(t, x) : -kInf;
            cur[j] = std::max(stop, hold);
        }
    }
    return v;
}

} // namespace oracle
} // namespace bsdekit
