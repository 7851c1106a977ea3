#include "bsdekit/bsde.hpp"

#include "bsdekit/io.hpp"
#include "bsdekit/mollify.hpp"
#include "bsdekit/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace bsdekit {

NodeDriver make_node_driver(const GeneratorSpec& gen, double t, double x,
                            double a, std::optional<double> cap) {
    NodeDriver d;
    double g = gen.gamma_fn ? gen.gamma_fn(t, x, a) : 0.0;
    if (cap) g = std::min(g, *cap);
    d.f0 = g;
    d.q = gen.q;
    d.inv_pow = gen.inv_eta_pow(t, x, a);
    return d;
}

namespace {

// Shared root-finding core.  Eval must provide f(y); Slope provides f'(y)
// or NaN to request a secant estimate.
template <typename Eval, typename Slope>
double implicit_step_impl(double c, double dt, Eval&& f, Slope&& fp,
                          SolverStats* stats) {
    if (!(dt > 0.0)) throw ConfigError("implicit step needs dt > 0");
    if (!std::isfinite(c))
        throw NumericError("implicit step: non-finite continuation value");

    const auto g = [&](double y) { return y - c - dt * f(y); };

    // f monotone non-increasing => g strictly increasing => unique root in
    // any sign-changing bracket.
    double r = std::fabs(c) + dt * std::fabs(f(0.0)) + 1.0;
    double lo = -r, hi = r;
    double glo = g(lo), ghi = g(hi);
    int expand = 0;
    while (glo > 0.0 || ghi < 0.0) {
        r *= 2.0;
        lo = -r;
        hi = r;
        glo = g(lo);
        ghi = g(hi);
        if (++expand > 200 || !std::isfinite(r))
            throw SolverError("implicit step: bracket expansion failed (c=" +
                              fmt17(c) + ", dt=" + fmt17(dt) + ")");
    }
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;

    double y = std::clamp(c, lo, hi);
    double gy = g(y);
    int it = 0;
    const int max_iter = 200;
    while (std::fabs(gy) > 1e-12 * (1.0 + std::fabs(y))) {
        if (++it > max_iter)
            throw SolverError("implicit step: no convergence after 200 "
                              "iterations (c=" + fmt17(c) + ", dt=" + fmt17(dt) +
                              ", residual=" + fmt17(gy) + ")");
        if (gy > 0.0) hi = y; else lo = y;

        double slope = fp(y);
        double step_to;
        if (std::isfinite(slope)) {
            const double gprime = 1.0 - dt * slope;
            step_to = gprime > 0.0 ? y - gy / gprime : lo - 1.0; // force bisection
        } else {
            step_to = lo - 1.0;
        }
        if (!(step_to > lo) || !(step_to < hi)) step_to = 0.5 * (lo + hi);
        y = step_to;
        gy = g(y);
    }
    if (stats) {
        stats->newton_iterations += it;
        stats->max_iterations_step = std::max(stats->max_iterations_step, it);
        stats->max_residual = std::max(stats->max_residual, std::fabs(gy));
    }
    return y;
}

} // namespace

double implicit_step(double c, double dt, const NodeDriver& driver,
                     SolverStats* stats) {
    return implicit_step_impl(
        c, dt, [&](double y) { return driver(y); },
        [&](double y) { return driver.slope(y); }, stats);
}

double implicit_step(double c, double dt,
                     const std::function<double(double)>& driver,
                     SolverStats* stats) {
    return implicit_step_impl(
        c, dt, [&](double y) { return driver(y); },
        [](double) { return std::numeric_limits<double>::quiet_NaN(); }, stats);
}

VolPolicy constant_policy(int a_idx) {
    return [a_idx](int, int) { return a_idx; };
}

namespace {

template <typename StepFn>
BackwardSolution solve_single_impl(const Model& model, const Lattice& lat,
                                   const VolPolicy& policy,
                                   const std::vector<double>& terminal,
                                   StepFn&& step_fn) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    if (static_cast<int>(terminal.size()) != np)
        throw ConfigError("terminal slice size does not match the state grid");
    for (double v : terminal)
        if (!std::isfinite(v))
            throw ConfigError("terminal slice must be finite (truncate first)");

    BackwardSolution sol;
    sol.y = Field(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(np));
    sol.z = Field(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(np));
    std::copy(terminal.begin(), terminal.end(), sol.y.slice(static_cast<std::size_t>(n)));

    const double dt = lat.tg.dt();
    for (int i = n - 1; i >= 0; --i) {
        const double t = lat.tg.node(i);
        const double* next = sol.y.slice(static_cast<std::size_t>(i) + 1);
        double* cur = sol.y.slice(static_cast<std::size_t>(i));
        double* zcur = sol.z.slice(static_cast<std::size_t>(i));
        for (int j = 0; j < np; ++j) {
            const int k = policy(i, j);
            const double x = lat.sg.node(j);
            const double a = lat.vol(k);
            const double c = lat.cond_exp(i, k, next, j);
            cur[j] = step_fn(model.gen, t, x, a, c, dt, sol.meta);
            zcur[j] = lat.z_coeff(i, k, next, j);
        }
    }
    return sol;
}

} // namespace

BackwardSolution solve_bsde_single(const Model& model, const Lattice& lat,
                                   const VolPolicy& policy,
                                   const std::vector<double>& terminal,
                                   std::optional<double> cap) {
    return solve_single_impl(
        model, lat, policy, terminal,
        [&cap](const GeneratorSpec& gen, double t, double x, double a, double c,
               double dt, SolverStats& st) {
            const NodeDriver d = make_node_driver(gen, t, x, a, cap);
            return implicit_step(c, dt, d, &st);
        });
}

BackwardSolution solve_bsde_single_mollified(const Model& model,
                                             const Lattice& lat,
                                             const VolPolicy& policy,
                                             const std::vector<double>& terminal,
                                             std::optional<double> cap,
                                             int mollify_level) {
    // One mollifier radius per run; the growth constant is the sup of the
    // driver's curvature scale over the lattice, as in the generator bound.
    double lq = 0.0;
    for (int i = 0; i <= lat.tg.n_steps; ++i)
        for (int j = 0; j < lat.sg.n_points; ++j)
            for (int k = 0; k < lat.n_vols(); ++k)
                lq = std::max(lq, model.gen.inv_eta_pow(lat.tg.node(i),
                                                        lat.sg.node(j),
                                                        lat.vol(k)));
    MollifierSpec mspec;
    mspec.n = mollify_level;
    mspec.l_q = lq;
    mspec.horizon = lat.tg.horizon;

    return solve_single_impl(
        model, lat, policy, terminal,
        [&cap, &mspec](const GeneratorSpec& gen, double t, double x, double a,
                       double c, double dt, SolverStats& st) {
            const NodeDriver d = make_node_driver(gen, t, x, a, cap);
            const auto hn = build_mollified([d](double y) { return d(y); }, mspec);
            return implicit_step(c, dt, hn, &st);
        });
}

Field linearized_representation(const Model& model, const Lattice& lat,
                                const VolPolicy& policy,
                                const BackwardSolution& sol,
                                const std::vector<double>& terminal,
                                std::optional<double> cap) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    Field w(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(np));
    std::copy(terminal.begin(), terminal.end(), w.slice(static_cast<std::size_t>(n)));
    const double dt = lat.tg.dt();
    for (int i = n - 1; i >= 0; --i) {
        const double t = lat.tg.node(i);
        const double* next = w.slice(static_cast<std::size_t>(i) + 1);
        double* cur = w.slice(static_cast<std::size_t>(i));
        for (int j = 0; j < np; ++j) {
            const int k = policy(i, j);
            const double x = lat.sg.node(j);
            const double a = lat.vol(k);
            const NodeDriver d = make_node_driver(model.gen, t, x, a, cap);
            const double yv = sol.y.at(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j));
            const double lambda = yv != 0.0 ? (d(yv) - d.f0) / yv : 0.0;
            cur[j] = d.f0 * dt +
                     std::exp(lambda * dt) * lat.cond_exp(i, k, next, j);
        }
    }
    return w;
}

ComparisonReport compare_fields(const Field& y1, const Field& y2) {
    if (!y1.same_shape(y2))
        throw ConfigError("cannot compare solutions on different grids");
    ComparisonReport rep;
    for (std::size_t i = 0; i < y1.n_slices; ++i) {
        for (std::size_t j = 0; j < y1.n_points; ++j) {
            const double d = y1.at(i, j) - y2.at(i, j);
            if (d > rep.max_violation) {
                rep.max_violation = d;
                rep.arg_slice = i;
                rep.arg_node = j;
            }
            rep.max_abs_diff = std::max(rep.max_abs_diff, std::fabs(d));
        }
    }
    return rep;
}

ComparisonReport compare_solutions(const BackwardSolution& sol1,
                                   const BackwardSolution& sol2) {
    return compare_fields(sol1.y, sol2.y);
}

} // namespace bsdekit
