#include "bsdekit/rbsde.hpp"

#include <algorithm>
#include <cmath>

namespace bsdekit {

double ReflectedSolution::complementarity_violation(double gap_tol) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < y_tilde.n_slices; ++i)
        for (std::size_t j = 0; j < y_tilde.n_points; ++j) {
            const double dk = dk_tilde.at(i, j);
            if (dk <= 1e-12) continue;
            if (std::fabs(y_tilde.at(i, j) - s_nodes.at(i, j)) > gap_tol)
                worst = std::max(worst, dk);
        }
    return worst;
}

double ReflectedSolution::skorokhod_residual() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < y_tilde.n_slices; ++i)
        for (std::size_t j = 0; j < y_tilde.n_points; ++j) {
            const double dk = dk_tilde.at(i, j);
            if (dk > 0.0) acc += dk * (y_tilde.at(i, j) - s_nodes.at(i, j));
        }
    return acc;
}

ReflectedSolution solve_reflected(const Model& model, const Lattice& lat,
                                  const VolPolicy& policy,
                                  const std::vector<double>& terminal,
                                  const Barrier& barrier,
                                  std::optional<double> cap) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    if (terminal.size() != static_cast<std::size_t>(np))
        throw ConfigError("terminal slice size does not match the state grid");
    for (double v : terminal)
        if (!std::isfinite(v))
            throw NumericError("terminal data must be finite");
    if (!barrier.none && !barrier.s_fn)
        throw ConfigError("barrier has no obstacle function");

    ReflectedSolution out;
    out.cap = cap;
    out.s_nodes = Field(static_cast<std::size_t>(n) + 1,
                        static_cast<std::size_t>(np), -kInf);
    if (!barrier.none) {
        for (int i = 0; i <= n; ++i) {
            const double t = lat.tg.node(i);
            for (int j = 0; j < np; ++j)
                out.s_nodes.at(static_cast<std::size_t>(i),
                               static_cast<std::size_t>(j)) =
                    barrier.s_fn(t, lat.sg.node(j));
        }
        for (int j = 0; j < np; ++j)
            if (out.s_nodes.at(static_cast<std::size_t>(n),
                               static_cast<std::size_t>(j)) >
                terminal[static_cast<std::size_t>(j)] + 1e-12)
                throw ConfigError(
                    "obstacle exceeds the terminal data at the horizon");
    }

    out.y_tilde = Field(static_cast<std::size_t>(n) + 1,
                        static_cast<std::size_t>(np), 0.0);
    out.dk_tilde = Field(static_cast<std::size_t>(n) + 1,
                         static_cast<std::size_t>(np), 0.0);
    std::copy(terminal.begin(), terminal.end(),
              out.y_tilde.slice(static_cast<std::size_t>(n)));

    const double dt = lat.tg.dt();
    for (int i = n - 1; i >= 0; --i) {
        const double t = lat.tg.node(i);
        const double* next = out.y_tilde.slice(static_cast<std::size_t>(i) + 1);
        double* cur = out.y_tilde.slice(static_cast<std::size_t>(i));
        double* dk = out.dk_tilde.slice(static_cast<std::size_t>(i));
        for (int j = 0; j < np; ++j) {
            const int k = policy(i, j);
            const double x = lat.sg.node(j);
            const double c = lat.cond_exp(i, k, next, j);
            const NodeDriver drv =
                make_node_driver(model.gen, t, x, lat.vol(k), cap);
            const double istep = implicit_step(c, dt, drv, &out.meta);
            const double s = out.s_nodes.at(static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(j));
            const double yv = std::max(istep, s);
            cur[j] = yv;
            dk[j] = yv - istep;
        }
    }
    return out;
}

double snell_check(const ReflectedSolution& sol, const Model& model,
                   const Lattice& lat, const VolPolicy& policy) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    const double dt = lat.tg.dt();

    std::vector<double> v_next(sol.y_tilde.slice(static_cast<std::size_t>(n)),
                               sol.y_tilde.slice(static_cast<std::size_t>(n)) +
                                   np);
    std::vector<double> v_cur(static_cast<std::size_t>(np));
    double gap = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        const double t = lat.tg.node(i);
        for (int j = 0; j < np; ++j) {
            const int k = policy(i, j);
            const double x = lat.sg.node(j);
            const double a = lat.vol(k);
            const double f0 =
                evaluate_driver(model.gen, t, x, a, 0.0, sol.cap);
            const double cont = lat.cond_exp(i, k, v_next.data(), j);
            double value;
            if (model.gen.has_y_term) {
                const double yv = sol.y_tilde.at(static_cast<std::size_t>(i),
                                                 static_cast<std::size_t>(j));
                double lam = 0.0;
                if (std::fabs(yv) > 1e-12)
                    lam = (evaluate_driver(model.gen, t, x, a, yv, sol.cap) -
                           f0) /
                          yv;
                value = f0 * dt + std::exp(lam * dt) * cont;
            } else {
                value = f0 * dt + cont;
            }
            const double s = sol.s_nodes.at(static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(j));
            const double vv = std::max(value, s);
            v_cur[static_cast<std::size_t>(j)] = vv;
            gap = std::max(gap, std::fabs(vv - sol.y_tilde.at(
                                                   static_cast<std::size_t>(i),
                                                   static_cast<std::size_t>(j))));
        }
        std::swap(v_cur, v_next);
    }
    return gap;
}

} // namespace bsdekit
