#include "bsdekit/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bsdekit {

Solution2 solve_truncated(const Model& model, const Lattice& lat, double level) {
    if (level < 0.0) throw ConfigError("truncation level must be non-negative");
    const std::vector<double> term = terminal_slice(model.term, lat.sg, level);
    return solve_2bsde(model, lat, term, level);
}

Field apriori_bound_field(const Model& model, const Lattice& lat) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    const int m = lat.n_vols();
    const double dt = lat.tg.dt();
    const double T = lat.tg.horizon;

    Field u(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(np), 0.0);
    for (int i = n - 1; i >= 0; --i) {
        const double t = lat.tg.node(i);
        const double wt = pow_abs(T - t, model.gen.theta);
        const double* next = u.slice(static_cast<std::size_t>(i) + 1);
        double* cur = u.slice(static_cast<std::size_t>(i));
        for (int j = 0; j < np; ++j) {
            const double x = lat.sg.node(j);
            double best = -kInf;
            for (int k = 0; k < m; ++k) {
                const double a = lat.vol(k);
                const double reward =
                    model.gen.eta_fn(t, x, a) +
                    wt * (model.gen.gamma_fn ? model.gen.gamma_fn(t, x, a) : 0.0);
                best = std::max(best, lat.cond_exp(i, k, next, j) + dt * reward);
            }
            cur[j] = best;
        }
    }
    return u;
}

namespace {

// min over interior-time nodes of U - (T-t)^theta * Y.
double bound_slack(const Field& y, const Field& u, const Model& model,
                   const Lattice& lat) {
    const double T = lat.tg.horizon;
    double slack = kInf;
    for (std::size_t i = 0; i + 1 < y.n_slices; ++i) {
        const double wt = pow_abs(T - lat.tg.node(static_cast<int>(i)),
                                  model.gen.theta);
        for (std::size_t j = 0; j < y.n_points; ++j)
            slack = std::min(slack, u.at(i, j) - wt * y.at(i, j));
    }
    return slack;
}

} // namespace

SingularSolution solve_singular(const Model& model, const Lattice& lat,
                                const TruncationLadder& ladder) {
    if (!(ladder.l0 > 0.0)) throw ConfigError("ladder base level must be positive");
    if (!(ladder.growth > 1.0)) throw ConfigError("ladder growth must exceed 1");
    if (!(ladder.eps_cutoff > 0.0 && ladder.eps_cutoff < lat.tg.horizon))
        throw ConfigError("ladder cutoff must lie strictly inside the horizon");
    if (ladder.max_levels < 1) throw ConfigError("ladder needs at least one level");

    const double T = lat.tg.horizon;
    const double dt = lat.tg.dt();
    SingularSolution out;
    out.i_eps = static_cast<int>(
        std::floor((T - ladder.eps_cutoff) / dt + 1e-12));
    out.i_eps = std::clamp(out.i_eps, 0, lat.tg.n_steps);

    const Field u = apriori_bound_field(model, lat);
    Field prev;
    double level = ladder.l0;
    for (int k = 0; k < ladder.max_levels; ++k) {
        Solution2 sol = solve_truncated(model, lat, level);
        LevelDiagnostics diag;
        diag.level = level;
        diag.y0 = sol.y0(lat);
        diag.bound_slack = bound_slack(sol.y_upper, u, model, lat);

        if (k > 0) {
            double sup = 0.0;
            for (std::size_t i = 0;
                 i <= static_cast<std::size_t>(out.i_eps); ++i)
                for (std::size_t j = 0; j < sol.y_upper.n_points; ++j)
                    sup = std::max(sup, std::fabs(sol.y_upper.at(i, j) -
                                                  prev.at(i, j)));
            diag.sup_increment = sup;
            out.increments.push_back(sup);

            double viol = 0.0;
            for (std::size_t i = 0; i < sol.y_upper.n_slices; ++i)
                for (std::size_t j = 0; j < sol.y_upper.n_points; ++j)
                    viol = std::max(viol, prev.at(i, j) - sol.y_upper.at(i, j));
            diag.monotone_violation = std::max(viol, 0.0);
        }

        out.levels_used.push_back(level);
        out.table.push_back(diag);
        prev = std::move(sol.y_upper);

        if (k > 0 && out.increments.back() < ladder.tol) {
            out.converged = true;
            break;
        }
        level *= ladder.growth;
    }
    out.y_limit = std::move(prev);
    try {
        out.profile_exponent = blowup_profile_fit(out, model, lat);
    } catch (const NumericError&) {
        // Too few usable nodes near the cutoff (coarse grids, vanishing
        // values): the fit is a diagnostic, not a result, so don't fail.
        out.profile_exponent = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double blowup_profile_fit(const SingularSolution& sing, const Model& model,
                          const Lattice& lat) {
    (void)model;
    const int j0 = lat.sg.nearest(0.0);
    const double T = lat.tg.horizon;
    const int i_hi = sing.i_eps;
    const double t_hi = lat.tg.node(i_hi);
    const double t_lo = 0.75 * t_hi;

    std::vector<double> lx, ly;
    for (int i = 0; i <= i_hi; ++i) {
        const double t = lat.tg.node(i);
        if (t < t_lo) continue;
        const double yv = sing.y_limit.at(static_cast<std::size_t>(i),
                                          static_cast<std::size_t>(j0));
        if (!(yv > 0.0)) continue;
        lx.push_back(std::log(T - t));
        ly.push_back(std::log(yv));
    }
    if (lx.size() < 4)
        throw NumericError("profile fit needs at least 4 usable nodes");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double nn = static_cast<double>(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = nn * sxx - sx * sx;
    if (std::fabs(denom) < 1e-30)
        throw NumericError("profile fit is degenerate (constant abscissa)");
    return (nn * sxy - sx * sy) / denom;
}

} // namespace bsdekit
