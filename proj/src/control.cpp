#include "bsdekit/control.hpp"

#include "bsdekit/io.hpp"
#include "bsdekit/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace bsdekit {

double optimal_rate(double y, double eta, double q, double x_state) {
    if (!(eta > 0.0)) throw ConfigError("optimal_rate needs eta > 0");
    const double urgency = pow_abs(std::max(y, 0.0) / eta, q - 1.0);
    return -urgency * x_state;
}

LatticePath stay_path(const Lattice& lat, int a_idx) {
    if (a_idx < 0 || a_idx >= lat.n_vols())
        throw ConfigError("stay_path: volatility index out of range");
    LatticePath p;
    p.nodes.assign(static_cast<std::size_t>(lat.tg.n_steps) + 1,
                   lat.sg.nearest(0.0));
    p.a_idx.assign(static_cast<std::size_t>(lat.tg.n_steps), a_idx);
    return p;
}

LatticePath stay_path_argmax(const Lattice& lat, const Solution2& sol) {
    LatticePath p;
    const int j0 = lat.sg.nearest(0.0);
    p.nodes.assign(static_cast<std::size_t>(lat.tg.n_steps) + 1, j0);
    p.a_idx.resize(static_cast<std::size_t>(lat.tg.n_steps));
    for (int i = 0; i < lat.tg.n_steps; ++i)
        p.a_idx[static_cast<std::size_t>(i)] = sol.policy_at(i, j0);
    return p;
}

Trajectory integrate_state(const Field& y_field, const Model& model,
                           const Lattice& lat, const LatticePath& path,
                           double x0) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    if (path.nodes.size() != static_cast<std::size_t>(n) + 1 ||
        path.a_idx.size() != static_cast<std::size_t>(n))
        throw ConfigError("lattice path does not match the time grid");
    if (y_field.n_slices < static_cast<std::size_t>(n) + 1 ||
        y_field.n_points != static_cast<std::size_t>(np))
        throw ConfigError("value field does not match the lattice");

    const double dt = lat.tg.dt();
    const double qm1 = model.gen.q - 1.0;
    Trajectory traj;
    traj.times.resize(static_cast<std::size_t>(n) + 1);
    traj.state.resize(static_cast<std::size_t>(n) + 1);
    traj.rate.assign(static_cast<std::size_t>(n) + 1, 0.0);
    traj.y.resize(static_cast<std::size_t>(n) + 1);
    traj.eta.resize(static_cast<std::size_t>(n) + 1);
    traj.nodes = path.nodes;

    double x = x0;
    for (int i = 0; i < n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        const int j = path.nodes[ii];
        const double t = lat.tg.node(i);
        const double a = lat.vol(path.a_idx[ii]);
        const double eta = model.gen.eta_fn(t, lat.sg.node(j), a);
        if (!(eta > 0.0)) throw NumericError("nonpositive eta along the path");
        const double yv = y_field.at(ii, static_cast<std::size_t>(j));
        const double factor = pow_abs(std::max(yv, 0.0) / eta, qm1);
        const double xn = x * std::exp(-factor * dt);
        traj.times[ii] = t;
        traj.state[ii] = x;
        traj.rate[ii] = (xn - x) / dt;
        traj.y[ii] = yv;
        traj.eta[ii] = eta;
        x = xn;
    }
    const std::size_t nn = static_cast<std::size_t>(n);
    traj.times[nn] = lat.tg.node(n);
    traj.state[nn] = x;
    traj.y[nn] = y_field.at(nn, static_cast<std::size_t>(path.nodes[nn]));
    traj.eta[nn] =
        n > 0 ? model.gen.eta_fn(lat.tg.node(n), lat.sg.node(path.nodes[nn]),
                                 lat.vol(path.a_idx[nn - 1]))
              : 0.0;
    return traj;
}

Strategy Strategy::feedback(const Field& y_field, double kappa) {
    Strategy s;
    s.kind = Kind::Feedback;
    s.kappa = kappa;
    s.y = &y_field;
    return s;
}

Strategy Strategy::twap() {
    Strategy s;
    s.kind = Kind::Twap;
    return s;
}

Strategy Strategy::zero() { return Strategy{}; }

MeasurePolicy MeasurePolicy::constant(const Lattice& lat, int a_idx) {
    if (a_idx < 0 || a_idx >= lat.n_vols())
        throw ConfigError("measure policy: volatility index out of range");
    MeasurePolicy p;
    p.label = "a=" + fmt17(lat.vol(a_idx));
    p.constant_k = a_idx;
    return p;
}

MeasurePolicy MeasurePolicy::argmax(const Solution2& sol) {
    MeasurePolicy p;
    p.label = "argmax";
    p.argmax_sol = &sol;
    return p;
}

CostEstimate simulate_cost(const Strategy& strategy, const Model& model,
                           const Lattice& lat, const MeasurePolicy& policy,
                           double x0, std::size_t n_paths, std::uint64_t seed,
                           std::optional<double> cap, double liq_tol) {
    if (n_paths < 1) throw ConfigError("simulate_cost needs at least one path");
    if (!policy.valid())
        throw ConfigError("measure policy has no selection rule");
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    const int m = lat.n_vols();
    const double dt = lat.tg.dt();
    const double theta = model.gen.theta;
    const double qm1 = model.gen.q - 1.0;
    const bool feedback = strategy.kind == Strategy::Kind::Feedback;
    if (feedback) {
        if (strategy.y == nullptr)
            throw ConfigError("feedback strategy has no value field");
        if (strategy.y->n_slices < static_cast<std::size_t>(n) + 1 ||
            strategy.y->n_points != static_cast<std::size_t>(np))
            throw ConfigError("feedback value field does not match the lattice");
    }
    const double liq = liq_tol < 0.0 ? 1e-6 * std::fabs(x0) : liq_tol;
    const double twap_step = (x0 / lat.tg.horizon) * dt;

    // Per-(step, node, vol) coefficient tables; the decay factor folds the
    // strategy's rate multiplier into the exponential integrator.
    const std::size_t stride = static_cast<std::size_t>(np) * m;
    std::vector<double> eta_t(static_cast<std::size_t>(n) * stride);
    std::vector<double> gam_t(static_cast<std::size_t>(n) * stride);
    std::vector<double> fac_t(feedback ? static_cast<std::size_t>(n) * stride
                                       : 0);
    for (int i = 0; i < n; ++i) {
        const double t = lat.tg.node(i);
        for (int j = 0; j < np; ++j) {
            const double x = lat.sg.node(j);
            for (int k = 0; k < m; ++k) {
                const std::size_t idx =
                    static_cast<std::size_t>(i) * stride +
                    static_cast<std::size_t>(j) * m + static_cast<std::size_t>(k);
                const double a = lat.vol(k);
                const double eta = model.gen.eta_fn(t, x, a);
                if (!(eta > 0.0))
                    throw NumericError("nonpositive eta in the cost tables");
                double g = model.gen.gamma_fn ? model.gen.gamma_fn(t, x, a) : 0.0;
                if (cap) g = std::min(g, *cap);
                eta_t[idx] = eta;
                gam_t[idx] = g;
                if (feedback) {
                    const double yv =
                        strategy.y->at(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j));
                    const double urg =
                        pow_abs(std::max(yv, 0.0) / eta, qm1) * strategy.kappa;
                    fac_t[idx] = std::exp(-urg * dt);
                }
            }
        }
    }
    std::vector<double> xi_j(static_cast<std::size_t>(np));
    std::vector<char> sing_j(static_cast<std::size_t>(np), 0);
    for (int j = 0; j < np; ++j) {
        const double x = lat.sg.node(j);
        if (cap) {
            xi_j[static_cast<std::size_t>(j)] = model.term.capped(x, *cap);
        } else {
            const bool s = model.term.singular_fn && model.term.singular_fn(x);
            sing_j[static_cast<std::size_t>(j)] = s ? 1 : 0;
            xi_j[static_cast<std::size_t>(j)] =
                s ? 0.0 : (model.term.xi_fn ? model.term.xi_fn(x) : 0.0);
        }
    }
    const int j0 = lat.sg.nearest(0.0);

    // Transition kernels depend only on (step, vol); hoist them out of the
    // path loop unless the lattice is too large to justify the table.
    const std::size_t n_kern =
        static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
    std::vector<SliceKernel> kern_t;
    if (n_kern <= (std::size_t{1} << 22)) {
        kern_t.reserve(n_kern);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < m; ++k) kern_t.push_back(lat.kernel(i, k));
    }
    const SliceKernel* kern_tab = kern_t.empty() ? nullptr : kern_t.data();

    std::vector<double> costs(n_paths);
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            SplitMix64 rng = path_stream(seed, p);
            int j = j0;
            double x = x0;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const int k = policy.at(i, j);
                const std::size_t idx =
                    static_cast<std::size_t>(i) * stride +
                    static_cast<std::size_t>(j) * m + static_cast<std::size_t>(k);
                double xn;
                switch (strategy.kind) {
                case Strategy::Kind::Feedback: xn = x * fac_t[idx]; break;
                case Strategy::Kind::Twap: xn = x - twap_step; break;
                default: xn = x; break;
                }
                const double al = (xn - x) / dt;
                acc += dt * (eta_t[idx] * pow_abs(al, theta) +
                             gam_t[idx] * pow_abs(x, theta));
                const SliceKernel kern =
                    kern_tab != nullptr
                        ? kern_tab[static_cast<std::size_t>(i) * m + k]
                        : lat.kernel(i, k);
                const double u = rng.uniform();
                if (j == 0) {
                    if (u < kern.lo_up) ++j;
                } else if (j == np - 1) {
                    if (u < kern.hi_down) --j;
                } else {
                    if (u < kern.pd) --j;
                    else if (u >= kern.pd + kern.pm) ++j;
                }
                x = xn;
            }
            if (!cap && sing_j[static_cast<std::size_t>(j)]) {
                if (std::fabs(x) > liq) acc = kInf; // failed to liquidate
            } else {
                acc += xi_j[static_cast<std::size_t>(j)] * pow_abs(x, theta);
            }
            costs[p] = acc;
        }
    });

    CostEstimate est;
    est.n_paths = n_paths;
    for (double c : costs)
        if (std::isinf(c)) ++est.n_infinite;
    double sum = 0.0;
    for (double c : costs) sum += c;
    est.mean = sum / static_cast<double>(n_paths);
    if (est.n_infinite > 0) {
        est.mean = kInf;
        est.se = kInf;
    } else if (n_paths > 1) {
        double ss = 0.0;
        for (double c : costs) {
            const double d = c - est.mean;
            ss += d * d;
        }
        const double var = ss / static_cast<double>(n_paths - 1);
        est.se = std::sqrt(var / static_cast<double>(n_paths));
    }
    return est;
}

CostEstimate worst_case_cost(const Strategy& strategy, const Model& model,
                             const Lattice& lat, const Solution2& sol,
                             double x0, std::size_t n_paths, std::uint64_t seed,
                             std::optional<double> cap, double liq_tol) {
    std::vector<MeasurePolicy> policies;
    for (int k = 0; k < lat.n_vols(); ++k)
        policies.push_back(MeasurePolicy::constant(lat, k));
    policies.push_back(MeasurePolicy::argmax(sol));

    CostEstimate best;
    std::vector<MeasureCost> table;
    bool have = false;
    for (const MeasurePolicy& pol : policies) {
        CostEstimate est = simulate_cost(strategy, model, lat, pol, x0,
                                         n_paths, seed, cap, liq_tol);
        table.push_back({pol.label, est.mean, est.se, est.n_infinite});
        if (!have || est.mean > best.mean) {
            have = true;
            best = std::move(est);
            best.attaining = pol.label;
        }
    }
    best.breakdown = std::move(table);
    return best;
}

VerificationReport verify_value(double y0, double theta, double x0,
                                const CostEstimate& cost, double lattice_tol) {
    VerificationReport rep;
    rep.candidate = y0 * pow_abs(x0, theta);
    rep.mc_mean = cost.mean;
    rep.se = cost.se;
    rep.gap = cost.mean - rep.candidate;
    rep.lattice_tol = lattice_tol;
    if (rep.gap == 0.0) rep.z = 0.0;
    else if (cost.se > 0.0) rep.z = rep.gap / cost.se;
    else rep.z = std::copysign(kInf, rep.gap);
    rep.pass = std::isfinite(rep.gap) &&
               std::fabs(rep.gap) <= 3.0 * cost.se + lattice_tol;
    return rep;
}

bool terminal_constraint_check(const Trajectory& traj, const TerminalSpec& term,
                               const Lattice& lat, double liq_tol) {
    if (traj.nodes.empty() || traj.state.empty()) return true;
    if (!term.singular_fn) return true;
    const double x_mkt = lat.sg.node(traj.nodes.back());
    if (!term.singular_fn(x_mkt)) return true;
    const double liq =
        liq_tol < 0.0 ? 1e-6 * std::fabs(traj.state.front()) : liq_tol;
    return std::fabs(traj.state.back()) <= liq;
}

} // namespace bsdekit
