#include "bsdekit/bsde2.hpp"

#include <algorithm>
#include <cmath>

namespace bsdekit {

double Solution2::y0(const Lattice& lat) const {
    const int j0 = lat.sg.nearest(0.0);
    return y_upper.at(0, static_cast<std::size_t>(j0));
}

namespace {

double lambda_at(const GeneratorSpec& gen, double t, double x, double a,
                 double y_up, double y_lo) {
    if (!gen.has_y_term) return 0.0;
    const double inv = gen.inv_eta_pow(t, x, a);
    if (std::fabs(y_up - y_lo) > 1e-12) {
        // running-reward part cancels in the difference
        const double fu = -pow_signed(y_up, gen.q) * inv;
        const double fl = -pow_signed(y_lo, gen.q) * inv;
        return (fu - fl) / (y_up - y_lo);
    }
    return -gen.q * pow_abs(y_up, gen.q - 1.0) * inv;
}

} // namespace

Solution2 solve_2bsde(const Model& model, const Lattice& lat,
                      const std::vector<double>& terminal,
                      std::optional<double> cap) {
    // Structural checks are cheap and always run; the full nodewise scan
    // lives in validate_model and is performed once per run by the pipeline.
    if (std::fabs((model.gen.theta - 1.0) * (model.gen.q - 1.0) - 1.0) > 1e-12)
        throw ConfigError("model validation failed: conjugacy (theta-1)(q-1)=1");
    if (lat.n_vols() < 1 || lat.n_vols() > 256)
        throw ConfigError("model validation failed: uncertainty grid size");
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    const int m = lat.n_vols();
    if (static_cast<int>(terminal.size()) != np)
        throw ConfigError("terminal slice size does not match the state grid");

    Solution2 sol;
    const auto slices = static_cast<std::size_t>(n) + 1;
    const auto points = static_cast<std::size_t>(np);
    sol.y_upper = Field(slices, points);
    sol.policy.assign(slices * points, 0);
    sol.dk.reserve(static_cast<std::size_t>(m));
    sol.lambda.reserve(static_cast<std::size_t>(m));
    sol.y_single.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        sol.dk.emplace_back(slices, points);
        sol.lambda.emplace_back(slices, points);
        sol.y_single.push_back(
            solve_bsde_single(model, lat, constant_policy(k), terminal, cap));
    }

    std::copy(terminal.begin(), terminal.end(),
              sol.y_upper.slice(slices - 1));

    const double dt = lat.tg.dt();
    SolverStats stats;
    for (int i = n - 1; i >= 0; --i) {
        const double t = lat.tg.node(i);
        const double* next = sol.y_upper.slice(static_cast<std::size_t>(i) + 1);
        double* cur = sol.y_upper.slice(static_cast<std::size_t>(i));
        for (int j = 0; j < np; ++j) {
            const double x = lat.sg.node(j);
            double best = -kInf;
            int best_k = 0;
            double cand[256];
            for (int k = 0; k < m; ++k) {
                const NodeDriver d =
                    make_node_driver(model.gen, t, x, lat.vol(k), cap);
                const double c = lat.cond_exp(i, k, next, j);
                const double v = implicit_step(c, dt, d, &stats);
                cand[k] = v;
                if (v > best) { // strict: ties keep the smallest index
                    best = v;
                    best_k = k;
                }
            }
            cur[j] = best;
            sol.policy[static_cast<std::size_t>(i) * points +
                       static_cast<std::size_t>(j)] =
                static_cast<std::uint8_t>(best_k);
            for (int k = 0; k < m; ++k)
                sol.dk[static_cast<std::size_t>(k)].at(
                    static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    best - cand[k];
        }
    }

    for (int k = 0; k < m; ++k) {
        const Field& ya = sol.y_single[static_cast<std::size_t>(k)].y;
        Field& lam = sol.lambda[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) {
            const double t = lat.tg.node(i);
            for (int j = 0; j < np; ++j) {
                lam.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    lambda_at(model.gen, t, lat.sg.node(j), lat.vol(k),
                              sol.y_upper.at(static_cast<std::size_t>(i),
                                             static_cast<std::size_t>(j)),
                              ya.at(static_cast<std::size_t>(i),
                                    static_cast<std::size_t>(j)));
            }
        }
    }
    return sol;
}

Field lambda_field(const Field& y_upper, const Field& y_a, const Model& model,
                   const Lattice& lat, int a_idx, std::optional<double>) {
    if (!y_upper.same_shape(y_a))
        throw ConfigError("lambda_field: mismatched grids");
    Field lam(y_upper.n_slices, y_upper.n_points);
    for (std::size_t i = 0; i + 1 < y_upper.n_slices; ++i) {
        const double t = lat.tg.node(static_cast<int>(i));
        for (std::size_t j = 0; j < y_upper.n_points; ++j) {
            lam.at(i, j) = lambda_at(model.gen, t,
                                     lat.sg.node(static_cast<int>(j)),
                                     lat.vol(a_idx), y_upper.at(i, j),
                                     y_a.at(i, j));
        }
    }
    return lam;
}

double minimality_diagnostic(const Solution2& sol, const Model& model,
                             const Lattice& lat, std::optional<double> cap) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    const double dt = lat.tg.dt();

    // Value under the argmax policy itself (reproduces the Bellman recursion).
    std::vector<double> terminal(sol.y_upper.slice(sol.n_slices() - 1),
                                 sol.y_upper.slice(sol.n_slices() - 1) + np);
    const VolPolicy pol = [&sol](int i, int j) {
        return sol.policy_at(static_cast<std::size_t>(i),
                             static_cast<std::size_t>(j));
    };
    const BackwardSolution ypol =
        solve_bsde_single(model, lat, pol, terminal, cap);

    // Exact forward propagation of w(j) = E[ 1_{X=j} * exp(sum lambda dt) ].
    std::vector<double> w(static_cast<std::size_t>(np), 0.0);
    std::vector<double> wn(static_cast<std::size_t>(np), 0.0);
    w[static_cast<std::size_t>(lat.sg.nearest(0.0))] = 1.0;

    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = lat.tg.node(i);
        std::fill(wn.begin(), wn.end(), 0.0);
        for (int j = 0; j < np; ++j) {
            const double wj = w[static_cast<std::size_t>(j)];
            if (wj == 0.0) continue;
            const int k = sol.policy_at(static_cast<std::size_t>(i),
                                        static_cast<std::size_t>(j));
            acc += wj * sol.dk[static_cast<std::size_t>(k)].at(
                            static_cast<std::size_t>(i),
                            static_cast<std::size_t>(j));
            const double lam =
                lambda_at(model.gen, t, lat.sg.node(j), lat.vol(k),
                          sol.y_upper.at(static_cast<std::size_t>(i),
                                         static_cast<std::size_t>(j)),
                          ypol.y.at(static_cast<std::size_t>(i),
                                    static_cast<std::size_t>(j)));
            const double g = wj * std::exp(lam * dt);
            const SliceKernel kr = lat.kernel(i, k);
            if (j == 0) {
                wn[0] += g * kr.lo_stay;
                wn[1] += g * kr.lo_up;
            } else if (j == np - 1) {
                wn[static_cast<std::size_t>(np - 2)] += g * kr.hi_down;
                wn[static_cast<std::size_t>(np - 1)] += g * kr.hi_stay;
            } else {
                wn[static_cast<std::size_t>(j - 1)] += g * kr.pd;
                wn[static_cast<std::size_t>(j)] += g * kr.pm;
                wn[static_cast<std::size_t>(j + 1)] += g * kr.pu;
            }
        }
        std::swap(w, wn);
    }
    return acc;
}

double k_total(const Solution2& sol, const Lattice& lat, int a_idx) {
    const int n = lat.tg.n_steps;
    const int np = lat.sg.n_points;
    std::vector<double> p(static_cast<std::size_t>(np), 0.0);
    std::vector<double> pn(static_cast<std::size_t>(np), 0.0);
    p[static_cast<std::size_t>(lat.sg.nearest(0.0))] = 1.0;

    double acc = 0.0;
    const Field& dk = sol.dk[static_cast<std::size_t>(a_idx)];
    for (int i = 0; i < n; ++i) {
        std::fill(pn.begin(), pn.end(), 0.0);
        const SliceKernel kr = lat.kernel(i, a_idx);
        for (int j = 0; j < np; ++j) {
            const double pj = p[static_cast<std::size_t>(j)];
            if (pj == 0.0) continue;
            acc += pj * dk.at(static_cast<std::size_t>(i),
                              static_cast<std::size_t>(j));
            if (j == 0) {
                pn[0] += pj * kr.lo_stay;
                pn[1] += pj * kr.lo_up;
            } else if (j == np - 1) {
                pn[static_cast<std::size_t>(np - 2)] += pj * kr.hi_down;
                pn[static_cast<std::size_t>(np - 1)] += pj * kr.hi_stay;
            } else {
                pn[static_cast<std::size_t>(j - 1)] += pj * kr.pd;
                pn[static_cast<std::size_t>(j)] += pj * kr.pm;
                pn[static_cast<std::size_t>(j + 1)] += pj * kr.pu;
            }
        }
        std::swap(p, pn);
    }
    return acc;
}

} // namespace bsdekit
