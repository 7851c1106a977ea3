#pragma once

#include "bsdekit/bsde.hpp"

#include <optional>

namespace bsdekit {

// Lower obstacle for the reflected equation. A default-constructed Barrier
// (or none_barrier()) is the "no obstacle" sentinel: the solver treats the
// obstacle as -inf, so the reflection never binds and the output matches the
// unreflected solver bit for bit.
struct Barrier {
    std::function<double(double, double)> s_fn; // (t, x) -> lower obstacle
    bool none = true;

    static Barrier none_barrier() { return Barrier{}; }
    static Barrier of(std::function<double(double, double)> fn) {
        Barrier b;
        b.s_fn = std::move(fn);
        b.none = false;
        return b;
    }
};

struct ReflectedSolution {
    Field y_tilde;            // reflected value, slice n holds the terminal data
    Field dk_tilde;           // per-node reflection increment, >= 0
    Field s_nodes;            // obstacle discretized once on the lattice
    SolverStats meta;
    std::optional<double> cap; // running-reward cap used by the solve, if any

    // Largest dk_tilde over nodes where the solution sits strictly above the
    // obstacle (> gap_tol away): exactly 0 for the projection scheme.
    double complementarity_violation(double gap_tol = 1e-10) const;
    // Sum over nodes of dk_tilde * (y_tilde - obstacle).
    double skorokhod_residual() const;
};

// Backward projection scheme: per node take the implicit monotone step, then
// clip at the obstacle; the clipped amount is the reflection increment.
// Throws ConfigError when the obstacle exceeds the terminal data at t = T.
ReflectedSolution solve_reflected(const Model& model, const Lattice& lat,
                                  const VolPolicy& policy,
                                  const std::vector<double>& terminal,
                                  const Barrier& barrier,
                                  std::optional<double> cap = std::nullopt);

// Optimal-stopping cross-check. For drivers with no y term this is the exact
// stopping value (max abs gap vs y_tilde is the return; contract <= 1e-10).
// For y-dependent drivers the recursion is reweighted by the linearization
// slope taken from the solved field, and the gap is a diagnostic only.
double snell_check(const ReflectedSolution& sol, const Model& model,
                   const Lattice& lat, const VolPolicy& policy);

} // namespace bsdekit
