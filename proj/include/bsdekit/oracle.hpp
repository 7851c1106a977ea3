#pragma once

#include "bsdekit/common.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace bsdekit {

namespace oracle {

// Closed-form value and deterministic inventory ratio for the geometric
// impact example with deterministic drift:
//   Y_t = eta_t / (A_t I_t)^{theta-1},   A_t = exp((q-1) B_t),
//   B_t = integral of the drift, I_t = integral of 1/A over [t, T],
// evaluated along the zero-noise skeleton (eta = eta0 there).
// inventory_ratio = I_t / I_0.  All integrals by adaptive Simpson (1e-10).
struct GeometricValue {
    double y;
    double inventory_ratio;
};
GeometricValue closed_form_geometric(double eta0,
                                     const std::function<double(double)>& b_fn,
                                     double theta, double horizon, double t);

// High-resolution backward RK4 for deterministic-coefficient dynamics
//   y'(t) = y|y|^{q-1} / ((q-1) eta(t)^{q-1}) - gamma(t)
// from y(T) = min(xi, cap), or from the blow-up asymptote
// eta(T) * delta^{-(theta-1)} at T - delta (delta = 1e-4 T) when no cap is
// given.  n_fine >= 1e5 enforced.
struct OdeSolution {
    std::vector<double> ts; // ascending
    std::vector<double> ys;
    double eval(double t) const; // linear interpolation
};
OdeSolution ode_oracle(const std::function<double(double)>& eta_t,
                       const std::function<double(double)>& gamma_t,
                       double theta, double horizon,
                       std::optional<double> cap, long n_fine);

// Exact optimal-stopping backward induction on a small trinomial tree
// (<= 15 steps) with a y-independent running reward.  Weights are rebuilt
// internally from (a, b, dt, dx) so the recursion shares nothing with the
// production solvers.
Field snell_oracle(double horizon, int n_steps, double x_min, double x_max,
                   int n_points, double a, double b,
                   const std::function<double(double, double)>& obstacle,
                   const std::vector<double>& terminal,
                   const std::function<double(double, double)>& reward);

} // namespace oracle

} // namespace bsdekit
