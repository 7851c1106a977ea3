#pragma once

#include "bsdekit/common.hpp"
#include "bsdekit/lattice.hpp"
#include "bsdekit/model.hpp"

#include <functional>
#include <optional>

namespace bsdekit {

struct SolverStats {
    long long newton_iterations = 0;
    int max_iterations_step = 0;
    double max_residual = 0.0;

    void merge(const SolverStats& o) {
        newton_iterations += o.newton_iterations;
        max_iterations_step = std::max(max_iterations_step, o.max_iterations_step);
        max_residual = std::max(max_residual, o.max_residual);
    }
};

struct BackwardSolution {
    Field y;
    Field z;
    SolverStats meta;
};

// Precomputed node driver: f(y) = f0 - inv_pow * y|y|^{q-1}.
struct NodeDriver {
    double f0 = 0.0;      // running reward (capped)
    double inv_pow = 0.0; // 1 / ((q-1) eta^{q-1}); 0 disables the y term
    double q = 2.0;

    double operator()(double y) const { return f0 - inv_pow * pow_signed(y, q); }
    double slope(double y) const { return -q * inv_pow * pow_abs(y, q - 1.0); }
};

NodeDriver make_node_driver(const GeneratorSpec& gen, double t, double x,
                            double a, std::optional<double> cap);

// Backward-Euler step: the unique root y of y = c + dt * driver(y) for a
// monotone non-increasing driver, via safeguarded Newton with a bisection
// fallback inside a geometrically expanded bracket.  Residual contract:
// |y - c - dt f(y)| <= 1e-12 (1 + |y|); throws SolverError after 200
// iterations with diagnostics.
double implicit_step(double c, double dt, const NodeDriver& driver,
                     SolverStats* stats = nullptr);
double implicit_step(double c, double dt,
                     const std::function<double(double)>& driver,
                     SolverStats* stats = nullptr);

// Volatility index per (step, node).
using VolPolicy = std::function<int(int, int)>;
VolPolicy constant_policy(int a_idx);

// Single-measure backward solve under a fixed volatility policy.  The
// terminal slice must already be finite (apply the truncation first); `cap`
// truncates the running reward inside the driver.
BackwardSolution solve_bsde_single(const Model& model, const Lattice& lat,
                                   const VolPolicy& policy,
                                   const std::vector<double>& terminal,
                                   std::optional<double> cap = {});

// Identical recursion but every node driver is replaced by its Lipschitz
// mollification at level n (test / experiment mode).
BackwardSolution solve_bsde_single_mollified(const Model& model,
                                             const Lattice& lat,
                                             const VolPolicy& policy,
                                             const std::vector<double>& terminal,
                                             std::optional<double> cap,
                                             int mollify_level);

// Recomputes the value field through the exponential-weight linearization:
// W_i = f0_i dt + exp(lambda_i dt) E[W_{i+1}], W_n = terminal, with
// lambda_i = (f(y_i) - f0_i)/y_i read off the solved field.  Cross-check only.
Field linearized_representation(const Model& model, const Lattice& lat,
                                const VolPolicy& policy,
                                const BackwardSolution& sol,
                                const std::vector<double>& terminal,
                                std::optional<double> cap = {});

struct ComparisonReport {
    double max_violation = 0.0; // max over nodes of (y1 - y2)+
    double max_abs_diff = 0.0;
    std::size_t arg_slice = 0;
    std::size_t arg_node = 0;
};

// How far sol1 sticks out above sol2 anywhere on the grid.
ComparisonReport compare_solutions(const BackwardSolution& sol1,
                                   const BackwardSolution& sol2);
ComparisonReport compare_fields(const Field& y1, const Field& y2);

} // namespace bsdekit
