#pragma once

#include "bsdekit/bsde.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace bsdekit {

// Worst-case value over the volatility grid: per-node Bellman supremum,
// per-measure gap increments, slope fields, and the constant-measure solves.
struct Solution2 {
    Field y_upper;
    std::vector<std::uint8_t> policy;     // argmax volatility index per node
    std::vector<Field> dk;                // per vol: Y - one-step value >= 0
    std::vector<Field> lambda;            // per vol: slope between Y and y^a
    std::vector<BackwardSolution> y_single; // per vol: constant-measure solve

    std::size_t n_slices() const { return y_upper.n_slices; }
    std::size_t n_points() const { return y_upper.n_points; }
    int policy_at(std::size_t i, std::size_t j) const {
        return policy[i * n_points() + j];
    }
    double y0(const Lattice& lat) const; // value at t=0, node nearest x=0
};

Solution2 solve_2bsde(const Model& model, const Lattice& lat,
                      const std::vector<double>& terminal,
                      std::optional<double> cap = {});

// Slope between the upper value and a constant-measure value: difference
// quotient of the driver where they separate, analytic derivative where they
// coincide.  Never exceeds the generator's monotonicity bound.
Field lambda_field(const Field& y_upper, const Field& y_a, const Model& model,
                   const Lattice& lat, int a_idx, std::optional<double> cap = {});

// Expectation, under exact forward propagation of the argmax policy from the
// node nearest x = 0, of the exponentially weighted gap increments.  Zero
// (up to dust) certifies that the argmax measure attains the supremum.
double minimality_diagnostic(const Solution2& sol, const Model& model,
                             const Lattice& lat, std::optional<double> cap = {});

// Expected aggregate gap under constant-measure forward propagation.
double k_total(const Solution2& sol, const Lattice& lat, int a_idx);

} // namespace bsdekit
