#pragma once

#include "bsdekit/bsde2.hpp"

#include <vector>

namespace bsdekit {

struct TruncationLadder {
    double l0 = 1.0;
    double growth = 2.0;
    int max_levels = 17;
    double eps_cutoff = 0.05; // convergence measured on t <= horizon - eps
    double tol = 1e-6;        // sup-norm increment threshold
};

struct LevelDiagnostics {
    double level = 0.0;
    double sup_increment = kInf; // vs the previous level, on t <= T - eps
    double y0 = 0.0;
    double bound_slack = 0.0;    // min over nodes of U - (T-t)^theta Y^L
    double monotone_violation = 0.0; // max over nodes of (Y^prev - Y^L)+
};

struct SingularSolution {
    Field y_limit;                  // last-level value field
    std::vector<double> levels_used;
    std::vector<double> increments; // per level after the first
    std::vector<LevelDiagnostics> table;
    double profile_exponent = 0.0;  // slope of log y vs log(T-t) near T - eps
                                    // (NaN when too few usable fit nodes)
    bool converged = false;
    int i_eps = 0;                  // last slice with t <= horizon - eps
};

// One ladder rung: truncate the terminal data and the running reward at L.
Solution2 solve_truncated(const Model& model, const Lattice& lat, double level);

// Runs the ladder until the sup-norm increment on [0, T - eps] drops below
// tol or the level budget is exhausted (reported, not fatal).
SingularSolution solve_singular(const Model& model, const Lattice& lat,
                                const TruncationLadder& ladder);

// Level-independent envelope: the linear worst-case recursion with zero
// terminal data and running reward eta + (T-s)^theta gamma.
Field apriori_bound_field(const Model& model, const Lattice& lat);

// Least-squares slope of log y_limit against log(T - t) over the last
// quartile of the certified window, at the node nearest x = 0.
double blowup_profile_fit(const SingularSolution& sing, const Model& model,
                          const Lattice& lat);

} // namespace bsdekit
