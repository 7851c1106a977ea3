#pragma once

#include "bsdekit/common.hpp"
#include "bsdekit/model.hpp"

namespace bsdekit {

struct TimeGrid {
    double t0 = 0.0;
    double horizon = 1.0;
    int n_steps = 1;

    double dt() const { return (horizon - t0) / n_steps; }
    // node(n_steps) returns the horizon exactly.
    double node(int i) const {
        return i == n_steps ? horizon : t0 + dt() * i;
    }
};

TimeGrid make_time_grid(double horizon, int n_steps);

struct StateGrid {
    double x_min = -1.0;
    double x_max = 1.0;
    int n_points = 3;

    double dx() const { return (x_max - x_min) / (n_points - 1); }
    double node(int j) const {
        return j == n_points - 1 ? x_max : x_min + dx() * j;
    }
    // Index of the grid node closest to x.
    int nearest(double x) const;
};

StateGrid make_state_grid(double x_min, double x_max, int n_points);

// One time slice's transition weights for one volatility level.  Interior
// nodes share a single (down, stay, up) trinomial row that matches the first
// moment (effective drift * dt) exactly and the second central moment a*dt
// exactly.  Edge rows are one-sided: they match the first moment where a move
// in the drift direction is available and otherwise put all mass on staying.
struct SliceKernel {
    double pd, pm, pu;          // interior row
    double lo_stay, lo_up;      // bottom node: weights on j=0, j=1
    double hi_down, hi_stay;    // top node: weights on j=N-2, j=N-1
    double m1;                  // interior first moment b*dt
    double lo_m1, hi_m1;        // edge-row first moments
};

struct Lattice {
    TimeGrid tg;
    StateGrid sg;
    UncertaintySet unc;

    int n_vols() const { return static_cast<int>(unc.vol_grid.size()); }
    double vol(int k) const { return unc.vol_grid[static_cast<std::size_t>(k)]; }
    double drift(int step) const {
        return unc.drift_fn ? unc.drift_fn(tg.node(step)) : 0.0;
    }
    // Effective kernel drift for one volatility level (deterministic drift
    // plus the per-volatility contribution, e.g. the -a/2 Ito correction of
    // a log-impact coordinate).
    double drift(int step, int a_idx) const {
        return drift(step) + unc.vol_drift_coeff * vol(a_idx);
    }

    SliceKernel kernel(int step, int a_idx) const;

    // E[ next(X') | X = node j ] under volatility a_idx over step `step`.
    double cond_exp(int step, int a_idx, const double* next, int j) const;

    // E[ next(X') * (X' - x_j - m1) ] / (a dt): discrete martingale-
    // representation coefficient (m1 is the row's own first moment).
    double z_coeff(int step, int a_idx, const double* next, int j) const;
};

// Validates the stability requirement max(a) dt <= dx^2 and edge-row weight
// feasibility; throws ConfigError naming the violating numbers.
Lattice build_lattice(const TimeGrid& tg, const StateGrid& sg,
                      const UncertaintySet& unc);

double conditional_expectation(const Lattice& lat, int step, int a_idx,
                               const std::vector<double>& next_slice, int node);

} // namespace bsdekit
