#include "doctest.h"

#include "bsdekit/config.hpp"
#include "bsdekit/singular.hpp"

#include <cmath>

using namespace bsdekit;

TEST_CASE("truncated solve: closed form and guard rails") {
    RunConfig cfg = bundled_config("constant-truncated");
    cfg.n_steps = 500;
    Model model = build_model(cfg);
    Lattice lat = build_lattice_from(cfg);

    // gamma = 0, terminal L: Y(0) = L / (1 + L T).
    for (double level : {0.25, 1.0, 4.0}) {
        Solution2 sol = solve_truncated(model, lat, level);
        CHECK(sol.y0(lat) ==
              doctest::Approx(level / (1.0 + level * cfg.horizon))
                  .epsilon(2e-3));
    }
    // Level zero: zero data, zero value.
    Solution2 z = solve_truncated(model, lat, 0.0);
    CHECK(z.y0(lat) == 0.0);
    CHECK_THROWS_AS(solve_truncated(model, lat, -1.0), ConfigError);
}

TEST_CASE("level-independent envelope: separable reference") {
    // eta = 1, gamma = 1, theta = 2, x-independent: the envelope recursion
    // collapses to the Riemann sum of 1 + (T-s)^2, so U(0) ~ T + T^3/3.
    RunConfig cfg = bundled_config("constant-truncated");
    cfg.gamma0 = 1.0;
    cfg.n_steps = 1000;
    Model model = build_model(cfg);
    Lattice lat = build_lattice_from(cfg);
    Field u = apriori_bound_field(model, lat);
    const int j0 = lat.sg.nearest(0.0);
    CHECK(u.at(0, static_cast<std::size_t>(j0)) ==
          doctest::Approx(4.0 / 3.0).epsilon(2e-3));
    // Envelope decreases toward the horizon and ends at zero.
    CHECK(u.at(u.n_slices - 1, static_cast<std::size_t>(j0)) == 0.0);
    CHECK(u.at(500, static_cast<std::size_t>(j0)) <
          u.at(0, static_cast<std::size_t>(j0)));
}

TEST_CASE("ladder run: diagnostics on a small singular model") {
    RunConfig cfg = bundled_config("constant-truncated"); // levels 0.25,0.5,1
    cfg.n_steps = 500;
    Model model = build_model(cfg);
    Lattice lat = build_lattice_from(cfg);
    SingularSolution sing = solve_singular(model, lat, cfg.ladder);

    REQUIRE(sing.levels_used.size() == 3);
    CHECK(sing.levels_used[0] == 0.25);
    CHECK(sing.levels_used[2] == 1.0);
    REQUIRE(sing.table.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const double level = sing.levels_used[k];
        CHECK(sing.table[k].y0 ==
              doctest::Approx(level / (1.0 + level * cfg.horizon))
                  .epsilon(1e-2));
        CHECK(sing.table[k].monotone_violation == 0.0);
        CHECK(sing.table[k].bound_slack >= 0.0);
    }
    // eps = 0.05, dt = 1/500: last certified slice is t = 0.95.
    CHECK(sing.i_eps == 475);
    REQUIRE(sing.increments.size() == 2);
    CHECK(sing.increments[0] > 0.0);
    CHECK(sing.increments[1] > 0.0);
    // Three levels cannot reach tol = 1e-6 here.
    CHECK_FALSE(sing.converged);
}

TEST_CASE("ladder validation") {
    RunConfig cfg = bundled_config("constant-truncated");
    cfg.n_steps = 50;
    Model model = build_model(cfg);
    Lattice lat = build_lattice_from(cfg);
    TruncationLadder bad = cfg.ladder;
    bad.l0 = 0.0;
    CHECK_THROWS_AS(solve_singular(model, lat, bad), ConfigError);
    bad = cfg.ladder;
    bad.growth = 1.0;
    CHECK_THROWS_AS(solve_singular(model, lat, bad), ConfigError);
    bad = cfg.ladder;
    bad.eps_cutoff = 2.0; // >= horizon
    CHECK_THROWS_AS(solve_singular(model, lat, bad), ConfigError);
    bad = cfg.ladder;
    bad.max_levels = 0;
    CHECK_THROWS_AS(solve_singular(model, lat, bad), ConfigError);
}

TEST_CASE("profile fit degrades to NaN on very coarse grids") {
    RunConfig cfg = bundled_config("constant-truncated");
    cfg.n_steps = 4;
    Model model = build_model(cfg);
    Lattice lat = build_lattice_from(cfg);
    TruncationLadder ladder = cfg.ladder;
    ladder.max_levels = 2;
    SingularSolution sing = solve_singular(model, lat, ladder);
    CHECK(std::isnan(sing.profile_exponent));
}

TEST_CASE("fine ladder recovers the blow-up slope") {
    RunConfig cfg = bundled_config("constant-truncated");
    cfg.n_steps = 4000;
    TruncationLadder ladder = cfg.ladder; // l0 = 0.25
    ladder.max_levels = 12;               // top level 512
    Model model = build_model(cfg);
    Lattice lat = build_lattice_from(cfg);
    SingularSolution sing = solve_singular(model, lat, ladder);
    CHECK(std::fabs(sing.profile_exponent + 1.0) <= 0.1);
    const int j0 = lat.sg.nearest(0.0);
    // Midpoint of the certified window: y ~ 1/(T - t).
    const double t_mid = lat.tg.node(2000);
    CHECK(sing.y_limit.at(2000, static_cast<std::size_t>(j0)) ==
          doctest::Approx(1.0 / (cfg.horizon - t_mid)).epsilon(0.05));
}
