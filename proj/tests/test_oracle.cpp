#include "doctest.h"

#include "bsdekit/oracle.hpp"

#include <cmath>
#include <vector>

using namespace bsdekit;

namespace {
const auto zero_drift = [](double) { return 0.0; };
}

TEST_CASE("closed form, zero drift: value 1 and linear inventory") {
    const auto v0 = oracle::closed_form_geometric(1.0, zero_drift, 2.0, 1.0, 0.0);
    CHECK(v0.y == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(v0.inventory_ratio == doctest::Approx(1.0).epsilon(1e-10));

    const auto v3 = oracle::closed_form_geometric(1.0, zero_drift, 2.0, 1.0, 0.3);
    CHECK(v3.y == doctest::Approx(1.0 / 0.7).epsilon(1e-9));
    CHECK(v3.inventory_ratio == doctest::Approx(0.7).epsilon(1e-9));

    const auto v5 = oracle::closed_form_geometric(1.0, zero_drift, 2.0, 1.0, 0.5);
    CHECK(v5.y == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("closed form, constant drift: hand-integrated reference") {
    // b = 1/2, theta = 2: A_t = exp(t/2), I_t = 2 (exp(-t/2) - exp(-1/2)),
    // Y_t = 1 / (A_t I_t), inventory ratio I_t / I_0.
    const auto b = [](double) { return 0.5; };
    const double e_half = std::exp(-0.5);
    const auto v0 = oracle::closed_form_geometric(1.0, b, 2.0, 1.0, 0.0);
    CHECK(v0.y == doctest::Approx(1.0 / (2.0 * (1.0 - e_half))).epsilon(1e-9));
    const auto v4 = oracle::closed_form_geometric(1.0, b, 2.0, 1.0, 0.4);
    const double i4 = 2.0 * (std::exp(-0.2) - e_half);
    CHECK(v4.y == doctest::Approx(1.0 / (std::exp(0.2) * i4)).epsilon(1e-9));
    CHECK(v4.inventory_ratio ==
          doctest::Approx(i4 / (2.0 * (1.0 - e_half))).epsilon(1e-9));
}

TEST_CASE("closed form agrees with the singular ODE oracle at zero drift") {
    // Both must produce eta / (T - t) for the unit constant data.
    const auto ode = oracle::ode_oracle([](double) { return 1.0; },
                                        [](double) { return 0.0; }, 2.0, 1.0,
                                        {}, 200000);
    for (double t : {0.0, 0.25, 0.6}) {
        const auto cf = oracle::closed_form_geometric(1.0, zero_drift, 2.0, 1.0, t);
        CHECK(ode.eval(t) == doctest::Approx(cf.y).epsilon(1e-6));
    }
}

TEST_CASE("bounded ODE oracle: tanh solution") {
    // y' = y|y| - 1 backward from y(T) = 0 has y(t) = tanh(T - t).
    const auto ode = oracle::ode_oracle([](double) { return 1.0; },
                                        [](double) { return 1.0; }, 2.0, 1.0,
                                        0.0, 200000);
    CHECK(ode.eval(0.0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-8));
    CHECK(ode.eval(0.5) == doctest::Approx(std::tanh(0.5)).epsilon(1e-8));
    CHECK(ode.eval(1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bounded ODE oracle: separable closed form") {
    // gamma = 0, terminal L: y(t) = L / (1 + L (T - t)).
    const double level = 0.25;
    const auto ode = oracle::ode_oracle([](double) { return 1.0; },
                                        [](double) { return 0.0; }, 2.0, 1.0,
                                        level, 200000);
    for (double t : {0.0, 0.5, 0.9}) {
        const double ref = level / (1.0 + level * (1.0 - t));
        CHECK(ode.eval(t) == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK_THROWS_AS(oracle::ode_oracle([](double) { return 1.0; },
                                       [](double) { return 0.0; }, 2.0, 1.0,
                                       level, 1000),
                    ConfigError);
}

TEST_CASE("stopping oracle: one-step tree by hand") {
    // dx = 1, a = 0.25, b = 0: pu = pd = 0.125, pm = 0.75.
    const std::vector<double> terminal{0.0, 0.0, 1.0};
    const auto far_below = [](double, double) { return -1e300; };
    const Field v = oracle::snell_oracle(1.0, 1, -1.0, 1.0, 3, 0.25, 0.0,
                                         far_below, terminal,
                                         [](double, double) { return 0.0; });
    REQUIRE(v.n_slices == 2);
    REQUIRE(v.n_points == 3);
    CHECK(v.at(1, 2) == 1.0);
    CHECK(v.at(0, 1) == doctest::Approx(0.125).epsilon(1e-15));

    // A binding obstacle lifts the value to the obstacle.
    const auto floor_fn = [](double, double) { return 0.2; };
    const Field w = oracle::snell_oracle(1.0, 1, -1.0, 1.0, 3, 0.25, 0.0,
                                         floor_fn, terminal,
                                         [](double, double) { return 0.0; });
    CHECK(w.at(0, 1) == doctest::Approx(0.2).epsilon(1e-15));

    // Running reward accrues additively.
    const Field r = oracle::snell_oracle(1.0, 1, -1.0, 1.0, 3, 0.25, 0.0,
                                         far_below, terminal,
                                         [](double, double) { return 0.05; });
    CHECK(r.at(0, 1) == doctest::Approx(0.125 + 0.05).epsilon(1e-14));
}
