#include "doctest.h"

#include "bsdekit/config.hpp"
#include "bsdekit/control.hpp"
#include "bsdekit/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

using namespace bsdekit;

namespace {

struct SmallRun {
    Model model;
    Lattice lat;
    Solution2 sol;
    double cap;
};

// Small capped constant-impact setup shared by the simulation tests.
SmallRun small_run() {
    RunConfig cfg = bundled_config("constant-truncated");
    cfg.n_steps = 50;
    cfg.n_points = 11;
    SmallRun r{build_model(cfg), build_lattice_from(cfg), {}, 1.0};
    r.sol = solve_truncated(r.model, r.lat, r.cap);
    return r;
}

} // namespace

TEST_CASE("feedback rate formula, frozen values") {
    CHECK(optimal_rate(-1.0, 1.0, 2.0, 5.0) == 0.0); // negative value: no urgency
    CHECK(optimal_rate(3.0, 1.0, 2.0, 1.0) == -3.0);
    CHECK(optimal_rate(2.0, 1.0, 3.0, 1.0) == -4.0); // (y/eta)^2 = 4
    CHECK(optimal_rate(1.0, 2.0, 2.0, 4.0) == -2.0);
    CHECK_THROWS_AS(optimal_rate(1.0, 0.0, 2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(optimal_rate(1.0, -1.0, 2.0, 1.0), ConfigError);
}

TEST_CASE("stay paths have the right shape and stay at the origin node") {
    SmallRun r = small_run();
    const int n = r.lat.tg.n_steps;
    const int j0 = r.lat.sg.nearest(0.0);
    LatticePath p = stay_path(r.lat, 0);
    REQUIRE(static_cast<int>(p.nodes.size()) == n + 1);
    REQUIRE(static_cast<int>(p.a_idx.size()) == n);
    for (int v : p.nodes) CHECK(v == j0);
    for (int k : p.a_idx) CHECK(k == 0);
    CHECK_THROWS_AS(stay_path(r.lat, 7), ConfigError);

    LatticePath pa = stay_path_argmax(r.lat, r.sol);
    REQUIRE(pa.nodes.size() == p.nodes.size());
    for (std::size_t i = 0; i < pa.a_idx.size(); ++i)
        CHECK(pa.a_idx[i] ==
              r.sol.policy_at(i, static_cast<std::size_t>(j0)));
}

TEST_CASE("state integrator: unit urgency gives exact exponential decay") {
    SmallRun r = small_run();
    const int n = r.lat.tg.n_steps;
    // y == eta == 1 everywhere: the decay factor per step is exp(-dt).
    Field ones(static_cast<std::size_t>(n) + 1,
               static_cast<std::size_t>(r.lat.sg.n_points), 1.0);
    Trajectory traj =
        integrate_state(ones, r.model, r.lat, stay_path(r.lat, 0), 2.0);
    REQUIRE(traj.state.size() == static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        CHECK(traj.state[static_cast<std::size_t>(i)] ==
              doctest::Approx(2.0 * std::exp(-r.lat.tg.node(i)))
                  .epsilon(1e-12));
    }
    CHECK(traj.rate.back() == 0.0);
    const double dt = r.lat.tg.dt();
    for (int i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        CHECK(traj.rate[iu] ==
              (traj.state[iu + 1] - traj.state[iu]) / dt);
    }
}

TEST_CASE("twap on the capped constant model costs x0^2 / T deterministically") {
    SmallRun r = small_run();
    const double x0 = 1.0;
    CostEstimate est =
        simulate_cost(Strategy::twap(), r.model, r.lat,
                      MeasurePolicy::constant(r.lat, 0), x0, 64, 7u, r.cap);
    // Constant rate -x0/T, eta = 1, gamma = 0, exact liquidation at T.
    CHECK(est.mean == doctest::Approx(x0 * x0 / r.lat.tg.horizon).epsilon(1e-10));
    // Identical path costs; only the mean's accumulation dust survives.
    CHECK(est.se <= 1e-15);
    CHECK(est.n_infinite == 0);
    CHECK(est.n_paths == 64);
}

TEST_CASE("zero strategy: capped cost is the truncated terminal penalty") {
    SmallRun r = small_run();
    CostEstimate est =
        simulate_cost(Strategy::zero(), r.model, r.lat,
                      MeasurePolicy::constant(r.lat, 0), 1.0, 32, 7u, r.cap);
    CHECK(est.mean == r.cap); // min(xi, cap) * |x0|^theta with x0 = 1
    CHECK(est.se == 0.0);
    // Following the solved value field beats never trading.
    CostEstimate fb =
        simulate_cost(Strategy::feedback(r.sol.y_upper), r.model, r.lat,
                      MeasurePolicy::constant(r.lat, 0), 1.0, 32, 7u, r.cap);
    CHECK(fb.mean < est.mean);
}

TEST_CASE("zero strategy on the uncapped singular model never liquidates") {
    SmallRun r = small_run();
    CostEstimate est =
        simulate_cost(Strategy::zero(), r.model, r.lat,
                      MeasurePolicy::constant(r.lat, 0), 1.0, 16, 99u,
                      std::nullopt);
    CHECK(est.n_infinite == 16);
    CHECK(std::isinf(est.mean));
    CHECK(std::isinf(est.se));
}

TEST_CASE("doubling the inventory exactly quadruples the quadratic cost") {
    SmallRun r = small_run();
    Strategy fb = Strategy::feedback(r.sol.y_upper);
    MeasurePolicy mp = MeasurePolicy::argmax(r.sol);
    CostEstimate e1 = simulate_cost(fb, r.model, r.lat, mp, 1.0, 200, 5u, r.cap);
    CostEstimate e2 = simulate_cost(fb, r.model, r.lat, mp, 2.0, 200, 5u, r.cap);
    CHECK(e2.mean / e1.mean == 4.0);
}

TEST_CASE("simulated cost does not depend on the worker count") {
    SmallRun r = small_run();
    Strategy fb = Strategy::feedback(r.sol.y_upper);
    MeasurePolicy mp = MeasurePolicy::constant(r.lat, 0);
    set_thread_count(1);
    CostEstimate e1 = simulate_cost(fb, r.model, r.lat, mp, 1.0, 500, 3u, r.cap);
    set_thread_count(4);
    CostEstimate e4 = simulate_cost(fb, r.model, r.lat, mp, 1.0, 500, 3u, r.cap);
    set_thread_count(0);
    CHECK(e1.mean == e4.mean);
    CHECK(e1.se == e4.se);
}

TEST_CASE("worst-case sweep reports every measure and the attaining one") {
    SmallRun r = small_run();
    CostEstimate worst =
        worst_case_cost(Strategy::feedback(r.sol.y_upper), r.model, r.lat,
                        r.sol, 1.0, 128, 11u, r.cap);
    REQUIRE(worst.breakdown.size() ==
            static_cast<std::size_t>(r.lat.n_vols()) + 1);
    CHECK_FALSE(worst.attaining.empty());
    double best = -kInf;
    for (const auto& row : worst.breakdown) {
        CHECK_FALSE(row.label.empty());
        best = std::max(best, row.mean);
    }
    CHECK(worst.mean == best);
}

TEST_CASE("value verification applies the three-sigma-plus-tolerance rule") {
    CostEstimate est;
    est.mean = 1.05;
    est.se = 0.01;
    est.n_paths = 100;
    // candidate = 1.0; gap 0.05 > 3 * 0.01 + 0.01 -> fail
    VerificationReport bad = verify_value(1.0, 2.0, 1.0, est, 0.01);
    CHECK_FALSE(bad.pass);
    CHECK(bad.candidate == 1.0);
    CHECK(bad.gap == doctest::Approx(0.05));
    CHECK(bad.z == doctest::Approx(5.0));
    // Wider tolerance absorbs the same gap -> pass
    VerificationReport good = verify_value(1.0, 2.0, 1.0, est, 0.03);
    CHECK(good.pass);
    // candidate scales with |x0|^theta
    VerificationReport scaled = verify_value(1.0, 2.0, 2.0, est, 0.03);
    CHECK(scaled.candidate == 4.0);
}

TEST_CASE("terminal constraint check keys on the infinite-penalty states") {
    SmallRun r = small_run();
    const int n = r.lat.tg.n_steps;
    Trajectory traj;
    traj.times.assign(static_cast<std::size_t>(n) + 1, 0.0);
    traj.state.assign(static_cast<std::size_t>(n) + 1, 1.0);
    traj.nodes.assign(static_cast<std::size_t>(n) + 1, r.lat.sg.nearest(0.0));
    // Inventory still at 1.0 with an everywhere-singular terminal: fails.
    CHECK_FALSE(terminal_constraint_check(traj, r.model.term, r.lat));
    traj.state.back() = 1e-9;
    CHECK(terminal_constraint_check(traj, r.model.term, r.lat));
}
