#pragma once

#include "bsdekit/bsde2.hpp"
#include "bsdekit/singular.hpp"

#include <optional>
#include <string>

namespace bsdekit {

// Feedback trading speed for inventory x_state given the value y and the
// instantaneous cost scale eta: -(y/eta)^(q-1) * x_state (never positive for
// positive inventory; negative y is clamped to zero urgency).
double optimal_rate(double y, double eta, double q, double x_state);

// A realized lattice path: node index per slice plus the volatility index in
// force on each step.
struct LatticePath {
    std::vector<int> nodes; // size n_steps + 1
    std::vector<int> a_idx; // size n_steps
};

// Deterministic skeleton that stays on the node nearest x = 0.
LatticePath stay_path(const Lattice& lat, int a_idx);
// Same skeleton, volatility chosen by the solved worst-case policy.
LatticePath stay_path_argmax(const Lattice& lat, const Solution2& sol);

struct Trajectory {
    std::vector<double> times; // size n + 1
    std::vector<double> state; // inventory, size n + 1
    std::vector<double> rate;  // step-average trading speed, size n + 1 (last 0)
    std::vector<double> y;     // value read at the left endpoint, size n + 1
    std::vector<double> eta;   // cost scale along the path, size n + 1
    std::vector<int> nodes;    // driving lattice nodes, size n + 1
};

// Exponential integrator for the inventory along a fixed lattice path: each
// step multiplies by exp(-(y/eta)^(q-1) dt) with coefficients frozen at the
// left endpoint. Positivity-preserving; rate[i] is exactly
// (state[i+1] - state[i]) / dt.
Trajectory integrate_state(const Field& y_field, const Model& model,
                           const Lattice& lat, const LatticePath& path,
                           double x0);

// Trading rule used by the simulator. Feedback follows the value field (the
// field must outlive the strategy); kappa scales the feedback rate for
// perturbation studies. Twap sells at the constant rate -x0 / horizon. Zero
// never trades.
struct Strategy {
    enum class Kind { Feedback, Twap, Zero };
    Kind kind = Kind::Zero;
    double kappa = 1.0;
    const Field* y = nullptr;

    static Strategy feedback(const Field& y_field, double kappa = 1.0);
    static Strategy twap();
    static Strategy zero();
};

// Volatility selection rule for sampling paths: a labeled node policy. The
// common cases (fixed index, solved argmax table) are stored directly so the
// per-step lookup stays branch-cheap; k_fn is the generic fallback.
struct MeasurePolicy {
    std::string label;
    int constant_k = -1;                   // >= 0: fixed volatility index
    const Solution2* argmax_sol = nullptr; // set: follow the solved policy
    VolPolicy k_fn;

    int at(int i, int j) const {
        if (constant_k >= 0) return constant_k;
        if (argmax_sol != nullptr)
            return argmax_sol->policy_at(static_cast<std::size_t>(i),
                                         static_cast<std::size_t>(j));
        return k_fn(i, j);
    }
    bool valid() const {
        return constant_k >= 0 || argmax_sol != nullptr || bool(k_fn);
    }

    static MeasurePolicy constant(const Lattice& lat, int a_idx);
    static MeasurePolicy argmax(const Solution2& sol);
};

struct MeasureCost {
    std::string label;
    double mean = 0.0;
    double se = 0.0;
    std::size_t n_infinite = 0;
};

struct CostEstimate {
    double mean = 0.0;
    double se = 0.0; // sample std / sqrt(paths); +inf when any path is infinite
    std::size_t n_paths = 0;
    std::size_t n_infinite = 0;          // paths that failed to liquidate
    std::vector<MeasureCost> breakdown;  // filled by worst_case_cost
    std::string attaining;               // ditto
};

// Samples n_paths lattice paths under the measure policy (fixed seed,
// thread-count independent) and averages the realized cost
//   sum_i dt (eta |rate|^theta + gamma |X|^theta) + terminal |X_T|^theta.
// With cap set, gamma and the terminal weight are truncated at cap. Without
// cap, a terminal lattice state carrying an infinite penalty contributes 0
// when |X_T| <= liq_tol (liquidated) and makes the path cost +inf otherwise.
// liq_tol < 0 selects the default 1e-6 * |x0|.
CostEstimate simulate_cost(const Strategy& strategy, const Model& model,
                           const Lattice& lat, const MeasurePolicy& policy,
                           double x0, std::size_t n_paths, std::uint64_t seed,
                           std::optional<double> cap = std::nullopt,
                           double liq_tol = -1.0);

// Max of simulate_cost over every constant-volatility policy and the solved
// argmax policy, all with the same seed; breakdown and attaining label filled.
CostEstimate worst_case_cost(const Strategy& strategy, const Model& model,
                             const Lattice& lat, const Solution2& sol,
                             double x0, std::size_t n_paths,
                             std::uint64_t seed,
                             std::optional<double> cap = std::nullopt,
                             double liq_tol = -1.0);

struct VerificationReport {
    double candidate = 0.0; // y0 * |x0|^theta
    double mc_mean = 0.0;
    double se = 0.0;
    double gap = 0.0; // mc_mean - candidate
    double z = 0.0;
    double lattice_tol = 0.0;
    bool pass = false;
};

// Value identity check: pass iff |mc_mean - y0 |x0|^theta| <= 3 se + lattice_tol.
VerificationReport verify_value(double y0, double theta, double x0,
                                const CostEstimate& cost, double lattice_tol);

// True iff the trajectory ends liquidated whenever its terminal lattice state
// carries an infinite penalty. liq_tol < 0 selects 1e-6 * |initial inventory|.
bool terminal_constraint_check(const Trajectory& traj, const TerminalSpec& term,
                               const Lattice& lat, double liq_tol = -1.0);

} // namespace bsdekit
