#pragma once

#include "bsdekit/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bsdekit {

struct TimeGrid;
struct StateGrid;

// Conjugate exponent q with (theta - 1)(q - 1) = 1.
double holder_conjugate(double theta);

// Cost exponent, impact/risk coefficient functions and the y-monotone
// generator f(t, x, a, y) = -y|y|^{q-1} / ((q-1) eta^{q-1}) + min(gamma, cap).
struct GeneratorSpec {
    double theta = 2.0;
    double q = 2.0;
    std::function<double(double, double, double)> eta_fn;   // (t, x, a) -> > 0
    std::function<double(double, double, double)> gamma_fn; // (t, x, a) -> >= 0
    double l1 = 0.0; // one-sided monotonicity slope bound (0: non-increasing)
    double l2 = 0.0; // z-Lipschitz bound (0 for the liquidation driver)
    // false: the generator is the running reward alone (no y term); used by
    // the linear-reward family so optimal-stopping identities are exact.
    bool has_y_term = true;

    // 1 / ((q-1) eta^{q-1}) at a node; 0 when the y term is disabled.
    double inv_eta_pow(double t, double x, double a) const;
};

// Terminal penalty.  The "+infinity on the singular set" case is carried by
// the boolean indicator, never by a large float, so the 0 * inf = 0
// convention can be applied exactly where it matters.
struct TerminalSpec {
    std::function<double(double)> xi_fn;      // finite part, >= 0
    std::function<bool(double)> singular_fn;  // x in the singular set?

    double value(double x) const;             // +inf on the singular set
    double capped(double x, double cap) const; // min(value, cap), finite
};

struct UncertaintySet {
    std::vector<double> vol_grid;              // squared-volatility levels, ascending
    std::function<double(double)> drift_fn;    // t -> drift (deterministic)
    // Per-volatility drift contribution: the kernel drift under level a is
    // drift_fn(t) + vol_drift_coeff * a.  Set to -1/2 when the state
    // coordinate is the log of a multiplicative impact process, so that
    // exp(state) is a martingale under every measure (Ito correction).
    double vol_drift_coeff = 0.0;
};

double evaluate_driver(const GeneratorSpec& gen, double t, double x, double a,
                       double y, std::optional<double> cap = {});

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_model(const GeneratorSpec& gen,
                                const TerminalSpec& term,
                                const UncertaintySet& unc,
                                const TimeGrid& tg, const StateGrid& sg);

struct Model {
    std::string name;
    GeneratorSpec gen;
    TerminalSpec term;
    UncertaintySet unc;
};

// Terminal-slice values min(xi, cap) on the state grid; without a cap the
// terminal data must be finite everywhere (throws ConfigError otherwise).
std::vector<double> terminal_slice(const TerminalSpec& term, const StateGrid& sg,
                                   std::optional<double> cap);

} // namespace bsdekit
