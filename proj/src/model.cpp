#include "bsdekit/model.hpp"

#include "bsdekit/io.hpp"
#include "bsdekit/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace bsdekit {

double holder_conjugate(double theta) {
    if (!(theta > 1.0))
        throw ConfigError("holder_conjugate: exponent must exceed 1, got " +
                          fmt17(theta));
    return theta / (theta - 1.0);
}

double GeneratorSpec::inv_eta_pow(double t, double x, double a) const {
    if (!has_y_term) return 0.0;
    const double eta = eta_fn(t, x, a);
    return 1.0 / ((q - 1.0) * pow_abs(eta, q - 1.0));
}

double TerminalSpec::value(double x) const {
    if (singular_fn && singular_fn(x)) return kInf;
    return xi_fn ? xi_fn(x) : 0.0;
}

double TerminalSpec::capped(double x, double cap) const {
    if (singular_fn && singular_fn(x)) return cap;
    return std::min(xi_fn ? xi_fn(x) : 0.0, cap);
}

double evaluate_driver(const GeneratorSpec& gen, double t, double x, double a,
                       double y, std::optional<double> cap) {
    if (!std::isfinite(y))
        throw NumericError("evaluate_driver: non-finite y input");
    double g = gen.gamma_fn ? gen.gamma_fn(t, x, a) : 0.0;
    if (cap) g = std::min(g, *cap);
    if (!gen.has_y_term) return g;
    return g - pow_signed(y, gen.q) * gen.inv_eta_pow(t, x, a);
}

ValidationReport validate_model(const GeneratorSpec& gen,
                                const TerminalSpec& term,
                                const UncertaintySet& unc,
                                const TimeGrid& tg, const StateGrid& sg) {
    ValidationReport rep;
    if (!(gen.theta > 1.0))
        rep.violations.push_back("cost exponent must exceed 1");
    if (std::fabs((gen.theta - 1.0) * (gen.q - 1.0) - 1.0) > 1e-12)
        rep.violations.push_back("conjugacy (theta-1)(q-1)=1 violated");
    if (unc.vol_grid.empty())
        rep.violations.push_back("empty uncertainty set");
    for (std::size_t k = 0; k < unc.vol_grid.size(); ++k) {
        if (!(unc.vol_grid[k] > 0.0)) {
            rep.violations.push_back("volatility level must be positive");
            break;
        }
        if (k > 0 && !(unc.vol_grid[k] > unc.vol_grid[k - 1])) {
            rep.violations.push_back("volatility grid not strictly increasing");
            break;
        }
    }
    if (!gen.eta_fn) {
        rep.violations.push_back("eta function missing");
        return rep;
    }

    bool eta_bad = false, gamma_bad = false, inv_bad = false, xi_bad = false;
    for (int i = 0; i <= tg.n_steps && !(eta_bad && gamma_bad && inv_bad); ++i) {
        const double t = tg.node(i);
        for (int j = 0; j < sg.n_points; ++j) {
            const double x = sg.node(j);
            for (double a : unc.vol_grid) {
                const double eta = gen.eta_fn(t, x, a);
                if (!(eta > 0.0) || !std::isfinite(eta)) eta_bad = true;
                else if (!std::isfinite(1.0 / ((gen.q - 1.0) * pow_abs(eta, gen.q - 1.0))))
                    inv_bad = true;
                if (gen.gamma_fn) {
                    const double g = gen.gamma_fn(t, x, a);
                    if (g < 0.0 || !std::isfinite(g)) gamma_bad = true;
                }
            }
        }
    }
    for (int j = 0; j < sg.n_points; ++j) {
        const double x = sg.node(j);
        const bool sing = term.singular_fn && term.singular_fn(x);
        const double xv = term.xi_fn ? term.xi_fn(x) : 0.0;
        if (!sing && (xv < 0.0 || !std::isfinite(xv))) xi_bad = true;
    }
    if (eta_bad) rep.violations.push_back("eta non-positive or non-finite at a node");
    if (inv_bad) rep.violations.push_back("1/eta^{q-1} non-finite at a node");
    if (gamma_bad) rep.violations.push_back("gamma negative or non-finite at a node");
    if (xi_bad) rep.violations.push_back("terminal penalty negative or non-finite off the singular set");
    return rep;
}

std::vector<double> terminal_slice(const TerminalSpec& term, const StateGrid& sg,
                                   std::optional<double> cap) {
    std::vector<double> out(static_cast<std::size_t>(sg.n_points));
    for (int j = 0; j < sg.n_points; ++j) {
        const double x = sg.node(j);
        if (cap) {
            out[static_cast<std::size_t>(j)] = term.capped(x, *cap);
        } else {
            const double v = term.value(x);
            if (!std::isfinite(v))
                throw ConfigError("terminal penalty is infinite and no truncation "
                                  "level was supplied");
            out[static_cast<std::size_t>(j)] = v;
        }
    }
    return out;
}

} // namespace bsdekit
