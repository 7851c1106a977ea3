#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bsdekit/bsde.hpp"
#include "bsdekit/common.hpp"
#include "bsdekit/config.hpp"
#include "bsdekit/mollify.hpp"
#include "bsdekit/model.hpp"
#include "bsdekit/oracle.hpp"
#include "bsdekit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

std::string dispatch(const std::string& command,
                     const std::string& config_json) {
    bsdekit::RunConfig cfg = bsdekit::parse_config_json(config_json);
    bsdekit::JsonValue rep;
    if (command == "solve") {
        rep = bsdekit::run_solve(cfg, true);
    } else if (command == "singular") {
        rep = bsdekit::run_singular(cfg, true);
    } else if (command == "liquidate") {
        rep = bsdekit::run_liquidate(cfg, true);
    } else if (command == "rbsde") {
        rep = bsdekit::run_rbsde(cfg, true);
    } else if (command == "mollify-demo") {
        rep = bsdekit::run_mollify_demo(cfg, true);
    } else if (command == "oracle") {
        rep = bsdekit::run_oracle(cfg, true);
    } else {
        throw bsdekit::ConfigError("unknown command: " + command);
    }
    return rep.dump();
}

double mollified_gap(int n, double l_q) {
    const auto h = [](double y) { return -bsdekit::pow_signed(y, 2.0); };
    bsdekit::MollifierSpec spec;
    spec.n = n;
    spec.l_q = l_q;
    spec.horizon = 1.0;
    const auto hn = bsdekit::build_mollified(h, spec);
    double gap = 0.0;
    for (int s = 0; s <= 400; ++s) {
        const double y = -2.0 + 4.0 * s / 400.0;
        gap = std::max(gap, std::fabs(hn(y) - h(y)));
    }
    return gap;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lattice engine for worst-case optimal liquidation values";

    py::register_exception<bsdekit::ConfigError>(m, "ConfigError",
                                                 PyExc_ValueError);
    py::register_exception<bsdekit::NumericError>(m, "NumericError",
                                                  PyExc_RuntimeError);

    m.def("holder_conjugate", &bsdekit::holder_conjugate, "theta"_a,
          "Conjugate exponent q with (theta - 1)(q - 1) = 1.");

    m.def(
        "implicit_step",
        [](double c, double dt, const std::function<double(double)>& driver) {
            return bsdekit::implicit_step(c, dt, driver);
        },
        "c"_a, "dt"_a, "driver"_a,
        "Root y of y = c + dt * driver(y) for a monotone non-increasing "
        "driver.");

    m.def(
        "closed_form_geometric",
        [](double eta0, double theta, double horizon, double t, double drift) {
            const auto v = bsdekit::oracle::closed_form_geometric(
                eta0, [drift](double) { return drift; }, theta, horizon, t);
            return py::dict("y"_a = v.y,
                            "inventory_ratio"_a = v.inventory_ratio);
        },
        "eta0"_a, "theta"_a, "horizon"_a, "t"_a, "drift"_a = 0.0,
        "Closed-form value and inventory ratio for the geometric impact "
        "model with constant drift.");

    m.def("run", &dispatch, "command"_a, "config_json"_a,
          "Run one pipeline (solve, singular, liquidate, rbsde, "
          "mollify-demo, oracle) from a config JSON string; returns the "
          "report as a JSON string and writes outputs to the configured "
          "directory.");

    m.def("bundled_names", &bsdekit::bundled_names,
          "Names of the bundled model presets.");

    m.def(
        "bundled_config_json",
        [](const std::string& name) {
            return bsdekit::resolved_config_json(bsdekit::bundled_config(name))
                .dump();
        },
        "name"_a, "Fully resolved config JSON for a bundled preset.");

    m.def("mollified_gap", &mollified_gap, "n"_a, "l_q"_a = 1.0,
          "Sup-gap on [-2, 2] between the urgency driver and its "
          "level-n regularization.");
}
