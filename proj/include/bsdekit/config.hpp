#pragma once

#include "bsdekit/model.hpp"
#include "bsdekit/lattice.hpp"
#include "bsdekit/rbsde.hpp"
#include "bsdekit/singular.hpp"
#include "bsdekit/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bsdekit {

// Terminal-weight shorthand: infinite everywhere, a constant, or a call-style
// ramp max(x - strike, 0).
struct XiSpec {
    enum class Kind { Inf, Const, Call };
    Kind kind = Kind::Inf;
    double value = 0.0;
    double strike = 0.0;
};

struct BarrierSpec {
    enum class Kind { None, Const, Call };
    Kind kind = Kind::None;
    double value = 0.0;
    double strike = 0.0;
};

// Fully resolved run description. Every field has a workable default so a
// config file only names what it changes; the resolved form is re-emitted by
// the pipelines and must parse back to an equal value.
struct RunConfig {
    std::string name = "run";
    // model: constant | geometric-eta | quadratic-risk | linear-reward
    std::string family = "constant";
    double theta = 2.0;
    double eta0 = 1.0;
    double gamma0 = 0.0;
    XiSpec xi;
    // uncertainty
    std::vector<double> vols{0.09};
    double drift = 0.0;
    // grid
    int n_steps = 100;
    double horizon = 1.0;
    double x_min = -1.0;
    double x_max = 1.0;
    int n_points = 3;
    // ladder
    TruncationLadder ladder;
    // mc
    std::size_t mc_paths = 0;
    std::uint64_t seed = 1;
    // control
    double x0 = 1.0;
    double lattice_tol_rel = 0.02; // value-check tolerance, relative to Y0 x0^theta
    double liq_tol = -1.0;         // < 0: default 1e-6 * |x0|
    // barrier (reflected runs)
    BarrierSpec barrier;
    // mollifier demo levels
    std::vector<int> mollify_levels{8, 32, 128};
    // output
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json"};
};

bool operator==(const XiSpec& a, const XiSpec& b);
bool operator==(const BarrierSpec& a, const BarrierSpec& b);
bool operator==(const RunConfig& a, const RunConfig& b);

// Parse from a JSON file / JSON text. Unknown model family, malformed JSON,
// or a missing file raise ConfigError naming the problem.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const std::string& text);

// Emit the fully resolved config (17-significant-digit numbers; parses back
// to an equal RunConfig).
JsonValue resolved_config_json(const RunConfig& cfg);

// Construct the model / lattice / barrier described by the config.
Model build_model(const RunConfig& cfg);
Lattice build_lattice_from(const RunConfig& cfg);
Barrier build_barrier(const RunConfig& cfg);

// Highest truncation level the ladder can reach.
double ladder_top(const TruncationLadder& ladder);

// Presets shipped with the repository (also written under configs/ as JSON).
std::vector<std::string> bundled_names();
RunConfig bundled_config(const std::string& name);

} // namespace bsdekit
