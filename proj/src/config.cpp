#include "bsdekit/config.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bsdekit {

namespace {

using nlohmann::json;

double to_double(const json& v, const std::string& what) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw ConfigError("config field '" + what +
                              "' is not a numeric string: " + s);
        return d;
    }
    if (v.is_number()) return v.get<double>();
    throw ConfigError("config field '" + what + "' must be a number");
}

double num_field(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return to_double(obj.at(key), key);
}

int int_field(const json& obj, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const double d = to_double(obj.at(key), key);
    const double r = std::llround(d);
    if (std::fabs(d - r) > 0.0)
        throw ConfigError("config field '" + key + "' must be an integer");
    return static_cast<int>(r);
}

XiSpec parse_xi(const json& v) {
    XiSpec xi;
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity") {
            xi.kind = XiSpec::Kind::Inf;
            return xi;
        }
        xi.kind = XiSpec::Kind::Const;
        xi.value = to_double(v, "xi");
        return xi;
    }
    if (v.is_number()) {
        xi.kind = XiSpec::Kind::Const;
        xi.value = v.get<double>();
        return xi;
    }
    if (v.is_object()) {
        const std::string kind = v.value("kind", "");
        if (kind == "inf") {
            xi.kind = XiSpec::Kind::Inf;
        } else if (kind == "const") {
            xi.kind = XiSpec::Kind::Const;
            xi.value = num_field(v, "value", 0.0);
        } else if (kind == "call") {
            xi.kind = XiSpec::Kind::Call;
            xi.strike = num_field(v, "strike", 0.0);
        } else {
            throw ConfigError("unknown xi kind: '" + kind + "'");
        }
        return xi;
    }
    throw ConfigError("xi must be \"inf\", a number, or an object");
}

BarrierSpec parse_barrier(const json& v) {
    BarrierSpec b;
    const std::string kind = v.value("kind", "none");
    if (kind == "none") {
        b.kind = BarrierSpec::Kind::None;
    } else if (kind == "const") {
        b.kind = BarrierSpec::Kind::Const;
        b.value = num_field(v, "value", 0.0);
    } else if (kind == "call") {
        b.kind = BarrierSpec::Kind::Call;
        b.strike = num_field(v, "strike", 0.0);
    } else {
        throw ConfigError("unknown barrier kind: '" + kind + "'");
    }
    return b;
}

} // namespace

bool operator==(const XiSpec& a, const XiSpec& b) {
    return a.kind == b.kind && a.value == b.value && a.strike == b.strike;
}

bool operator==(const BarrierSpec& a, const BarrierSpec& b) {
    return a.kind == b.kind && a.value == b.value && a.strike == b.strike;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.name == b.name && a.family == b.family && a.theta == b.theta &&
           a.eta0 == b.eta0 && a.gamma0 == b.gamma0 && a.xi == b.xi &&
           a.vols == b.vols && a.drift == b.drift && a.n_steps == b.n_steps &&
           a.horizon == b.horizon && a.x_min == b.x_min && a.x_max == b.x_max &&
           a.n_points == b.n_points && a.ladder.l0 == b.ladder.l0 &&
           a.ladder.growth == b.ladder.growth &&
           a.ladder.max_levels == b.ladder.max_levels &&
           a.ladder.eps_cutoff == b.ladder.eps_cutoff &&
           a.ladder.tol == b.ladder.tol && a.mc_paths == b.mc_paths &&
           a.seed == b.seed && a.x0 == b.x0 &&
           a.lattice_tol_rel == b.lattice_tol_rel && a.liq_tol == b.liq_tol &&
           a.barrier == b.barrier && a.mollify_levels == b.mollify_levels &&
           a.out_dir == b.out_dir && a.formats == b.formats;
}

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    RunConfig cfg;
    cfg.name = j.value("name", cfg.name);
    if (j.contains("model")) {
        const json& m = j.at("model");
        cfg.family = m.value("family", cfg.family);
        cfg.theta = num_field(m, "theta", cfg.theta);
        cfg.eta0 = num_field(m, "eta0", cfg.eta0);
        cfg.gamma0 = num_field(m, "gamma0", cfg.gamma0);
        if (m.contains("xi")) cfg.xi = parse_xi(m.at("xi"));
    }
    if (j.contains("uncertainty")) {
        const json& u = j.at("uncertainty");
        if (u.contains("vols")) {
            cfg.vols.clear();
            for (const json& v : u.at("vols"))
                cfg.vols.push_back(to_double(v, "vols"));
        }
        cfg.drift = num_field(u, "drift", cfg.drift);
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        cfg.n_steps = int_field(g, "n_steps", cfg.n_steps);
        cfg.horizon = num_field(g, "horizon", cfg.horizon);
        cfg.x_min = num_field(g, "x_min", cfg.x_min);
        cfg.x_max = num_field(g, "x_max", cfg.x_max);
        cfg.n_points = int_field(g, "n_points", cfg.n_points);
    }
    if (j.contains("ladder")) {
        const json& l = j.at("ladder");
        cfg.ladder.l0 = num_field(l, "l0", cfg.ladder.l0);
        cfg.ladder.growth = num_field(l, "growth", cfg.ladder.growth);
        cfg.ladder.max_levels = int_field(l, "max_levels", cfg.ladder.max_levels);
        cfg.ladder.eps_cutoff = num_field(l, "eps", cfg.ladder.eps_cutoff);
        cfg.ladder.tol = num_field(l, "tol", cfg.ladder.tol);
    }
    if (j.contains("mc")) {
        const json& m = j.at("mc");
        if (m.contains("paths")) {
            const double p = to_double(m.at("paths"), "paths");
            if (p < 0) throw ConfigError("mc paths must be non-negative");
            cfg.mc_paths = static_cast<std::size_t>(p);
        }
        if (m.contains("seed"))
            cfg.seed = m.at("seed").get<std::uint64_t>();
    }
    if (j.contains("control")) {
        const json& c = j.at("control");
        cfg.x0 = num_field(c, "x0", cfg.x0);
        cfg.lattice_tol_rel = num_field(c, "lattice_tol_rel", cfg.lattice_tol_rel);
        cfg.liq_tol = num_field(c, "liq_tol", cfg.liq_tol);
    }
    if (j.contains("barrier")) cfg.barrier = parse_barrier(j.at("barrier"));
    if (j.contains("mollify")) {
        const json& m = j.at("mollify");
        if (m.contains("levels")) {
            cfg.mollify_levels.clear();
            for (const json& v : m.at("levels")) {
                const int lev = static_cast<int>(to_double(v, "levels"));
                cfg.mollify_levels.push_back(lev);
            }
        }
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        cfg.out_dir = o.value("dir", cfg.out_dir);
        if (o.contains("formats")) {
            cfg.formats.clear();
            for (const json& v : o.at("formats"))
                cfg.formats.push_back(v.get<std::string>());
        }
    }

    if (cfg.family != "constant" && cfg.family != "geometric-eta" &&
        cfg.family != "quadratic-risk" && cfg.family != "linear-reward")
        throw ConfigError("unknown model family: '" + cfg.family + "'");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

JsonValue resolved_config_json(const RunConfig& cfg) {
    JsonValue root = JsonValue::object();
    root.set("name", cfg.name);

    JsonValue model = JsonValue::object();
    model.set("family", cfg.family);
    model.set("theta", cfg.theta);
    model.set("eta0", cfg.eta0);
    model.set("gamma0", cfg.gamma0);
    JsonValue xi = JsonValue::object();
    switch (cfg.xi.kind) {
    case XiSpec::Kind::Inf: xi.set("kind", "inf"); break;
    case XiSpec::Kind::Const:
        xi.set("kind", "const");
        xi.set("value", cfg.xi.value);
        break;
    case XiSpec::Kind::Call:
        xi.set("kind", "call");
        xi.set("strike", cfg.xi.strike);
        break;
    }
    model.set("xi", std::move(xi));
    root.set("model", std::move(model));

    JsonValue unc = JsonValue::object();
    JsonValue vols = JsonValue::array();
    for (double v : cfg.vols) vols.push(JsonValue::number(v));
    unc.set("vols", std::move(vols));
    unc.set("drift", cfg.drift);
    root.set("uncertainty", std::move(unc));

    JsonValue grid = JsonValue::object();
    grid.set("n_steps", cfg.n_steps);
    grid.set("horizon", cfg.horizon);
    grid.set("x_min", cfg.x_min);
    grid.set("x_max", cfg.x_max);
    grid.set("n_points", cfg.n_points);
    root.set("grid", std::move(grid));

    JsonValue ladder = JsonValue::object();
    ladder.set("l0", cfg.ladder.l0);
    ladder.set("growth", cfg.ladder.growth);
    ladder.set("max_levels", cfg.ladder.max_levels);
    ladder.set("eps", cfg.ladder.eps_cutoff);
    ladder.set("tol", cfg.ladder.tol);
    root.set("ladder", std::move(ladder));

    JsonValue mc = JsonValue::object();
    mc.set("paths", static_cast<std::int64_t>(cfg.mc_paths));
    mc.set("seed", static_cast<std::int64_t>(cfg.seed));
    root.set("mc", std::move(mc));

    JsonValue control = JsonValue::object();
    control.set("x0", cfg.x0);
    control.set("lattice_tol_rel", cfg.lattice_tol_rel);
    control.set("liq_tol", cfg.liq_tol);
    root.set("control", std::move(control));

    JsonValue barrier = JsonValue::object();
    switch (cfg.barrier.kind) {
    case BarrierSpec::Kind::None: barrier.set("kind", "none"); break;
    case BarrierSpec::Kind::Const:
        barrier.set("kind", "const");
        barrier.set("value", cfg.barrier.value);
        break;
    case BarrierSpec::Kind::Call:
        barrier.set("kind", "call");
        barrier.set("strike", cfg.barrier.strike);
        break;
    }
    root.set("barrier", std::move(barrier));

    JsonValue mollify = JsonValue::object();
    JsonValue levels = JsonValue::array();
    for (int lev : cfg.mollify_levels)
        levels.push(JsonValue::integer(lev));
    mollify.set("levels", std::move(levels));
    root.set("mollify", std::move(mollify));

    JsonValue output = JsonValue::object();
    output.set("dir", cfg.out_dir);
    JsonValue formats = JsonValue::array();
    for (const std::string& f : cfg.formats)
        formats.push(JsonValue::string(f));
    output.set("formats", std::move(formats));
    root.set("output", std::move(output));
    return root;
}

Model build_model(const RunConfig& cfg) {
    Model model;
    model.name = cfg.name;
    GeneratorSpec gen;
    gen.theta = cfg.theta;
    gen.q = holder_conjugate(cfg.theta);
    gen.l1 = 0.0;
    gen.l2 = 0.0;
    gen.has_y_term = cfg.family != "linear-reward";
    const double eta0 = cfg.eta0;
    const double gamma0 = cfg.gamma0;
    if (cfg.family == "geometric-eta") {
        // The state coordinate is the log of the impact process, already
        // carrying the quadratic-variation compensator; the matching -a/2
        // kernel-drift correction below keeps eta a martingale under every
        // volatility choice, so the value is measure-consistent even when
        // the worst case switches levels along the way.
        gen.eta_fn = [eta0](double, double x, double) {
            return eta0 * std::exp(x);
        };
    } else {
        gen.eta_fn = [eta0](double, double, double) { return eta0; };
    }
    if (cfg.family == "quadratic-risk") {
        gen.gamma_fn = [gamma0](double, double x, double) {
            return gamma0 + x * x;
        };
    } else {
        gen.gamma_fn = [gamma0](double, double, double) { return gamma0; };
    }
    model.gen = gen;

    TerminalSpec term;
    switch (cfg.xi.kind) {
    case XiSpec::Kind::Inf:
        term.singular_fn = [](double) { return true; };
        break;
    case XiSpec::Kind::Const: {
        const double v = cfg.xi.value;
        term.xi_fn = [v](double) { return v; };
        break;
    }
    case XiSpec::Kind::Call: {
        const double k = cfg.xi.strike;
        term.xi_fn = [k](double x) { return std::max(x - k, 0.0); };
        break;
    }
    }
    model.term = term;

    UncertaintySet unc;
    unc.vol_grid = cfg.vols;
    if (cfg.drift != 0.0) {
        const double b = cfg.drift;
        unc.drift_fn = [b](double) { return b; };
    }
    if (cfg.family == "geometric-eta") unc.vol_drift_coeff = -0.5;
    model.unc = unc;
    return model;
}

Lattice build_lattice_from(const RunConfig& cfg) {
    const TimeGrid tg = make_time_grid(cfg.horizon, cfg.n_steps);
    const StateGrid sg = make_state_grid(cfg.x_min, cfg.x_max, cfg.n_points);
    return build_lattice(tg, sg, build_model(cfg).unc);
}

Barrier build_barrier(const RunConfig& cfg) {
    switch (cfg.barrier.kind) {
    case BarrierSpec::Kind::Const: {
        const double v = cfg.barrier.value;
        return Barrier::of([v](double, double) { return v; });
    }
    case BarrierSpec::Kind::Call: {
        const double k = cfg.barrier.strike;
        return Barrier::of([k](double, double x) { return std::max(x - k, 0.0); });
    }
    default: return Barrier::none_barrier();
    }
}

double ladder_top(const TruncationLadder& ladder) {
    double level = ladder.l0;
    for (int i = 1; i < ladder.max_levels; ++i) level *= ladder.growth;
    return level;
}

std::vector<std::string> bundled_names() {
    return {"constant",         "geometric-eta",  "constant-singular",
            "constant-truncated", "quadratic-risk", "geometric-bounded",
            "rbsde-tree"};
}

RunConfig bundled_config(const std::string& name) {
    RunConfig cfg;
    cfg.name = name;
    if (name == "constant") {
        cfg.family = "constant";
        cfg.vols = {0.04, 0.09, 0.16};
        cfg.n_steps = 500;
        cfg.x_min = -3.0;
        cfg.x_max = 3.0;
        cfg.n_points = 41;
        cfg.ladder = TruncationLadder{1.0, 2.0, 17, 0.05, 1e-6};
        cfg.mc_paths = 100000;
        cfg.seed = 20240601;
    } else if (name == "geometric-eta") {
        cfg.family = "geometric-eta";
        cfg.vols = {0.04, 0.09, 0.16};
        cfg.n_steps = 200;
        cfg.x_min = -6.0;
        cfg.x_max = 6.0;
        cfg.n_points = 401;
        cfg.ladder = TruncationLadder{1.0, 2.0, 6, 0.05, 1e-6};
        cfg.mc_paths = 20000;
        cfg.seed = 20240601;
    } else if (name == "constant-singular") {
        cfg.family = "constant";
        cfg.vols = {0.09};
        cfg.n_steps = 2097152;
        cfg.x_min = -1.0;
        cfg.x_max = 1.0;
        cfg.n_points = 3;
        cfg.ladder = TruncationLadder{1.0, 2.0, 17, 0.05, 1e-6};
    } else if (name == "constant-truncated") {
        cfg.family = "constant";
        cfg.vols = {0.09};
        cfg.n_steps = 2000;
        cfg.x_min = -1.0;
        cfg.x_max = 1.0;
        cfg.n_points = 3;
        cfg.ladder = TruncationLadder{0.25, 2.0, 3, 0.05, 1e-6};
    } else if (name == "quadratic-risk") {
        cfg.family = "quadratic-risk";
        cfg.xi = XiSpec{XiSpec::Kind::Const, 1.0, 0.0};
        cfg.vols = {0.04, 0.16};
        cfg.drift = 0.1;
        cfg.n_steps = 200;
        cfg.x_min = -3.0;
        cfg.x_max = 3.0;
        cfg.n_points = 101;
        cfg.ladder = TruncationLadder{0.25, 2.0, 4, 0.05, 1e-6};
    } else if (name == "geometric-bounded") {
        cfg.family = "geometric-eta";
        cfg.xi = XiSpec{XiSpec::Kind::Const, 0.1, 0.0};
        cfg.vols = {0.04, 0.09, 0.16};
        cfg.n_steps = 2000;
        cfg.x_min = -2.0;
        cfg.x_max = 2.0;
        cfg.n_points = 401;
        cfg.ladder = TruncationLadder{0.025, 2.0, 4, 0.05, 1e-6};
    } else if (name == "rbsde-tree") {
        cfg.family = "linear-reward";
        cfg.gamma0 = 0.05;
        cfg.xi = XiSpec{XiSpec::Kind::Call, 0.0, 0.0};
        cfg.vols = {0.1};
        cfg.n_steps = 10;
        cfg.x_min = -1.0;
        cfg.x_max = 1.0;
        cfg.n_points = 21;
        cfg.barrier = BarrierSpec{BarrierSpec::Kind::Call, 0.0, 0.0};
        cfg.ladder = TruncationLadder{1.0, 2.0, 1, 0.05, 1e-6};
    } else {
        throw ConfigError("unknown bundled config: '" + name + "'");
    }
    return cfg;
}

} // namespace bsdekit
