#include "doctest.h"

#include "bsdekit/config.hpp"

#include <string>

using namespace bsdekit;

#ifndef BSDEKIT_SOURCE_DIR
#define BSDEKIT_SOURCE_DIR "."
#endif

TEST_CASE("empty document yields the default run configuration") {
    CHECK(parse_config_json("{}") == RunConfig{});
}

TEST_CASE("every shipped config file equals its bundled preset") {
    for (const std::string& name : bundled_names()) {
        CAPTURE(name);
        const std::string path =
            std::string(BSDEKIT_SOURCE_DIR) + "/configs/" + name + ".json";
        CHECK(parse_config_file(path) == bundled_config(name));
    }
}

TEST_CASE("resolved config text parses back to an equal value") {
    for (const std::string& name : bundled_names()) {
        CAPTURE(name);
        const RunConfig cfg = bundled_config(name);
        const std::string text = resolved_config_json(cfg).dump();
        CHECK(parse_config_json(text) == cfg);
    }
}

TEST_CASE("numeric strings are accepted for numeric fields") {
    const RunConfig cfg =
        parse_config_json(R"({"model": {"theta": "2.5"}})");
    CHECK(cfg.theta == 2.5);
    CHECK_THROWS_AS(parse_config_json(R"({"model": {"theta": "abc"}})"),
                    ConfigError);
}

TEST_CASE("shorthand terminal-weight spellings") {
    CHECK(parse_config_json(R"({"model": {"xi": "inf"}})").xi.kind ==
          XiSpec::Kind::Inf);
    const RunConfig num = parse_config_json(R"({"model": {"xi": 0.7}})");
    CHECK(num.xi.kind == XiSpec::Kind::Const);
    CHECK(num.xi.value == 0.7);
    const RunConfig call =
        parse_config_json(R"({"model": {"xi": {"kind": "call", "strike": 1.5}}})");
    CHECK(call.xi.kind == XiSpec::Kind::Call);
    CHECK(call.xi.strike == 1.5);
}

TEST_CASE("invalid inputs are rejected with a config error") {
    CHECK_THROWS_AS(parse_config_json(R"({"model": {"family": "bogus"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"model": {"xi": {"kind": "weird"}}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"grid": {"n_steps": 10.5}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"mc": {"paths": -5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"barrier": {"kind": "step"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_json("[1, 2, 3]"), ConfigError);
}

TEST_CASE("malformed json reports a parse error") {
    bool threw = false;
    try {
        parse_config_json("{not json");
    } catch (const ConfigError& e) {
        threw = true;
        CHECK(std::string(e.what()).rfind("config parse error", 0) == 0);
    }
    CHECK(threw);
}

TEST_CASE("missing file error names the path") {
    const std::string path = "/nonexistent/nope.json";
    bool threw = false;
    try {
        parse_config_file(path);
    } catch (const ConfigError& e) {
        threw = true;
        CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("ladder top level") {
    CHECK(ladder_top(TruncationLadder{1.0, 2.0, 17, 0.05, 1e-6}) == 65536.0);
    CHECK(ladder_top(TruncationLadder{0.25, 2.0, 3, 0.05, 1e-6}) == 1.0);
    CHECK(ladder_top(TruncationLadder{0.5, 2.0, 1, 0.05, 1e-6}) == 0.5);
}

TEST_CASE("bundled presets") {
    CHECK(bundled_names().size() == 7);
    CHECK_THROWS_AS(bundled_config("nope"), ConfigError);
    // Spot-check one preset beyond the file round trip.
    const RunConfig tree = bundled_config("rbsde-tree");
    CHECK(tree.family == "linear-reward");
    CHECK(tree.barrier.kind == BarrierSpec::Kind::Call);
    CHECK(tree.gamma0 == 0.05);
}

TEST_CASE("barrier construction follows the configured kind") {
    RunConfig cfg;
    cfg.barrier = BarrierSpec{BarrierSpec::Kind::Const, 0.3, 0.0};
    Barrier c = build_barrier(cfg);
    CHECK_FALSE(c.none);
    CHECK(c.s_fn(0.0, 99.0) == 0.3);

    cfg.barrier = BarrierSpec{BarrierSpec::Kind::Call, 0.0, 0.5};
    Barrier k = build_barrier(cfg);
    CHECK_FALSE(k.none);
    CHECK(k.s_fn(0.0, 1.0) == 0.5);
    CHECK(k.s_fn(0.0, -1.0) == 0.0);

    cfg.barrier = BarrierSpec{};
    CHECK(build_barrier(cfg).none);
}

TEST_CASE("model families map to the advertised coefficients") {
    RunConfig cfg = bundled_config("geometric-bounded");
    Model m = build_model(cfg);
    // eta = eta0 * exp(state); the state is the log of the impact process,
    // so the per-volatility kernel drift carries the -a/2 correction instead
    // of the coefficient function.
    CHECK(m.gen.eta_fn(0.0, 0.0, 0.09) == 1.0);
    CHECK(m.gen.eta_fn(1.0, 0.5, 0.16) ==
          doctest::Approx(std::exp(0.5)).epsilon(1e-15));
    CHECK(m.unc.vol_drift_coeff == -0.5);
    CHECK(m.gen.gamma_fn(0.3, 2.0, 0.04) == 0.0);
    CHECK(m.term.xi_fn(123.0) == 0.1);
    CHECK(m.gen.has_y_term);

    RunConfig qr = bundled_config("quadratic-risk");
    Model mq = build_model(qr);
    CHECK(mq.gen.gamma_fn(0.0, 2.0, 0.04) == 4.0);
    CHECK(mq.unc.drift_fn(0.7) == 0.1);
    CHECK(mq.unc.vol_drift_coeff == 0.0);

    Model tree = build_model(bundled_config("rbsde-tree"));
    CHECK_FALSE(tree.gen.has_y_term);
    CHECK(tree.term.xi_fn(0.25) == 0.25);
    CHECK(tree.term.xi_fn(-0.25) == 0.0);
}
