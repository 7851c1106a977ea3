#include "bsdekit/pipeline.hpp"

#include "bsdekit/oracle.hpp"
#include "bsdekit/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <optional>

namespace bsdekit {

namespace {

bool wants(const RunConfig& cfg, const std::string& fmt) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), fmt) !=
           cfg.formats.end();
}

void emit_resolved(const RunConfig& cfg) {
    ensure_directory(cfg.out_dir);
    write_text_file(join_path(cfg.out_dir, "resolved_config.json"),
                    resolved_config_json(cfg).dump() + "\n");
}

void emit_report(const RunConfig& cfg, const std::string& file,
                 const JsonValue& report) {
    if (wants(cfg, "json"))
        write_text_file(join_path(cfg.out_dir, file), report.dump() + "\n");
}

// Field CSV in (t, x, value) order; long runs are strided down to at most
// ~2k time slices (slice 0 and the terminal slice always included).
void write_field_csv(const std::string& path, const Lattice& lat,
                     const Field& f) {
    CsvWriter csv(path, {"t", "x", "value"});
    const std::size_t max_slices = 2049;
    const std::size_t stride =
        f.n_slices <= max_slices ? 1 : (f.n_slices + max_slices - 1) / max_slices;
    for (std::size_t i = 0; i < f.n_slices; i += stride) {
        const std::size_t slice =
            (i + stride < f.n_slices) ? i : f.n_slices - 1; // force terminal
        for (std::size_t j = 0; j < f.n_points; ++j)
            csv.row({lat.tg.node(static_cast<int>(slice)),
                     lat.sg.node(static_cast<int>(j)), f.at(slice, j)});
        if (slice == f.n_slices - 1) break;
    }
}

SolverStats merged_stats(const Solution2& sol) {
    SolverStats s;
    for (const BackwardSolution& b : sol.y_single) s.merge(b.meta);
    return s;
}

JsonValue stats_json(const SolverStats& s) {
    JsonValue j = JsonValue::object();
    j.set("newton_iterations", static_cast<std::int64_t>(s.newton_iterations));
    j.set("max_iterations_step", s.max_iterations_step);
    j.set("max_residual", s.max_residual);
    return j;
}

void say(bool quiet, const std::string& line) {
    if (!quiet) std::cout << line << "\n";
}

} // namespace

void validate_or_throw(const Model& model, const TimeGrid& tg,
                       const StateGrid& sg) {
    const ValidationReport rep =
        validate_model(model.gen, model.term, model.unc, tg, sg);
    if (rep.ok()) return;
    std::string msg = "model validation failed:";
    for (const std::string& v : rep.violations) msg += "\n  - " + v;
    throw ConfigError(msg);
}

std::string join_path(const std::string& dir, const std::string& file) {
    if (dir.empty()) return file;
    if (dir.back() == '/') return dir + file;
    return dir + "/" + file;
}

JsonValue run_solve(const RunConfig& cfg, bool quiet) {
    const Model model = build_model(cfg);
    const Lattice lat = build_lattice_from(cfg);
    validate_or_throw(model, lat.tg, lat.sg);
    emit_resolved(cfg);

    const Solution2 sol = solve_truncated(model, lat, cfg.ladder.l0);
    const double y0 = sol.y0(lat);
    if (wants(cfg, "csv"))
        write_field_csv(join_path(cfg.out_dir, "solve_field.csv"), lat,
                        sol.y_upper);

    JsonValue report = JsonValue::object();
    report.set("command", "solve");
    report.set("name", cfg.name);
    report.set("level", cfg.ladder.l0);
    report.set("y0", y0);
    report.set("n_steps", cfg.n_steps);
    report.set("n_points", cfg.n_points);
    report.set("n_vols", static_cast<std::int64_t>(cfg.vols.size()));
    report.set("stats", stats_json(merged_stats(sol)));
    emit_report(cfg, "solve_report.json", report);
    say(quiet, "solve " + cfg.name + ": y0 = " + fmt17(y0));
    return report;
}

JsonValue run_singular(const RunConfig& cfg, bool quiet) {
    const Model model = build_model(cfg);
    const Lattice lat = build_lattice_from(cfg);
    validate_or_throw(model, lat.tg, lat.sg);
    emit_resolved(cfg);

    const SingularSolution sing = solve_singular(model, lat, cfg.ladder);
    if (wants(cfg, "csv")) {
        CsvWriter levels(join_path(cfg.out_dir, "levels.csv"),
                         {"level", "sup_increment", "y0", "bound_slack",
                          "monotone_violation"});
        for (const LevelDiagnostics& d : sing.table)
            levels.row({d.level, d.sup_increment, d.y0, d.bound_slack,
                        d.monotone_violation});

        CsvWriter profile(join_path(cfg.out_dir, "profile.csv"), {"t", "value"});
        const int j0 = lat.sg.nearest(0.0);
        const std::size_t count = static_cast<std::size_t>(sing.i_eps) + 1;
        const std::size_t stride = count <= 2049 ? 1 : (count + 2048) / 2049;
        for (std::size_t i = 0; i < count; i += stride)
            profile.row({lat.tg.node(static_cast<int>(i)),
                         sing.y_limit.at(i, static_cast<std::size_t>(j0))});
    }

    double min_slack = kInf;
    double max_mono = 0.0;
    for (const LevelDiagnostics& d : sing.table) {
        min_slack = std::min(min_slack, d.bound_slack);
        max_mono = std::max(max_mono, d.monotone_violation);
    }
    JsonValue report = JsonValue::object();
    report.set("command", "singular");
    report.set("name", cfg.name);
    report.set("converged", sing.converged);
    report.set("levels", static_cast<std::int64_t>(sing.levels_used.size()));
    report.set("top_level", sing.levels_used.back());
    report.set("y0", sing.table.back().y0);
    report.set("final_increment",
               sing.increments.empty() ? kInf : sing.increments.back());
    report.set("profile_exponent", sing.profile_exponent);
    report.set("min_bound_slack", min_slack);
    report.set("max_monotone_violation", max_mono);
    report.set("i_eps", sing.i_eps);
    emit_report(cfg, "singular_report.json", report);
    say(quiet, "singular " + cfg.name + ": y0 = " + fmt17(sing.table.back().y0) +
                   ", levels = " + std::to_string(sing.levels_used.size()) +
                   (sing.converged ? " (converged)" : " (budget exhausted)"));
    return report;
}

JsonValue run_liquidate(const RunConfig& cfg, bool quiet) {
    const Model model = build_model(cfg);
    const Lattice lat = build_lattice_from(cfg);
    validate_or_throw(model, lat.tg, lat.sg);
    emit_resolved(cfg);

    const SingularSolution sing = solve_singular(model, lat, cfg.ladder);
    const double level_final = sing.levels_used.back();
    const Solution2 sol = solve_truncated(model, lat, level_final);
    const double y0 = sol.y0(lat);

    const LatticePath spine = stay_path_argmax(lat, sol);
    const Trajectory traj =
        integrate_state(sol.y_upper, model, lat, spine, cfg.x0);
    const bool term_ok =
        terminal_constraint_check(traj, model.term, lat, cfg.liq_tol);
    if (wants(cfg, "csv")) {
        CsvWriter csv(join_path(cfg.out_dir, "trajectory.csv"),
                      {"t", "inventory", "rate", "y", "eta"});
        for (std::size_t i = 0; i < traj.times.size(); ++i)
            csv.row({traj.times[i], traj.state[i], traj.rate[i], traj.y[i],
                     traj.eta[i]});
    }

    JsonValue report = JsonValue::object();
    report.set("command", "liquidate");
    report.set("name", cfg.name);
    report.set("level", level_final);
    report.set("y0", y0);
    report.set("x0", cfg.x0);
    report.set("terminal_inventory", traj.state.back());
    report.set("terminal_check", term_ok);

    if (cfg.mc_paths > 0) {
        // Singular data: verify against the uncapped functional with the
        // liquidation convention. Bounded data: verify against the capped
        // functional the ladder level actually solved.
        const std::optional<double> cap_mc =
            model.term.singular_fn ? std::optional<double>{}
                                   : std::optional<double>{level_final};
        const Strategy strat = Strategy::feedback(sol.y_upper);
        const CostEstimate worst =
            worst_case_cost(strat, model, lat, sol, cfg.x0, cfg.mc_paths,
                            cfg.seed, cap_mc, cfg.liq_tol);
        const double candidate = y0 * pow_abs(cfg.x0, model.gen.theta);
        const VerificationReport ver = verify_value(
            y0, model.gen.theta, cfg.x0, worst,
            cfg.lattice_tol_rel * std::fabs(candidate));
        JsonValue mc = JsonValue::object();
        mc.set("paths", static_cast<std::int64_t>(cfg.mc_paths));
        mc.set("seed", static_cast<std::int64_t>(cfg.seed));
        mc.set("candidate", ver.candidate);
        mc.set("mean", ver.mc_mean);
        mc.set("se", ver.se);
        mc.set("gap", ver.gap);
        mc.set("z", ver.z);
        mc.set("lattice_tol", ver.lattice_tol);
        mc.set("pass", ver.pass);
        mc.set("attaining", worst.attaining);
        mc.set("n_infinite", static_cast<std::int64_t>(worst.n_infinite));
        JsonValue breakdown = JsonValue::array();
        for (const MeasureCost& m : worst.breakdown) {
            JsonValue row = JsonValue::object();
            row.set("policy", m.label);
            row.set("mean", m.mean);
            row.set("se", m.se);
            row.set("n_infinite", static_cast<std::int64_t>(m.n_infinite));
            breakdown.push(std::move(row));
        }
        mc.set("per_measure", std::move(breakdown));
        report.set("mc", std::move(mc));
        say(quiet, "liquidate " + cfg.name + ": candidate = " +
                       fmt17(ver.candidate) + ", mc = " + fmt17(ver.mc_mean) +
                       (ver.pass ? " (pass)" : " (FAIL)"));
    } else {
        say(quiet, "liquidate " + cfg.name + ": y0 = " + fmt17(y0) +
                       ", terminal inventory = " + fmt17(traj.state.back()));
    }
    emit_report(cfg, "cost_report.json", report);
    return report;
}

JsonValue run_rbsde(const RunConfig& cfg, bool quiet) {
    const Model model = build_model(cfg);
    const Lattice lat = build_lattice_from(cfg);
    validate_or_throw(model, lat.tg, lat.sg);
    emit_resolved(cfg);

    const std::optional<double> cap =
        model.term.singular_fn ? std::optional<double>{ladder_top(cfg.ladder)}
                               : std::optional<double>{};
    const std::vector<double> terminal =
        terminal_slice(model.term, lat.sg, cap);
    const Barrier barrier = build_barrier(cfg);
    const VolPolicy policy = constant_policy(0);

    const ReflectedSolution rsol =
        solve_reflected(model, lat, policy, terminal, barrier, cap);
    const BackwardSolution plain =
        solve_bsde_single(model, lat, policy, terminal, cap);
    const double domination =
        compare_fields(plain.y, rsol.y_tilde).max_violation;
    const double gap = snell_check(rsol, model, lat, policy);
    const int j0 = lat.sg.nearest(0.0);

    if (wants(cfg, "csv")) {
        CsvWriter csv(join_path(cfg.out_dir, "rbsde_field.csv"),
                      {"t", "x", "y_tilde", "dk_tilde", "obstacle"});
        for (std::size_t i = 0; i < rsol.y_tilde.n_slices; ++i)
            for (std::size_t j = 0; j < rsol.y_tilde.n_points; ++j)
                csv.row({lat.tg.node(static_cast<int>(i)),
                         lat.sg.node(static_cast<int>(j)), rsol.y_tilde.at(i, j),
                         rsol.dk_tilde.at(i, j), rsol.s_nodes.at(i, j)});
    }

    JsonValue report = JsonValue::object();
    report.set("command", "rbsde");
    report.set("name", cfg.name);
    report.set("y0", rsol.y_tilde.at(0, static_cast<std::size_t>(j0)));
    report.set("snell_gap", gap);
    report.set("skorokhod_residual", rsol.skorokhod_residual());
    report.set("complementarity_violation", rsol.complementarity_violation());
    report.set("domination_violation", domination);
    report.set("stats", stats_json(rsol.meta));
    emit_report(cfg, "rbsde_report.json", report);
    say(quiet, "rbsde " + cfg.name + ": snell gap = " + fmt17(gap));
    return report;
}

JsonValue run_mollify_demo(const RunConfig& cfg, bool quiet) {
    const Model model = build_model(cfg);
    const Lattice lat = build_lattice_from(cfg);
    validate_or_throw(model, lat.tg, lat.sg);
    emit_resolved(cfg);

    // Growth constant of the driver family over the lattice nodes.
    double lq = 0.0;
    for (int i = 0; i <= lat.tg.n_steps && i <= 4096; ++i)
        for (int j = 0; j < lat.sg.n_points; ++j)
            for (int k = 0; k < lat.n_vols(); ++k)
                lq = std::max(lq, model.gen.inv_eta_pow(lat.tg.node(i),
                                                        lat.sg.node(j),
                                                        lat.vol(k)));

    const int j0 = lat.sg.nearest(0.0);
    const double x0 = lat.sg.node(j0);
    const double a0 = lat.vol(0);
    const auto cubic = [](double y) { return -y * y * y; };
    const auto driver = [&](double y) {
        return evaluate_driver(model.gen, 0.0, x0, a0, y, std::nullopt);
    };
    const auto sup_gap = [](const std::function<double(double)>& f,
                            const std::function<double(double)>& g) {
        double worst = 0.0;
        for (int s = 0; s <= 400; ++s) {
            const double y = -2.0 + 4.0 * s / 400.0;
            worst = std::max(worst, std::fabs(f(y) - g(y)));
        }
        return worst;
    };

    JsonValue rows = JsonValue::array();
    std::optional<CsvWriter> csv;
    if (wants(cfg, "csv"))
        csv.emplace(join_path(cfg.out_dir, "mollify.csv"),
                    std::vector<std::string>{"n", "cubic_gap", "driver_gap",
                                             "driver_growth_margin",
                                             "cubic_monotonicity",
                                             "driver_monotonicity"});

    for (int n : cfg.mollify_levels) {
        MollifierSpec spec;
        spec.n = n;
        spec.l_q = lq;
        spec.horizon = cfg.horizon;
        const auto cubic_n = build_mollified(cubic, spec);
        const auto driver_n = build_mollified(driver, spec);
        const double cubic_gap = sup_gap(cubic_n, cubic);
        const double driver_gap = sup_gap(driver_n, driver);
        const double growth_margin = std::fabs(driver(0.0)) + 2.0 * lq +
                                     1e-10 - std::fabs(driver_n(0.0));
        const double mono_c = local_monotonicity_check(cubic_n, 2.0, 201);
        const double mono_d = local_monotonicity_check(driver_n, 2.0, 201);
        if (csv)
            csv->row({static_cast<double>(n), cubic_gap, driver_gap,
                      growth_margin, mono_c, mono_d});
        JsonValue row = JsonValue::object();
        row.set("n", n);
        row.set("cubic_gap", cubic_gap);
        row.set("driver_gap", driver_gap);
        row.set("driver_growth_margin", growth_margin);
        row.set("cubic_monotonicity", mono_c);
        row.set("driver_monotonicity", mono_d);
        rows.push(std::move(row));
        say(quiet, "mollify n=" + std::to_string(n) +
                       ": cubic gap = " + fmt17(cubic_gap));
    }
    JsonValue report = JsonValue::object();
    report.set("command", "mollify-demo");
    report.set("name", cfg.name);
    report.set("l_q", lq);
    report.set("levels", std::move(rows));
    emit_report(cfg, "mollify_report.json", report);
    return report;
}

JsonValue run_oracle(const RunConfig& cfg, bool quiet) {
    const Model model = build_model(cfg);
    emit_resolved(cfg);
    const int rows = 101;
    JsonValue report = JsonValue::object();
    report.set("command", "oracle");
    report.set("name", cfg.name);

    if (cfg.family == "geometric-eta") {
        const double b = cfg.drift;
        const auto b_fn = [b](double) { return b; };
        std::optional<CsvWriter> csv;
        if (wants(cfg, "csv"))
            csv.emplace(join_path(cfg.out_dir, "oracle.csv"),
                        std::vector<std::string>{"t", "y", "inventory_ratio"});
        for (int i = 0; i < rows; ++i) {
            const double t = cfg.horizon * i / rows; // strictly before horizon
            const oracle::GeometricValue v = oracle::closed_form_geometric(
                cfg.eta0, b_fn, cfg.theta, cfg.horizon, t);
            if (csv) csv->row({t, v.y, v.inventory_ratio});
        }
        report.set("kind", "closed-form");
    } else {
        const double eta0 = cfg.eta0;
        const double gamma0 = cfg.gamma0;
        const int j0 = make_state_grid(cfg.x_min, cfg.x_max, cfg.n_points)
                           .nearest(0.0);
        const double x_sp =
            make_state_grid(cfg.x_min, cfg.x_max, cfg.n_points).node(j0);
        const auto eta_t = [eta0](double) { return eta0; };
        const auto gamma_t = [&model, gamma0, x_sp](double t) {
            return model.gen.gamma_fn ? model.gen.gamma_fn(t, x_sp, 0.0)
                                      : gamma0;
        };
        const std::optional<double> cap =
            model.term.singular_fn ? std::optional<double>{}
                                   : std::optional<double>{model.term.value(x_sp)};
        const oracle::OdeSolution ode = oracle::ode_oracle(
            eta_t, gamma_t, cfg.theta, cfg.horizon, cap, 200000);
        std::optional<CsvWriter> csv;
        if (wants(cfg, "csv"))
            csv.emplace(join_path(cfg.out_dir, "oracle.csv"),
                        std::vector<std::string>{"t", "y"});
        for (int i = 0; i < rows; ++i) {
            const double t = cfg.horizon * i / rows;
            if (csv) csv->row({t, ode.eval(t)});
        }
        report.set("kind", "ode");
    }
    report.set("rows", rows);
    emit_report(cfg, "oracle_report.json", report);
    say(quiet, "oracle " + cfg.name + ": " + std::to_string(rows) + " rows");
    return report;
}

} // namespace bsdekit
