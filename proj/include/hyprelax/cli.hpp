#pragma once

#include "hyprelax/config.hpp"
#include "hyprelax/report.hpp"
#include "hyprelax/sk.hpp"
#include "hyprelax/symbol.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace hyprelax::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericError = 3;

namespace detail {

inline void write_output(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << text;
}

inline json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

} // namespace detail

struct CommandContext {
    std::ostream& out;
    std::ostream& err;
};

// --- validate ---------------------------------------------------------------

inline int cmd_validate(const std::string& config_path, const CommandContext& ctx) {
    const auto cfg = RunConfiguration::parse_file(config_path);
    const auto sys = system_from(cfg);
    const auto rep = validate(sys);
    json j{{"symmetric", rep.symmetric},
           {"l_block_structure", rep.l_block_structure},
           {"l2_positive", rep.l2_positive},
           {"c_dissip", rep.c_dissip},
           {"struct_assum", rep.struct_assum},
           {"max_asymmetry", rep.max_asymmetry},
           {"all", rep.all()}};
    ctx.out << j.dump(2) << "\n";
    return rep.all() ? kExitOk : kExitValidationFailure;
}

// --- sk-check ---------------------------------------------------------------

inline int cmd_sk_check(const std::string& config_path, int omega_count, bool assert_sk,
                        const CommandContext& ctx) {
    const auto cfg = RunConfiguration::parse_file(config_path);
    const auto sys = system_from(cfg);
    const auto rep = sk_condition(sys, omega_samples(sys.d, omega_count));
    json j{{"sk_holds", rep.sk_holds},
           {"n_vbar", rep.n_vbar},
           {"kalman_ranks", rep.kalman_ranks},
           {"worst_omega", detail::vec_to_json(rep.worst_omega)},
           {"elliptic", rep.elliptic},
           {"ellipticity_constant", rep.ellipticity_constant}};
    ctx.out << j.dump(2) << "\n";
    return (!assert_sk || rep.sk_holds) ? kExitOk : kExitValidationFailure;
}

// --- lyapunov ---------------------------------------------------------------

inline int cmd_lyapunov(const std::string& config_path, int omega_count, int rho_points,
                        const CommandContext& ctx) {
    const auto cfg = RunConfiguration::parse_file(config_path);
    const auto sys = system_from(cfg);
    const auto omegas = omega_samples(sys.d, omega_count);
    if (!sk_condition(sys, omegas).sk_holds) {
        json j{{"error",
                {{"type", "validation"},
                 {"message", "stability condition fails; no decay certificate exists"}}}};
        ctx.err << j.dump(2) << "\n";
        return kExitValidationFailure;
    }
    const auto cert = lyapunov_search(sys, default_rho_grid(rho_points), omegas);
    json j{{"eta", cert.eta},
           {"eps", cert.params.eps},
           {"kappa", cert.kappa},
           {"worst_frequency",
            {{"rho", cert.worst_rho}, {"omega", detail::vec_to_json(cert.worst_omega)}}}};
    ctx.out << j.dump(2) << "\n";
    return kExitOk;
}

// --- symbol-sweep -----------------------------------------------------------

inline int cmd_symbol_sweep(const std::string& config_path, double epsilon, double xi_max,
                            int points, const std::string& csv_path, const std::string& svg_path,
                            const CommandContext& ctx) {
    if (!(epsilon > 0.0)) throw ConfigError("symbol-sweep: epsilon must be positive");
    if (points < 2) throw ConfigError("symbol-sweep: need at least 2 points");
    const auto cfg = RunConfiguration::parse_file(config_path);
    const auto sys = system_from(cfg);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = xi_max * i / (points - 1);
    const auto curve = sweep(sys, epsilon, grid);

    const int n = sys.n();
    std::vector<std::string> cols{"xi"};
    for (int i = 1; i <= n; ++i) cols.push_back("re_lambda_" + std::to_string(i));
    for (int i = 1; i <= n; ++i) cols.push_back("im_lambda_" + std::to_string(i));
    cols.push_back("regime");
    CsvWriter csv(cols);
    RunConfiguration hdr = system_to_config(sys);
    hdr.set("symbol-sweep", "epsilon", format_double(epsilon));
    hdr.set("symbol-sweep", "xi_max", format_double(xi_max));
    hdr.set("symbol-sweep", "points", std::to_string(points));
    csv.set_header(hdr);
    for (const auto& e : curve.entries) {
        std::vector<std::string> row{format_double(e.xi_norm)};
        for (const auto& lam : e.eigenvalues) row.push_back(format_double(lam.real()));
        for (const auto& lam : e.eigenvalues) row.push_back(format_double(lam.imag()));
        row.push_back(to_string(e.regime));
        csv.add_text_row(row);
    }
    detail::write_output(csv_path, csv.str(), ctx.out);

    if (!svg_path.empty()) {
        std::vector<PlotSeries> series(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) series[static_cast<std::size_t>(i)].label = "Re lambda_" + std::to_string(i + 1);
        for (const auto& e : curve.entries)
            for (int i = 0; i < n; ++i)
                series[static_cast<std::size_t>(i)].points.emplace_back(
                    e.xi_norm, e.eigenvalues[static_cast<std::size_t>(i)].real());
        PlotStyle style{.title = "dispersion curve", .xlabel = "|xi|", .ylabel = "Re lambda"};
        write_svg_file(svg_path, series, style);
    }
    return kExitOk;
}

// --- besov-norm -------------------------------------------------------------

inline int cmd_besov_norm(const std::string& field_path, const std::string& csv_field_path,
                          double L_len, double s, double p, double r, std::optional<int> split,
                          const CommandContext& ctx) {
    SpectralField f = !csv_field_path.empty() ? read_field_csv(csv_field_path, L_len)
                                              : read_field_file(field_path);
    const BesovIndex idx{.s = s, .p = p, .r = r};
    json j{{"s", s}, {"p", p}, {"r", r}};
    if (split) {
        auto [lo, hi] = split_norms(f, idx, idx, *split);
        j["J"] = *split;
        j["low"] = lo;
        j["high"] = hi;
    } else {
        j["norm"] = besov_norm(f, idx);
    }
    ctx.out << j.dump(2) << "\n";
    return kExitOk;
}

// --- simulate-euler ---------------------------------------------------------

inline CsvWriter euler_diagnostics_csv(const RunConfiguration& resolved) {
    CsvWriter csv({"t", "mass", "energy", "low_state_dp", "high_state_d21", "low_c_dp2",
                   "low_v_dp1", "damped_mode_dp", "v_dp"});
    csv.set_header(resolved);
    return csv;
}

inline void append_record(CsvWriter& csv, const DiagnosticsRecord& r) {
    csv.add_row({r.t, r.mass, r.energy, r.low_state_dp, r.high_state_d21, r.low_c_dp2,
                 r.low_v_dp1, r.damped_mode_dp, r.v_dp});
}

inline int cmd_simulate_euler(const std::string& config_path, const CommandContext& ctx) {
    const auto cfg = RunConfiguration::parse_file(config_path);
    double d = 1.0;
    const EulerParams params = euler_params_from(cfg, &d);
    const TorusGrid grid = grid_from(cfg, static_cast<int>(d));
    const SolverFileConfig fc = solver_from(cfg, grid, params.epsilon);

    auto [c0, v0] = init_data(fc.init, grid);
    EulerState s0{std::move(c0), std::move(v0), 0.0, params};
    const auto traj = simulate(s0, fc.solver, params.epsilon);

    CsvWriter csv = euler_diagnostics_csv(cfg);
    for (const auto& r : traj.records) append_record(csv, r);
    detail::write_output(fc.csv_path, csv.str(), ctx.out);

    if (!fc.snapshot_prefix.empty()) {
        write_field_file(fc.snapshot_prefix + "_final_c.field", traj.final_state.c_tilde);
        for (int m = 0; m < grid.d; ++m)
            write_field_file(fc.snapshot_prefix + "_final_v" + std::to_string(m + 1) + ".field",
                             traj.final_state.v[static_cast<std::size_t>(m)]);
    }
    if (traj.aborted) throw NumericError(traj.abort_reason);
    return kExitOk;
}

// --- simulate-pme -----------------------------------------------------------

inline int cmd_simulate_pme(const std::string& config_path, const CommandContext& ctx) {
    const auto cfg = RunConfiguration::parse_file(config_path);
    double d = 1.0;
    const EulerParams params = euler_params_from(cfg, &d);
    const TorusGrid grid = grid_from(cfg, static_cast<int>(d));
    const SolverFileConfig fc = solver_from(cfg, grid, params.epsilon);

    auto [n0_dev, unused] = init_data(fc.init, grid);
    PmeState s0;
    s0.params = params;
    s0.density = n0_dev.map([&](double x) { return params.rho_bar + x; });
    const auto traj = simulate_pme(s0, fc.solver);

    CsvWriter csv({"t", "mass", "l2_distance", "besov_dp", "besov_dp2"});
    csv.set_header(cfg);
    for (const auto& r : traj.records)
        csv.add_row({r.t, r.mass, r.l2_distance, r.besov_dp, r.besov_dp2});
    detail::write_output(fc.csv_path, csv.str(), ctx.out);

    if (!fc.snapshot_prefix.empty())
        write_field_file(fc.snapshot_prefix + "_final_density.field", traj.final_state.density);
    if (traj.aborted) throw NumericError(traj.abort_reason);
    return kExitOk;
}

// --- relax-sweep ------------------------------------------------------------

inline json rate_report_json(const SweepConfig& sw, const RateReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"eps", r.eps},
                        {"sup_density_gap", r.sup_density_gap},
                        {"int_density_gap", r.int_density_gap},
                        {"int_darcy_residual", r.int_darcy_residual},
                        {"x_total", r.x_total},
                        {"data_norm", r.data_norm}});
    json cfgj;
    const RunConfiguration resolved = sweep_to_config(sw);
    for (const auto& sec : resolved.sections()) {
        json secj;
        for (const auto& [k, v] : sec.entries) secj[k] = v;
        cfgj[sec.name] = secj;
    }
    json j{{"config", cfgj}, {"rows", rows}, {"uniform_ratio", rep.uniform_ratio}};
    if (rep.fitted) {
        auto fitj = [](const FitResult& f) {
            return json{{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}};
        };
        j["fits"] = {{"sup_density_gap", fitj(rep.sup_gap_fit)},
                     {"int_density_gap", fitj(rep.int_gap_fit)},
                     {"int_darcy_residual", fitj(rep.darcy_fit)}};
    }
    return j;
}

inline int cmd_relax_sweep(const std::string& config_path, const std::string& json_path,
                           const std::string& csv_path, const std::string& svg_path, bool fit,
                           bool uniform_bound, const CommandContext& ctx) {
    const auto cfg = RunConfiguration::parse_file(config_path);
    SweepConfig sw = sweep_from(cfg);
    if (fit && sw.epsilons.size() < 3)
        throw ConfigError("relax-sweep: a rate fit needs at least 3 epsilons");

    if (uniform_bound) {
        const auto rep = uniform_bound_check(sw);
        json rows = json::array();
        for (const auto& r : rep.rows)
            rows.push_back({{"eps", r.eps},
                            {"x_total", r.x_total},
                            {"data_norm", r.data_norm},
                            {"ratio", r.ratio}});
        json j{{"rows", rows}, {"max_over_min", rep.max_over_min}, {"pass", rep.pass}};
        detail::write_output(json_path, j.dump(2) + "\n", ctx.out);
        return rep.pass ? kExitOk : kExitValidationFailure;
    }

    const auto rep = run_sweep(sw);
    const json j = rate_report_json(sw, rep);
    detail::write_output(json_path, j.dump(2) + "\n", ctx.out);

    if (!csv_path.empty()) {
        CsvWriter csv({"eps", "sup_density_gap", "int_density_gap", "int_darcy_residual",
                       "x_total", "data_norm"});
        csv.set_header(sweep_to_config(sw));
        for (const auto& r : rep.rows)
            csv.add_row({r.eps, r.sup_density_gap, r.int_density_gap, r.int_darcy_residual,
                         r.x_total, r.data_norm});
        csv.write(csv_path);
    }
    if (!svg_path.empty()) {
        std::vector<PlotSeries> series(3);
        series[0].label = "sup density gap";
        series[1].label = "int density gap";
        series[2].label = "darcy residual";
        for (const auto& r : rep.rows) {
            series[0].points.emplace_back(r.eps, r.sup_density_gap);
            series[1].points.emplace_back(r.eps, r.int_darcy_residual);
            series[2].points.emplace_back(r.eps, r.int_density_gap);
        }
        for (auto& s : series) std::sort(s.points.begin(), s.points.end());
        PlotStyle style{.title = "relaxation error against epsilon",
                        .xlabel = "epsilon",
                        .ylabel = "error",
                        .log_x = true,
                        .log_y = true};
        write_svg_file(svg_path, series, style);
    }
    return kExitOk;
}

// --- dispatch ---------------------------------------------------------------

inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CommandContext ctx{out, err};
    CLI::App app{"numerical laboratory for partially dissipative hyperbolic relaxation"};
    app.require_subcommand(1);

    std::string config_path, field_path, csv_field_path, csv_path, json_path, svg_path;
    double epsilon = 1.0, xi_max = 10.0, s_idx = 0.0, p_idx = 2.0, r_idx = 1.0, L_len = 1.0;
    int omega_count = 64, points = 200, rho_points = 32, split_J = 0;
    bool assert_sk = false, no_fit = false, uniform_bound = false, with_split = false;

    auto* validate_cmd = app.add_subcommand("validate", "check the structural hypotheses");
    validate_cmd->add_option("--config", config_path, "system configuration file")->required();

    auto* sk_cmd = app.add_subcommand("sk-check", "decide the stability condition");
    sk_cmd->add_option("--config", config_path)->required();
    sk_cmd->add_option("--omega-samples", omega_count, "directions for d = 2 (default 64)");
    sk_cmd->add_flag("--assert", assert_sk, "exit 1 when the condition fails");

    auto* lyap_cmd = app.add_subcommand("lyapunov", "search a decay certificate");
    lyap_cmd->add_option("--config", config_path)->required();
    lyap_cmd->add_option("--omega-samples", omega_count);
    lyap_cmd->add_option("--rho-points", rho_points, "log-spaced |xi| grid size");

    auto* sweep_cmd = app.add_subcommand("symbol-sweep", "eigenvalues across frequencies");
    sweep_cmd->add_option("--config", config_path)->required();
    sweep_cmd->add_option("--epsilon", epsilon)->required();
    sweep_cmd->add_option("--xi-max", xi_max)->required();
    sweep_cmd->add_option("--points", points)->required();
    sweep_cmd->add_option("--csv", csv_path, "CSV output path (default stdout)");
    sweep_cmd->add_option("--svg", svg_path, "optional dispersion plot");

    auto* besov_cmd = app.add_subcommand("besov-norm", "norm of a stored field");
    besov_cmd->add_option("--field", field_path, "binary field file");
    besov_cmd->add_option("--csv-field", csv_field_path, "one-column CSV samples (d = 1)");
    besov_cmd->add_option("--L-len", L_len, "torus scale for CSV import");
    besov_cmd->add_option("--s", s_idx)->required();
    besov_cmd->add_option("--p", p_idx)->required();
    besov_cmd->add_option("--r", r_idx)->required();
    besov_cmd->add_option("--split", split_J, "also report the low/high split at J")
        ->trigger_on_parse();
    besov_cmd->callback([&] { with_split = besov_cmd->count("--split") > 0; });

    auto* se_cmd = app.add_subcommand("simulate-euler", "pseudo-spectral gas run");
    se_cmd->add_option("--config", config_path)->required();

    auto* sp_cmd = app.add_subcommand("simulate-pme", "pseudo-spectral diffusion run");
    sp_cmd->add_option("--config", config_path)->required();

    auto* rs_cmd = app.add_subcommand("relax-sweep", "epsilon sweep with rate fits");
    rs_cmd->add_option("--config", config_path)->required();
    rs_cmd->add_option("--out", json_path, "JSON report path (default stdout)");
    rs_cmd->add_option("--csv", csv_path, "CSV report path");
    rs_cmd->add_option("--svg", svg_path, "log-log error plot");
    rs_cmd->add_flag("--no-fit", no_fit, "skip the rate fits");
    rs_cmd->add_flag("--uniform-bound", uniform_bound,
                     "run the unrescaled uniform-bound check instead");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        json j{{"error", {{"type", "config"}, {"message", e.what()}}}};
        err << j.dump(2) << "\n";
        return kExitConfigError;
    }

    try {
        if (*validate_cmd) return cmd_validate(config_path, ctx);
        if (*sk_cmd) return cmd_sk_check(config_path, omega_count, assert_sk, ctx);
        if (*lyap_cmd) return cmd_lyapunov(config_path, omega_count, rho_points, ctx);
        if (*sweep_cmd)
            return cmd_symbol_sweep(config_path, epsilon, xi_max, points, csv_path, svg_path, ctx);
        if (*besov_cmd) {
            if (field_path.empty() && csv_field_path.empty())
                throw ConfigError("besov-norm: need --field or --csv-field");
            return cmd_besov_norm(field_path, csv_field_path, L_len, s_idx, p_idx, r_idx,
                                  with_split ? std::optional<int>(split_J) : std::nullopt, ctx);
        }
        if (*se_cmd) return cmd_simulate_euler(config_path, ctx);
        if (*sp_cmd) return cmd_simulate_pme(config_path, ctx);
        if (*rs_cmd)
            return cmd_relax_sweep(config_path, json_path, csv_path, svg_path, !no_fit,
                                   uniform_bound, ctx);
    } catch (const ConfigError& e) {
        json j{{"error", {{"type", "config"}, {"message", e.what()}}}};
        err << j.dump(2) << "\n";
        return kExitConfigError;
    } catch (const NumericError& e) {
        json j{{"error", {{"type", "numeric"}, {"message", e.what()}}}};
        err << j.dump(2) << "\n";
        return kExitNumericError;
    } catch (const std::invalid_argument& e) {
        json j{{"error", {{"type", "config"}, {"message", e.what()}}}};
        err << j.dump(2) << "\n";
        return kExitConfigError;
    } catch (const std::domain_error& e) {
        json j{{"error", {{"type", "config"}, {"message", e.what()}}}};
        err << j.dump(2) << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}

inline int dispatch(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

} // namespace hyprelax::cli
