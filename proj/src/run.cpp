#include "sso/run.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sso/config.hpp"
#include "sso/gap_min.hpp"
#include "sso/io.hpp"
#include "sso/lambda1_max.hpp"
#include "sso/operator.hpp"
#include "sso/solve.hpp"
#include "sso/validation.hpp"

namespace sso {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIo = 3;

void apply_thread_cap() {
    const char* env = std::getenv("SSO_THREADS");
    if (env == nullptr) return;
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1) {
        std::cerr << "warning: ignoring invalid SSO_THREADS value '" << env << "'\n";
        return;
    }
    set_max_threads(static_cast<int>(value));
}

json config_echo(const RunConfig& cfg) {
    json j;
    j["grid"] = {{"nx", cfg.nx}, {"ny", cfg.ny}};
    j["alpha1"] = cfg.alpha1;
    j["alpha2"] = cfg.alpha2;
    j["p"] = cfg.p;
    j["M"] = cfg.M;
    j["k"] = cfg.k;
    j["solver"] = {{"tol", cfg.solver.tol},
                   {"max_iter", cfg.solver.max_iter},
                   {"seed", cfg.solver.seed}};
    j["optimizer"] = {{"mode", cfg.optimizer.mode},
                      {"tol", cfg.optimizer.tol},
                      {"max_outer", cfg.optimizer.max_outer},
                      {"step_init", cfg.optimizer.step_init},
                      {"step_backtrack", cfg.optimizer.step_backtrack},
                      {"armijo_c", cfg.optimizer.armijo_c},
                      {"degeneracy_tol", cfg.optimizer.degeneracy_tol}};
    j["output_dir"] = cfg.output_dir;
    if (!cfg.potential_csv.empty()) j["potential_csv"] = cfg.potential_csv;
    if (!cfg.rhs_csv.empty()) j["rhs_csv"] = cfg.rhs_csv;
    return j;
}

struct RunContext {
    RunConfig cfg;
    fs::path out_dir;
    std::vector<std::string> artifacts;
    std::chrono::steady_clock::time_point started;

    void write_text(const std::string& name, const std::string& content) {
        atomic_write_text(out_dir / name, content);
        artifacts.push_back(name);
    }
    void write_csv(const std::string& name, const GridFunction& f) {
        write_text(name, grid_csv(f));
    }
    void write_pgm(const std::string& name, const GridFunction& f) {
        write_text(name, heatmap_pgm(f));
    }
    void finish(const std::string& command, json results) {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json summary;
        summary["command"] = command;
        summary["config"] = config_echo(cfg);
        summary["wall_time_seconds"] = seconds;
        summary["results"] = std::move(results);
        artifacts.push_back("summary.json");
        summary["artifacts"] = artifacts;
        atomic_write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    }
};

LobpcgOptions solver_options(const RunConfig& cfg) {
    LobpcgOptions opts;
    opts.tol = cfg.solver.tol;
    opts.max_iter = cfg.solver.max_iter;
    opts.seed = cfg.solver.seed;
    return opts;
}

Potential load_potential(const RunConfig& cfg, const Grid& grid) {
    if (cfg.potential_csv.empty()) {
        return Potential(GridFunction(grid, 0.0), cfg.p, cfg.M);
    }
    return Potential(read_grid_csv(grid, cfg.potential_csv), cfg.p, cfg.M);
}

std::string history_csv(const std::vector<MaximizeHistoryRow>& rows) {
    std::string out = "iteration,lambda1,residual\n";
    for (const auto& row : rows) {
        out += std::to_string(row.iteration) + ',' + format_double(row.lambda1) + ',' +
               format_double(row.residual) + '\n';
    }
    return out;
}

std::string history_csv(const std::vector<GapHistoryRow>& rows) {
    std::string out = "iteration,gamma,lambda1,lambda2,step,norm_ratio\n";
    for (const auto& row : rows) {
        out += std::to_string(row.iteration) + ',' + format_double(row.gamma) + ',' +
               format_double(row.lambda1) + ',' + format_double(row.lambda2) + ',' +
               format_double(row.step) + ',' + format_double(row.norm_ratio) + '\n';
    }
    return out;
}

json certificates_json(const Certificates& cert) {
    return json{{"norm_saturation", cert.norm_saturation},
                {"linf_u_margin", cert.linf_u_margin},
                {"linf_V_margin", cert.linf_V_margin}};
}

json diagnostics_json(const GapDiagnostics& diag) {
    json j{{"c_fit", diag.c_fit},
           {"fit_residual", diag.fit_residual},
           {"c_fit_alt", diag.c_fit_alt},
           {"fit_residual_alt", diag.fit_residual_alt},
           {"support_fraction", diag.support_fraction},
           {"norm_ratio", diag.norm_ratio},
           {"tangential_stationarity", diag.tangential_stationarity},
           {"empty_support", diag.empty_support}};
    if (std::isfinite(diag.off_support_min)) {
        j["off_support_min"] = diag.off_support_min;
    } else {
        j["off_support_min"] = nullptr; // support covered every node
    }
    return j;
}

int cmd_eigen(RunContext& ctx) {
    const Grid grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
    const OperatorParams params(ctx.cfg.alpha1, ctx.cfg.alpha2);
    const Potential V = load_potential(ctx.cfg, grid);
    const Spectrum spec = eigenpairs(grid, params, V, ctx.cfg.k, solver_options(ctx.cfg));

    std::string csv = "index,lambda,residual\n";
    json lambdas = json::array();
    json residuals = json::array();
    for (size_t i = 0; i < spec.pairs.size(); ++i) {
        csv += std::to_string(i + 1) + ',' + format_double(spec.pairs[i].lambda) + ',' +
               format_double(spec.pairs[i].residual) + '\n';
        lambdas.push_back(spec.pairs[i].lambda);
        residuals.push_back(spec.pairs[i].residual);
    }
    ctx.write_text("eigenvalues.csv", csv);

    std::string residual_csv = "iteration,max_residual\n";
    for (size_t i = 0; i < spec.residual_history.size(); ++i) {
        residual_csv += std::to_string(i + 1) + ',' + format_double(spec.residual_history[i]) + '\n';
    }
    ctx.write_text("residual_history.csv", residual_csv);

    const GridFunction u1 = eigenvector_function(grid, spec.pairs[0]);
    ctx.write_csv("u1.csv", u1);
    ctx.write_pgm("u1.pgm", u1);

    ctx.finish("eigen", json{{"eigenvalues", lambdas},
                             {"residuals", residuals},
                             {"iterations", spec.iterations}});
    return kExitOk;
}

int cmd_solve(RunContext& ctx) {
    if (ctx.cfg.rhs_csv.empty()) {
        throw ConfigError("field \"rhs_csv\" is required by the solve subcommand");
    }
    const Grid grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
    const OperatorParams params(ctx.cfg.alpha1, ctx.cfg.alpha2);
    const Potential V = load_potential(ctx.cfg, grid);
    const GridFunction f = read_grid_csv(grid, ctx.cfg.rhs_csv);

    const DirichletSolution sol =
        solve_dirichlet(grid, params, V.data, f, ctx.cfg.solver.tol, ctx.cfg.solver.max_iter);
    ctx.write_csv("u.csv", sol.u);
    ctx.write_pgm("u.pgm", sol.u);

    double u_min = sol.u[0], u_max = sol.u[0];
    for (double v : sol.u.values()) {
        u_min = std::min(u_min, v);
        u_max = std::max(u_max, v);
    }
    ctx.finish("solve", json{{"cg_iterations", sol.cg_iterations},
                             {"relative_residual", sol.relative_residual},
                             {"u_min", u_min},
                             {"u_max", u_max}});
    return kExitOk;
}

int cmd_max_lambda1(RunContext& ctx) {
    if (ctx.cfg.optimizer.mode != "max-lambda1") {
        throw ConfigError("optimizer.mode \"" + ctx.cfg.optimizer.mode +
                          "\" does not match the max-lambda1 subcommand");
    }
    MaximizeConfig mcfg;
    mcfg.grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
    mcfg.params = OperatorParams(ctx.cfg.alpha1, ctx.cfg.alpha2);
    mcfg.p = ctx.cfg.p;
    mcfg.M = ctx.cfg.M;
    mcfg.tol_fixed_point = ctx.cfg.optimizer.tol;
    mcfg.max_outer = ctx.cfg.optimizer.max_outer;
    mcfg.eig = solver_options(ctx.cfg);

    const MaximizeResult result = fixed_point_maximize(mcfg);
    ctx.write_text("history.csv", history_csv(result.history));
    ctx.write_csv("V_opt.csv", result.V_opt.data);
    ctx.write_csv("u1.csv", result.u1);
    ctx.write_pgm("V_opt.pgm", result.V_opt.data);
    ctx.write_pgm("u1.pgm", result.u1);

    ctx.finish("max-lambda1", json{{"lambda1", result.lambda1},
                                   {"converged", result.converged},
                                   {"monotone", result.monotone},
                                   {"final_residual", result.final_residual},
                                   {"outer_iterations", result.outer_iterations},
                                   {"certificates", certificates_json(result.certificates)}});
    if (!result.converged) {
        std::cerr << "max-lambda1: no convergence within " << mcfg.max_outer
                  << " outer iterations; final residual " << result.final_residual << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_min_gap(RunContext& ctx) {
    if (ctx.cfg.optimizer.mode != "min-gap") {
        throw ConfigError("optimizer.mode \"" + ctx.cfg.optimizer.mode +
                          "\" does not match the min-gap subcommand");
    }
    GapConfig gcfg;
    gcfg.grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
    gcfg.params = OperatorParams(ctx.cfg.alpha1, ctx.cfg.alpha2);
    gcfg.p = ctx.cfg.p;
    gcfg.M = ctx.cfg.M;
    gcfg.step.initial = ctx.cfg.optimizer.step_init;
    gcfg.step.backtrack = ctx.cfg.optimizer.step_backtrack;
    gcfg.step.armijo_c = ctx.cfg.optimizer.armijo_c;
    gcfg.tol_gamma = ctx.cfg.optimizer.tol;
    gcfg.max_outer = ctx.cfg.optimizer.max_outer;
    gcfg.degeneracy_tol = ctx.cfg.optimizer.degeneracy_tol;
    gcfg.eig = solver_options(ctx.cfg);

    const GapResult result = projected_gradient_minimize(gcfg);
    ctx.write_text("history.csv", history_csv(result.history));
    ctx.write_csv("V_opt.csv", result.V_opt.data);
    ctx.write_csv("u1.csv", result.u1);
    ctx.write_csv("u2.csv", result.u2);
    ctx.write_pgm("V_opt.pgm", result.V_opt.data);
    ctx.write_text("diagnostics.json", diagnostics_json(result.diagnostics).dump(2) + "\n");

    ctx.finish("min-gap", json{{"lambda1", result.lambda1},
                               {"lambda2", result.lambda2},
                               {"gamma", result.gamma},
                               {"converged", result.converged},
                               {"stalled", result.stalled},
                               {"degenerate", result.degenerate},
                               {"outer_iterations", result.outer_iterations},
                               {"diagnostics", diagnostics_json(result.diagnostics)}});
    if (!result.converged && !result.stalled) {
        std::cerr << "min-gap: no convergence within " << gcfg.max_outer
                  << " outer iterations\n";
        return kExitSolver;
    }
    return kExitOk;
}

int cmd_verify(RunContext& ctx) {
    const Grid grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
    const OperatorParams params(ctx.cfg.alpha1, ctx.cfg.alpha2);
    const std::vector<ProbeResult> probes =
        run_probe_suite(grid, params, ctx.cfg.p, ctx.cfg.M, solver_options(ctx.cfg));

    json probe_list = json::array();
    int passed = 0;
    for (const ProbeResult& probe : probes) {
        probe_list.push_back(json{{"name", probe.name},
                                  {"pass", probe.pass},
                                  {"value", probe.value},
                                  {"threshold", probe.threshold},
                                  {"detail", probe.detail}});
        if (probe.pass) ++passed;
    }
    const bool all_passed = passed == static_cast<int>(probes.size());
    ctx.write_text("verify.json",
                   json{{"all_passed", all_passed}, {"probes", probe_list}}.dump(2) + "\n");

    ctx.finish("verify", json{{"all_passed", all_passed},
                              {"probes_passed", passed},
                              {"probes_total", static_cast<int>(probes.size())}});
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Spectral optimization for a degenerate sub-elliptic operator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    const std::vector<std::string> names = {"eigen", "solve", "max-lambda1", "min-gap", "verify"};
    const std::vector<std::string> descriptions = {
        "compute the k smallest eigenpairs",
        "solve the Dirichlet source problem",
        "maximize the first eigenvalue over the potential class",
        "minimize the fundamental gap over the potential class",
        "run the validation probe suite"};
    for (size_t i = 0; i < names.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_override, "override output_dir");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    apply_thread_cap();

    RunContext ctx;
    ctx.started = std::chrono::steady_clock::now();
    try {
        ctx.cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    ctx.out_dir = out_override.empty() ? fs::path(ctx.cfg.output_dir) : fs::path(out_override);
    try {
        fs::create_directories(ctx.out_dir);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }

    try {
        if (command == "eigen") return cmd_eigen(ctx);
        if (command == "solve") return cmd_solve(ctx);
        if (command == "max-lambda1") return cmd_max_lambda1(ctx);
        if (command == "min-gap") return cmd_min_gap(ctx);
        return cmd_verify(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::runtime_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}

} // namespace sso
