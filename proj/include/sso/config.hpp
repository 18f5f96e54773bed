#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace sso {

/// Configuration rejection; the message names the offending field path and
/// the violated bound.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverSettings {
    double tol = 1e-9;
    int max_iter = 2000;
    std::uint64_t seed = 1;
};

struct OptimizerSettings {
    std::string mode; // "max-lambda1" | "min-gap"
    double tol = 1e-8;
    int max_outer = 200;
    double step_init = 1.0;
    double step_backtrack = 0.5;
    double armijo_c = 1e-4;
    double degeneracy_tol = 1e-6;
};

/// Everything a run needs, parsed from a strict JSON file: unknown keys are
/// errors, every bound is re-validated at parse time.
struct RunConfig {
    int nx = 0;
    int ny = 0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double p = 2.0;
    double M = 1.0;
    int k = 1;
    SolverSettings solver;
    OptimizerSettings optimizer;
    std::string output_dir;
    std::string potential_csv; // optional input V
    std::string rhs_csv;       // optional input f (required by `solve`)
};

/// Parses and validates; throws ConfigError with a pointed message.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace sso
