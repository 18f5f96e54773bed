#include "sso/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sso {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) {
        throw ConfigError("missing required field \"" + (path.empty() ? key : path + "." + key) +
                          "\"");
    }
    return obj.at(key);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown key \"" + (path.empty() ? key : path + "." + key) + "\"");
        }
    }
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("field \"" + where + "\" must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError("field \"" + where + "\" must be an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError("field \"" + where + "\" must be a string");
    return v.get<std::string>();
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    reject_unknown(root, "",
                   {"grid", "alpha1", "alpha2", "p", "M", "k", "solver", "optimizer",
                    "output_dir", "potential_csv", "rhs_csv"});

    RunConfig cfg;

    const json& grid = require(root, "", "grid");
    if (!grid.is_object()) throw ConfigError("field \"grid\" must be an object");
    reject_unknown(grid, "grid", {"nx", "ny"});
    cfg.nx = as_int(require(grid, "grid", "nx"), "grid.nx");
    cfg.ny = as_int(require(grid, "grid", "ny"), "grid.ny");
    if (cfg.nx < 2) throw ConfigError("field \"grid.nx\" must be >= 2");
    if (cfg.ny < 2) throw ConfigError("field \"grid.ny\" must be >= 2");

    cfg.alpha1 = as_number(require(root, "", "alpha1"), "alpha1");
    cfg.alpha2 = as_number(require(root, "", "alpha2"), "alpha2");
    if (!(cfg.alpha1 >= 0.0 && cfg.alpha1 < 0.5)) {
        throw ConfigError("field \"alpha1\" must lie in [0, 0.5)");
    }
    if (!(cfg.alpha2 >= 0.0 && cfg.alpha2 < 0.5)) {
        throw ConfigError("field \"alpha2\" must lie in [0, 0.5)");
    }

    cfg.p = as_number(require(root, "", "p"), "p");
    if (!(cfg.p > 1.0)) throw ConfigError("field \"p\" must be > 1");
    cfg.M = as_number(require(root, "", "M"), "M");
    if (!(cfg.M > 0.0)) throw ConfigError("field \"M\" must be > 0");

    cfg.k = as_int(require(root, "", "k"), "k");
    if (cfg.k < 1) throw ConfigError("field \"k\" must be >= 1");
    if (4 * cfg.k > cfg.nx * cfg.ny) {
        throw ConfigError("field \"k\" must be <= nx*ny/4 (eigensolver block bound)");
    }

    const json& solver = require(root, "", "solver");
    if (!solver.is_object()) throw ConfigError("field \"solver\" must be an object");
    reject_unknown(solver, "solver", {"tol", "max_iter", "seed"});
    cfg.solver.tol = as_number(require(solver, "solver", "tol"), "solver.tol");
    if (!(cfg.solver.tol > 0.0)) throw ConfigError("field \"solver.tol\" must be > 0");
    cfg.solver.max_iter = as_int(require(solver, "solver", "max_iter"), "solver.max_iter");
    if (cfg.solver.max_iter < 1) throw ConfigError("field \"solver.max_iter\" must be >= 1");
    const json& seed = require(solver, "solver", "seed");
    if (!seed.is_number_integer() || seed.get<long long>() < 0) {
        throw ConfigError("field \"solver.seed\" must be a nonnegative integer");
    }
    cfg.solver.seed = seed.get<std::uint64_t>();

    const json& opt = require(root, "", "optimizer");
    if (!opt.is_object()) throw ConfigError("field \"optimizer\" must be an object");
    reject_unknown(opt, "optimizer",
                   {"mode", "tol", "max_outer", "step_init", "step_backtrack", "armijo_c",
                    "degeneracy_tol"});
    cfg.optimizer.mode = as_string(require(opt, "optimizer", "mode"), "optimizer.mode");
    if (cfg.optimizer.mode != "max-lambda1" && cfg.optimizer.mode != "min-gap") {
        throw ConfigError("field \"optimizer.mode\" must be \"max-lambda1\" or \"min-gap\"");
    }
    cfg.optimizer.tol = as_number(require(opt, "optimizer", "tol"), "optimizer.tol");
    if (!(cfg.optimizer.tol > 0.0)) throw ConfigError("field \"optimizer.tol\" must be > 0");
    cfg.optimizer.max_outer = as_int(require(opt, "optimizer", "max_outer"), "optimizer.max_outer");
    if (cfg.optimizer.max_outer < 1) throw ConfigError("field \"optimizer.max_outer\" must be >= 1");

    if (opt.contains("step_init")) {
        cfg.optimizer.step_init = as_number(opt.at("step_init"), "optimizer.step_init");
        if (!(cfg.optimizer.step_init > 0.0)) {
            throw ConfigError("field \"optimizer.step_init\" must be > 0");
        }
    }
    if (opt.contains("step_backtrack")) {
        cfg.optimizer.step_backtrack = as_number(opt.at("step_backtrack"), "optimizer.step_backtrack");
        if (!(cfg.optimizer.step_backtrack > 0.0 && cfg.optimizer.step_backtrack < 1.0)) {
            throw ConfigError("field \"optimizer.step_backtrack\" must lie in (0, 1)");
        }
    }
    if (opt.contains("armijo_c")) {
        cfg.optimizer.armijo_c = as_number(opt.at("armijo_c"), "optimizer.armijo_c");
        if (!(cfg.optimizer.armijo_c > 0.0 && cfg.optimizer.armijo_c < 1.0)) {
            throw ConfigError("field \"optimizer.armijo_c\" must lie in (0, 1)");
        }
    }
    if (opt.contains("degeneracy_tol")) {
        cfg.optimizer.degeneracy_tol = as_number(opt.at("degeneracy_tol"), "optimizer.degeneracy_tol");
        if (!(cfg.optimizer.degeneracy_tol > 0.0)) {
            throw ConfigError("field \"optimizer.degeneracy_tol\" must be > 0");
        }
    }
    if (cfg.optimizer.mode == "min-gap" && !(cfg.p > 2.0)) {
        throw ConfigError("field \"p\" must be > 2 when optimizer.mode is \"min-gap\"");
    }

    cfg.output_dir = as_string(require(root, "", "output_dir"), "output_dir");
    if (cfg.output_dir.empty()) throw ConfigError("field \"output_dir\" must not be empty");

    if (root.contains("potential_csv")) {
        cfg.potential_csv = as_string(root.at("potential_csv"), "potential_csv");
    }
    if (root.contains("rhs_csv")) {
        cfg.rhs_csv = as_string(root.at("rhs_csv"), "rhs_csv");
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str());
}

} // namespace sso
