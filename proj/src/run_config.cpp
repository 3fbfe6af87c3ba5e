#include "fhl/run_config.hpp"

#include "fhl/common.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace fhl {

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["preset"] = preset;
    j["beta"] = beta;
    j["n_paths"] = n_paths;
    j["seed"] = seed;
    j["workers"] = workers;
    j["conditioning"] = conditioning;
    j["out_dir"] = out_dir;
    j["quotient"] = quotient;
    j["ambient_dim"] = ambient_dim;
    j["y_lo"] = y_lo;
    j["y_hi"] = y_hi;
    j["y_count"] = y_count;
    j["section_coeffs"] = section_coeffs;
    j["t_lo"] = t_lo;
    j["t_hi"] = t_hi;
    j["t_count"] = t_count;
    j["lagrangian"] = lagrangian;
    j["growth_c"] = growth_c;
    j["sample_t"] = sample_t;
    return j;
}

void RunConfig::merge_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    auto fail = [](const std::string& key, const char* want) {
        throw ConfigError("config." + key + ": expected " + want);
    };
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "command") command = val.get<std::string>();
            else if (key == "preset") preset = val.get<std::string>();
            else if (key == "beta") beta = val.get<double>();
            else if (key == "n_paths") n_paths = val.get<std::size_t>();
            else if (key == "seed") seed = val.get<std::uint64_t>();
            else if (key == "workers") workers = val.get<int>();
            else if (key == "conditioning") conditioning = val.get<std::string>();
            else if (key == "out_dir") out_dir = val.get<std::string>();
            else if (key == "quotient") quotient = val.get<std::string>();
            else if (key == "ambient_dim") ambient_dim = val.get<std::size_t>();
            else if (key == "y_lo") y_lo = val.get<double>();
            else if (key == "y_hi") y_hi = val.get<double>();
            else if (key == "y_count") y_count = val.get<std::size_t>();
            else if (key == "section_coeffs") section_coeffs = val.get<std::vector<double>>();
            else if (key == "t_lo") t_lo = val.get<double>();
            else if (key == "t_hi") t_hi = val.get<double>();
            else if (key == "t_count") t_count = val.get<std::size_t>();
            else if (key == "lagrangian") lagrangian = val.get<std::string>();
            else if (key == "growth_c") growth_c = val.get<double>();
            else if (key == "sample_t") sample_t = val.get<double>();
            else throw ConfigError("config." + key + ": unknown field");
        } catch (const nlohmann::json::exception&) {
            fail(key, "a value of the documented type");
        }
    }
}

RunConfig RunConfig::from_json(const nlohmann::ordered_json& j) {
    RunConfig cfg;
    if (j.is_object() && j.contains("preset") && j["preset"].is_string())
        apply_preset(cfg, j["preset"].get<std::string>());
    cfg.merge_json(j);
    return cfg;
}

void RunConfig::validate() const {
    static const std::set<std::string> commands{"sample", "transform", "evaluate", "verify"};
    if (!commands.count(command))
        throw ConfigError("config.command: must be sample, transform, evaluate, or verify");
    if (!(beta > 0.0 && beta < 1.0))
        throw ConfigError("config.beta: must lie strictly between 0 and 1");
    if (n_paths < 2 || n_paths > 50000000)
        throw ConfigError("config.n_paths: must lie in [2, 5e7]");
    if (workers < 0 || workers > 256)
        throw ConfigError("config.workers: must lie in [0, 256]");
    if (conditioning != "auto" && conditioning != "on" && conditioning != "off")
        throw ConfigError("config.conditioning: must be auto, on, or off");
    if (out_dir.empty()) throw ConfigError("config.out_dir: must be non-empty");
    if (quotient != "identity" && quotient != "hyperplane")
        throw ConfigError("config.quotient: must be identity or hyperplane");
    if (quotient == "identity" && ambient_dim != 1)
        throw ConfigError("config.ambient_dim: identity quotient is one-dimensional here");
    if (quotient == "hyperplane") {
        if (ambient_dim < 2 || ambient_dim % 2 != 0)
            throw ConfigError("config.ambient_dim: hyperplane quotient needs an even dimension >= 2");
        if (!section_coeffs.empty() && 2 * section_coeffs.size() != ambient_dim)
            throw ConfigError("config.section_coeffs: need ambient_dim/2 coefficients");
    }
    if (!(std::isfinite(y_lo) && std::isfinite(y_hi) && y_hi > y_lo))
        throw ConfigError("config.y_lo/y_hi: need a finite interval with y_hi > y_lo");
    if (y_count < 2 || y_count > 100000)
        throw ConfigError("config.y_count: must lie in [2, 1e5]");
    if (!(std::isfinite(t_lo) && t_lo > 0.0))
        throw ConfigError("config.t_lo: must be finite and positive");
    if (!(std::isfinite(t_hi) && t_hi >= t_lo))
        throw ConfigError("config.t_hi: must be finite and >= t_lo");
    if (t_count < 1 || t_count > 10000)
        throw ConfigError("config.t_count: must lie in [1, 1e4]");
    if (t_count == 1 && t_hi != t_lo)
        throw ConfigError("config.t_count: a single node needs t_hi == t_lo");
    if (lagrangian.empty())
        throw ConfigError("config.lagrangian: must be 'quadratic' or a CSV path");
    if (!(growth_c >= 0.0) || !std::isfinite(growth_c))
        throw ConfigError("config.growth_c: must be finite and >= 0");
    if (lagrangian != "quadratic" && command == "verify" && growth_c == 0.0)
        throw ConfigError("config.growth_c: required for a tabulated Lagrangian");
    if (!(std::isfinite(sample_t) && sample_t >= 0.0))
        throw ConfigError("config.sample_t: must be finite and >= 0");
}

void apply_preset(RunConfig& cfg, const std::string& name) {
    cfg.preset = name;
    if (name == "identity-quadratic") {
        cfg.beta = 0.5;
        cfg.n_paths = 100000;
        cfg.quotient = "identity";
        cfg.ambient_dim = 1;
        cfg.y_lo = 0.0;
        cfg.y_hi = 10.0;
        cfg.y_count = 41;
        cfg.section_coeffs.clear();
        cfg.t_lo = 0.1;
        cfg.t_hi = 2.0;
        cfg.t_count = 20;
        cfg.lagrangian = "quadratic";
        cfg.growth_c = 0.0;
    } else if (name == "hyperplane-k4") {
        cfg.beta = 0.5;
        cfg.n_paths = 50000;
        cfg.quotient = "hyperplane";
        cfg.ambient_dim = 4;
        cfg.y_lo = 0.0;
        cfg.y_hi = 2.0 * std::numbers::pi;
        cfg.y_count = 33;
        cfg.section_coeffs = {0.3, 0.4};
        cfg.t_lo = 0.1;
        cfg.t_hi = 2.0;
        cfg.t_count = 20;
        cfg.lagrangian = "quadratic";
        cfg.growth_c = 0.0;
    } else {
        throw ConfigError("config.preset: unknown preset '" + name + "'");
    }
}

} // namespace fhl
