#pragma once

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fhl {

/// Everything a run needs, JSON round-trippable. Defaults mirror the
/// identity-quadratic preset; apply_preset rewrites the geometry block.
struct RunConfig {
    std::string command = "verify";  // sample | transform | evaluate | verify
    std::string preset = "identity-quadratic";
    double beta = 0.5;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 0;
    int workers = 0;
    /// "auto": plain expectation for evaluate, conditioned on {E_t >= 1} for
    /// the inequality checks inside verify. "on"/"off" force one mode.
    std::string conditioning = "auto";
    std::string out_dir = "out";

    std::string quotient = "identity";  // identity | hyperplane
    std::size_t ambient_dim = 1;
    double y_lo = 0.0;
    double y_hi = 10.0;
    std::size_t y_count = 41;
    /// Pairing coefficients of the built-in section family (hyperplane only);
    /// empty means the flat section.
    std::vector<double> section_coeffs;

    double t_lo = 0.1;
    double t_hi = 2.0;
    std::size_t t_count = 20;

    std::string lagrangian = "quadratic";  // "quadratic" | path to a tabulated CSV
    /// Growth constant for a tabulated Lagrangian; 0 derives it (quadratic only).
    double growth_c = 0.0;
    double sample_t = 1.0;  // time for `sample` inverse draws

    nlohmann::ordered_json to_json() const;
    /// Overwrite fields present in j; unknown keys are a ConfigError.
    void merge_json(const nlohmann::ordered_json& j);
    /// Defaults, then j's preset if named, then j's explicit fields.
    static RunConfig from_json(const nlohmann::ordered_json& j);
    /// ConfigError with a field-path diagnostic on the first offence.
    void validate() const;
};

/// Rewrite geometry, grids, and sampling defaults for a named preset.
void apply_preset(RunConfig& cfg, const std::string& name);

/// Run one command end to end. Returns the process exit code: 0 success,
/// 1 verification failure, 2 config error, 3 numerical failure.
int run_command(const RunConfig& cfg);

} // namespace fhl
