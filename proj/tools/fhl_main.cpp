#include "fhl/common.hpp"
#include "fhl/run_config.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

struct Flags {
    double beta = -1.0;
    long long paths = -1;
    long long seed = -1;
    int workers = -1;
    std::string preset;
    std::string config_path;
    std::string out_dir;
    std::string condition;
    double sample_t = -1.0;
};

void add_common_options(CLI::App* sub, Flags& f) {
    sub->add_option("--beta", f.beta, "fractional order in (0,1)");
    sub->add_option("--paths", f.paths, "Monte Carlo path count");
    sub->add_option("--seed", f.seed, "RNG seed (always wins, even over --config)");
    sub->add_option("--workers", f.workers, "worker threads, 0 = hardware concurrency");
    sub->add_option("--preset", f.preset, "identity-quadratic | hyperplane-k4");
    sub->add_option("--config", f.config_path,
                    "JSON config file; its fields win over flags except --seed");
    sub->add_option("--out", f.out_dir, "output directory");
    sub->add_option("--condition-et-ge-1", f.condition,
                    "condition cells on the event {E_t >= 1}")
        ->check(CLI::IsMember({"on", "off"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo evaluation and property verification of the intrinsic "
                 "Hopf-Lax value function for Caputo time-fractional Hamilton-Jacobi flows"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* sample = app.add_subcommand(
        "sample", "draw the stable subordinator and its inverse; emit draws and moments");
    sample->add_option("--t", f.sample_t, "time for the inverse draws");
    CLI::App* transform =
        app.add_subcommand("transform", "emit the Lagrangian, its conjugate, and convexity data");
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "evaluate the value field; emit CSV and metadata");
    CLI::App* verify =
        app.add_subcommand("verify", "run every property check and emit the report");
    for (CLI::App* sub : {sample, transform, evaluate, verify}) add_common_options(sub, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    nlohmann::ordered_json file_json = nlohmann::ordered_json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) {
            std::cerr << "config error: cannot read '" << f.config_path << "'\n";
            return 2;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            file_json = nlohmann::ordered_json::parse(ss.str());
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "config error: " << f.config_path << ": " << e.what() << "\n";
            return 2;
        }
    }

    fhl::RunConfig cfg;
    try {
        std::string preset_name = f.preset.empty() ? cfg.preset : f.preset;
        if (file_json.contains("preset") && file_json["preset"].is_string())
            preset_name = file_json["preset"].get<std::string>();
        fhl::apply_preset(cfg, preset_name);
        if (f.beta >= 0.0) cfg.beta = f.beta;
        if (f.paths >= 0) cfg.n_paths = static_cast<std::size_t>(f.paths);
        if (f.workers >= 0) cfg.workers = f.workers;
        if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
        if (!f.condition.empty()) cfg.conditioning = f.condition;
        if (f.sample_t >= 0.0) cfg.sample_t = f.sample_t;
        cfg.merge_json(file_json);
        if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
        cfg.command = app.get_subcommands().front()->get_name();
    } catch (const fhl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return fhl::run_command(cfg);
}
