#include "fhl/run_config.hpp"

#include "fhl/common.hpp"
#include "fhl/convex_duality.hpp"
#include "fhl/fractional_order.hpp"
#include "fhl/grid_function.hpp"
#include "fhl/hopflax_field.hpp"
#include "fhl/intrinsic_geometry.hpp"
#include "fhl/stable_process.hpp"
#include "fhl/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

namespace fhl {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count == 1) return {lo};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
    const double llo = std::log10(lo), lhi = std::log10(hi);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i)
                                     / static_cast<double>(count - 1));
    return out;
}

struct Setup {
    QuotientModel model;
    LagrangianPair pair;
    double K = 0.0;
    double ell = 1.0;
    double C = 0.0;
    std::vector<double> time_grid;
};

QuotientModel build_model(const RunConfig& cfg, double y_lo, double y_hi, std::size_t count) {
    if (cfg.quotient == "identity")
        return build_identity_quotient(make_uniform_grid(y_lo, y_hi, count));
    SectionFn section;
    if (!cfg.section_coeffs.empty()) section = make_paired_section(cfg.section_coeffs);
    return build_hyperplane_quotient(cfg.ambient_dim, y_lo, y_hi, count, section);
}

LagrangianPair build_pair(const RunConfig& cfg, double growth_c) {
    if (cfg.lagrangian == "quadratic") return LagrangianPair::quadratic(growth_c);
    std::ifstream in(cfg.lagrangian);
    if (!in) throw ConfigError("config.lagrangian: cannot read '" + cfg.lagrangian + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const GridFunction L = GridFunction::from_csv(ss.str());
    return LagrangianPair::from_tabulated(L, L.points(), growth_c);
}

Setup build_setup(const RunConfig& cfg) {
    Setup s{build_model(cfg, cfg.y_lo, cfg.y_hi, cfg.y_count),
            LagrangianPair::quadratic(0.0)};
    s.K = estimate_K(s.model);
    s.ell = estimate_intrinsic_lipschitz(s.model);
    if (cfg.lagrangian == "quadratic") {
        const double c = cfg.growth_c > 0.0
                             ? cfg.growth_c
                             : derive_C(s.K, LagrangianPair::quadratic(0.0)).value;
        s.C = c;
        s.pair = LagrangianPair::quadratic(c);
    } else {
        s.C = cfg.growth_c;
        s.pair = build_pair(cfg, cfg.growth_c);
    }
    s.time_grid = linspace(cfg.t_lo, cfg.t_hi, cfg.t_count);
    return s;
}

/// Scheduling-only fields are normalized so artifacts stay byte-identical
/// across worker counts.
nlohmann::ordered_json artifact_config(const RunConfig& cfg) {
    nlohmann::ordered_json j = cfg.to_json();
    j["workers"] = 0;
    return j;
}

nlohmann::ordered_json constants_json(const RunConfig& cfg, const Setup& s) {
    return {{"beta", cfg.beta}, {"K", s.K}, {"ell", s.ell}, {"C", s.C}};
}

/// Largest |g(y1)-g(y2)| / fiber distance over base pairs.
double g_lipschitz(const QuotientModel& model) {
    double ell = 0.0;
    for (std::size_t i = 0; i < model.n_points(); ++i) {
        auto fi = model.section_value(i);
        for (std::size_t j = i + 1; j < model.n_points(); ++j) {
            const double d = model.fiber_nearest(fi, j).distance;
            if (d < 1e-12) continue;
            ell = std::max(ell, std::fabs(model.g_values[i] - model.g_values[j]) / d);
        }
    }
    return ell;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, n < 2.0 ? 0.0 : std::sqrt(ss / (n - 1.0) / n)};
}

std::string draws_csv(const std::vector<double>& values) {
    std::string out = "value\n";
    for (double v : values) out += fmt17(v) + "\n";
    return out;
}

std::string field_csv(const ValueField& f) {
    std::string out = "x_index";
    for (std::size_t d = 0; d < f.base_dim; ++d) out += ",x" + std::to_string(d);
    out += ",t,u,stderr,argmin,acceptance\n";
    for (std::size_t xi = 0; xi < f.nx(); ++xi) {
        auto xp = f.x_point(xi);
        std::string prefix = std::to_string(f.x_index[xi]);
        for (double c : xp) prefix += "," + fmt17(c);
        out += prefix + ",0," + fmt17(f.g_row[xi]) + ",0," + std::to_string(f.x_index[xi]) + ",1\n";
        for (std::size_t ti = 0; ti < f.nt(); ++ti) {
            out += prefix + "," + fmt17(f.time_grid[ti]) + "," + fmt17(f.u_at(xi, ti)) + ","
                   + fmt17(f.se_at(xi, ti)) + "," + std::to_string(f.argmin[xi * f.nt() + ti])
                   + "," + fmt17(f.acceptance[ti]) + "\n";
        }
    }
    return out;
}

int run_sample(const RunConfig& cfg) {
    const FractionalOrder fo(cfg.beta);
    const StableSample stable = sample_stable(fo, cfg.n_paths, cfg.seed, cfg.workers);
    const InverseSample inverse =
        sample_inverse(fo, cfg.sample_t, cfg.n_paths, cfg.seed, cfg.workers);

    std::string moments = "lambda,t,exact,estimate,stderr\n";
    std::vector<double> powers(inverse.values.size());
    for (double lambda : {1.0, 2.0}) {
        double exact = 0.0, est = 0.0, se = 0.0;
        if (cfg.sample_t > 0.0) {
            for (std::size_t i = 0; i < inverse.values.size(); ++i)
                powers[i] = std::pow(inverse.values[i], lambda);
            const MeanSe ms = mean_and_se(powers);
            exact = inverse_moment(fo, lambda, cfg.sample_t);
            est = ms.mean;
            se = ms.se;
        }
        moments += fmt17(lambda) + "," + fmt17(cfg.sample_t) + "," + fmt17(exact) + ","
                   + fmt17(est) + "," + fmt17(se) + "\n";
    }
    atomic_write_file(join_path(cfg.out_dir, "stable_draws.csv"), draws_csv(stable.values));
    atomic_write_file(join_path(cfg.out_dir, "inverse_draws.csv"), draws_csv(inverse.values));
    atomic_write_file(join_path(cfg.out_dir, "moments.csv"), moments);
    std::cout << "wrote stable_draws.csv, inverse_draws.csv, moments.csv to " << cfg.out_dir
              << "\n";
    return 0;
}

int run_transform(const RunConfig& cfg) {
    const LagrangianPair pair = build_pair(cfg, cfg.growth_c);
    const ConjugateResult back =
        legendre_transform(pair.hamiltonian(), pair.lagrangian().points());
    const ConvexityReport conv_l = check_convex_superlinear(pair.lagrangian());
    const ConvexityReport conv_h = check_convex_superlinear(pair.hamiltonian());

    nlohmann::ordered_json rep;
    rep["config"] = artifact_config(cfg);
    rep["lagrangian"] = {{"convex", conv_l.convex},
                         {"superlinear", conv_l.superlinear},
                         {"worst_slope_drop", conv_l.worst_slope_drop}};
    rep["hamiltonian"] = {{"convex", conv_h.convex},
                          {"superlinear", conv_h.superlinear},
                          {"worst_slope_drop", conv_h.worst_slope_drop}};
    atomic_write_file(join_path(cfg.out_dir, "lagrangian.csv"), pair.lagrangian().to_csv());
    atomic_write_file(join_path(cfg.out_dir, "hamiltonian.csv"), pair.hamiltonian().to_csv());
    atomic_write_file(join_path(cfg.out_dir, "conjugate_back.csv"), back.function.to_csv());
    atomic_write_file(join_path(cfg.out_dir, "transform_report.json"), rep.dump(2) + "\n");
    std::cout << "wrote lagrangian.csv, hamiltonian.csv, conjugate_back.csv, "
                 "transform_report.json to "
              << cfg.out_dir << "\n";
    return 0;
}

int run_evaluate(const RunConfig& cfg) {
    const Setup s = build_setup(cfg);
    EvaluationConfig ecfg{FractionalOrder(cfg.beta)};
    ecfg.n_paths = cfg.n_paths;
    ecfg.seed = cfg.seed;
    ecfg.time_grid = s.time_grid;
    ecfg.condition_et_ge_1 = cfg.conditioning == "on";
    ecfg.workers = cfg.workers;
    const ValueField field = evaluate_u(s.model, s.pair, ecfg);

    nlohmann::ordered_json meta;
    meta["config"] = artifact_config(cfg);
    meta["constants"] = constants_json(cfg, s);
    meta["field"] = {{"nx", field.nx()},
                     {"nt", field.nt()},
                     {"n_paths", field.n_paths},
                     {"conditioned", field.conditioned},
                     {"monotonicity_violations", field.monotonicity_violations},
                     {"acceptance", field.acceptance}};
    atomic_write_file(join_path(cfg.out_dir, "u_field.csv"), field_csv(field));
    atomic_write_file(join_path(cfg.out_dir, "metadata.json"), meta.dump(2) + "\n");
    std::cout << "evaluated u on " << field.nx() << " x " << field.nt()
              << " cells; wrote u_field.csv, metadata.json to " << cfg.out_dir << "\n";
    return 0;
}

bool uniform_from_zero(const std::vector<double>& t) {
    const double dt = t.front();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double expected = dt * static_cast<double>(i + 1);
        if (std::fabs(t[i] - expected) > 1e-9 * expected) return false;
    }
    return true;
}

int run_verify(const RunConfig& cfg) {
    const Setup s = build_setup(cfg);
    const FractionalOrder fo(cfg.beta);
    VerificationReport report;
    report.config_snapshot = artifact_config(cfg);
    report.constants = constants_json(cfg, s);

    auto timed = [&](auto&& make) {
        const auto t0 = std::chrono::steady_clock::now();
        PropertyCheck c = make();
        c.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                             .count();
        report.checks.push_back(std::move(c));
    };

    // Distribution-level checks on fresh draws with the run's seed.
    timed([&] {
        return verify_moments(fo, {1.0, 2.0}, {0.5, 1.0, 2.0}, cfg.n_paths, cfg.seed,
                              cfg.workers);
    });
    timed([&] {
        const InverseSample inv = sample_inverse(fo, 1.0, cfg.n_paths, cfg.seed, cfg.workers);
        return verify_distribution(inv, 0.01);
    });

    // Regularity checks on the plain (unconditioned) field.
    EvaluationConfig main_cfg{fo};
    main_cfg.n_paths = cfg.n_paths;
    main_cfg.seed = cfg.seed;
    main_cfg.time_grid = s.time_grid;
    main_cfg.condition_et_ge_1 = false;
    main_cfg.workers = cfg.workers;
    const ValueField main_field = evaluate_u(s.model, s.pair, main_cfg);
    timed([&] { return verify_spatial_modulus(main_field, s.model, s.pair, s.C); });
    timed([&] { return verify_monotonicity(main_field); });
    timed([&] { return verify_time_holder(main_field, 1.2); });

    // The initial layer needs t^beta displacements resolvable against the
    // spatial step, hence a dedicated fine window over small times.
    const double span = std::min(1.0, cfg.y_hi - cfg.y_lo);
    const QuotientModel layer_model = build_model(cfg, cfg.y_lo, cfg.y_lo + span, 201);
    EvaluationConfig layer_cfg{fo};
    layer_cfg.n_paths = cfg.n_paths;
    layer_cfg.seed = cfg.seed;
    layer_cfg.time_grid = logspace(1e-3, 1e-1, 13);
    layer_cfg.condition_et_ge_1 = false;
    layer_cfg.x_stride = 8;
    layer_cfg.workers = cfg.workers;
    const ValueField layer_field = evaluate_u(layer_model, s.pair, layer_cfg);
    std::vector<double> zero(s.model.ambient_dim, 0.0);
    const double layer_ell = g_lipschitz(layer_model);
    const double c_bound = fo.moment_constant(1.0)
                           * std::max(s.pair.eval_L(zero), 0.5 * layer_ell * layer_ell);
    timed([&] { return verify_initial_layer(layer_field, c_bound, 0.1); });

    // Inequality checks, by default on the conditioned field.
    const bool condition_on = cfg.conditioning != "off";
    EvaluationConfig ineq_cfg = main_cfg;
    ineq_cfg.condition_et_ge_1 = condition_on;
    const ValueField ineq_field =
        condition_on ? evaluate_u(s.model, s.pair, ineq_cfg) : main_field;

    std::vector<std::pair<std::size_t, std::size_t>> st_pairs;
    const std::size_t nt = s.time_grid.size();
    if (nt >= 2) {
        const std::size_t a = (nt - 1) / 4, b = (nt - 1) / 2, c = nt - 1;
        if (a < b) st_pairs.emplace_back(a, b);
        if (b < c) st_pairs.emplace_back(b, c);
        if (a < c && a != b) st_pairs.emplace_back(a, c);
        if (st_pairs.empty()) st_pairs.emplace_back(0, nt - 1);
    }
    timed([&] {
        if (st_pairs.empty()) {
            PropertyCheck c;
            c.name = "dpp_inequality";
            c.statement = "needs at least two time nodes";
            c.status = CheckStatus::inconclusive;
            c.details["reason"] = "single-node time grid";
            return c;
        }
        return verify_dpp(ineq_field, s.model, s.pair, s.C, st_pairs);
    });
    timed([&] {
        if (!uniform_from_zero(s.time_grid)) {
            PropertyCheck c;
            c.name = "subsolution_residual";
            c.statement = "needs a uniform time grid anchored at zero";
            c.status = CheckStatus::inconclusive;
            c.details["reason"] = "time grid is not uniform from zero";
            return c;
        }
        return verify_subsolution(ineq_field, s.model, s.pair, s.C, 0.2);
    });

    atomic_write_file(join_path(cfg.out_dir, "report.json"), report.to_json());
    atomic_write_file(join_path(cfg.out_dir, "report.txt"), report.to_table(false));
    std::cout << report.to_table();
    std::cout << "wrote report.json, report.txt to " << cfg.out_dir << "\n";
    return report.all_passed() ? 0 : 1;
}

} // namespace

int run_command(const RunConfig& cfg) {
    try {
        cfg.validate();
        if (cfg.command == "sample") return run_sample(cfg);
        if (cfg.command == "transform") return run_transform(cfg);
        if (cfg.command == "evaluate") return run_evaluate(cfg);
        return run_verify(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace fhl
