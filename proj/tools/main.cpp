#include "smdp/model_io.hpp"
#include "smdp/solver_finite.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInvalidModel = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitIoError = 3;

struct GridOpts {
    std::string grid = "64x64";
    double w_min = 1e-3;
    int quad_m = 64;
    double tol = 1e-4;
    int max_iter = 10000;
    int threads = 0;
    std::string out_dir = ".";
    std::string utility_spec;

    void attach(CLI::App* cmd) {
        cmd->add_option("--grid", grid, "Grid size WxL (default 64x64)");
        cmd->add_option("--w-min", w_min, "Smallest discount-weight node (default 1e-3)")
            ->check(CLI::Range(1e-12, 0.999999));
        cmd->add_option("--quad", quad_m, "Quadrature atoms per sojourn law (default 64)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--tol", tol, "Convergence tolerance (default 1e-4)")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iter", max_iter, "Iteration cap (default 10000)")->check(CLI::PositiveNumber);
        cmd->add_option("--threads", threads, "Worker cap (default: SMDP_RISK_THREADS or hardware)");
        cmd->add_option("--out", out_dir, "Output directory (default .)");
        cmd->add_option("--utility", utility_spec,
                        "Utility override: linear | log1p | exp:G | power:P[:ETA]");
    }

    std::pair<int, int> parse_grid() const {
        const auto x = grid.find('x');
        if (x == std::string::npos) throw smdp::ParseError("--grid expects WxL, e.g. 64x64");
        const int W = std::stoi(grid.substr(0, x));
        const int L = std::stoi(grid.substr(x + 1));
        if (W < 2 || L < 2) throw smdp::ParseError("--grid needs W >= 2 and L >= 2");
        return {W, L};
    }

    int resolve_threads() const {
        if (threads > 0) return threads;
        if (const char* env = std::getenv("SMDP_RISK_THREADS")) {
            const int t = std::atoi(env);
            if (t > 0) return t;
        }
        return 0; // library default: hardware concurrency
    }
};

struct LoadedModel {
    smdp::ModelFile file;
    smdp::Utility utility = smdp::Utility::linear();
};

LoadedModel load_and_validate(const std::string& path, const std::string& utility_spec) {
    LoadedModel lm{smdp::load_model_file(path)};
    const auto report = smdp::validate(lm.file.model);
    if (!report.ok()) {
        std::cerr << "model validation failed:\n" << report.str();
        std::exit(kExitInvalidModel);
    }
    if (!utility_spec.empty())
        lm.utility = smdp::parse_utility_spec(utility_spec);
    else if (lm.file.utility)
        lm.utility = *lm.file.utility;
    else {
        std::cerr << "model file has no utility section; pass --utility\n";
        std::exit(kExitIoError);
    }
    return lm;
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

void write_json(const std::string& path, const ordered_json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(1, '\t') << '\n';
}

ordered_json meta_json(const smdp::OutputMeta& meta) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "0x%016llx", static_cast<unsigned long long>(meta.model_hash));
    ordered_json j;
    j["model_hash"] = hash;
    j["grid"] = {{"W", meta.grid_w}, {"L", meta.grid_l}, {"w_min", meta.w_min}};
    j["quad_m"] = meta.quad_m;
    j["tol"] = meta.tol;
    j["seed"] = meta.seed;
    return j;
}

smdp::ValueTable sandwich_midpoint(const smdp::SandwichResult& res) {
    smdp::ValueTable mid = res.lower;
    for (std::size_t k = 0; k < mid.values.size(); ++k)
        mid.values[k] = 0.5 * (res.lower.values[k] + res.upper.values[k]);
    return mid;
}

int cmd_validate(const std::string& model_path) {
    const auto file = smdp::load_model_file(model_path);
    const auto report = smdp::validate(file.model);
    if (!report.ok()) {
        std::cerr << report.str();
        return kExitInvalidModel;
    }
    std::cout << "OK\n";
    return kExitOk;
}

int cmd_certify(const std::string& model_path, std::optional<double> delta) {
    const auto file = smdp::load_model_file(model_path);
    const auto report = smdp::validate(file.model);
    if (!report.ok()) {
        std::cerr << report.str();
        return kExitInvalidModel;
    }
    const double d = delta ? *delta : smdp::default_certificate_delta(file.model);
    const auto cert = smdp::certify_assumption1(file.model, d);
    std::cout << "delta = " << cert.delta << "\n"
              << "epsilon = " << cert.epsilon << "\n"
              << "rho = " << smdp::contraction_base(cert, file.model.alpha) << "\n";
    return kExitOk;
}

int cmd_solve(const std::string& model_path, const GridOpts& opts, int horizon, bool infinite,
              bool force_exponential, bool force_general, std::uint64_t seed) {
    auto lm = load_and_validate(model_path, opts.utility_spec);
    const auto& model = lm.file.model;
    const auto [W, L] = opts.parse_grid();
    const auto grid = smdp::build_grid(model, W, L, opts.w_min);
    const auto quad = smdp::build_quadrature(model, opts.quad_m);
    const int threads = opts.resolve_threads();

    smdp::OutputMeta meta{smdp::model_hash(model, std::nullopt), W, L, opts.w_min,
                          opts.quad_m,                           opts.tol, seed};

    ordered_json summary;
    summary["meta"] = meta_json(meta);
    summary["utility"] = lm.utility.describe();

    if (!infinite) {
        const auto sol = smdp::solve_finite(model, lm.utility, grid, quad, horizon, threads);
        for (int n = 0; n <= horizon; ++n)
            smdp::write_value_csv(out_path(opts.out_dir, "value_n" + std::to_string(n) + ".csv"),
                                  sol.values[n], model.states, meta);
        smdp::write_policy_json(out_path(opts.out_dir, "policy.json"),
                                sol.decision_order_policies(), false, meta);
        summary["mode"] = "finite";
        summary["horizon"] = horizon;
        ordered_json j;
        for (int i = 0; i < model.num_states(); ++i) j[model.states[i]] = sol.j_value(i);
        summary["J"] = std::move(j);
        write_json(out_path(opts.out_dir, "summary.json"), summary);
        std::cout << "solved " << horizon << "-jump horizon\n";
        return kExitOk;
    }

    const auto cert = smdp::certify_assumption1(model, smdp::default_certificate_delta(model));
    const bool exponential_utility = lm.utility.kind() == smdp::UtilityKind::exponential;
    if (force_exponential && !exponential_utility) {
        std::cerr << "--exponential requires an exponential utility\n";
        return kExitIoError;
    }
    const bool use_h_path = !force_general && exponential_utility;

    if (use_h_path) {
        smdp::ExponentialOptions eopts;
        eopts.tol = opts.tol;
        eopts.max_iter = opts.max_iter;
        eopts.threads = threads;
        const auto res = smdp::solve_exponential(model, lm.utility.gamma(), grid, quad, cert, eopts);
        smdp::write_htable_csv(out_path(opts.out_dir, "htable.csv"), res.h, model.states, meta);
        smdp::write_policy_json(out_path(opts.out_dir, "policy.json"),
                                {smdp::broadcast_policy(res.policy, grid)}, true, meta);
        smdp::write_convergence_csv(out_path(opts.out_dir, "convergence.csv"), res.history, meta);
        summary["mode"] = "infinite-exponential";
        summary["iterations"] = res.n_iters;
        summary["gap"] = res.gap;
        summary["log_domain"] = res.log_domain;
        ordered_json j;
        for (int i = 0; i < model.num_states(); ++i) j[model.states[i]] = res.j_value(i);
        summary["J"] = std::move(j);
        write_json(out_path(opts.out_dir, "summary.json"), summary);
        std::cout << "converged in " << res.n_iters << " iterations (gap " << res.gap << ")\n";
        return kExitOk;
    }

    const auto res =
        smdp::solve_infinite(model, lm.utility, grid, quad, cert, opts.tol, opts.max_iter, threads);
    smdp::write_value_csv(out_path(opts.out_dir, "value_lower.csv"), res.lower, model.states, meta);
    smdp::write_value_csv(out_path(opts.out_dir, "value_upper.csv"), res.upper, model.states, meta);
    smdp::write_value_csv(out_path(opts.out_dir, "value_mid.csv"), sandwich_midpoint(res),
                          model.states, meta);
    smdp::write_policy_json(out_path(opts.out_dir, "policy.json"), {res.policy}, true, meta);
    smdp::write_convergence_csv(out_path(opts.out_dir, "convergence.csv"), res.history, meta);
    summary["mode"] = "infinite";
    summary["iterations"] = res.n_iters;
    summary["gap"] = res.gap;
    summary["budget"] = {{"interp", res.budget.interp},
                         {"clamp", res.budget.clamp},
                         {"total", res.budget.total()}};
    ordered_json j;
    for (int i = 0; i < model.num_states(); ++i) j[model.states[i]] = res.j_value(i);
    summary["J"] = std::move(j);
    write_json(out_path(opts.out_dir, "summary.json"), summary);
    std::cout << "converged in " << res.n_iters << " iterations (gap " << res.gap
              << ", grid budget " << res.budget.total() << ")\n";
    return kExitOk;
}

int cmd_improve(const std::string& model_path, const GridOpts& opts, const std::string& policy_path,
                int rounds) {
    auto lm = load_and_validate(model_path, opts.utility_spec);
    const auto& model = lm.file.model;
    auto policy_file = smdp::read_policy_json(policy_path, model);
    if (!policy_file.stationary) {
        std::cerr << "improve needs a stationary policy file\n";
        return kExitIoError;
    }
    if (policy_file.model_hash != smdp::model_hash(model, std::nullopt)) {
        std::cerr << "policy file was produced for a different model (hash mismatch)\n";
        return kExitIoError;
    }
    const auto grid = policy_file.tables.front().grid;
    const auto quad = smdp::build_quadrature(model, opts.quad_m);
    const int threads = opts.resolve_threads();

    smdp::OutputMeta meta{policy_file.model_hash, grid.W(),  grid.L(), grid.w_min(),
                          opts.quad_m,            opts.tol, 0};

    smdp::PolicyTable current = policy_file.tables.front();
    int done = 0;
    bool improved_any = false;
    for (int r = 0; r < rounds; ++r) {
        auto res = smdp::improve_policy(model, lm.utility, grid, quad, current, opts.tol,
                                        opts.max_iter, threads);
        ++done;
        if (!res.improved) break;
        improved_any = true;
        current = std::move(res.policy);
    }
    smdp::write_policy_json(out_path(opts.out_dir, "policy_improved.json"), {current}, true, meta);
    ordered_json summary;
    summary["meta"] = meta_json(meta);
    summary["rounds"] = done;
    summary["improved"] = improved_any;
    write_json(out_path(opts.out_dir, "summary.json"), summary);
    std::cout << (improved_any ? "policy improved\n" : "no improving action found\n");
    return kExitOk;
}

int cmd_simulate(const std::string& model_path, const GridOpts& opts, const std::string& policy_path,
                 long n_traj, std::uint64_t seed, int horizon, bool infinite,
                 const std::string& initial) {
    auto lm = load_and_validate(model_path, opts.utility_spec);
    const auto& model = lm.file.model;
    auto policy_file = smdp::read_policy_json(policy_path, model);
    if (policy_file.model_hash != smdp::model_hash(model, std::nullopt)) {
        std::cerr << "policy file was produced for a different model (hash mismatch)\n";
        return kExitIoError;
    }

    int initial_state = 0;
    if (!initial.empty()) {
        initial_state = -1;
        for (int i = 0; i < model.num_states(); ++i)
            if (model.states[i] == initial) initial_state = i;
        if (initial_state < 0) {
            std::cerr << "unknown initial state '" << initial << "'\n";
            return kExitIoError;
        }
    }

    int n_jumps = horizon;
    if (infinite) {
        if (!policy_file.stationary) {
            std::cerr << "infinite-horizon simulation needs a stationary policy\n";
            return kExitIoError;
        }
        const auto cert = smdp::certify_assumption1(model, smdp::default_certificate_delta(model));
        n_jumps = smdp::default_truncation_depth(lm.utility, model, cert, opts.tol);
    } else if (!policy_file.stationary && static_cast<int>(policy_file.tables.size()) < horizon) {
        std::cerr << "policy file has fewer tables than the horizon\n";
        return kExitIoError;
    }

    const int threads = opts.resolve_threads();
    const auto est = smdp::estimate_value(model, lm.utility, policy_file.tables, initial_state,
                                          n_jumps, infinite, n_traj, seed, threads);

    const auto& grid = policy_file.tables.front().grid;
    smdp::OutputMeta meta{policy_file.model_hash, grid.W(),  grid.L(), grid.w_min(),
                          opts.quad_m,            opts.tol, seed};

    // per-trajectory values for the CSV (same streams as the estimate)
    std::vector<double> u_vals(n_traj), u_hi;
    if (infinite) u_hi.resize(n_traj);
    for (long k = 0; k < n_traj; ++k) {
        const auto traj = smdp::sample_trajectory(model, policy_file.tables, initial_state, n_jumps,
                                                  seed, static_cast<std::uint64_t>(k));
        u_vals[k] = lm.utility.eval(traj.accum_cost.back());
        if (infinite)
            u_hi[k] = lm.utility.eval(traj.accum_cost.back() +
                                      std::exp(-model.alpha * traj.jump_times.back()) *
                                          model.lambda_max());
    }
    smdp::write_simulation_csv(out_path(opts.out_dir, "trajectories.csv"), u_vals, u_hi, meta);

    ordered_json summary;
    summary["meta"] = meta_json(meta);
    summary["initial_state"] = model.states[initial_state];
    summary["n_traj"] = est.n_traj;
    summary["n_jumps"] = est.n_jumps;
    summary["mean"] = est.mean;
    summary["ci_95"] = {est.ci_lo, est.ci_hi};
    summary["bracket"] = {est.bracket_lo, est.bracket_hi};
    write_json(out_path(opts.out_dir, "summary.json"), summary);
    std::cout << "mean U = " << est.mean << "  ci95 = [" << est.ci_lo << ", " << est.ci_hi << "]";
    if (infinite) std::cout << "  bracket = [" << est.bracket_lo << ", " << est.bracket_hi << "]";
    std::cout << "\n";
    return kExitOk;
}

int cmd_compare(const std::string& model_path, const GridOpts& opts) {
    auto lm = load_and_validate(model_path, opts.utility_spec);
    const auto& model = lm.file.model;
    if (lm.utility.kind() != smdp::UtilityKind::exponential) {
        std::cerr << "compare needs an exponential utility (model file or --utility exp:G)\n";
        return kExitIoError;
    }
    const auto [W, L] = opts.parse_grid();
    const auto grid = smdp::build_grid(model, W, L, opts.w_min);
    const auto quad = smdp::build_quadrature(model, opts.quad_m);
    const auto cert = smdp::certify_assumption1(model, smdp::default_certificate_delta(model));
    const int threads = opts.resolve_threads();

    const auto general =
        smdp::solve_infinite(model, lm.utility, grid, quad, cert, opts.tol, opts.max_iter, threads);
    smdp::ExponentialOptions eopts;
    eopts.tol = opts.tol;
    eopts.max_iter = opts.max_iter;
    eopts.threads = threads;
    const auto reduced = smdp::solve_exponential(model, lm.utility.gamma(), grid, quad, cert, eopts);

    const double residual = smdp::splitting_residual(sandwich_midpoint(general), reduced.h);
    const double gamma = lm.utility.gamma();
    const double amp = gamma > 0 ? std::exp(gamma * model.lambda_max()) : 1.0;
    const double budget = general.gap + amp * reduced.gap + general.budget.total();

    smdp::OutputMeta meta{smdp::model_hash(model, std::nullopt), W, L, opts.w_min,
                          opts.quad_m,                           opts.tol, 0};
    ordered_json summary;
    summary["meta"] = meta_json(meta);
    summary["splitting_residual"] = residual;
    summary["budget"] = budget;
    summary["general_gap"] = general.gap;
    summary["exponential_gap"] = reduced.gap;
    write_json(out_path(opts.out_dir, "summary.json"), summary);

    std::cout << "splitting residual <= " << residual << " (budget " << budget << ")\n";
    return residual <= budget ? kExitOk : kExitNoConvergence;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-sensitive semi-Markov decision process solver"};
    app.require_subcommand(1);

    GridOpts opts;

    auto* validate_cmd = app.add_subcommand("validate", "Check model invariants");
    std::string validate_model;
    validate_cmd->add_option("model", validate_model, "Model file (JSON)")->required();

    auto* certify_cmd = app.add_subcommand("certify", "Compute the sojourn-time certificate");
    std::string certify_model;
    double certify_delta = -1;
    certify_cmd->add_option("model", certify_model, "Model file (JSON)")->required();
    certify_cmd->add_option("--delta", certify_delta, "Sojourn threshold (default: auto)");

    auto* solve_cmd = app.add_subcommand("solve", "Solve the finite or infinite horizon problem");
    std::string solve_model;
    int horizon = 0;
    bool infinite = false, force_exp = false, force_general = false;
    std::uint64_t solve_seed = 0;
    solve_cmd->add_option("model", solve_model, "Model file (JSON)")->required();
    auto* horizon_opt =
        solve_cmd->add_option("--horizon", horizon, "Number of jumps N (N >= 1)")
            ->check(CLI::Range(1, 1000000));
    auto* infinite_opt = solve_cmd->add_flag("--infinite", infinite, "Infinite horizon");
    horizon_opt->excludes(infinite_opt);
    infinite_opt->excludes(horizon_opt);
    solve_cmd->add_flag("--exponential", force_exp,
                        "Use the reduced h-iteration (requires exponential utility)");
    solve_cmd->add_flag("--general", force_general,
                        "Force the general augmented solver even for exponential utility");
    solve_cmd->add_option("--seed", solve_seed, "Seed recorded in output headers");
    opts.attach(solve_cmd);

    auto* improve_cmd = app.add_subcommand("improve", "One or more policy-improvement rounds");
    std::string improve_model, improve_policy_path;
    int rounds = 1;
    improve_cmd->add_option("model", improve_model, "Model file (JSON)")->required();
    improve_cmd->add_option("--policy", improve_policy_path, "Stationary policy file")->required();
    improve_cmd->add_option("--rounds", rounds, "Max improvement rounds (default 1)")
        ->check(CLI::PositiveNumber);
    opts.attach(improve_cmd);

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo policy evaluation");
    std::string sim_model, sim_policy, sim_initial;
    long n_traj = 10000;
    std::uint64_t sim_seed = 0;
    int sim_horizon = 0;
    bool sim_infinite = false;
    simulate_cmd->add_option("model", sim_model, "Model file (JSON)")->required();
    simulate_cmd->add_option("--policy", sim_policy, "Policy file")->required();
    simulate_cmd->add_option("--n-traj", n_traj, "Trajectories (default 10000)")
        ->check(CLI::Range(2L, 1000000000L));
    simulate_cmd->add_option("--seed", sim_seed, "Base seed (default 0)");
    auto* sim_h = simulate_cmd->add_option("--horizon", sim_horizon, "Jumps per trajectory")
                      ->check(CLI::Range(1, 1000000));
    auto* sim_inf =
        simulate_cmd->add_flag("--infinite", sim_infinite, "Truncated infinite-horizon bracket");
    sim_h->excludes(sim_inf);
    sim_inf->excludes(sim_h);
    simulate_cmd->add_option("--initial", sim_initial, "Initial state (default: first)");
    opts.attach(simulate_cmd);

    auto* compare_cmd =
        app.add_subcommand("compare", "Cross-check general vs exponential solution paths");
    std::string compare_model;
    compare_cmd->add_option("model", compare_model, "Model file (JSON)")->required();
    opts.attach(compare_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitIoError;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(validate_model);
        if (certify_cmd->parsed())
            return cmd_certify(certify_model, certify_delta > 0 ? std::optional<double>(certify_delta)
                                                                : std::nullopt);
        if (solve_cmd->parsed()) {
            if (!infinite && horizon < 1) {
                std::cerr << "solve: pass --horizon N (N >= 1) or --infinite\n";
                return kExitIoError;
            }
            return cmd_solve(solve_model, opts, horizon, infinite, force_exp, force_general,
                             solve_seed);
        }
        if (improve_cmd->parsed())
            return cmd_improve(improve_model, opts, improve_policy_path, rounds);
        if (simulate_cmd->parsed()) {
            if (!sim_infinite && sim_horizon < 1) {
                std::cerr << "simulate: pass --horizon N (N >= 1) or --infinite\n";
                return kExitIoError;
            }
            return cmd_simulate(sim_model, opts, sim_policy, n_traj, sim_seed, sim_horizon,
                                sim_infinite, sim_initial);
        }
        if (compare_cmd->parsed()) return cmd_compare(compare_model, opts);
    } catch (const smdp::NonConvergenceError& e) {
        std::cerr << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const smdp::NoCertificateError& e) {
        std::cerr << e.what() << "\n";
        return kExitInvalidModel;
    } catch (const smdp::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitIoError;
    }
    return kExitIoError;
}
