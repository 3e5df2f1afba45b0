// Command-line front end: fit / sample / converge.
//
// Exit codes: 0 success, 2 input error, 3 infeasible constraints,
// 4 solver failure, 5 rejection sampler starved.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "csmooth/bayes.hpp"
#include "csmooth/convergence.hpp"
#include "csmooth/errors.hpp"
#include "csmooth/io.hpp"
#include "csmooth/qp.hpp"
#include "csmooth/solver.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolver = 4;
constexpr int kExitLowAcceptance = 5;

struct CommonArgs {
    std::string data_path;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--data", args.data_path, "observations CSV (columns x,y)")->required();
    cmd->add_option("--config", args.config_path, "run configuration JSON")->required();
    cmd->add_option("--out-dir", args.out_dir, "output directory (default .)");
    cmd->add_option("--seed", args.seed_override, "override the config seed");
}

struct LoadedRun {
    csmooth::RunConfig config;
    csmooth::DataSet data;
    csmooth::Mesh mesh;
};

LoadedRun load_run(const CommonArgs& args) {
    csmooth::RunConfig config = csmooth::load_config(args.config_path);
    if (args.seed_override) config.seed = *args.seed_override;
    csmooth::DataTable table = csmooth::read_data_csv(args.data_path);
    csmooth::DataSet data(table.xs, table.ys, config.noise_var);
    csmooth::Mesh mesh = config.make_mesh(data.xs);
    return LoadedRun{std::move(config), std::move(data), std::move(mesh)};
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    std::filesystem::create_directories(args.out_dir);
    return (std::filesystem::path(args.out_dir) / name).string();
}

/// Evaluation grid for curve output: uniform points plus the mesh nodes, so
/// node values survive a round trip through the file exactly.
std::vector<double> curve_grid(const csmooth::Mesh& mesh, int eval_grid) {
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(eval_grid) + mesh.nodes().size());
    for (int g = 0; g < eval_grid; ++g) {
        xs.push_back(static_cast<double>(g) / (eval_grid - 1));
    }
    xs.insert(xs.end(), mesh.nodes().begin(), mesh.nodes().end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

int cmd_fit(const CommonArgs& args) {
    const LoadedRun run = load_run(args);
    const csmooth::QPProblem problem(run.config.kernel, run.mesh, run.data,
                                     run.config.constraints);
    const csmooth::Solution sol = run.config.constraints.empty()
                                      ? csmooth::solve_unconstrained(problem)
                                      : csmooth::solve_constrained(problem);

    const std::vector<double> xs = curve_grid(run.mesh, run.config.eval_grid);
    std::vector<double> u_hat(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) u_hat[i] = sol.u_hat(xs[i]);
    const Eigen::VectorXd mean_vec =
        csmooth::solve_closed_form(run.config.kernel, run.data, xs);
    const std::vector<double> mean(mean_vec.data(), mean_vec.data() + mean_vec.size());

    csmooth::write_curve_csv(out_path(args, "curve.csv"), xs, u_hat, mean);
    csmooth::write_fit_json(out_path(args, "fit.json"), sol, problem);
    return 0;
}

int cmd_sample(const CommonArgs& args, long count, long max_attempts, int threads) {
    const LoadedRun run = load_run(args);
    const csmooth::LinearInequalities li =
        csmooth::compile(run.config.constraints, run.mesh);
    // (H1) gate: fail before sampling when the constraints are contradictory.
    csmooth::feasibility_solve(li, static_cast<Eigen::Index>(run.mesh.nodes().size()));

    const csmooth::NodePosterior posterior =
        csmooth::node_posterior(run.config.kernel, run.mesh, run.data);
    if (max_attempts <= 0) max_attempts = 1000 * count;
    const csmooth::SampleBatch batch = csmooth::rejection_sample_sharded(
        posterior, li, count, max_attempts, run.config.seed, threads);

    csmooth::write_samples_csv(out_path(args, "samples.csv"), batch);
    return 0;
}

int cmd_converge(const CommonArgs& args, int max_level) {
    const LoadedRun run = load_run(args);
    const csmooth::RefinementReport report =
        csmooth::run_refinement(run.config.kernel, run.data, run.config.constraints, max_level,
                                run.config.eval_grid);
    csmooth::write_report_json(out_path(args, "report.json"), report);
    csmooth::write_report_csv(out_path(args, "report.csv"), report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained kernel smoothing: fit, posterior sampling, mesh refinement"};
    app.require_subcommand(1);

    CommonArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "solve the constrained smoothing problem");
    add_common(fit, fit_args);

    CommonArgs sample_args;
    long count = 100;
    long max_attempts = 0;
    int threads = 1;
    CLI::App* sample = app.add_subcommand("sample", "draw from the truncated posterior");
    add_common(sample, sample_args);
    sample->add_option("--count", count, "number of accepted draws (default 100)");
    sample->add_option("--max-attempts", max_attempts,
                       "attempt budget (default 1000 * count)");
    sample->add_option("--threads", threads, "sampling shards (default 1)");

    CommonArgs conv_args;
    int max_level = 5;
    CLI::App* converge = app.add_subcommand("converge", "mesh-refinement convergence study");
    add_common(converge, conv_args);
    converge->add_option("--max-level", max_level, "finest dyadic level (default 5)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_args);
        if (sample->parsed()) return cmd_sample(sample_args, count, max_attempts, threads);
        if (converge->parsed()) return cmd_converge(conv_args, max_level);
    } catch (const csmooth::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const csmooth::LowAcceptanceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitLowAcceptance;
    } catch (const csmooth::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const csmooth::SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const csmooth::FactorizationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return 0;
}
