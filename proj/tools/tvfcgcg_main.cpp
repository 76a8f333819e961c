// Experiment driver: runs the TV-regularized control problems, the
// onecut-vs-dinkelbach comparison, mesh generation, and a brute-force min-cut
// oracle for tiny meshes.
//
//   tvfcgcg run <config> [--tol V] [--max-iter N] [--mode M] [--out DIR]
//   tvfcgcg compare <config> [same overrides]
//   tvfcgcg mesh <n> <jitter> <seed> <out>
//   tvfcgcg oracle-cut <mesh> <weights>
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvfcgcg/config.hpp"
#include "tvfcgcg/curvature_cut.hpp"
#include "tvfcgcg/fcgcg.hpp"
#include "tvfcgcg/mesh_io.hpp"
#include "tvfcgcg/trace_io.hpp"

namespace fs = std::filesystem;
using namespace tvfcgcg;

namespace {

struct Overrides {
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<std::string> mode;
    std::optional<std::string> out;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& ov)
{
    if (ov.tol) {
        if (!(*ov.tol > 0.0)) throw std::runtime_error("--tol must be positive");
        cfg.solver.tolerance = *ov.tol;
    }
    if (ov.max_iter) {
        if (*ov.max_iter < 1) throw std::runtime_error("--max-iter must be >= 1");
        cfg.solver.max_iter = *ov.max_iter;
    }
    if (ov.mode) {
        if (*ov.mode == "onecut")
            cfg.solver.mode = InsertionMode::onecut;
        else if (*ov.mode == "dinkelbach")
            cfg.solver.mode = InsertionMode::dinkelbach;
        else
            throw std::runtime_error("--mode must be onecut or dinkelbach");
    }
    if (ov.out) cfg.output.directory = *ov.out;
}

SolverConfig solver_config(const ExperimentConfig& cfg)
{
    SolverConfig sc;
    sc.tolerance = cfg.solver.tolerance;
    sc.max_iter = cfg.solver.max_iter;
    sc.mode = cfg.solver.mode;
    sc.include_omega = cfg.solver.include_omega;
    return sc;
}

// Copies the original config into the run directory so every run is
// self-describing.
void copy_config(const std::string& config_path, const fs::path& dir)
{
    std::ifstream in(config_path, std::ios::binary);
    std::ofstream out(dir / "config.toml", std::ios::binary);
    out << in.rdbuf();
}

void emit_run(const fs::path& dir, const std::string& config_path, const TriMesh& mesh,
              const BuiltProblem& built, const SolverResult& result, bool emit_fields)
{
    fs::create_directories(dir);
    copy_config(config_path, dir);
    save_mesh((dir / "mesh.trimesh").string(), mesh);
    write_trace_csv((dir / "trace.csv").string(), result.trace);
    write_summary_json((dir / "summary.json").string(), result.trace);
    save_field((dir / "solution.p0field").string(), result.u);
    if (emit_fields) {
        save_field((dir / "target.p1field").string(), built.problem.y_d);
        if (built.control) save_field((dir / "control.p0field").string(), *built.control);
    }
}

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class Fn>
auto solver_stage(Fn&& fn)
{
    try {
        return fn();
    } catch (const std::exception& e) {
        throw SolverFailure(e.what());
    }
}

int cmd_run(const std::string& config_path, const Overrides& ov)
{
    ExperimentConfig cfg = parse_config(config_path);
    apply_overrides(cfg, ov);
    TriMesh mesh = generate_square_mesh(cfg.mesh.n, cfg.mesh.jitter, cfg.mesh.seed);
    BuiltProblem built = build_problem(mesh, cfg);

    SolverResult result = solver_stage([&] { return run(built.problem, solver_config(cfg)); });
    emit_run(cfg.output.directory, config_path, mesh, built, result, cfg.output.emit_fields);

    std::cout << (result.trace.converged ? "converged" : "not converged") << " after "
              << result.trace.iterations << " iterations, J = " << result.trace.final_J
              << ", " << result.trace.pde_solves << " PDE solves, " << result.trace.cuts
              << " cuts\n";
    return result.trace.converged ? 0 : 2;
}

int cmd_compare(const std::string& config_path, const Overrides& ov)
{
    ExperimentConfig cfg = parse_config(config_path);
    apply_overrides(cfg, ov);
    TriMesh mesh = generate_square_mesh(cfg.mesh.n, cfg.mesh.jitter, cfg.mesh.seed);
    BuiltProblem built = build_problem(mesh, cfg);

    ComparisonResult cmp =
        solver_stage([&] { return run_comparison(built.problem, solver_config(cfg)); });

    fs::path dir = cfg.output.directory;
    emit_run(dir / "onecut", config_path, mesh, built, cmp.onecut, cfg.output.emit_fields);
    emit_run(dir / "dinkelbach", config_path, mesh, built, cmp.dinkelbach, false);

    nlohmann::json j{{"onecut", summary_json(cmp.onecut.trace)},
                     {"dinkelbach", summary_json(cmp.dinkelbach.trace)},
                     {"J_difference",
                      std::abs(cmp.onecut.trace.final_J - cmp.dinkelbach.trace.final_J)}};
    std::ofstream out(dir / "comparison.json");
    out << j.dump(2) << "\n";

    std::cout << "onecut:     " << cmp.onecut.trace.iterations << " iterations, "
              << cmp.onecut.trace.pde_solves << " PDE solves, " << cmp.onecut.trace.cuts
              << " cuts\n";
    std::cout << "dinkelbach: " << cmp.dinkelbach.trace.iterations << " iterations, "
              << cmp.dinkelbach.trace.pde_solves << " PDE solves, " << cmp.dinkelbach.trace.cuts
              << " cuts\n";
    return cmp.onecut.trace.converged && cmp.dinkelbach.trace.converged ? 0 : 2;
}

int cmd_mesh(int n, double jitter, std::uint64_t seed, const std::string& out_path)
{
    TriMesh mesh = generate_square_mesh(n, jitter, seed);
    save_mesh(out_path, mesh);
    std::cout << "wrote " << mesh.num_triangles() << " triangles, " << mesh.num_vertices()
              << " vertices to " << out_path << "\n";
    return 0;
}

std::vector<double> load_weights(const std::string& path, int expected)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string first;
    std::getline(in, first);
    std::vector<double> w;
    if (first.rfind("P0FIELD", 0) == 0) {
        in.seekg(0);
        P0Field f = load_p0_field(in, path);
        w.assign(f.values.begin(), f.values.end());
    } else {
        std::istringstream ss(first);
        double v;
        while (ss >> v) w.push_back(v);
        while (in >> v) w.push_back(v);
    }
    if (static_cast<int>(w.size()) != expected)
        throw std::runtime_error("weight count " + std::to_string(w.size()) +
                                 " does not match triangle count " + std::to_string(expected));
    return w;
}

// Exhaustive minimization of -sum_{T in E} c_T + Per(E) over all subsets, in
// the same fixed-point arithmetic as solve_mincut.
int cmd_oracle_cut(const std::string& mesh_path, const std::string& weights_path)
{
    TriMesh mesh = load_mesh(mesh_path);
    if (mesh.num_triangles() > 20)
        throw std::runtime_error("oracle-cut enumerates all subsets; mesh limited to 20 "
                                 "triangles, got " +
                                 std::to_string(mesh.num_triangles()));
    std::vector<double> weights = load_weights(weights_path, mesh.num_triangles());

    CutGraphScaling scaling = scale_cut_weights(mesh, weights);
    const int nt = mesh.num_triangles();
    std::int64_t best = 0;
    std::uint32_t best_mask = 0; // maximal minimizer = union of all minimizers
    std::vector<char> mask(nt, 0);
    for (std::uint32_t m = 0; m < (1u << nt); ++m) {
        for (int t = 0; t < nt; ++t) mask[t] = (m >> t) & 1u;
        std::int64_t e = cut_energy_fixed(mesh, scaling, mask);
        if (e < best) {
            best = e;
            best_mask = m;
        } else if (e == best) {
            best_mask |= m;
        }
    }

    CutSolution sol = solve_mincut(mesh, weights);
    std::uint32_t sol_mask = 0;
    for (int t : sol.subset) sol_mask |= 1u << t;

    std::cout << "enumerated optimum: " << static_cast<double>(best) / scaling.scale
              << " (fixed " << best << ")\n";
    std::cout << "solve_mincut:       " << sol.energy << " (fixed " << sol.energy_fixed
              << ")\n";
    bool agree = best == sol.energy_fixed && best_mask == sol_mask;
    std::cout << (agree ? "agreement: energies and maximal minimizer match\n"
                        : "MISMATCH between enumeration and solve_mincut\n");
    return agree ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"one-cut fully-corrective conditional gradient solver for "
                 "TV-regularized control problems"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config_path, mesh_path, weights_path, out_path;
    int n = 1;
    double jitter = 0.0;
    std::uint64_t seed = 0;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--tol", [&ov](const std::vector<std::string>& v) {
            ov.tol = std::stod(v[0]);
            return true;
        }, "override solver tolerance");
        cmd->add_option("--max-iter", [&ov](const std::vector<std::string>& v) {
            ov.max_iter = std::stoi(v[0]);
            return true;
        }, "override iteration cap");
        cmd->add_option("--mode", [&ov](const std::vector<std::string>& v) {
            ov.mode = v[0];
            return true;
        }, "insertion mode: onecut or dinkelbach");
        cmd->add_option("--out", [&ov](const std::vector<std::string>& v) {
            ov.out = v[0];
            return true;
        }, "override output directory");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    run_cmd->add_option("config", config_path, "experiment config file")->required();
    add_overrides(run_cmd);

    CLI::App* cmp_cmd = app.add_subcommand("compare", "run onecut and dinkelbach modes");
    cmp_cmd->add_option("config", config_path, "experiment config file")->required();
    add_overrides(cmp_cmd);

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate a mesh file");
    mesh_cmd->add_option("n", n, "subdivisions per axis")->required();
    mesh_cmd->add_option("jitter", jitter, "relative vertex perturbation in [0, 0.3]")
        ->required();
    mesh_cmd->add_option("seed", seed, "PRNG seed")->required();
    mesh_cmd->add_option("out", out_path, "output mesh file")->required();

    CLI::App* oracle_cmd =
        app.add_subcommand("oracle-cut", "brute-force min-cut check for tiny meshes");
    oracle_cmd->add_option("mesh", mesh_path, "mesh file (<= 20 triangles)")->required();
    oracle_cmd->add_option("weights", weights_path, "per-triangle weights")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, ov);
        if (cmp_cmd->parsed()) return cmd_compare(config_path, ov);
        if (mesh_cmd->parsed()) return cmd_mesh(n, jitter, seed, out_path);
        if (oracle_cmd->parsed()) return cmd_oracle_cut(mesh_path, weights_path);
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
