#ifndef TVFCGCG_FCGCG_HPP
#define TVFCGCG_FCGCG_HPP

// Outer fully-corrective generalized conditional gradient loop.
//
// Per iteration: one adjoint PDE solve gives the per-triangle weights
// p_T = (1/alpha) int_T K*(y_d - y_k); one graph cut yields the maximal
// minimizer E_k of  -int_E p + Per(E);  the indicator
// j_k = int_{E_k} p - Per(E_k) certifies optimality when <= tolerance.
// Otherwise E_k is split into its edge-connected components, their
// observations K 1_E are computed (n_k forward solves, parallelizable) and
// cached, and the coefficients are re-optimized over the whole active set with
// a warm start; entries whose coefficient is exactly zero are pruned. The
// iterate y_k is rebuilt from cached observations, so one iteration costs
// n_k + 1 PDE solves and one graph cut.
//
// The dinkelbach insertion mode replaces the decomposition by the
// ratio-maximizing set of a Dinkelbach-Newton iteration (the prior method's
// insertion step); its first internal cut doubles as the j_k indicator, so
// both modes share the same termination test.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "coeff_qp.hpp"
#include "curvature_cut.hpp"
#include "fem.hpp"
#include "mesh.hpp"

namespace tvfcgcg {

enum class InsertionMode { onecut, dinkelbach };

inline std::span<const double> as_span(const Eigen::VectorXd& v)
{
    return {v.data(), static_cast<size_t>(v.size())};
}

struct SolverConfig {
    double tolerance = 1e-10;
    int max_iter = 500;
    InsertionMode mode = InsertionMode::onecut;
    bool include_omega = false;
    int max_threads = 0; // 0: hardware concurrency; caps the observation solves
    double dinkelbach_tol = 1e-12;
    int dinkelbach_max_iter = 100;
};

struct ActiveSetEntry {
    TriSet subset;
    double perimeter = 0.0;
    Eigen::VectorXd observation;      // K 1_E
    Eigen::VectorXd mass_observation; // M K 1_E
    double lambda = 0.0;
    bool is_omega = false;
};

struct ActiveSetState {
    std::vector<ActiveSetEntry> entries; // Omega entry first when present
    int omega_index() const
    {
        return !entries.empty() && entries.front().is_omega ? 0 : -1;
    }
};

struct TraceRow {
    int k = 0;
    double J = 0.0;         // F(y_k) + tv_p0(u_k)
    double surrogate = 0.0; // F(y_k) + sum lambda_j Per(E_j)
    double j_k = 0.0;
    int n_components = 0;   // new active-set entries this iteration
    int active_size = 0;
    long pde_solves = 0;    // cumulative
    long cuts = 0;          // cumulative
    double wall_ms = 0.0;   // this iteration
};

struct SolverTrace {
    std::vector<TraceRow> rows;
    bool converged = false;
    int iterations = 0;
    double final_J = 0.0;
    double final_indicator = 0.0;
    long pde_solves = 0;
    long cuts = 0;
    double wall_ms = 0.0;
};

struct SolverResult {
    P0Field u;
    ActiveSetState active_set;
    SolverTrace trace;
};

inline int resolve_thread_cap(int configured)
{
    int cap = configured;
    if (const char* env = std::getenv("TVFCGCG_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) cap = cap > 0 ? std::min(cap, v) : v;
    }
    if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, cap);
}

class FcgcgSolver {
public:
    FcgcgSolver(const PdeProblem& problem, SolverConfig config)
        : pb_(problem), cfg_(std::move(config)), thread_cap_(resolve_thread_cap(cfg_.max_threads))
    {
        if (!(cfg_.tolerance > 0.0) && !std::isinf(cfg_.tolerance))
            throw std::invalid_argument("solver tolerance must be positive");
        if (!pb_.nonneg_constraint && !(pb_.include_omega || cfg_.include_omega))
            throw std::invalid_argument("signed problems require the Omega entry");
        include_omega_ = pb_.include_omega || cfg_.include_omega;
        y_ = Eigen::VectorXd::Zero(pb_.mesh->num_vertices());
        ydd_ = observation_inner(pb_, pb_.y_d, pb_.y_d);
    }

    const ActiveSetState& active_set() const { return active_; }
    const SolverTrace& trace() const { return trace_; }
    int iteration() const { return k_; }

    P0Field iterate() const
    {
        P0Field u{Eigen::VectorXd::Zero(pb_.mesh->num_triangles())};
        for (const auto& e : active_.entries)
            for (int t : e.subset) u.values[t] += e.lambda;
        return u;
    }

    // One pass of the outer loop; returns true when the indicator certifies
    // optimality and the state was left unchanged.
    bool step()
    {
        auto t0 = std::chrono::steady_clock::now();

        // p_k = -K* grad F(K u_k) = (1/alpha) K*(y_d - y_k), as triangle
        // integrals.
        P1Field residual{pb_.y_d.values - y_};
        Eigen::VectorXd p = adjoint_integrals(pb_, residual) / pb_.alpha;
        ++pde_solves_;

        CutSolution cut = solve_mincut(*pb_.mesh, as_span(p));
        ++cuts_;
        double j_k = -cut_energy(*pb_.mesh, as_span(p), cut.mask);

        TraceRow row;
        row.k = k_;
        P0Field u = iterate();
        double fval = fidelity(residual);
        row.J = fval + tv_p0(*pb_.mesh, u);
        row.surrogate = fval + surrogate_tv();
        row.j_k = j_k;
        row.active_size = static_cast<int>(active_.entries.size());

        if (j_k <= cfg_.tolerance) {
            finish_row(row, t0, 0);
            trace_.converged = true;
            return true;
        }

        // New candidate sets.
        std::vector<TriSet> components;
        if (cfg_.mode == InsertionMode::onecut) {
            components = decompose(*pb_.mesh, cut.subset);
        } else {
            DinkelbachResult dk = dinkelbach_insert(*pb_.mesh, as_span(p), cfg_.dinkelbach_tol,
                                                    cfg_.dinkelbach_max_iter, &cut);
            cuts_ += dk.cuts;
            bool duplicate = false;
            for (const auto& e : active_.entries)
                if (e.subset == dk.subset) duplicate = true;
            // Near the discrete optimum the remaining ratio gap can drop
            // below the fixed-point resolution and the ratio iteration
            // returns a set that is already active. The indicator set still
            // carries a positive gap (j_k > tolerance), so inserting it keeps
            // the method strictly descending.
            components.push_back(duplicate ? cut.subset : std::move(dk.subset));
        }

        if (include_omega_ && active_.omega_index() < 0) {
            TriSet all(pb_.mesh->num_triangles());
            for (int t = 0; t < pb_.mesh->num_triangles(); ++t) all[t] = t;
            components.insert(components.begin(), std::move(all));
        }

        int appended = append_new_entries(components);
        row.n_components = appended;

        solve_and_prune();
        rebuild_iterate();
        finish_row(row, t0, appended);
        ++k_;
        return false;
    }

    SolverResult run()
    {
        auto start = std::chrono::steady_clock::now();
        while (k_ < cfg_.max_iter) {
            if (step()) break;
        }
        trace_.iterations = k_;
        if (!trace_.rows.empty()) {
            trace_.final_J = trace_.rows.back().J;
            trace_.final_indicator = trace_.rows.back().j_k;
        }
        trace_.pde_solves = pde_solves_;
        trace_.cuts = cuts_;
        trace_.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        return {iterate(), active_, trace_};
    }

private:
    double fidelity(const P1Field& residual) const
    {
        return 0.5 / pb_.alpha * observation_inner(pb_, residual, residual);
    }

    double surrogate_tv() const
    {
        double s = 0.0;
        for (const auto& e : active_.entries) s += e.lambda * e.perimeter;
        return s;
    }

    void finish_row(TraceRow& row, std::chrono::steady_clock::time_point t0, int appended)
    {
        row.n_components = appended;
        row.active_size = static_cast<int>(active_.entries.size());
        row.pde_solves = pde_solves_;
        row.cuts = cuts_;
        row.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        trace_.rows.push_back(row);
    }

    // Appends components not already present (as index sets). Observations of
    // the appended entries are computed in parallel, capped by TVFCGCG_THREADS.
    int append_new_entries(const std::vector<TriSet>& components)
    {
        std::vector<const TriSet*> fresh;
        for (const auto& comp : components) {
            bool duplicate = false;
            for (const auto& e : active_.entries)
                if (e.subset == comp) duplicate = true;
            bool already_fresh = false;
            for (const TriSet* f : fresh)
                if (*f == comp) already_fresh = true;
            if (!duplicate && !already_fresh) fresh.push_back(&comp);
        }

        std::vector<ActiveSetEntry> made(fresh.size());
        auto build = [&](size_t i) {
            const TriSet& comp = *fresh[i];
            ActiveSetEntry e;
            e.subset = comp;
            e.is_omega = static_cast<int>(comp.size()) == pb_.mesh->num_triangles();
            e.perimeter = e.is_omega ? 0.0 : perimeter(*pb_.mesh, comp);
            P0Field ind{Eigen::VectorXd::Zero(pb_.mesh->num_triangles())};
            for (int t : comp) ind.values[t] = 1.0;
            e.observation = forward(pb_, ind).values;
            e.mass_observation = pb_.fem.mass * e.observation;
            made[i] = std::move(e);
        };

        int threads = std::min<int>(thread_cap_, static_cast<int>(fresh.size()));
        if (threads > 1) {
            std::vector<std::thread> pool;
            std::atomic<size_t> next{0};
            for (int w = 0; w < threads; ++w)
                pool.emplace_back([&] {
                    for (size_t i = next.fetch_add(1); i < fresh.size(); i = next.fetch_add(1))
                        build(i);
                });
            for (auto& th : pool) th.join();
        } else {
            for (size_t i = 0; i < fresh.size(); ++i) build(i);
        }
        pde_solves_ += static_cast<long>(fresh.size());

        for (auto& e : made) {
            if (e.is_omega && include_omega_) {
                active_.entries.insert(active_.entries.begin(), std::move(e));
            } else {
                e.is_omega = false; // only the designated entry is free-sign
                active_.entries.push_back(std::move(e));
            }
        }
        return static_cast<int>(made.size());
    }

    void solve_and_prune()
    {
        const int m = static_cast<int>(active_.entries.size());
        ReducedProblem rp;
        rp.alpha = pb_.alpha;
        rp.ydd = ydd_;
        rp.gram.resize(m, m);
        rp.linear.resize(m);
        rp.perimeters.resize(m);
        for (int i = 0; i < m; ++i) {
            const auto& ei = active_.entries[i];
            rp.linear[i] = ei.mass_observation.dot(pb_.y_d.values);
            rp.perimeters[i] = ei.perimeter;
            for (int j = 0; j <= i; ++j) {
                double g = ei.observation.dot(active_.entries[j].mass_observation);
                rp.gram(i, j) = g;
                rp.gram(j, i) = g;
            }
        }
        rp.free_sign_index = active_.omega_index();

        Coefficients warm;
        warm.lambda.resize(m);
        for (int i = 0; i < m; ++i) warm.lambda[i] = active_.entries[i].lambda;

        Coefficients sol = solve_coeffs(rp, &warm);
        for (int i = 0; i < m; ++i) active_.entries[i].lambda = sol.lambda[i];

        std::vector<int> drop = prune_indices(rp, sol);
        for (auto it = drop.rbegin(); it != drop.rend(); ++it)
            active_.entries.erase(active_.entries.begin() + *it);
    }

    void rebuild_iterate()
    {
        y_ = Eigen::VectorXd::Zero(pb_.mesh->num_vertices());
        for (const auto& e : active_.entries) y_ += e.lambda * e.observation;
    }

    const PdeProblem& pb_;
    SolverConfig cfg_;
    int thread_cap_;
    bool include_omega_ = false;

    ActiveSetState active_;
    Eigen::VectorXd y_; // K u_k from cached observations
    double ydd_ = 0.0;
    SolverTrace trace_;
    long pde_solves_ = 0;
    long cuts_ = 0;
    int k_ = 0;
};

inline SolverResult run(const PdeProblem& problem, const SolverConfig& config)
{
    FcgcgSolver solver(problem, config);
    return solver.run();
}

struct ComparisonResult {
    SolverResult onecut;
    SolverResult dinkelbach;
};

// Runs both insertion modes sequentially on identical data.
inline ComparisonResult run_comparison(const PdeProblem& problem, SolverConfig config)
{
    ComparisonResult cmp;
    config.mode = InsertionMode::onecut;
    cmp.onecut = run(problem, config);
    config.mode = InsertionMode::dinkelbach;
    cmp.dinkelbach = run(problem, config);
    return cmp;
}

struct ResidualCurve {
    std::vector<double> residuals;  // J(u_k) - J_ref per trace row
    bool reference_consistent = true; // no residual below -1e-10
    int tail_length = 0;
    double tail_slope = 0.0;        // least-squares fit of log r_k over the tail
    double tail_correlation = 0.0;  // Pearson correlation of (k, log r_k)
    double q_hat = 0.0;             // largest q with r_k <= r_1 / (1 + q (k-1))
};

inline ResidualCurve residual_curve(const SolverTrace& trace, double J_ref)
{
    ResidualCurve rc;
    for (const auto& row : trace.rows) {
        double r = row.J - J_ref;
        rc.residuals.push_back(r);
        if (r < -1e-10) rc.reference_consistent = false;
    }

    std::vector<std::pair<double, double>> pts; // (k, log r)
    for (size_t i = 0; i < rc.residuals.size(); ++i)
        if (rc.residuals[i] > 0.0)
            pts.push_back({static_cast<double>(trace.rows[i].k), std::log(rc.residuals[i])});

    if (pts.size() >= 3) {
        // Asymptotic tail: the last quarter of the positive residuals, where
        // the linear-rate regime is expected.
        size_t tail = std::max<size_t>(3, pts.size() / 4);
        std::vector<std::pair<double, double>> tp(pts.end() - tail, pts.end());
        double n = static_cast<double>(tp.size());
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (auto [x, yv] : tp) {
            sx += x;
            sy += yv;
            sxx += x * x;
            syy += yv * yv;
            sxy += x * yv;
        }
        double covxy = sxy - sx * sy / n;
        double varx = sxx - sx * sx / n;
        double vary = syy - sy * sy / n;
        rc.tail_length = static_cast<int>(tail);
        rc.tail_slope = varx > 0 ? covxy / varx : 0.0;
        rc.tail_correlation = (varx > 0 && vary > 0) ? covxy / std::sqrt(varx * vary) : 0.0;
    }

    // Fitted sublinear envelope r_k <= r_1 / (1 + q (k-1)) over rows k >= 1.
    double r1 = 0.0;
    bool have_r1 = false;
    double q = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rc.residuals.size(); ++i) {
        int k = trace.rows[i].k;
        if (k == 1) {
            r1 = rc.residuals[i];
            have_r1 = true;
        }
        if (have_r1 && k >= 2 && rc.residuals[i] > 0.0 && r1 > 0.0)
            q = std::min(q, (r1 / rc.residuals[i] - 1.0) / (k - 1));
    }
    rc.q_hat = std::isfinite(q) ? q : 0.0;
    return rc;
}

} // namespace tvfcgcg

#endif
