#ifndef TVFCGCG_CURVATURE_CUT_HPP
#define TVFCGCG_CURVATURE_CUT_HPP

// Exact solution of the discrete prescribed mean curvature problem
//
//     min_{E subset of triangles}  -sum_{T in E} c_T + Per(E, Omega)
//
// by a minimal graph cut on the dual graph of the mesh augmented by a source s
// and a sink t, plus decomposition of minimizers into indecomposable
// (edge-connected) components and a Dinkelbach ratio-maximization baseline.
//
// Capacities are rounded to 64-bit fixed point before the flow computation:
// integer arithmetic makes the min-cut value exact and the maximal-minimizer
// selection deterministic. Triangles with c_T > 0 are tied to the sink and
// triangles with c_T < 0 to the source, so that minimizers of the energy are
// exactly the sink sides of minimum cuts; the complement of the nodes
// reachable from s in the residual graph is then the unique inclusion-maximal
// minimizer.

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "maxflow.hpp"
#include "mesh.hpp"

namespace tvfcgcg {

struct CutGraphScaling {
    double scale;                     // real -> fixed point factor
    std::vector<std::int64_t> weight; // rounded c_T
    std::vector<std::int64_t> length; // rounded interior edge lengths
};

// Budget the total capacity to 2^61 so residual capacities (at most twice a
// single capacity after pushes) and the flow value stay clear of int64 range.
inline CutGraphScaling scale_cut_weights(const TriMesh& mesh, std::span<const double> weights)
{
    if (static_cast<int>(weights.size()) != mesh.num_triangles())
        throw std::invalid_argument("weight vector size does not match triangle count");
    double total = 1.0;
    for (double w : weights) {
        if (!std::isfinite(w)) throw std::invalid_argument("non-finite cut weight");
        total += std::abs(w);
    }
    for (const auto& e : mesh.interior_edges) total += 2.0 * e.length;

    CutGraphScaling s;
    s.scale = std::ldexp(1.0, 61) / total;
    s.weight.resize(weights.size());
    for (size_t i = 0; i < weights.size(); ++i)
        s.weight[i] = static_cast<std::int64_t>(std::llround(weights[i] * s.scale));
    s.length.resize(mesh.interior_edges.size());
    for (size_t i = 0; i < mesh.interior_edges.size(); ++i)
        s.length[i] = static_cast<std::int64_t>(std::llround(mesh.interior_edges[i].length * s.scale));
    return s;
}

// Fixed-point energy of a subset: -sum_{T in E} c_T + Per(E), in scaled units.
inline std::int64_t cut_energy_fixed(const TriMesh& mesh, const CutGraphScaling& s,
                                     const std::vector<char>& mask)
{
    std::int64_t energy = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (mask[t]) energy -= s.weight[t];
    for (size_t e = 0; e < mesh.interior_edges.size(); ++e)
        if (mask[mesh.interior_edges[e].left] != mask[mesh.interior_edges[e].right])
            energy += s.length[e];
    return energy;
}

inline MaxFlowGraph build_cut_graph(const TriMesh& mesh, const CutGraphScaling& s)
{
    const int nt = mesh.num_triangles();
    const int src = nt, snk = nt + 1;
    MaxFlowGraph g(nt + 2);
    for (size_t e = 0; e < mesh.interior_edges.size(); ++e)
        g.add_edge(mesh.interior_edges[e].left, mesh.interior_edges[e].right, s.length[e],
                   s.length[e]);
    for (int t = 0; t < nt; ++t) {
        if (s.weight[t] > 0)
            g.add_edge(t, snk, s.weight[t]);
        else if (s.weight[t] < 0)
            g.add_edge(src, t, -s.weight[t]);
    }
    return g;
}

// Among all minimizing subsets: the inclusion-maximal one (the complement of
// the source-reachable residual nodes) or the inclusion-minimal one (the nodes
// that still reach the sink). The maximal minimizer is the algorithm's default;
// the minimal one avoids zero-energy padding in the ratio iterations.
enum class CutTieBreak { maximal, minimal };

struct CutSolution {
    TriSet subset;                 // minimizer, sink side of the cut
    double energy;                 // -sum c + Per, unscaled
    double max_flow_value;         // unscaled
    std::int64_t energy_fixed;     // exact, in scaled units
    std::int64_t max_flow_fixed;
    double scale;
    std::vector<char> mask;        // subset as a mask
    std::vector<char> source_side; // nodes reachable from s in the residual graph
};

inline CutSolution solve_mincut(const TriMesh& mesh, std::span<const double> weights,
                                MaxFlowAlg alg = MaxFlowAlg::boykov_kolmogorov,
                                CutTieBreak tie = CutTieBreak::maximal)
{
    const int nt = mesh.num_triangles();
    const int src = nt, snk = nt + 1;
    CutGraphScaling s = scale_cut_weights(mesh, weights);
    MaxFlowGraph g = build_cut_graph(mesh, s);

    CutSolution sol;
    sol.scale = s.scale;
    sol.max_flow_fixed = g.max_flow(src, snk, alg);
    sol.max_flow_value = static_cast<double>(sol.max_flow_fixed) / s.scale;

    std::vector<char> reach = g.residual_reachable(src);
    sol.mask.assign(nt, 0);
    if (tie == CutTieBreak::maximal) {
        for (int t = 0; t < nt; ++t) sol.mask[t] = !reach[t];
    } else {
        std::vector<char> to_sink = g.residual_reaches(snk);
        for (int t = 0; t < nt; ++t) sol.mask[t] = to_sink[t];
    }
    for (int t = 0; t < nt; ++t)
        if (sol.mask[t]) sol.subset.push_back(t);
    sol.source_side.assign(reach.begin(), reach.begin() + nt);
    sol.energy_fixed = cut_energy_fixed(mesh, s, sol.mask);
    sol.energy = static_cast<double>(sol.energy_fixed) / s.scale;
    return sol;
}

// Real-valued energy of a subset, used to report energies and the convergence
// indicator independent of the fixed-point rounding.
inline double cut_energy(const TriMesh& mesh, std::span<const double> weights,
                         const std::vector<char>& mask)
{
    double energy = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (mask[t]) energy -= weights[t];
    return energy + perimeter_mask(mesh, mask);
}

// Partition of a subset into edge-connected components of the dual graph
// restricted to the subset. The components' cut-edge sets partition the cut
// edges of the whole subset, so their perimeters are exactly additive.
inline std::vector<TriSet> decompose(const TriMesh& mesh, const TriSet& subset)
{
    std::vector<char> mask = subset_mask(mesh, subset);
    std::vector<char> seen(mesh.num_triangles(), 0);
    std::vector<TriSet> components;
    std::vector<int> stack;
    for (int start : subset) {
        if (seen[start]) continue;
        TriSet comp;
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            comp.push_back(t);
            for (auto [nb, edge] : mesh.dual_adjacency[t]) {
                if (mask[nb] && !seen[nb]) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
    }
    return components;
}

struct DinkelbachResult {
    TriSet subset;   // best set found for max_E  int_E c / Per(E)
    double ratio;    // attained ratio; +inf in the degenerate Per = 0 case
    int cuts = 0;    // number of graph cuts performed
    bool converged = false;
    bool degenerate = false; // maximizer has zero perimeter (the whole domain)
    double first_cut_energy = 0.0; // energy of the initial alpha = 1 problem
};

// Dinkelbach-Newton iteration for the ratio maximization
//   max_E  (sum_{T in E} c_T) / Per(E,Omega),
// realized as a sequence of prescribed curvature problems with weights
// alpha_{l+1} * c where alpha_{l+1} = Per(E_l)/int_{E_l} c. The first cut
// solves the plain alpha = 1 problem, so callers can reuse its energy as the
// one-cut convergence indicator. Requires some c_T > 0.
inline DinkelbachResult dinkelbach_insert(const TriMesh& mesh, std::span<const double> weights,
                                          double tol, int max_iter,
                                          const CutSolution* first_cut = nullptr)
{
    bool any_positive = false;
    for (double w : weights)
        if (w > 0.0) any_positive = true;
    if (!any_positive)
        throw std::invalid_argument("dinkelbach_insert: no triangle with positive weight");

    DinkelbachResult res;
    CutSolution cur = first_cut ? *first_cut : solve_mincut(mesh, weights);
    res.cuts = first_cut ? 0 : 1;
    res.first_cut_energy = cut_energy(mesh, weights, cur.mask);

    auto integral = [&](const std::vector<char>& mask) {
        double v = 0.0;
        for (int t = 0; t < mesh.num_triangles(); ++t)
            if (mask[t]) v += weights[t];
        return v;
    };
    double weight_mass = 0.0;
    for (double w : weights) weight_mass += std::abs(w);

    // Fall back to the best single triangle when the plain problem returns a
    // set without positive integral (e.g. the empty set).
    if (cur.subset.empty() || integral(cur.mask) <= 0.0) {
        int best = -1;
        for (int t = 0; t < mesh.num_triangles(); ++t)
            if (weights[t] > 0.0 && (best < 0 || weights[t] > weights[best])) best = t;
        cur.subset = {best};
        cur.mask = subset_mask(mesh, cur.subset);
    }

    double per = perimeter_mask(mesh, cur.mask);
    if (per == 0.0) {
        res.subset = cur.subset;
        res.ratio = std::numeric_limits<double>::infinity();
        res.degenerate = true;
        res.converged = true;
        return res;
    }
    double ratio = integral(cur.mask) / per;
    res.subset = cur.subset;
    res.ratio = ratio;

    for (int it = 0; it < max_iter; ++it) {
        double alpha = 1.0 / ratio; // = Per(E_l) / int_{E_l} c
        std::vector<double> scaled(weights.size());
        for (size_t i = 0; i < weights.size(); ++i) scaled[i] = alpha * weights[i];
        // Minimal tie-break: zero-energy sets (e.g. the whole domain once the
        // dual variable has zero mean) would otherwise pad the minimizer and
        // dilute its ratio.
        CutSolution next =
            solve_mincut(mesh, scaled, MaxFlowAlg::boykov_kolmogorov, CutTieBreak::minimal);
        ++res.cuts;

        if (next.subset.empty()) {
            // No set beats the empty one at this alpha: g(alpha) = 0 at the
            // fixed-point resolution, the current best set attains the
            // maximal ratio.
            res.converged = true;
            return res;
        }
        double next_int = integral(next.mask);
        double next_per = perimeter_mask(mesh, next.mask);
        if (next_per == 0.0) {
            if (next_int > 1e-9 * weight_mass) {
                // Whole-domain maximizer with genuinely positive mass: the
                // ratio is unbounded.
                res.subset = next.subset;
                res.ratio = std::numeric_limits<double>::infinity();
                res.degenerate = true;
                res.converged = true;
                return res;
            }
            // Zero-mean rounding noise promoted the whole domain; we are at
            // the resolution floor.
            res.converged = true;
            return res;
        }
        double next_ratio = next_int / next_per;
        if (!(next_ratio > res.ratio * (1.0 + 1e-14))) {
            // Dinkelbach strictly improves the ratio until optimal; no
            // improvement means the fixed-point resolution is reached.
            res.converged = true;
            return res;
        }
        res.ratio = next_ratio;
        res.subset = next.subset;
        // g(alpha) = min_E [Per - alpha int c] <= 0; zero certifies optimality.
        double g = next_per - alpha * next_int;
        if (g >= -tol * (1.0 + next_per) ||
            std::abs(next_ratio - ratio) <= tol * (1.0 + std::abs(ratio))) {
            res.converged = true;
            return res;
        }
        ratio = next_ratio;
    }
    return res; // max_iter exceeded, best found so far, converged = false
}

// Debug dump of the cut graph in DIMACS max-flow format.
inline void dump_cut_graph_dimacs(std::ostream& out, const TriMesh& mesh,
                                  std::span<const double> weights)
{
    CutGraphScaling s = scale_cut_weights(mesh, weights);
    const int nt = mesh.num_triangles();
    int arcs = 0;
    for (std::int64_t w : s.weight)
        if (w != 0) ++arcs;
    arcs += 2 * static_cast<int>(mesh.interior_edges.size());

    // DIMACS node ids are 1-based; source = nt+1, sink = nt+2.
    out << "p max " << nt + 2 << " " << arcs << "\n";
    out << "n " << nt + 1 << " s\n";
    out << "n " << nt + 2 << " t\n";
    for (size_t e = 0; e < mesh.interior_edges.size(); ++e) {
        const auto& edge = mesh.interior_edges[e];
        out << "a " << edge.left + 1 << " " << edge.right + 1 << " " << s.length[e] << "\n";
        out << "a " << edge.right + 1 << " " << edge.left + 1 << " " << s.length[e] << "\n";
    }
    for (int t = 0; t < nt; ++t) {
        if (s.weight[t] > 0)
            out << "a " << t + 1 << " " << nt + 2 << " " << s.weight[t] << "\n";
        else if (s.weight[t] < 0)
            out << "a " << nt + 1 << " " << t + 1 << " " << -s.weight[t] << "\n";
    }
}

} // namespace tvfcgcg

#endif
