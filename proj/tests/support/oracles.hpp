#ifndef TVFCGCG_TEST_ORACLES_HPP
#define TVFCGCG_TEST_ORACLES_HPP

// Independent reference implementations used to generate expected values in
// the tests. These deliberately avoid the code paths they check: subset
// enumeration instead of max-flow, vertex-sharing flood fill instead of the
// dual-graph decomposition, projected gradient instead of the active-set QP.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "tvfcgcg/curvature_cut.hpp"
#include "tvfcgcg/mesh.hpp"

namespace oracles {

using tvfcgcg::TriMesh;
using tvfcgcg::TriSet;

struct EnumeratedCut {
    std::int64_t energy_fixed;
    std::uint32_t maximal_mask; // union of all minimizing subsets
    std::vector<std::uint32_t> minimizers;
};

// Exhaustive minimization of the fixed-point cut energy over all 2^n subsets.
inline EnumeratedCut enumerate_mincut(const TriMesh& mesh, const tvfcgcg::CutGraphScaling& s)
{
    const int nt = mesh.num_triangles();
    EnumeratedCut out{0, 0, {}};
    std::vector<char> mask(nt, 0);
    for (std::uint32_t m = 0; m < (1u << nt); ++m) {
        for (int t = 0; t < nt; ++t) mask[t] = (m >> t) & 1u;
        std::int64_t e = tvfcgcg::cut_energy_fixed(mesh, s, mask);
        if (e < out.energy_fixed) {
            out.energy_fixed = e;
            out.minimizers.clear();
        }
        if (e == out.energy_fixed) out.minimizers.push_back(m);
    }
    for (std::uint32_t m : out.minimizers) out.maximal_mask |= m;
    return out;
}

// Edge-connected components computed from scratch: triangles are adjacent iff
// they share two vertices.
inline std::vector<TriSet> flood_fill_components(const TriMesh& mesh, const TriSet& subset)
{
    std::map<std::pair<int, int>, std::vector<int>> edge_owner;
    std::set<int> in(subset.begin(), subset.end());
    for (int t : subset) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            edge_owner[{std::min(a, b), std::max(a, b)}].push_back(t);
        }
    }
    std::map<int, std::vector<int>> adj;
    for (const auto& [key, owners] : edge_owner)
        if (owners.size() == 2) {
            adj[owners[0]].push_back(owners[1]);
            adj[owners[1]].push_back(owners[0]);
        }

    std::vector<TriSet> comps;
    std::set<int> seen;
    for (int start : subset) {
        if (seen.count(start)) continue;
        TriSet comp;
        std::vector<int> stack{start};
        seen.insert(start);
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            comp.push_back(t);
            for (int nb : adj[t])
                if (!seen.count(nb)) {
                    seen.insert(nb);
                    stack.push_back(nb);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

struct RatioOptimum {
    std::uint32_t mask = 0;
    double ratio = -std::numeric_limits<double>::infinity();
    bool unbounded = false; // a positive-integral set with zero perimeter exists
};

// Exhaustive maximization of int_E c / Per(E,Omega) over nonempty subsets.
inline RatioOptimum enumerate_ratio_max(const TriMesh& mesh, const std::vector<double>& c)
{
    const int nt = mesh.num_triangles();
    RatioOptimum out;
    std::vector<char> mask(nt, 0);
    for (std::uint32_t m = 1; m < (1u << nt); ++m) {
        double integral = 0.0;
        for (int t = 0; t < nt; ++t) {
            mask[t] = (m >> t) & 1u;
            if (mask[t]) integral += c[t];
        }
        if (integral <= 0.0) continue;
        double per = tvfcgcg::perimeter_mask(mesh, mask);
        if (per == 0.0) {
            out.unbounded = true;
            out.mask = m;
            out.ratio = std::numeric_limits<double>::infinity();
            continue;
        }
        double r = integral / per;
        if (!out.unbounded && r > out.ratio) {
            out.ratio = r;
            out.mask = m;
        }
    }
    return out;
}

// Long-horizon projected gradient for
//   min 1/(2a)(x'Gx - 2b'x) + pi'x  s.t. x_j >= 0 (j != free index).
inline Eigen::VectorXd projected_gradient_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                                             const Eigen::VectorXd& pi, double alpha,
                                             int free_index = -1, double tol = 1e-12,
                                             long max_iter = 4000000)
{
    const int n = static_cast<int>(b.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    double lip = es.eigenvalues().maxCoeff() / alpha;
    double step = 1.0 / std::max(lip, 1e-30);
    for (long it = 0; it < max_iter; ++it) {
        Eigen::VectorXd grad = (G * x - b) / alpha + pi;
        Eigen::VectorXd next = x - step * grad;
        for (int j = 0; j < n; ++j)
            if (j != free_index && next[j] < 0.0) next[j] = 0.0;
        double move = (next - x).norm();
        x = next;
        if (move <= tol * step * (1.0 + x.norm())) break;
    }
    return x;
}

// Degree-5 exact quadrature on a triangle (7 points), for L2 errors against
// smooth reference solutions.
template <class F>
double quad_tri(const TriMesh& mesh, int t, F&& f)
{
    static const double w0 = 9.0 / 40.0;
    static const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    static const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    const double bary[7][3] = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1},
                               {b1, b1, a1},                {a2, b2, b2}, {b2, a2, b2},
                               {b2, b2, a2}};
    const double wq[7] = {w0, w1, w1, w1, w2, w2, w2};
    const auto& tri = mesh.triangles[t];
    double sum = 0.0;
    for (int q = 0; q < 7; ++q) {
        double x = 0.0, y = 0.0;
        for (int i = 0; i < 3; ++i) {
            x += bary[q][i] * mesh.vertices[tri[i]][0];
            y += bary[q][i] * mesh.vertices[tri[i]][1];
        }
        sum += wq[q] * f(x, y, bary[q]);
    }
    return sum * mesh.areas[t];
}

inline std::vector<double> random_weights(const TriMesh& mesh, std::mt19937_64& rng,
                                          double scale = 10.0)
{
    std::uniform_real_distribution<double> uni(-scale, scale);
    std::vector<double> w(mesh.num_triangles());
    for (double& v : w) v = uni(rng);
    return w;
}

inline TriSet random_subset(int num_triangles, std::mt19937_64& rng, double p = 0.5)
{
    std::bernoulli_distribution coin(p);
    TriSet s;
    for (int t = 0; t < num_triangles; ++t)
        if (coin(rng)) s.push_back(t);
    return s;
}

} // namespace oracles

#endif
