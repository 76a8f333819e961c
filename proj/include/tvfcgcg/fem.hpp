#ifndef TVFCGCG_FEM_HPP
#define TVFCGCG_FEM_HPP

// P1 finite elements on the triangle mesh: stiffness, mass and P0-load
// matrices, homogeneous Dirichlet elimination, and the control-to-observation
// operators of the two test problems
//
//   elliptic:   -Delta y = u,                y = 0 on the boundary
//   parabolic:  dy/dt - Delta y + y/2 = 0,   y(0) = u,  observe y(T)
//
// together with their exact discrete adjoints, returned as per-triangle
// integrals of the adjoint state (the weights of the cut problem).

#include <memory>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "mesh.hpp"

namespace tvfcgcg {

using SpMat = Eigen::SparseMatrix<double>;

struct FemAssembly {
    SpMat stiffness;  // vertex x vertex, no boundary conditions
    SpMat mass;       // vertex x vertex, consistent P1 mass
    SpMat load_p0;    // vertex x triangle, (load_p0)_{i,T} = int_T phi_i dx
    std::vector<char> boundary_vertex;
    std::vector<int> interior_of_vertex; // vertex -> interior dof index or -1
    std::vector<int> vertex_of_interior; // interior dof -> vertex
    SpMat stiffness_int; // interior block of stiffness (symmetric elimination)
    SpMat mass_int;      // interior block of mass

    int num_interior() const { return static_cast<int>(vertex_of_interior.size()); }
};

inline FemAssembly assemble(const TriMesh& mesh)
{
    const int nv = mesh.num_vertices();
    const int nt = mesh.num_triangles();

    std::vector<Eigen::Triplet<double>> ta, tm, tl;
    ta.reserve(9 * nt);
    tm.reserve(9 * nt);
    tl.reserve(3 * nt);

    for (int t = 0; t < nt; ++t) {
        if (mesh.areas[t] < 1e-14)
            throw std::runtime_error("assembly failed: triangle " + std::to_string(t) +
                                     " is degenerate (area " + std::to_string(mesh.areas[t]) +
                                     ")");
        const auto& tri = mesh.triangles[t];
        const auto& p0 = mesh.vertices[tri[0]];
        const auto& p1 = mesh.vertices[tri[1]];
        const auto& p2 = mesh.vertices[tri[2]];
        const double area = mesh.areas[t];

        // Gradients of the barycentric basis functions.
        double gx[3], gy[3];
        gx[0] = (p1[1] - p2[1]) / (2.0 * area);
        gy[0] = (p2[0] - p1[0]) / (2.0 * area);
        gx[1] = (p2[1] - p0[1]) / (2.0 * area);
        gy[1] = (p0[0] - p2[0]) / (2.0 * area);
        gx[2] = (p0[1] - p1[1]) / (2.0 * area);
        gy[2] = (p1[0] - p0[0]) / (2.0 * area);

        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                ta.emplace_back(tri[i], tri[j], area * (gx[i] * gx[j] + gy[i] * gy[j]));
                tm.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
            }
            tl.emplace_back(tri[i], t, area / 3.0);
        }
    }

    FemAssembly fem;
    fem.stiffness.resize(nv, nv);
    fem.stiffness.setFromTriplets(ta.begin(), ta.end());
    fem.mass.resize(nv, nv);
    fem.mass.setFromTriplets(tm.begin(), tm.end());
    fem.load_p0.resize(nv, nt);
    fem.load_p0.setFromTriplets(tl.begin(), tl.end());

    fem.boundary_vertex = mesh.boundary_vertex;
    fem.interior_of_vertex.assign(nv, -1);
    for (int v = 0; v < nv; ++v) {
        if (!fem.boundary_vertex[v]) {
            fem.interior_of_vertex[v] = static_cast<int>(fem.vertex_of_interior.size());
            fem.vertex_of_interior.push_back(v);
        }
    }

    const int ni = fem.num_interior();
    std::vector<Eigen::Triplet<double>> tai, tmi;
    for (int col = 0; col < nv; ++col) {
        int jc = fem.interior_of_vertex[col];
        if (jc < 0) continue;
        for (SpMat::InnerIterator it(fem.stiffness, col); it; ++it) {
            int jr = fem.interior_of_vertex[it.row()];
            if (jr >= 0) tai.emplace_back(jr, jc, it.value());
        }
        for (SpMat::InnerIterator it(fem.mass, col); it; ++it) {
            int jr = fem.interior_of_vertex[it.row()];
            if (jr >= 0) tmi.emplace_back(jr, jc, it.value());
        }
    }
    fem.stiffness_int.resize(ni, ni);
    fem.stiffness_int.setFromTriplets(tai.begin(), tai.end());
    fem.mass_int.resize(ni, ni);
    fem.mass_int.setFromTriplets(tmi.begin(), tmi.end());
    return fem;
}

enum class PdeVariant { elliptic, parabolic };

struct PdeProblem {
    PdeVariant variant;
    const TriMesh* mesh = nullptr;
    FemAssembly fem;
    double alpha = 1e-4;
    P1Field y_d;
    double horizon = 0.02; // parabolic end time T
    int steps = 9;         // parabolic implicit Euler steps N
    bool nonneg_constraint = true;
    bool include_omega = false;

    // Cholesky factorization of the elliptic operator (stiffness) or of the
    // parabolic step matrix S = M + tau (A + M/2); shared by forward and
    // adjoint solves.
    std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> solver;
    SpMat step_matrix;
};

inline PdeProblem make_pde_problem(const TriMesh& mesh, PdeVariant variant, double alpha,
                                   P1Field y_d, double horizon = 0.02, int steps = 9,
                                   bool include_omega = false)
{
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    PdeProblem pb;
    pb.variant = variant;
    pb.mesh = &mesh;
    pb.fem = assemble(mesh);
    pb.alpha = alpha;
    pb.include_omega = include_omega;
    if (y_d.values.size() != mesh.num_vertices())
        throw std::invalid_argument("y_d size does not match vertex count");
    pb.y_d = std::move(y_d);

    if (variant == PdeVariant::parabolic) {
        if (!(horizon > 0.0) || steps < 1)
            throw std::invalid_argument("parabolic problem requires T > 0 and N >= 1");
        pb.horizon = horizon;
        pb.steps = steps;
        double tau = horizon / steps;
        pb.step_matrix = pb.fem.mass_int + tau * (pb.fem.stiffness_int + 0.5 * pb.fem.mass_int);
    } else {
        pb.step_matrix = pb.fem.stiffness_int;
    }
    pb.solver = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
    pb.solver->compute(pb.step_matrix);
    if (pb.solver->info() != Eigen::Success)
        throw std::runtime_error("sparse factorization of the PDE operator failed");
    return pb;
}

namespace detail {

inline Eigen::VectorXd restrict_interior(const FemAssembly& fem, const Eigen::VectorXd& full)
{
    Eigen::VectorXd out(fem.num_interior());
    for (int i = 0; i < fem.num_interior(); ++i) out[i] = full[fem.vertex_of_interior[i]];
    return out;
}

inline Eigen::VectorXd scatter_interior(const FemAssembly& fem, const Eigen::VectorXd& interior,
                                        Eigen::Index nv)
{
    Eigen::VectorXd full = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < fem.num_interior(); ++i) full[fem.vertex_of_interior[i]] = interior[i];
    return full;
}

inline Eigen::VectorXd checked_solve(const PdeProblem& pb, const Eigen::VectorXd& rhs)
{
    Eigen::VectorXd x = pb.solver->solve(rhs);
    double rhs_norm = rhs.norm();
    double res = (pb.step_matrix * x - rhs).norm();
    if (!(res <= 1e-8 * (1.0 + rhs_norm)))
        throw std::runtime_error("linear solve did not converge, residual norm " +
                                 std::to_string(res));
    return x;
}

} // namespace detail

// Solves A_D y = M01 u with y = 0 on boundary vertices.
inline P1Field elliptic_forward(const PdeProblem& pb, const P0Field& u)
{
    if (pb.variant != PdeVariant::elliptic)
        throw std::logic_error("elliptic_forward called on non-elliptic problem");
    Eigen::VectorXd rhs = detail::restrict_interior(pb.fem, pb.fem.load_p0 * u.values);
    Eigen::VectorXd y = detail::checked_solve(pb, rhs);
    return {detail::scatter_interior(pb.fem, y, pb.mesh->num_vertices())};
}

// Solves A_D q = M z and returns the per-triangle integrals int_T q dx.
inline Eigen::VectorXd elliptic_adjoint_integrals(const PdeProblem& pb, const P1Field& z)
{
    if (pb.variant != PdeVariant::elliptic)
        throw std::logic_error("elliptic_adjoint_integrals called on non-elliptic problem");
    Eigen::VectorXd rhs = detail::restrict_interior(pb.fem, pb.fem.mass * z.values);
    Eigen::VectorXd q = detail::checked_solve(pb, rhs);
    Eigen::VectorXd q_full = detail::scatter_interior(pb.fem, q, pb.mesh->num_vertices());
    return pb.fem.load_p0.transpose() * q_full;
}

// Implicit Euler for dy/dt - Delta y + y/2 = 0 with weakly imposed initial
// data: S y^1 = M01 u, then S y^{n+1} = M y^n; returns y^N.
inline P1Field parabolic_forward(const PdeProblem& pb, const P0Field& u)
{
    if (pb.variant != PdeVariant::parabolic)
        throw std::logic_error("parabolic_forward called on non-parabolic problem");
    Eigen::VectorXd y = detail::checked_solve(
        pb, detail::restrict_interior(pb.fem, pb.fem.load_p0 * u.values));
    for (int n = 1; n < pb.steps; ++n) y = detail::checked_solve(pb, pb.fem.mass_int * y);
    return {detail::scatter_interior(pb.fem, y, pb.mesh->num_vertices())};
}

// Exact discrete adjoint of parabolic_forward: the backward sweep uses the
// same factorization since S is symmetric. Returns int_T q(0) dx per triangle.
inline Eigen::VectorXd parabolic_adjoint_integrals(const PdeProblem& pb, const P1Field& z)
{
    if (pb.variant != PdeVariant::parabolic)
        throw std::logic_error("parabolic_adjoint_integrals called on non-parabolic problem");
    Eigen::VectorXd q = detail::checked_solve(
        pb, detail::restrict_interior(pb.fem, pb.fem.mass * z.values));
    for (int n = 1; n < pb.steps; ++n) q = detail::checked_solve(pb, pb.fem.mass_int * q);
    Eigen::VectorXd q_full = detail::scatter_interior(pb.fem, q, pb.mesh->num_vertices());
    return pb.fem.load_p0.transpose() * q_full;
}

inline P1Field forward(const PdeProblem& pb, const P0Field& u)
{
    return pb.variant == PdeVariant::elliptic ? elliptic_forward(pb, u)
                                              : parabolic_forward(pb, u);
}

inline Eigen::VectorXd adjoint_integrals(const PdeProblem& pb, const P1Field& z)
{
    return pb.variant == PdeVariant::elliptic ? elliptic_adjoint_integrals(pb, z)
                                              : parabolic_adjoint_integrals(pb, z);
}

// L2 inner product of two P1 fields via the mass matrix. Accumulated over the
// lower triangle with symmetrized off-diagonal terms, so swapping the
// arguments gives the bitwise identical result.
inline double observation_inner(const PdeProblem& pb, const P1Field& a, const P1Field& b)
{
    const SpMat& M = pb.fem.mass;
    if (a.values.size() != M.rows() || b.values.size() != M.rows())
        throw std::invalid_argument("P1 field size does not match vertex count");
    double sum = 0.0;
    for (int col = 0; col < M.outerSize(); ++col) {
        for (SpMat::InnerIterator it(M, col); it; ++it) {
            if (it.row() < col) continue;
            if (it.row() == col)
                sum += it.value() * (a.values[col] * b.values[col]);
            else
                sum += it.value() * (a.values[it.row()] * b.values[col] +
                                     a.values[col] * b.values[it.row()]);
        }
    }
    return sum;
}

} // namespace tvfcgcg

#endif
