#ifndef TVFCGCG_MESH_HPP
#define TVFCGCG_MESH_HPP

// Triangular meshes of the square domain (-1,1)^2, P0/P1 field containers,
// discrete perimeter and total variation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tvfcgcg {

// Sorted list of triangle indices.
using TriSet = std::vector<int>;

struct InteriorEdge {
    double length;
    int left;   // adjacent triangle with the smaller index
    int right;  // adjacent triangle with the larger index
    int v0, v1; // endpoint vertices
};

struct BoundaryEdge {
    double length;
    int tri;
    int v0, v1;
};

struct TriMesh {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles; // CCW vertex indices
    std::vector<InteriorEdge> interior_edges;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<double> areas;
    // Per triangle: (neighbor triangle, interior edge index).
    std::vector<std::vector<std::pair<int, int>>> dual_adjacency;
    std::vector<char> boundary_vertex;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const
    {
        return static_cast<int>(interior_edges.size() + boundary_edges.size());
    }
};

struct P0Field {
    Eigen::VectorXd values; // one value per triangle
};

struct P1Field {
    Eigen::VectorXd values; // one value per vertex
};

inline double signed_area(const std::array<double, 2>& a,
                          const std::array<double, 2>& b,
                          const std::array<double, 2>& c)
{
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

namespace detail {

inline double edge_length(const std::array<double, 2>& a, const std::array<double, 2>& b)
{
    return std::hypot(b[0] - a[0], b[1] - a[1]);
}

} // namespace detail

// Derives edges, areas and the dual graph from vertices + triangles.
// Throws std::runtime_error on non-manifold connectivity or nonpositive areas.
inline TriMesh build_tri_mesh(std::vector<std::array<double, 2>> vertices,
                              std::vector<std::array<int, 3>> triangles)
{
    TriMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);

    const int nv = mesh.num_vertices();
    const int nt = mesh.num_triangles();
    mesh.areas.resize(nt);
    mesh.dual_adjacency.assign(nt, {});
    mesh.boundary_vertex.assign(nv, 0);

    for (int t = 0; t < nt; ++t) {
        for (int vi : mesh.triangles[t]) {
            if (vi < 0 || vi >= nv)
                throw std::runtime_error("triangle " + std::to_string(t) +
                                         " references invalid vertex " + std::to_string(vi));
        }
        const auto& tri = mesh.triangles[t];
        double a = signed_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                               mesh.vertices[tri[2]]);
        if (!(a > 0.0))
            throw std::runtime_error("triangle " + std::to_string(t) +
                                     " has nonpositive area " + std::to_string(a));
        mesh.areas[t] = a;
    }

    // Collect triangle incidences per undirected vertex pair.
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
        }
    }

    for (const auto& [key, tris] : edge_tris) {
        double len = detail::edge_length(mesh.vertices[key.first], mesh.vertices[key.second]);
        if (!(len > 0.0))
            throw std::runtime_error("zero-length edge between vertices " +
                                     std::to_string(key.first) + " and " +
                                     std::to_string(key.second));
        if (tris.size() == 2) {
            InteriorEdge edge;
            edge.length = len;
            edge.left = std::min(tris[0], tris[1]);
            edge.right = std::max(tris[0], tris[1]);
            edge.v0 = key.first;
            edge.v1 = key.second;
            int idx = static_cast<int>(mesh.interior_edges.size());
            mesh.interior_edges.push_back(edge);
            mesh.dual_adjacency[edge.left].push_back({edge.right, idx});
            mesh.dual_adjacency[edge.right].push_back({edge.left, idx});
        } else if (tris.size() == 1) {
            mesh.boundary_edges.push_back({len, tris[0], key.first, key.second});
            mesh.boundary_vertex[key.first] = 1;
            mesh.boundary_vertex[key.second] = 1;
        } else {
            throw std::runtime_error("edge shared by " + std::to_string(tris.size()) +
                                     " triangles (non-manifold mesh)");
        }
    }
    return mesh;
}

namespace detail {

// Grid coordinate -1 + 2i/n, mirrored so that coord(n-i) == -coord(i) bitwise.
inline double grid_coord(int i, int n)
{
    if (2 * i == n) return 0.0;
    if (2 * i < n) return -1.0 + 2.0 * static_cast<double>(i) / n;
    return -grid_coord(n - i, n);
}

// Cell-center coordinate -1 + (2i+1)/n with the same exact mirror symmetry.
inline double center_coord(int i, int n)
{
    if (2 * i + 1 == n) return 0.0;
    if (2 * i + 1 < n) return -1.0 + (2.0 * i + 1.0) / n;
    return -center_coord(n - 1 - i, n);
}

} // namespace detail

// Crisscross triangulation of (-1,1)^2 with n x n cells, 4 triangles per cell.
// Interior vertices are perturbed by at most jitter*(2/n); perturbations are
// mirrored across both axes so the mesh maps to itself under (x,y) -> (-x,y)
// and (x,y) -> (x,-y) exactly. jitter = 0 gives the structured mesh.
inline TriMesh generate_square_mesh(int n, double jitter, std::uint64_t seed)
{
    if (n < 1) throw std::invalid_argument("subdivision count must be >= 1");
    if (!(jitter >= 0.0 && jitter <= 0.3))
        throw std::invalid_argument("jitter must lie in [0, 0.3]");

    const int nvg = (n + 1) * (n + 1); // grid vertices
    auto grid_id = [n](int i, int j) { return j * (n + 1) + i; };
    auto center_id = [n, nvg](int i, int j) { return nvg + j * n + i; };

    std::vector<std::array<double, 2>> base(nvg + n * n);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            base[grid_id(i, j)] = {detail::grid_coord(i, n), detail::grid_coord(j, n)};
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            base[center_id(i, j)] = {detail::center_coord(i, n), detail::center_coord(j, n)};

    std::vector<std::array<int, 3>> tris;
    tris.reserve(4 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int a = grid_id(i, j), b = grid_id(i + 1, j);
            int c = grid_id(i + 1, j + 1), d = grid_id(i, j + 1);
            int m = center_id(i, j);
            tris.push_back({a, b, m});
            tris.push_back({b, c, m});
            tris.push_back({c, d, m});
            tris.push_back({d, a, m});
        }
    }

    std::vector<std::array<double, 2>> coords = base;
    if (jitter > 0.0) {
        const double delta = jitter * (2.0 / n);

        // One perturbation per mirror orbit; members get it with flipped signs.
        // Orbit members: (sel_i, sel_j) where sel picks i or its mirror.
        struct Orbit {
            std::vector<std::pair<int, std::array<double, 2>>> members; // vertex, signs
            std::array<double, 2> draw{0.0, 0.0};
        };
        std::vector<Orbit> orbits;

        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);

        auto push_orbit = [&](auto id_of, int i, int j, int mi, int mj, bool on_x_axis,
                              bool on_y_axis) {
            Orbit orb;
            double dx = 0.0, dy = 0.0;
            if (on_y_axis && on_x_axis) {
                // pinned to the origin by symmetry
            } else if (on_y_axis) {
                dy = uni(rng) * delta;
            } else if (on_x_axis) {
                dx = uni(rng) * delta;
            } else {
                do {
                    dx = uni(rng);
                    dy = uni(rng);
                } while (dx * dx + dy * dy > 1.0);
                dx *= delta;
                dy *= delta;
            }
            orb.draw = {dx, dy};
            std::vector<std::pair<int, double>> is = {{i, 1.0}};
            if (mi != i) is.push_back({mi, -1.0});
            std::vector<std::pair<int, double>> js = {{j, 1.0}};
            if (mj != j) js.push_back({mj, -1.0});
            for (auto [jj, sy] : js)
                for (auto [ii, sx] : is)
                    orb.members.push_back({id_of(ii, jj), {sx, sy}});
            orbits.push_back(std::move(orb));
        };

        // Interior grid vertices, orbit representatives in the lower-left quadrant.
        for (int j = 1; j <= n / 2; ++j)
            for (int i = 1; i <= n / 2; ++i)
                push_orbit(grid_id, i, j, n - i, n - j, 2 * j == n, 2 * i == n);
        // Cell centers (always interior).
        for (int j = 0; 2 * j + 1 <= n; ++j)
            for (int i = 0; 2 * i + 1 <= n; ++i)
                push_orbit(center_id, i, j, n - 1 - i, n - 1 - j, 2 * j + 1 == n,
                           2 * i + 1 == n);

        // Shrink draws of orbits incident to near-degenerate triangles until
        // all areas stay safely positive; terminates since scale -> 0 recovers
        // the structured mesh.
        std::vector<double> orbit_scale(orbits.size(), 1.0);
        std::vector<int> vertex_orbit(coords.size(), -1);
        for (size_t o = 0; o < orbits.size(); ++o)
            for (const auto& [v, signs] : orbits[o].members) vertex_orbit[v] = static_cast<int>(o);

        const double area_min = 0.05 * (1.0 / (n * static_cast<double>(n)));
        for (int pass = 0; pass < 64; ++pass) {
            coords = base;
            for (size_t o = 0; o < orbits.size(); ++o)
                for (const auto& [v, signs] : orbits[o].members) {
                    coords[v][0] += signs[0] * orbits[o].draw[0] * orbit_scale[o];
                    coords[v][1] += signs[1] * orbits[o].draw[1] * orbit_scale[o];
                }
            bool ok = true;
            for (const auto& tri : tris) {
                double a = signed_area(coords[tri[0]], coords[tri[1]], coords[tri[2]]);
                if (a <= area_min) {
                    ok = false;
                    for (int v : tri)
                        if (vertex_orbit[v] >= 0) orbit_scale[vertex_orbit[v]] *= 0.5;
                }
            }
            if (ok) break;
        }
    }

    return build_tri_mesh(std::move(coords), std::move(tris));
}

// Relative perimeter Per(E, Omega): total length of interior edges with exactly
// one incident triangle in the subset. Edges on the domain boundary are free.
inline double perimeter_mask(const TriMesh& mesh, const std::vector<char>& in_subset)
{
    double per = 0.0;
    for (const auto& e : mesh.interior_edges)
        if (in_subset[e.left] != in_subset[e.right]) per += e.length;
    return per;
}

inline std::vector<char> subset_mask(const TriMesh& mesh, const TriSet& subset)
{
    std::vector<char> mask(mesh.num_triangles(), 0);
    for (int t : subset) {
        if (t < 0 || t >= mesh.num_triangles())
            throw std::out_of_range("triangle index " + std::to_string(t) +
                                    " outside mesh");
        mask[t] = 1;
    }
    return mask;
}

inline double perimeter(const TriMesh& mesh, const TriSet& subset)
{
    return perimeter_mask(mesh, subset_mask(mesh, subset));
}

// Isotropic discrete total variation of a piecewise constant field:
// sum over interior edges of length * |jump|.
inline double tv_p0(const TriMesh& mesh, const P0Field& u)
{
    if (u.values.size() != mesh.num_triangles())
        throw std::invalid_argument("P0 field size does not match triangle count");
    double tv = 0.0;
    for (const auto& e : mesh.interior_edges)
        tv += e.length * std::abs(u.values[e.left] - u.values[e.right]);
    return tv;
}

} // namespace tvfcgcg

#endif
