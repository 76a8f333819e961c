#ifndef TVFCGCG_MESH_IO_HPP
#define TVFCGCG_MESH_IO_HPP

// Text serialization of meshes and fields.
//
// Mesh file:   TRIMESH v1 / V <count> / "x y" lines / T <count> / "i j k" lines
// Field file:  P0FIELD v1 <count>  or  P1FIELD v1 <count>, one value per line
//
// Coordinates and values are written with 17 significant digits so doubles
// round-trip bitwise.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "mesh.hpp"

namespace tvfcgcg {

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, int line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_number(line)
    {
    }
    int line_number;
};

namespace detail {

inline std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class LineReader {
public:
    LineReader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

    // Next non-empty line; throws if the stream ends.
    std::string next(const std::string& expect)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return line;
        }
        throw ParseError(path_, line_ + 1, "unexpected end of file, expected " + expect);
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, line_, what); }
    int line() const { return line_; }

private:
    std::istream& in_;
    std::string path_;
    int line_ = 0;
};

inline int parse_count(LineReader& rd, const std::string& line, char tag)
{
    std::istringstream ss(line);
    std::string head;
    long count = -1;
    if (!(ss >> head >> count) || head != std::string(1, tag) || count < 0)
        rd.fail("expected '" + std::string(1, tag) + " <count>'");
    return static_cast<int>(count);
}

} // namespace detail

inline void save_mesh(std::ostream& out, const TriMesh& mesh)
{
    out << "TRIMESH v1\n";
    out << "V " << mesh.num_vertices() << "\n";
    for (const auto& v : mesh.vertices)
        out << detail::fmt_double(v[0]) << " " << detail::fmt_double(v[1]) << "\n";
    out << "T " << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

inline void save_mesh(const std::string& path, const TriMesh& mesh)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_mesh(out, mesh);
}

inline TriMesh load_mesh(std::istream& in, const std::string& path = "<stream>")
{
    detail::LineReader rd(in, path);
    if (rd.next("header") != "TRIMESH v1") rd.fail("expected header 'TRIMESH v1'");

    int nv = detail::parse_count(rd, rd.next("vertex count"), 'V');
    std::vector<std::array<double, 2>> vertices(nv);
    for (int i = 0; i < nv; ++i) {
        std::istringstream ss(rd.next("vertex coordinates"));
        if (!(ss >> vertices[i][0] >> vertices[i][1])) rd.fail("malformed vertex line");
    }

    int nt = detail::parse_count(rd, rd.next("triangle count"), 'T');
    std::vector<std::array<int, 3>> triangles(nt);
    for (int i = 0; i < nt; ++i) {
        std::istringstream ss(rd.next("triangle indices"));
        if (!(ss >> triangles[i][0] >> triangles[i][1] >> triangles[i][2]))
            rd.fail("malformed triangle line");
    }
    try {
        return build_tri_mesh(std::move(vertices), std::move(triangles));
    } catch (const std::runtime_error& err) {
        throw ParseError(path, rd.line(), err.what());
    }
}

inline TriMesh load_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_mesh(in, path);
}

namespace detail {

inline void save_values(std::ostream& out, const char* kind, const Eigen::VectorXd& values)
{
    out << kind << " v1 " << values.size() << "\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) out << fmt_double(values[i]) << "\n";
}

inline Eigen::VectorXd load_values(std::istream& in, const char* kind, const std::string& path)
{
    LineReader rd(in, path);
    std::istringstream ss(rd.next("header"));
    std::string head, version;
    long count = -1;
    if (!(ss >> head >> version >> count) || head != kind || version != "v1" || count < 0)
        rd.fail(std::string("expected header '") + kind + " v1 <count>'");
    Eigen::VectorXd values(count);
    for (long i = 0; i < count; ++i) {
        std::istringstream vs(rd.next("field value"));
        if (!(vs >> values[i])) rd.fail("malformed value line");
    }
    return values;
}

} // namespace detail

inline void save_field(std::ostream& out, const P0Field& f) { detail::save_values(out, "P0FIELD", f.values); }
inline void save_field(std::ostream& out, const P1Field& f) { detail::save_values(out, "P1FIELD", f.values); }

template <class Field>
inline void save_field(const std::string& path, const Field& f)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_field(out, f);
}

inline P0Field load_p0_field(std::istream& in, const std::string& path = "<stream>")
{
    return {detail::load_values(in, "P0FIELD", path)};
}

inline P1Field load_p1_field(std::istream& in, const std::string& path = "<stream>")
{
    return {detail::load_values(in, "P1FIELD", path)};
}

inline P0Field load_p0_field(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_p0_field(in, path);
}

inline P1Field load_p1_field(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_p1_field(in, path);
}

} // namespace tvfcgcg

#endif
