#ifndef TVFCGCG_CONFIG_HPP
#define TVFCGCG_CONFIG_HPP

// Experiment configuration: TOML-style sections of key = value pairs.
//
//   [mesh]      n, jitter, seed
//   [problem]   variant, alpha, y_d, T, steps
//   [solver]    tolerance, max_iter, mode, include_omega
//   [output]    directory, emit_fields
//
// y_d forms: "indicator cx cy w h", "forward-of <p0field file>",
// "field <p1field file>", or "phantom" (built-in nested-disc control whose
// forward image serves as target, the stand-in for the parabolic example).

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "fcgcg.hpp"
#include "mesh_io.hpp"

namespace tvfcgcg {

struct YdSpec {
    enum class Kind { indicator, forward_of, field, phantom } kind = Kind::indicator;
    double cx = 0.0, cy = 0.0, w = 1.0, h = 1.0; // indicator box
    std::string path;                            // forward_of / field
};

struct ExperimentConfig {
    struct {
        int n = 0;
        double jitter = 0.0;
        std::uint64_t seed = 0;
    } mesh;
    struct {
        PdeVariant variant = PdeVariant::elliptic;
        double alpha = 1e-4;
        YdSpec y_d;
        double horizon = 0.02;
        int steps = 9;
    } problem;
    struct {
        double tolerance = 1e-10;
        int max_iter = 500;
        InsertionMode mode = InsertionMode::onecut;
        bool include_omega = false;
    } solver;
    struct {
        std::string directory = "out";
        bool emit_fields = false;
    } output;
};

namespace detail {

struct ConfigEntry {
    std::string value;
    int line;
};

inline std::string trim(const std::string& s)
{
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s)
{
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

class ConfigMap {
public:
    ConfigMap(std::istream& in, std::string path) : path_(std::move(path))
    {
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ParseError(path_, lineno, "malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError(path_, lineno, "expected 'key = value'");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ParseError(path_, lineno, "expected 'key = value'");
            entries_[section + "." + key] = {unquote(value), lineno};
        }
    }

    std::optional<ConfigEntry> get(const std::string& key) const
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    ConfigEntry require(const std::string& key) const
    {
        auto e = get(key);
        if (!e) throw std::runtime_error(path_ + ": missing required key '" + key + "'");
        return *e;
    }

    double number(const std::string& key, double fallback) const
    {
        auto e = get(key);
        if (!e) return fallback;
        return parse_number(key, *e);
    }

    double parse_number(const std::string& key, const ConfigEntry& e) const
    {
        std::istringstream ss(e.value);
        double v;
        char rest;
        if (!(ss >> v) || (ss >> rest))
            throw ParseError(path_, e.line, "key '" + key + "' is not a number");
        return v;
    }

    bool boolean(const std::string& key, bool fallback) const
    {
        auto e = get(key);
        if (!e) return fallback;
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        throw ParseError(path_, e->line, "key '" + key + "' must be true or false");
    }

    std::string text(const std::string& key, const std::string& fallback) const
    {
        auto e = get(key);
        return e ? e->value : fallback;
    }

    void check_unused() const
    {
        for (const auto& [key, e] : entries_)
            if (!used_.count(key))
                throw ParseError(path_, e.line, "unknown key '" + key + "'");
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::map<std::string, ConfigEntry> entries_;
    mutable std::set<std::string> used_;
};

[[noreturn]] inline void out_of_range(const ConfigMap& cm, const std::string& key,
                                      const std::string& bound)
{
    throw std::runtime_error(cm.path() + ": key '" + key + "' out of range, requires " + bound);
}

} // namespace detail

inline YdSpec parse_yd_spec(const std::string& text)
{
    std::istringstream ss(text);
    std::string kind;
    ss >> kind;
    YdSpec yd;
    if (kind == "indicator") {
        yd.kind = YdSpec::Kind::indicator;
        if (!(ss >> yd.cx >> yd.cy >> yd.w >> yd.h))
            throw std::runtime_error("y_d indicator requires 'indicator cx cy w h'");
        if (!(yd.w > 0.0) || !(yd.h > 0.0))
            throw std::runtime_error("y_d indicator requires positive width and height");
    } else if (kind == "forward-of") {
        yd.kind = YdSpec::Kind::forward_of;
        if (!(ss >> yd.path)) throw std::runtime_error("y_d forward-of requires a file path");
    } else if (kind == "field") {
        yd.kind = YdSpec::Kind::field;
        if (!(ss >> yd.path)) throw std::runtime_error("y_d field requires a file path");
    } else if (kind == "phantom") {
        yd.kind = YdSpec::Kind::phantom;
    } else {
        throw std::runtime_error("unknown y_d form '" + kind +
                                 "' (expected indicator, forward-of, field or phantom)");
    }
    return yd;
}

inline std::string yd_spec_text(const YdSpec& yd)
{
    switch (yd.kind) {
    case YdSpec::Kind::indicator: {
        std::ostringstream ss;
        ss << "indicator " << detail::fmt_double(yd.cx) << " " << detail::fmt_double(yd.cy)
           << " " << detail::fmt_double(yd.w) << " " << detail::fmt_double(yd.h);
        return ss.str();
    }
    case YdSpec::Kind::forward_of:
        return "forward-of " + yd.path;
    case YdSpec::Kind::field:
        return "field " + yd.path;
    case YdSpec::Kind::phantom:
        return "phantom";
    }
    return {};
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& path = "<stream>")
{
    detail::ConfigMap cm(in, path);
    ExperimentConfig cfg;

    cfg.mesh.n = static_cast<int>(cm.parse_number("mesh.n", cm.require("mesh.n")));
    if (cfg.mesh.n < 1) detail::out_of_range(cm, "mesh.n", "n >= 1");
    cfg.mesh.jitter = cm.number("mesh.jitter", 0.0);
    if (!(cfg.mesh.jitter >= 0.0 && cfg.mesh.jitter <= 0.3))
        detail::out_of_range(cm, "mesh.jitter", "0 <= jitter <= 0.3");
    cfg.mesh.seed = static_cast<std::uint64_t>(cm.number("mesh.seed", 0.0));

    std::string variant = cm.text("problem.variant", "");
    if (variant == "elliptic")
        cfg.problem.variant = PdeVariant::elliptic;
    else if (variant == "parabolic")
        cfg.problem.variant = PdeVariant::parabolic;
    else if (variant.empty())
        throw std::runtime_error(path + ": missing required key 'problem.variant'");
    else
        throw std::runtime_error(path + ": problem.variant must be elliptic or parabolic");

    cfg.problem.alpha = cm.number("problem.alpha", 1e-4);
    if (!(cfg.problem.alpha > 0.0)) detail::out_of_range(cm, "problem.alpha", "alpha > 0");
    cfg.problem.y_d = parse_yd_spec(cm.require("problem.y_d").value);
    cfg.problem.horizon = cm.number("problem.T", 0.02);
    if (!(cfg.problem.horizon > 0.0)) detail::out_of_range(cm, "problem.T", "T > 0");
    cfg.problem.steps = static_cast<int>(cm.number("problem.steps", 9.0));
    if (cfg.problem.steps < 1) detail::out_of_range(cm, "problem.steps", "steps >= 1");

    cfg.solver.tolerance = cm.number("solver.tolerance", 1e-10);
    if (!(cfg.solver.tolerance > 0.0))
        detail::out_of_range(cm, "solver.tolerance", "tolerance > 0");
    cfg.solver.max_iter = static_cast<int>(cm.number("solver.max_iter", 500.0));
    if (cfg.solver.max_iter < 1) detail::out_of_range(cm, "solver.max_iter", "max_iter >= 1");
    std::string mode = cm.text("solver.mode", "onecut");
    if (mode == "onecut")
        cfg.solver.mode = InsertionMode::onecut;
    else if (mode == "dinkelbach")
        cfg.solver.mode = InsertionMode::dinkelbach;
    else
        throw std::runtime_error(path + ": solver.mode must be onecut or dinkelbach");
    cfg.solver.include_omega = cm.boolean("solver.include_omega", false);

    cfg.output.directory = cm.text("output.directory", "out");
    cfg.output.emit_fields = cm.boolean("output.emit_fields", false);

    cm.check_unused();
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return parse_config(in, path);
}

// Canonical form: fixed section and key order, 17-digit numbers. Satisfies
// serialize(parse(x)) == serialize(parse(serialize(parse(x)))).
inline std::string serialize_config(const ExperimentConfig& cfg)
{
    std::ostringstream out;
    out << "[mesh]\n";
    out << "n = " << cfg.mesh.n << "\n";
    out << "jitter = " << detail::fmt_double(cfg.mesh.jitter) << "\n";
    out << "seed = " << cfg.mesh.seed << "\n\n";
    out << "[problem]\n";
    out << "variant = \"" << (cfg.problem.variant == PdeVariant::elliptic ? "elliptic" : "parabolic")
        << "\"\n";
    out << "alpha = " << detail::fmt_double(cfg.problem.alpha) << "\n";
    out << "y_d = \"" << yd_spec_text(cfg.problem.y_d) << "\"\n";
    out << "T = " << detail::fmt_double(cfg.problem.horizon) << "\n";
    out << "steps = " << cfg.problem.steps << "\n\n";
    out << "[solver]\n";
    out << "tolerance = " << detail::fmt_double(cfg.solver.tolerance) << "\n";
    out << "max_iter = " << cfg.solver.max_iter << "\n";
    out << "mode = \"" << (cfg.solver.mode == InsertionMode::onecut ? "onecut" : "dinkelbach")
        << "\"\n";
    out << "include_omega = " << (cfg.solver.include_omega ? "true" : "false") << "\n\n";
    out << "[output]\n";
    out << "directory = \"" << cfg.output.directory << "\"\n";
    out << "emit_fields = " << (cfg.output.emit_fields ? "true" : "false") << "\n";
    return out.str();
}

// Built-in piecewise constant toy control: two nested discs, values 2 inside
// the inner disc, 1 in the annulus, 0 outside; evaluated at centroids.
inline P0Field phantom_control(const TriMesh& mesh)
{
    P0Field u{Eigen::VectorXd::Zero(mesh.num_triangles())};
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        double cx = (mesh.vertices[tri[0]][0] + mesh.vertices[tri[1]][0] +
                     mesh.vertices[tri[2]][0]) /
                    3.0;
        double cy = (mesh.vertices[tri[0]][1] + mesh.vertices[tri[1]][1] +
                     mesh.vertices[tri[2]][1]) /
                    3.0;
        double r = std::hypot(cx, cy);
        if (r < 0.35)
            u.values[t] = 2.0;
        else if (r < 0.7)
            u.values[t] = 1.0;
    }
    return u;
}

inline P1Field indicator_target(const TriMesh& mesh, const YdSpec& yd)
{
    P1Field f{Eigen::VectorXd::Zero(mesh.num_vertices())};
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        double x = mesh.vertices[v][0], y = mesh.vertices[v][1];
        if (std::abs(x - yd.cx) < 0.5 * yd.w && std::abs(y - yd.cy) < 0.5 * yd.h)
            f.values[v] = 1.0;
    }
    return f;
}

struct BuiltProblem {
    PdeProblem problem;
    std::optional<P0Field> control; // the toy control when y_d derives from one
};

// Resolves the y_d specification against a mesh and assembles the problem.
inline BuiltProblem build_problem(const TriMesh& mesh, const ExperimentConfig& cfg)
{
    BuiltProblem built{make_pde_problem(mesh, cfg.problem.variant, cfg.problem.alpha,
                                        P1Field{Eigen::VectorXd::Zero(mesh.num_vertices())},
                                        cfg.problem.horizon, cfg.problem.steps,
                                        cfg.solver.include_omega),
                       std::nullopt};
    // Signed controls are realized through the free-sign Omega coefficient.
    built.problem.nonneg_constraint = !cfg.solver.include_omega;
    const YdSpec& yd = cfg.problem.y_d;
    switch (yd.kind) {
    case YdSpec::Kind::indicator:
        built.problem.y_d = indicator_target(mesh, yd);
        break;
    case YdSpec::Kind::field: {
        P1Field f = load_p1_field(yd.path);
        if (f.values.size() != mesh.num_vertices())
            throw std::runtime_error("y_d field size does not match the mesh");
        built.problem.y_d = std::move(f);
        break;
    }
    case YdSpec::Kind::forward_of: {
        P0Field u = load_p0_field(yd.path);
        if (u.values.size() != mesh.num_triangles())
            throw std::runtime_error("y_d control size does not match the mesh");
        built.problem.y_d = forward(built.problem, u);
        built.control = std::move(u);
        break;
    }
    case YdSpec::Kind::phantom: {
        P0Field u = phantom_control(mesh);
        built.problem.y_d = forward(built.problem, u);
        built.control = std::move(u);
        break;
    }
    }
    return built;
}

} // namespace tvfcgcg

#endif
