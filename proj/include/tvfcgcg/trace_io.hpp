#ifndef TVFCGCG_TRACE_IO_HPP
#define TVFCGCG_TRACE_IO_HPP

// trace.csv / summary.json emission for solver runs.

#include <fstream>

#include <json.hpp>

#include "fcgcg.hpp"
#include "mesh_io.hpp"

namespace tvfcgcg {

inline void write_trace_csv(std::ostream& out, const SolverTrace& trace)
{
    out << "k,J,surrogate,j_k,n_components,active_size,pde_solves,cuts,wall_ms\n";
    for (const auto& r : trace.rows) {
        out << r.k << "," << detail::fmt_double(r.J) << "," << detail::fmt_double(r.surrogate)
            << "," << detail::fmt_double(r.j_k) << "," << r.n_components << "," << r.active_size
            << "," << r.pde_solves << "," << r.cuts << "," << detail::fmt_double(r.wall_ms)
            << "\n";
    }
}

inline void write_trace_csv(const std::string& path, const SolverTrace& trace)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_trace_csv(out, trace);
}

inline nlohmann::json summary_json(const SolverTrace& trace)
{
    return nlohmann::json{{"converged", trace.converged},
                          {"iterations", trace.iterations},
                          {"final_J", trace.final_J},
                          {"final_indicator", trace.final_indicator},
                          {"pde_solves", trace.pde_solves},
                          {"cuts", trace.cuts},
                          {"wall_ms", trace.wall_ms}};
}

inline void write_summary_json(const std::string& path, const SolverTrace& trace)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << summary_json(trace).dump(2) << "\n";
}

} // namespace tvfcgcg

#endif
