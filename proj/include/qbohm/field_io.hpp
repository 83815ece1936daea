#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qbohm/grid.hpp"

namespace qbohm::io {

/// 17 significant digits: lossless decimal round-trip for IEEE doubles.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::json grid_to_json(const GridSpec& g) {
    nlohmann::json j;
    j["dim"] = g.dim;
    j["boundary"] = g.boundary == Boundary::periodic ? "periodic" : "dirichlet";
    for (int a = 0; a < g.dim; ++a) {
        j["extent_min"].push_back(g.lo[a]);
        j["extent_max"].push_back(g.hi[a]);
        j["points"].push_back(g.n[a]);
    }
    return j;
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec g;
    g.dim = j.at("dim").get<int>();
    g.boundary = j.at("boundary").get<std::string>() == "periodic"
                     ? Boundary::periodic
                     : Boundary::dirichlet;
    for (int a = 0; a < g.dim; ++a) {
        g.lo[a] = j.at("extent_min").at(a).get<double>();
        g.hi[a] = j.at("extent_max").at(a).get<double>();
        g.n[a] = j.at("points").at(a).get<int>();
    }
    g.validate();
    return g;
}

namespace detail {

inline void write_rows(std::ostream& os, const GridSpec& g,
                       const std::function<std::string(std::size_t)>& payload) {
    if (g.dim == 1) {
        os << "x,re,im\n";
        for (int i = 0; i < g.n[0]; ++i)
            os << fmt(g.coord(0, i)) << ',' << payload(g.index(i)) << '\n';
    } else {
        os << "x,y,re,im\n";
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix)
                os << fmt(g.coord(0, ix)) << ',' << fmt(g.coord(1, iy)) << ','
                   << payload(g.index(ix, iy)) << '\n';
    }
}

} // namespace detail

/// One CSV row per node (coordinates, re, im) plus a JSON sidecar carrying
/// the GridSpec and field attributes.
inline void write_field(const ComplexField& f, const std::string& csv_path,
                        const std::string& sidecar_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    detail::write_rows(csv, f.spec, [&](std::size_t i) {
        return fmt(f.values[i].real()) + "," + fmt(f.values[i].imag());
    });
    nlohmann::json j;
    j["grid"] = grid_to_json(f.spec);
    j["kind"] = "complex";
    j["mass"] = f.mass;
    if (f.potential_ref) j["potential_ref"] = *f.potential_ref;
    j["normalized"] = f.normalized;
    std::ofstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot write " + sidecar_path);
    side << j.dump(2) << '\n';
}

inline void write_field(const RealField& f, const std::string& csv_path,
                        const std::string& sidecar_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    detail::write_rows(csv, f.spec, [&](std::size_t i) {
        return fmt(f.values[i]) + ",0";
    });
    nlohmann::json j;
    j["grid"] = grid_to_json(f.spec);
    j["kind"] = "real";
    std::ofstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot write " + sidecar_path);
    side << j.dump(2) << '\n';
}

inline ComplexField read_complex_field(const std::string& csv_path,
                                       const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot read " + sidecar_path);
    nlohmann::json j = nlohmann::json::parse(side);
    ComplexField f(grid_from_json(j.at("grid")));
    f.mass = j.value("mass", 1.0);
    if (j.contains("potential_ref"))
        f.potential_ref = j.at("potential_ref").get<std::string>();
    f.normalized = j.value("normalized", false);

    std::ifstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot read " + csv_path);
    std::string header;
    std::getline(csv, header);
    const int coord_cols = f.spec.dim;
    std::string line;
    std::size_t row = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        if (row >= f.values.size())
            throw std::runtime_error("field CSV has more rows than grid nodes");
        std::stringstream ss(line);
        std::string cell;
        double re = 0.0, im = 0.0;
        for (int c = 0; c < coord_cols + 2; ++c) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("field CSV: short row");
            if (c == coord_cols) re = std::strtod(cell.c_str(), nullptr);
            if (c == coord_cols + 1) im = std::strtod(cell.c_str(), nullptr);
        }
        f.values[row++] = cplx(re, im);
    }
    if (row != f.values.size())
        throw std::runtime_error("field CSV row count does not match grid");
    return f;
}

} // namespace qbohm::io
