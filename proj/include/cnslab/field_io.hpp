// SPDX-License-Identifier: Apache-2.0
//
// Binary field snapshots: one text header line
//   dim N rank repr component_count
// followed by little-endian float64 payload, row-major (last axis fastest),
// component by component. Spectral payloads interleave re,im per coefficient.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cnslab/field.hpp"

namespace cnslab {

inline void write_snapshot(std::ostream& os, const GridField& f) {
    os << f.grid().dim() << ' ' << f.grid().points_per_axis() << ' ' << to_string(f.rank()) << ' '
       << to_string(f.repr()) << ' ' << f.components() << '\n';
    for (int c = 0; c < f.components(); ++c) {
        if (f.repr() == Repr::physical) {
            const auto& d = f.real_data(c);
            os.write(reinterpret_cast<const char*>(d.data()),
                     static_cast<std::streamsize>(d.size() * sizeof(double)));
        } else {
            const auto& d = f.spec_data(c);
            os.write(reinterpret_cast<const char*>(d.data()),
                     static_cast<std::streamsize>(d.size() * 2 * sizeof(double)));
        }
    }
}

inline GridField read_snapshot(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("snapshot: missing header");
    std::istringstream hs(line);
    int dim = 0, n = 0, nc = 0;
    std::string rank_s, repr_s;
    hs >> dim >> n >> rank_s >> repr_s >> nc;
    if (!hs) throw std::runtime_error("snapshot: malformed header: " + line);
    Rank rank = rank_s == "scalar" ? Rank::scalar : rank_s == "vector" ? Rank::vector : Rank::matrix;
    Repr repr = repr_s == "physical" ? Repr::physical : Repr::spectral;
    TorusGrid grid(dim, n);
    GridField f(grid, rank, repr);
    if (nc != f.components()) throw std::runtime_error("snapshot: component count mismatch");
    for (int c = 0; c < nc; ++c) {
        if (repr == Repr::physical) {
            auto& d = f.real_data(c);
            is.read(reinterpret_cast<char*>(d.data()),
                    static_cast<std::streamsize>(d.size() * sizeof(double)));
        } else {
            auto& d = f.spec_data(c);
            is.read(reinterpret_cast<char*>(d.data()),
                    static_cast<std::streamsize>(d.size() * 2 * sizeof(double)));
        }
        if (!is) throw std::runtime_error("snapshot: truncated payload");
    }
    return f;
}

inline void save_snapshot(const std::string& path, const GridField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path);
    write_snapshot(os, f);
}

inline GridField load_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    return read_snapshot(is);
}

}  // namespace cnslab
