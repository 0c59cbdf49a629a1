// SPDX-License-Identifier: Apache-2.0
//
// Deterministic CSV emission: fixed shortest-round-trip formatting so that
// identical runs produce byte-identical reports.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cnslab {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::string header) { lines_.push_back(std::move(header)); }

    template <class... Ts>
    void row(const Ts&... cells) {
        std::string line;
        bool first = true;
        auto add = [&](const auto& c) {
            if (!first) line += ',';
            first = false;
            line += cell_to_string(c);
        };
        (add(cells), ...);
        lines_.push_back(std::move(line));
    }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (const auto& l : lines_) os << l << '\n';
    }

    std::string str() const {
        std::string out;
        for (const auto& l : lines_) {
            out += l;
            out += '\n';
        }
        return out;
    }

private:
    static std::string cell_to_string(const std::string& s) { return s; }
    static std::string cell_to_string(const char* s) { return s; }
    static std::string cell_to_string(double v) { return csv_num(v); }
    static std::string cell_to_string(int v) { return std::to_string(v); }
    static std::string cell_to_string(std::size_t v) { return std::to_string(v); }

    std::vector<std::string> lines_;
};

}  // namespace cnslab
