#pragma once

// Deterministic CSV tables: fixed "%.17g" formatting, fixed column order,
// version header "# singular-sl v1".

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "singsl/errors.hpp"

namespace singsl {

inline constexpr const char* kCsvHeader = "# singular-sl v1";

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // one vector per name

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

    const std::vector<double>& at(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return columns[i];
        throw Error("CSV column not found: " + name);
    }
};

inline std::string to_csv(const CsvTable& table) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < table.names.size(); ++i)
        out << (i ? "," : "") << table.names[i];
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            out << (i ? "," : "") << format_double(table.columns[i][r]);
        out << '\n';
    }
    return out.str();
}

inline void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f << to_csv(table);
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open: " + path);
    CsvTable table;
    std::string line;
    bool have_names = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string cell;
        if (!have_names) {
            while (std::getline(ss, cell, ',')) table.names.push_back(cell);
            table.columns.resize(table.names.size());
            have_names = true;
            continue;
        }
        std::size_t i = 0;
        while (std::getline(ss, cell, ',') && i < table.columns.size())
            table.columns[i++].push_back(std::stod(cell));
    }
    return table;
}

}  // namespace singsl
