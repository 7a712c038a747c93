#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "neulab/grid.hpp"

/// File output used by the experiment runner: CSV tables and JSON documents,
/// all written atomically (temp file in the target directory, then rename)
/// and formatted deterministically so identical configs give identical bytes.

namespace neulab::io {

/// Shortest exact decimal form of a double ("%.17g" round-trips; trim it by
/// probing shorter precisions that still parse back to the same bits).
inline std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("write_text_atomic: cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write_text_atomic: short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Comma-separated table with one header row; decimal point is always '.'.
struct CsvTable {
    std::string header;
    std::vector<std::string> rows;

    explicit CsvTable(std::string header_) : header(std::move(header_)) {}

    template <typename... Cells>
    void add_row(const Cells&... cells) {
        std::string row;
        ((row += cell_text(cells), row += ','), ...);
        if (!row.empty()) row.pop_back();
        rows.push_back(std::move(row));
    }

    std::string str() const {
        std::string out = header;
        out += '\n';
        for (const auto& r : rows) {
            out += r;
            out += '\n';
        }
        return out;
    }

    void write(const std::filesystem::path& path) const { write_text_atomic(path, str()); }

private:
    static std::string cell_text(double v) { return format_double(v); }
    static std::string cell_text(int v) { return std::to_string(v); }
    static std::string cell_text(std::size_t v) { return std::to_string(v); }
    static std::string cell_text(bool v) { return v ? "true" : "false"; }
    static std::string cell_text(const std::string& s) { return s; }
    static std::string cell_text(const char* s) { return s; }
};

/// Samples as `x1[,x2],value` rows plus a JSON sidecar describing the grid.
inline void write_grid_function(const GridFunction& f, const std::filesystem::path& csv_path) {
    const Grid& g = f.grid;
    CsvTable table(g.dimension == 1 ? "x1,value" : "x1,x2,value");
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point p = g.point_at(i);
        if (g.dimension == 1) table.add_row(p[0], f.values[i]);
        else table.add_row(p[0], p[1], f.values[i]);
    }
    table.write(csv_path);
    nlohmann::json side;
    side["dimension"] = g.dimension;
    side["half_width"] = g.half_width;
    side["points_per_axis"] = g.points_per_axis;
    side["spacing"] = g.spacing();
    side["csv"] = csv_path.filename().string();
    std::filesystem::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    write_text_atomic(sidecar, side.dump(2) + "\n");
}

inline void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
    write_text_atomic(path, doc.dump(2) + "\n");
}

} // namespace neulab::io
