#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "flockkit/errors.hpp"
#include "flockkit/grid.hpp"

namespace flockkit::sim {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comma-separated table with a header row; numbers printed with %.17g.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
        : CsvWriter(path, std::vector<std::string>(header)) {}

    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path), width_(header.size()) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
        for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != width_) throw std::logic_error("csv: row width differs from header");
        for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << fmt17(values[k]);
        out_ << '\n';
    }

private:
    std::ofstream out_;
    std::size_t width_;
};

/// Long-format snapshot: one row per cell with columns x, coord, value.
inline void write_snapshot(const std::filesystem::path& path, const Field& field) {
    CsvWriter w(path, {"x", "coord", "value"});
    const auto& grid = field.grid;
    for (std::size_t i = 0; i < grid.nx; ++i) {
        for (std::size_t j = 0; j < grid.nxi; ++j) w.row({grid.x(i), grid.xi(j), field(i, j)});
    }
}

} // namespace flockkit::sim
