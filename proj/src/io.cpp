#include "sso/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace sso {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

namespace {

std::string format_double_17(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (ec != std::errc()) throw std::runtime_error("format_double_17: conversion failed");
    return std::string(buf, ptr);
}

} // namespace

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("atomic_write_text: cannot open " + tmp.string());
        os << content;
        os.flush();
        if (!os) throw std::runtime_error("atomic_write_text: write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw std::runtime_error("atomic_write_text: rename to " + path.string() +
                                 " failed: " + ec.message());
    }
}

std::string grid_csv(const GridFunction& f) {
    const Grid& grid = f.grid();
    std::string out;
    out.reserve(static_cast<size_t>(grid.size()) * 24);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (i > 0) out += ',';
            out += format_double_17(f.at(i, j));
        }
        out += '\n';
    }
    return out;
}

void write_grid_csv(const GridFunction& f, const std::filesystem::path& path) {
    atomic_write_text(path, grid_csv(f));
}

GridFunction read_grid_csv(const Grid& grid, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_grid_csv: cannot open " + path.string());
    GridFunction f(grid);
    std::string line;
    int j = 0;
    while (std::getline(is, line)) {
        if (line.empty() && j == grid.ny) break;
        if (j >= grid.ny) {
            throw std::runtime_error("read_grid_csv: " + path.string() + " has more than " +
                                     std::to_string(grid.ny) + " rows");
        }
        std::stringstream ss(line);
        std::string cell;
        int i = 0;
        while (std::getline(ss, cell, ',')) {
            if (i >= grid.nx) {
                throw std::runtime_error("read_grid_csv: row " + std::to_string(j) +
                                         " has more than " + std::to_string(grid.nx) + " columns");
            }
            try {
                size_t pos = 0;
                f.at(i, j) = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw std::runtime_error("read_grid_csv: unparsable value '" + cell + "' at row " +
                                         std::to_string(j) + " column " + std::to_string(i));
            }
            ++i;
        }
        if (i != grid.nx) {
            throw std::runtime_error("read_grid_csv: row " + std::to_string(j) + " has " +
                                     std::to_string(i) + " columns, expected " +
                                     std::to_string(grid.nx));
        }
        ++j;
    }
    if (j != grid.ny) {
        throw std::runtime_error("read_grid_csv: " + path.string() + " has " + std::to_string(j) +
                                 " rows, expected " + std::to_string(grid.ny));
    }
    return GridFunction(grid, std::vector<double>(f.values().begin(), f.values().end()));
}

std::string heatmap_pgm(const GridFunction& f) {
    const Grid& grid = f.grid();
    double lo = f[0];
    double hi = f[0];
    for (double v : f.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    std::string out = "P2\n# min " + format_double(lo) + " max " + format_double(hi) + "\n" +
                      std::to_string(grid.nx) + " " + std::to_string(grid.ny) + "\n255\n";
    const double range = hi - lo;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            int pixel = 128;
            if (range > 0.0) {
                pixel = static_cast<int>(std::lround(255.0 * (f.at(i, j) - lo) / range));
                pixel = std::clamp(pixel, 0, 255);
            }
            if (i > 0) out += ' ';
            out += std::to_string(pixel);
        }
        out += '\n';
    }
    return out;
}

void render_heatmap(const GridFunction& f, const std::filesystem::path& path) {
    atomic_write_text(path, heatmap_pgm(f));
}

void write_matrix_dump(const SparseSym& A, const std::filesystem::path& path) {
    std::ostringstream os;
    A.dump_coordinate(os);
    atomic_write_text(path, os.str());
}

} // namespace sso
