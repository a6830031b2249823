#include "twf/export.hpp"

#include "twf/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

namespace twf {

std::string format_double(double v)
{
    if (!std::isfinite(v))
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc())
        throw Error("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

namespace {

std::ofstream open_for_write(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out)
        throw Error("write to '" + path + "' failed");
}

} // namespace

void write_field_csv(std::ostream& out, const Field& field, const Grid& grid)
{
    require_on_grid(field, grid, "write_field_csv");
    out << "y,z,value\n";
    for (Index n = 0; n < grid.num_nodes(); ++n)
        out << format_double(grid.y(n)) << ',' << format_double(grid.z(n)) << ','
            << format_double(field[n]) << '\n';
}

void write_field_csv(const std::string& path, const Field& field, const Grid& grid)
{
    std::ofstream out = open_for_write(path);
    write_field_csv(out, field, grid);
    finish(out, path);
}

void write_field_vtk(std::ostream& out, const Field& field, const Grid& grid,
                     std::string_view name)
{
    require_on_grid(field, grid, "write_field_vtk");
    if (name.empty() || name.find_first_of(" \t\n") != std::string_view::npos)
        throw InvalidInput("VTK array names must be non-empty and contain no whitespace");
    out << "# vtk DataFile Version 3.0\n";
    out << "travelling wave field " << name << '\n';
    out << "ASCII\n";
    out << "DATASET STRUCTURED_GRID\n";
    out << "DIMENSIONS " << grid.nx() + 1 << ' ' << grid.nz() + 1 << " 1\n";
    out << "POINTS " << grid.num_nodes() << " double\n";
    for (Index n = 0; n < grid.num_nodes(); ++n)
        out << format_double(grid.y(n)) << ' ' << format_double(grid.z(n)) << " 0\n";
    out << "POINT_DATA " << grid.num_nodes() << '\n';
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (Index n = 0; n < grid.num_nodes(); ++n)
        out << format_double(field[n]) << '\n';
}

void write_field_vtk(const std::string& path, const Field& field, const Grid& grid,
                     std::string_view name)
{
    std::ofstream out = open_for_write(path);
    write_field_vtk(out, field, grid, name);
    finish(out, path);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != header_.size())
        throw InvalidInput("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
    return *this;
}

void CsvTable::write(std::ostream& out) const
{
    const auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
}

void CsvTable::write(const std::string& path) const
{
    std::ofstream out = open_for_write(path);
    write(out);
    finish(out, path);
}

std::string cell(double v) { return format_double(v); }
std::string cell(long long v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

std::string cell(std::string_view v)
{
    if (v.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(v);
    std::string out = "\"";
    for (char ch : v) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + '"';
}

} // namespace twf
