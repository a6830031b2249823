#pragma once

#include "twf/grid.hpp"

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace twf {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Header `y,z,value`, one row per node in node order (row by row from the
/// bottom).
void write_field_csv(std::ostream& out, const Field& field, const Grid& grid);
void write_field_csv(const std::string& path, const Field& field, const Grid& grid);

/// Legacy ASCII VTK, STRUCTURED_GRID with one POINT_DATA scalar array.
void write_field_vtk(std::ostream& out, const Field& field, const Grid& grid,
                     std::string_view name);
void write_field_vtk(const std::string& path, const Field& field, const Grid& grid,
                     std::string_view name);

/// Plain CSV table. Numbers go through format_double.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& add_row(std::vector<std::string> cells);
    std::size_t rows() const noexcept { return rows_.size(); }

    void write(std::ostream& out) const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(long long v);
std::string cell(int v);
std::string cell(bool v);
std::string cell(std::string_view v);

} // namespace twf
