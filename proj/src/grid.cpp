#include "twf/grid.hpp"

#include "twf/errors.hpp"

#include <cmath>
#include <string>

namespace twf {

Grid::Grid(double L, double H, Index nx, Index nz) : shape_{L, H, nx, nz}
{
    if (!(L > 0.0) || !(H > 0.0) || !std::isfinite(L) || !std::isfinite(H))
        throw InvalidInput("grid extents must be positive and finite");
    if (nx < 1 || nz < 1)
        throw InvalidInput("grid needs at least one cell per direction");

    tags_.assign(static_cast<std::size_t>(num_nodes()), 0u);
    for (Index j = 0; j <= nz; ++j) {
        for (Index i = 0; i <= nx; ++i) {
            unsigned t = 0u;
            if (j == 0)
                t |= Bottom;
            if (j == nz)
                t |= Top;
            if (i == 0)
                t |= Left;
            if (i == nx)
                t |= Right;
            tags_[static_cast<std::size_t>(node(i, j))] = t;
        }
    }

    triangles_.reserve(static_cast<std::size_t>(2 * nx * nz));
    for (Index j = 0; j < nz; ++j) {
        for (Index i = 0; i < nx; ++i) {
            const Index n00 = node(i, j);
            const Index n10 = node(i + 1, j);
            const Index n01 = node(i, j + 1);
            const Index n11 = node(i + 1, j + 1);
            if (i % 2 == 0) {
                triangles_.push_back({n00, n10, n11});
                triangles_.push_back({n00, n11, n01});
            } else {
                triangles_.push_back({n00, n10, n01});
                triangles_.push_back({n10, n11, n01});
            }
        }
    }
}

double Grid::y(Index n) const noexcept
{
    const Index i = column(n);
    return i == shape_.nx ? shape_.L : static_cast<double>(i) * hy();
}

double Grid::z(Index n) const noexcept
{
    const Index j = row(n);
    return j == shape_.nz ? shape_.H : static_cast<double>(j) * hz();
}

double Grid::signed_area(Index t) const noexcept
{
    const auto& tri = triangle(t);
    const double y0 = y(tri[0]), z0 = z(tri[0]);
    return 0.5 * ((y(tri[1]) - y0) * (z(tri[2]) - z0) - (y(tri[2]) - y0) * (z(tri[1]) - z0));
}

std::vector<Index> Grid::row_nodes(Index j) const
{
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(shape_.nx + 1));
    for (Index i = 0; i <= shape_.nx; ++i)
        out.push_back(node(i, j));
    return out;
}

Grid build_grid(double L, double H, Index nx, Index nz) { return Grid(L, H, nx, nz); }

Field::Field(const Grid& grid, double fill)
    : shape_(grid.shape()), values_(Eigen::VectorXd::Constant(grid.num_nodes(), fill))
{
    if (!std::isfinite(fill))
        throw InvalidInput("field fill value must be finite");
}

Field::Field(const Grid& grid, Eigen::VectorXd values)
    : shape_(grid.shape()), values_(std::move(values))
{
    if (values_.size() != grid.num_nodes())
        throw InvalidInput("field size " + std::to_string(values_.size()) +
                           " does not match node count " + std::to_string(grid.num_nodes()));
    if (!values_.allFinite())
        throw InvalidInput("field contains non-finite values");
}

void require_on_grid(const Field& f, const Grid& grid, const char* what)
{
    if (!f.matches(grid) || f.size() != grid.num_nodes())
        throw InvalidInput(std::string(what) + ": field does not live on this grid");
}

} // namespace twf
