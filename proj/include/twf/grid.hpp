#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <vector>

namespace twf {

using Index = Eigen::Index;

enum BoundaryTag : unsigned {
    Bottom = 1u << 0, ///< z = 0
    Top = 1u << 1,    ///< z = H
    Left = 1u << 2,   ///< y = 0
    Right = 1u << 3,  ///< y = L
};

struct GridShape {
    double L = 0.0;
    double H = 0.0;
    Index nx = 0;
    Index nz = 0;
    friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Uniform triangulation of [0, L] x [0, H].
///
/// Nodes are numbered row by row: node(i, j) = j * (nx + 1) + i with i the
/// column (y direction) and j the row (z direction). Every cell is split by
/// one diagonal; the orientation alternates with the column parity so that for
/// even nx the mesh maps onto itself under y -> L - y.
class Grid {
public:
    Grid(double L, double H, Index nx, Index nz);

    const GridShape& shape() const noexcept { return shape_; }
    double L() const noexcept { return shape_.L; }
    double H() const noexcept { return shape_.H; }
    Index nx() const noexcept { return shape_.nx; }
    Index nz() const noexcept { return shape_.nz; }
    double hy() const noexcept { return shape_.L / static_cast<double>(shape_.nx); }
    double hz() const noexcept { return shape_.H / static_cast<double>(shape_.nz); }

    Index num_nodes() const noexcept { return (shape_.nx + 1) * (shape_.nz + 1); }
    Index num_triangles() const noexcept { return static_cast<Index>(triangles_.size()); }

    Index node(Index i, Index j) const noexcept { return j * (shape_.nx + 1) + i; }
    Index column(Index n) const noexcept { return n % (shape_.nx + 1); }
    Index row(Index n) const noexcept { return n / (shape_.nx + 1); }
    double y(Index n) const noexcept;
    double z(Index n) const noexcept;

    unsigned tags(Index n) const noexcept { return tags_[static_cast<std::size_t>(n)]; }
    bool on(Index n, BoundaryTag tag) const noexcept { return (tags(n) & tag) != 0u; }

    const std::array<Index, 3>& triangle(Index t) const noexcept
    {
        return triangles_[static_cast<std::size_t>(t)];
    }
    double signed_area(Index t) const noexcept;

    /// Node index of the mirror image under y -> L - y.
    Index reflect(Index n) const noexcept { return node(shape_.nx - column(n), row(n)); }
    /// True when the triangulation itself is invariant under the reflection.
    bool reflection_symmetric() const noexcept { return shape_.nx % 2 == 0; }

    std::vector<Index> row_nodes(Index j) const;
    std::vector<Index> bottom_nodes() const { return row_nodes(0); }
    std::vector<Index> top_nodes() const { return row_nodes(shape_.nz); }

private:
    GridShape shape_;
    std::vector<unsigned> tags_;
    std::vector<std::array<Index, 3>> triangles_;
};

Grid build_grid(double L, double H, Index nx, Index nz);

/// Nodal scalar function on a grid.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& grid, double fill = 0.0);
    Field(const Grid& grid, Eigen::VectorXd values);

    const GridShape& shape() const noexcept { return shape_; }
    Index size() const noexcept { return values_.size(); }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    Eigen::VectorXd& values() noexcept { return values_; }
    double operator[](Index n) const { return values_[n]; }
    double& operator[](Index n) { return values_[n]; }

    bool matches(const Grid& grid) const noexcept { return shape_ == grid.shape(); }
    bool all_finite() const noexcept { return values_.allFinite(); }

private:
    GridShape shape_;
    Eigen::VectorXd values_;
};

/// Throws InvalidInput unless the field lives on the grid.
void require_on_grid(const Field& f, const Grid& grid, const char* what);

} // namespace twf
