#pragma once

#include "twf/grid.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <utility>
#include <vector>

namespace twf {

/// Compressed sparse row matrix.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// P1 assembly on a fixed grid.
///
/// All operators share the nodal adjacency pattern, so the assembler keeps
/// that pattern together with the slot of every local entry and reassembles
/// by writing straight into the value array. Element coefficients are the
/// arithmetic mean of the three vertex values. Summation order is fixed by
/// the element numbering, which makes assembly deterministic.
class Assembler {
public:
    explicit Assembler(const Grid& grid);

    const Grid& grid() const noexcept { return *grid_; }

    /// Full-node pattern with all values zero.
    SparseMatrix zero_matrix() const { return pattern_; }

    /// into += scale * sum_e wbar_e * int phi_i phi_j
    void add_mass(SparseMatrix& into, const Eigen::VectorXd& weight, double scale = 1.0) const;
    /// into += scale * sum_e abar_e * int grad phi_i . grad phi_j
    void add_stiffness(SparseMatrix& into, const Eigen::VectorXd& coeff, double scale = 1.0) const;
    /// into(i, j) += scale * int (d_z phi_j) phi_i
    void add_dz(SparseMatrix& into, double scale = 1.0) const;

    /// Entries int abar g d_z phi_i.
    Eigen::VectorXd gravity_load(const Eigen::VectorXd& coeff, double g) const;
    /// Entries int phi_i (row sums of the unit mass matrix).
    const Eigen::VectorXd& lumped_mass() const noexcept { return lumped_; }

    double area(Index t) const noexcept { return area_[static_cast<std::size_t>(t)]; }
    /// Gradient (d_y, d_z) of the local basis function k on triangle t.
    const std::array<double, 2>& grad(Index t, int k) const noexcept
    {
        return grads_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    }
    /// Elementwise gradient (d_y, d_z) of a P1 function.
    std::array<double, 2> element_gradient(Index t, const Eigen::VectorXd& u) const;

private:
    double element_mean(Index t, const Eigen::VectorXd& v) const;
    void check_pattern(const SparseMatrix& m) const;

    const Grid* grid_;
    SparseMatrix pattern_;
    std::vector<double> area_;
    std::vector<std::array<std::array<double, 2>, 3>> grads_;
    std::vector<std::array<int, 9>> slots_;
    Eigen::VectorXd lumped_;
};

SparseMatrix assemble_mass(const Grid& grid, const Field& weight);
SparseMatrix assemble_mass(const Grid& grid, double weight);
SparseMatrix assemble_stiffness(const Grid& grid, const Field& coeff);
SparseMatrix assemble_dz(const Grid& grid);
Eigen::VectorXd assemble_gravity_load(const Grid& grid, const Field& coeff, double g);

using DirichletValues = std::vector<std::pair<Index, double>>;

/// Node to system-index map. Dirichlet nodes map to kEliminated; with a
/// merged top every Top node shares one index.
class DofMap {
public:
    static constexpr Index kEliminated = -1;

    DofMap(const Grid& grid, const std::vector<Index>& dirichlet_nodes, bool merge_top);

    Index operator()(Index node) const noexcept { return map_[static_cast<std::size_t>(node)]; }
    Index size() const noexcept { return size_; }
    Index top_dof() const noexcept { return top_dof_; }
    Index num_nodes() const noexcept { return static_cast<Index>(map_.size()); }
    const std::vector<Index>& map() const noexcept { return map_; }

private:
    std::vector<Index> map_;
    Index size_ = 0;
    Index top_dof_ = kEliminated;
};

struct LinearSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<Index> dof_of_node; ///< DofMap::kEliminated for Dirichlet nodes
    Index top_dof = DofMap::kEliminated;
    Eigen::VectorXd dirichlet; ///< full-node values, only read at eliminated nodes
    bool symmetric = false;
};

/// Expand a reduced solution back to nodal values.
Eigen::VectorXd expand_solution(const LinearSystem& sys, const Eigen::VectorXd& x);

/// Reduction of full-node systems that share one sparsity pattern.
///
/// Dirichlet rows are dropped and their columns folded into the right-hand
/// side; merged Top rows and columns are summed into one index which also
/// receives the top load.
class SystemReducer {
public:
    SystemReducer(const SparseMatrix& pattern, DofMap dofs);

    const DofMap& dofs() const noexcept { return dofs_; }

    void reduce(const SparseMatrix& full, const Eigen::VectorXd& rhs,
                const Eigen::VectorXd& dirichlet_full, double top_load, LinearSystem& out) const;
    LinearSystem reduce(const SparseMatrix& full, const Eigen::VectorXd& rhs,
                        const Eigen::VectorXd& dirichlet_full, double top_load) const;

    /// Sum rows of a full-node vector into system indices.
    Eigen::VectorXd restrict_vector(const Eigen::VectorXd& full) const;

private:
    DofMap dofs_;
    SparseMatrix reduced_pattern_;
    std::vector<int> slot_;   ///< full nnz -> reduced nnz, -1 when row or column is eliminated
    Index full_nnz_ = 0;
};

LinearSystem reduce_system(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                           const Grid& grid, const DirichletValues& dirichlet, bool merge_top,
                           double top_load);

} // namespace twf
