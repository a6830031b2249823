#include "twf/fem.hpp"

#include "twf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twf {

namespace {

int find_slot(const SparseMatrix& m, Index row, Index col)
{
    const int* inner = m.innerIndexPtr();
    const int begin = m.outerIndexPtr()[row];
    const int end = m.outerIndexPtr()[row + 1];
    const int* it = std::lower_bound(inner + begin, inner + end, static_cast<int>(col));
    if (it == inner + end || *it != col)
        throw Error("sparsity pattern lookup failed");
    return static_cast<int>(it - inner);
}

} // namespace

Assembler::Assembler(const Grid& grid) : grid_(&grid)
{
    const Index n = grid.num_nodes();
    const Index nt = grid.num_triangles();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(9 * nt));
    area_.resize(static_cast<std::size_t>(nt));
    grads_.resize(static_cast<std::size_t>(nt));
    lumped_ = Eigen::VectorXd::Zero(n);

    for (Index t = 0; t < nt; ++t) {
        const auto& tri = grid.triangle(t);
        const double area = grid.signed_area(t);
        if (!(area > 0.0))
            throw Error("triangle with non-positive area in grid");
        area_[static_cast<std::size_t>(t)] = area;
        for (int k = 0; k < 3; ++k) {
            const Index a = tri[static_cast<std::size_t>((k + 1) % 3)];
            const Index b = tri[static_cast<std::size_t>((k + 2) % 3)];
            grads_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = {
                (grid.z(a) - grid.z(b)) / (2.0 * area),
                (grid.y(b) - grid.y(a)) / (2.0 * area),
            };
            lumped_[tri[static_cast<std::size_t>(k)]] += area / 3.0;
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                trip.emplace_back(tri[static_cast<std::size_t>(a)], tri[static_cast<std::size_t>(b)], 0.0);
    }

    pattern_.resize(n, n);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    slots_.resize(static_cast<std::size_t>(nt));
    for (Index t = 0; t < nt; ++t) {
        const auto& tri = grid.triangle(t);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                slots_[static_cast<std::size_t>(t)][static_cast<std::size_t>(3 * a + b)] =
                    find_slot(pattern_, tri[static_cast<std::size_t>(a)], tri[static_cast<std::size_t>(b)]);
    }
}

double Assembler::element_mean(Index t, const Eigen::VectorXd& v) const
{
    const auto& tri = grid_->triangle(t);
    return (v[tri[0]] + v[tri[1]] + v[tri[2]]) / 3.0;
}

void Assembler::check_pattern(const SparseMatrix& m) const
{
    if (m.rows() != pattern_.rows() || m.nonZeros() != pattern_.nonZeros() || !m.isCompressed())
        throw InvalidInput("matrix does not share the assembler's sparsity pattern");
}

void Assembler::add_mass(SparseMatrix& into, const Eigen::VectorXd& weight, double scale) const
{
    check_pattern(into);
    if (weight.size() != grid_->num_nodes())
        throw InvalidInput("mass weight size does not match node count");
    double* val = into.valuePtr();
    for (Index t = 0; t < grid_->num_triangles(); ++t) {
        const double w = scale * element_mean(t, weight) * area(t) / 12.0;
        const auto& s = slots_[static_cast<std::size_t>(t)];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                val[s[static_cast<std::size_t>(3 * a + b)]] += (a == b ? 2.0 : 1.0) * w;
    }
}

void Assembler::add_stiffness(SparseMatrix& into, const Eigen::VectorXd& coeff, double scale) const
{
    check_pattern(into);
    if (coeff.size() != grid_->num_nodes())
        throw InvalidInput("stiffness coefficient size does not match node count");
    double* val = into.valuePtr();
    for (Index t = 0; t < grid_->num_triangles(); ++t) {
        const double w = scale * element_mean(t, coeff) * area(t);
        const auto& g = grads_[static_cast<std::size_t>(t)];
        const auto& s = slots_[static_cast<std::size_t>(t)];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const auto& ga = g[static_cast<std::size_t>(a)];
                const auto& gb = g[static_cast<std::size_t>(b)];
                val[s[static_cast<std::size_t>(3 * a + b)]] += w * (ga[0] * gb[0] + ga[1] * gb[1]);
            }
    }
}

void Assembler::add_dz(SparseMatrix& into, double scale) const
{
    check_pattern(into);
    double* val = into.valuePtr();
    for (Index t = 0; t < grid_->num_triangles(); ++t) {
        const double w = scale * area(t) / 3.0;
        const auto& g = grads_[static_cast<std::size_t>(t)];
        const auto& s = slots_[static_cast<std::size_t>(t)];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                val[s[static_cast<std::size_t>(3 * a + b)]] += w * g[static_cast<std::size_t>(b)][1];
    }
}

Eigen::VectorXd Assembler::gravity_load(const Eigen::VectorXd& coeff, double g) const
{
    if (coeff.size() != grid_->num_nodes())
        throw InvalidInput("gravity coefficient size does not match node count");
    Eigen::VectorXd load = Eigen::VectorXd::Zero(grid_->num_nodes());
    if (g == 0.0)
        return load;
    for (Index t = 0; t < grid_->num_triangles(); ++t) {
        const double w = g * element_mean(t, coeff) * area(t);
        const auto& tri = grid_->triangle(t);
        const auto& gr = grads_[static_cast<std::size_t>(t)];
        for (int a = 0; a < 3; ++a)
            load[tri[static_cast<std::size_t>(a)]] += w * gr[static_cast<std::size_t>(a)][1];
    }
    return load;
}

std::array<double, 2> Assembler::element_gradient(Index t, const Eigen::VectorXd& u) const
{
    const auto& tri = grid_->triangle(t);
    const auto& g = grads_[static_cast<std::size_t>(t)];
    std::array<double, 2> out{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        const double v = u[tri[static_cast<std::size_t>(k)]];
        out[0] += v * g[static_cast<std::size_t>(k)][0];
        out[1] += v * g[static_cast<std::size_t>(k)][1];
    }
    return out;
}

SparseMatrix assemble_mass(const Grid& grid, const Field& weight)
{
    require_on_grid(weight, grid, "assemble_mass");
    Assembler asmb(grid);
    SparseMatrix m = asmb.zero_matrix();
    asmb.add_mass(m, weight.values());
    return m;
}

SparseMatrix assemble_mass(const Grid& grid, double weight)
{
    if (!std::isfinite(weight))
        throw InvalidInput("assemble_mass: weight must be finite");
    return assemble_mass(grid, Field(grid, weight));
}

SparseMatrix assemble_stiffness(const Grid& grid, const Field& coeff)
{
    require_on_grid(coeff, grid, "assemble_stiffness");
    if (!(coeff.values().minCoeff() > 0.0))
        throw InvalidInput("assemble_stiffness: coefficient must be positive at every node");
    Assembler asmb(grid);
    SparseMatrix m = asmb.zero_matrix();
    asmb.add_stiffness(m, coeff.values());
    return m;
}

SparseMatrix assemble_dz(const Grid& grid)
{
    Assembler asmb(grid);
    SparseMatrix m = asmb.zero_matrix();
    asmb.add_dz(m);
    return m;
}

Eigen::VectorXd assemble_gravity_load(const Grid& grid, const Field& coeff, double g)
{
    require_on_grid(coeff, grid, "assemble_gravity_load");
    return Assembler(grid).gravity_load(coeff.values(), g);
}

DofMap::DofMap(const Grid& grid, const std::vector<Index>& dirichlet_nodes, bool merge_top)
    : map_(static_cast<std::size_t>(grid.num_nodes()), 0)
{
    for (Index n : dirichlet_nodes) {
        if (n < 0 || n >= grid.num_nodes())
            throw InvalidInput("Dirichlet node index out of range");
        if (merge_top && grid.on(n, Top))
            throw InvalidInput("node " + std::to_string(n) +
                               " is both Dirichlet and part of the merged top");
        map_[static_cast<std::size_t>(n)] = kEliminated;
    }
    Index next = 0;
    for (Index n = 0; n < grid.num_nodes(); ++n) {
        auto& m = map_[static_cast<std::size_t>(n)];
        if (m == kEliminated)
            continue;
        if (merge_top && grid.on(n, Top)) {
            if (top_dof_ == kEliminated)
                top_dof_ = next++;
            m = top_dof_;
        } else {
            m = next++;
        }
    }
    size_ = next;
}

Eigen::VectorXd expand_solution(const LinearSystem& sys, const Eigen::VectorXd& x)
{
    const auto n = static_cast<Index>(sys.dof_of_node.size());
    Eigen::VectorXd full(n);
    for (Index i = 0; i < n; ++i) {
        const Index d = sys.dof_of_node[static_cast<std::size_t>(i)];
        full[i] = d == DofMap::kEliminated ? sys.dirichlet[i] : x[d];
    }
    return full;
}

SystemReducer::SystemReducer(const SparseMatrix& pattern, DofMap dofs) : dofs_(std::move(dofs))
{
    if (pattern.rows() != dofs_.num_nodes() || pattern.cols() != dofs_.num_nodes())
        throw InvalidInput("reduce_system: matrix size does not match node count");
    if (!pattern.isCompressed())
        throw InvalidInput("reduce_system: matrix must be compressed");

    full_nnz_ = pattern.nonZeros();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(full_nnz_));
    for (Index r = 0; r < pattern.rows(); ++r) {
        const Index R = dofs_(r);
        if (R == DofMap::kEliminated)
            continue;
        for (SparseMatrix::InnerIterator it(pattern, r); it; ++it) {
            const Index C = dofs_(it.col());
            if (C != DofMap::kEliminated)
                trip.emplace_back(R, C, 0.0);
        }
    }
    reduced_pattern_.resize(dofs_.size(), dofs_.size());
    reduced_pattern_.setFromTriplets(trip.begin(), trip.end());
    reduced_pattern_.makeCompressed();

    slot_.assign(static_cast<std::size_t>(full_nnz_), -1);
    for (Index r = 0; r < pattern.rows(); ++r) {
        const Index R = dofs_(r);
        if (R == DofMap::kEliminated)
            continue;
        for (int k = pattern.outerIndexPtr()[r]; k < pattern.outerIndexPtr()[r + 1]; ++k) {
            const Index C = dofs_(pattern.innerIndexPtr()[k]);
            if (C != DofMap::kEliminated)
                slot_[static_cast<std::size_t>(k)] = find_slot(reduced_pattern_, R, C);
        }
    }
}

void SystemReducer::reduce(const SparseMatrix& full, const Eigen::VectorXd& rhs,
                           const Eigen::VectorXd& dirichlet_full, double top_load,
                           LinearSystem& out) const
{
    if (full.nonZeros() != full_nnz_ || full.rows() != dofs_.num_nodes() || !full.isCompressed())
        throw InvalidInput("reduce_system: matrix does not share the reducer's pattern");
    if (rhs.size() != dofs_.num_nodes() || dirichlet_full.size() != dofs_.num_nodes())
        throw InvalidInput("reduce_system: vector size does not match node count");

    if (out.matrix.nonZeros() != reduced_pattern_.nonZeros() || out.matrix.rows() != dofs_.size())
        out.matrix = reduced_pattern_;
    std::fill_n(out.matrix.valuePtr(), out.matrix.nonZeros(), 0.0);
    out.rhs = Eigen::VectorXd::Zero(dofs_.size());

    double* rv = out.matrix.valuePtr();
    const double* fv = full.valuePtr();
    const int* inner = full.innerIndexPtr();
    const int* outer = full.outerIndexPtr();
    for (Index r = 0; r < full.rows(); ++r) {
        const Index R = dofs_(r);
        if (R == DofMap::kEliminated)
            continue;
        double acc = rhs[r];
        for (int k = outer[r]; k < outer[r + 1]; ++k) {
            const int slot = slot_[static_cast<std::size_t>(k)];
            if (slot >= 0)
                rv[slot] += fv[k];
            else
                acc -= fv[k] * dirichlet_full[inner[k]];
        }
        out.rhs[R] += acc;
    }
    if (dofs_.top_dof() != DofMap::kEliminated)
        out.rhs[dofs_.top_dof()] += top_load;

    out.dof_of_node = dofs_.map();
    out.top_dof = dofs_.top_dof();
    out.dirichlet = dirichlet_full;
}

LinearSystem SystemReducer::reduce(const SparseMatrix& full, const Eigen::VectorXd& rhs,
                                   const Eigen::VectorXd& dirichlet_full, double top_load) const
{
    LinearSystem out;
    reduce(full, rhs, dirichlet_full, top_load, out);
    return out;
}

Eigen::VectorXd SystemReducer::restrict_vector(const Eigen::VectorXd& full) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs_.size());
    for (Index n = 0; n < dofs_.num_nodes(); ++n) {
        const Index d = dofs_(n);
        if (d != DofMap::kEliminated)
            out[d] += full[n];
    }
    return out;
}

LinearSystem reduce_system(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                           const Grid& grid, const DirichletValues& dirichlet, bool merge_top,
                           double top_load)
{
    std::vector<Index> nodes;
    nodes.reserve(dirichlet.size());
    Eigen::VectorXd values = Eigen::VectorXd::Zero(grid.num_nodes());
    for (const auto& [node, value] : dirichlet) {
        if (!std::isfinite(value))
            throw InvalidInput("reduce_system: non-finite Dirichlet value");
        nodes.push_back(node);
        if (node >= 0 && node < grid.num_nodes())
            values[node] = value;
    }
    SparseMatrix compressed = matrix;
    compressed.makeCompressed();
    SystemReducer reducer(compressed, DofMap(grid, nodes, merge_top));
    LinearSystem sys = reducer.reduce(compressed, rhs, values, top_load);
    const SparseMatrix transposed = compressed.transpose();
    sys.symmetric = (compressed - transposed).norm() == 0.0;
    return sys;
}

} // namespace twf
