#include "twf/linsolve.hpp"

#include "twf/errors.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace twf {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

using Cholesky = Eigen::SimplicialLDLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
using LU = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

constexpr int kMaxRefinement = 4;

} // namespace

struct Factorization::Impl {
    Index n = 0;
    std::optional<Cholesky> chol;
    std::optional<LU> lu;
};

Factorization::Factorization(const SparseMatrix& matrix, bool spd) : impl_(std::make_unique<Impl>())
{
    if (matrix.rows() != matrix.cols())
        throw InvalidInput("factorization needs a square matrix");
    impl_->n = matrix.rows();
    const ColMatrix a = matrix;
    if (spd) {
        impl_->chol.emplace();
        impl_->chol->compute(a);
        if (impl_->chol->info() == Eigen::Success)
            return;
        impl_->chol.reset();
    }
    impl_->lu.emplace();
    impl_->lu->analyzePattern(a);
    impl_->lu->factorize(a);
    if (impl_->lu->info() != Eigen::Success)
        throw SolverFailure("sparse LU factorization failed: " + impl_->lu->lastErrorMessage(),
                            std::numeric_limits<double>::infinity());
}

void Factorization::refactor(const SparseMatrix& matrix)
{
    if (matrix.rows() != impl_->n || matrix.cols() != impl_->n)
        throw InvalidInput("refactorization needs a matrix of the same size");
    const ColMatrix a = matrix;
    if (impl_->chol) {
        impl_->chol->factorize(a);
        if (impl_->chol->info() == Eigen::Success)
            return;
        *this = Factorization(matrix, true);
        return;
    }
    impl_->lu->factorize(a);
    if (impl_->lu->info() != Eigen::Success)
        throw SolverFailure("sparse LU factorization failed: " + impl_->lu->lastErrorMessage(),
                            std::numeric_limits<double>::infinity());
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Index Factorization::size() const noexcept { return impl_->n; }
bool Factorization::is_cholesky() const noexcept { return impl_->chol.has_value(); }

Eigen::VectorXd Factorization::apply(const Eigen::VectorXd& b) const
{
    if (b.size() != impl_->n)
        throw InvalidInput("right-hand side size does not match factorization");
    if (impl_->chol)
        return impl_->chol->solve(b);
    return impl_->lu->solve(b);
}

double relative_residual(const SparseMatrix& matrix, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& rhs)
{
    const double bn = rhs.norm();
    const double rn = (rhs - matrix * x).norm();
    return bn > 0.0 ? rn / bn : rn;
}

SolveResult solve_factored(const Factorization& factor, const SparseMatrix& matrix,
                           const Eigen::VectorXd& rhs, double rtol, bool reused)
{
    if (matrix.rows() != rhs.size() || factor.size() != rhs.size())
        throw InvalidInput("linear system dimensions do not match");
    SolveResult out;
    out.report.reused_factorization = reused;
    if (rhs.size() == 0) {
        out.x = Eigen::VectorXd();
        return out;
    }
    out.x = factor.apply(rhs);
    double res = relative_residual(matrix, out.x, rhs);
    for (int k = 0; k < kMaxRefinement && !(res <= rtol) && std::isfinite(res); ++k) {
        out.x += factor.apply(rhs - matrix * out.x);
        res = relative_residual(matrix, out.x, rhs);
    }
    out.report.relative_residual = res;
    if (!(res <= rtol))
        throw SolverFailure("direct solve missed tolerance (relative residual " +
                                std::to_string(res) + ")",
                            res);
    return out;
}

SolveResult solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, double rtol, bool spd)
{
    const Factorization f(matrix, spd);
    return solve_factored(f, matrix, rhs, rtol);
}

SolveResult solve(const LinearSystem& system, double rtol)
{
    return solve(system.matrix, system.rhs, rtol, system.symmetric);
}

SolveResult pcg(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const Eigen::VectorXd& x0,
                const Factorization& preconditioner, double rtol, int max_iter)
{
    SolveResult out;
    out.report.reused_factorization = true;
    out.x = x0;
    const double bn = rhs.norm();
    const double scale = bn > 0.0 ? bn : 1.0;
    Eigen::VectorXd r = rhs - matrix * out.x;
    double rn = r.norm();
    int it = 0;
    if (rn > rtol * scale) {
        Eigen::VectorXd z = preconditioner.apply(r);
        Eigen::VectorXd d = z;
        double rz = r.dot(z);
        for (it = 1; it <= max_iter; ++it) {
            const Eigen::VectorXd ad = matrix * d;
            const double alpha = rz / d.dot(ad);
            out.x += alpha * d;
            r -= alpha * ad;
            rn = r.norm();
            if (rn <= rtol * scale)
                break;
            z = preconditioner.apply(r);
            const double rz_new = r.dot(z);
            d = z + (rz_new / rz) * d;
            rz = rz_new;
        }
    }
    // recompute from scratch so the report does not rely on the recurrence
    out.report.relative_residual = relative_residual(matrix, out.x, rhs);
    out.report.iterations = std::min(it, max_iter);
    if (!(out.report.relative_residual <= rtol))
        throw SolverFailure("preconditioned CG did not converge", out.report.relative_residual);
    return out;
}

} // namespace twf
