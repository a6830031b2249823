#pragma once

#include "twf/fem.hpp"

#include <Eigen/Core>

#include <memory>

namespace twf {

struct SolveReport {
    double relative_residual = 0.0;
    int iterations = 0; ///< 0 for a direct solve, refinement steps not counted
    bool reused_factorization = false;
};

struct SolveResult {
    Eigen::VectorXd x;
    SolveReport report;
};

/// Sparse direct factorization: Cholesky when the matrix is flagged SPD
/// (falling back to LU if that fails), LU with partial pivoting otherwise.
/// Solves may be issued from several threads; refactor() may not.
class Factorization {
public:
    Factorization(const SparseMatrix& matrix, bool spd);
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;

    Index size() const noexcept;
    bool is_cholesky() const noexcept;

    /// Numeric refactorization for a matrix with the same sparsity pattern,
    /// reusing the ordering and symbolic analysis. Falls back to a full
    /// factorization when the Cholesky path breaks down.
    void refactor(const SparseMatrix& matrix);

    /// A^{-1} b without any residual check.
    Eigen::VectorXd apply(const Eigen::VectorXd& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Solve A x = b to ||Ax - b|| <= rtol ||b|| using a factorization of A that
/// was built earlier. A few steps of iterative refinement are allowed.
SolveResult solve_factored(const Factorization& factor, const SparseMatrix& matrix,
                           const Eigen::VectorXd& rhs, double rtol, bool reused = false);

SolveResult solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, double rtol,
                  bool spd = false);

SolveResult solve(const LinearSystem& system, double rtol);

/// Preconditioned conjugate gradients for SPD systems, starting from x0.
/// The factorization of a nearby matrix serves as preconditioner.
SolveResult pcg(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const Eigen::VectorXd& x0,
                const Factorization& preconditioner, double rtol, int max_iter);

double relative_residual(const SparseMatrix& matrix, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& rhs);

} // namespace twf
