#ifndef EITLAB_LINALG_HPP
#define EITLAB_LINALG_HPP

#include <cstddef>
#include <functional>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace eitlab {

/// Sparse direct factorization with a relative residual check on every solve.
/// Symmetric matrices use LDL^T with AMD ordering, others use sparse LU.
/// Solves are const and may be issued concurrently.
class SparseFactor {
public:
    SparseFactor(const Eigen::SparseMatrix<double>& matrix, bool symmetric);
    ~SparseFactor();
    SparseFactor(SparseFactor&&) noexcept;
    SparseFactor& operator=(SparseFactor&&) noexcept;

    /// Throws SolverError when ||A x - b|| / ||b|| exceeds kMaxRelativeResidual
    /// after one step of iterative refinement.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Eigen::Index size() const;

    static constexpr double kMaxRelativeResidual = 1e-10;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// sup_x ||D x||_{G_target} / ||x||_{G_source} for SPD Gram matrices.
double weighted_operator_norm(const Eigen::MatrixXd& d, const Eigen::MatrixXd& gram_source,
                              const Eigen::MatrixXd& gram_target);

/// Largest lambda with C x = lambda G x (C symmetric PSD, G SPD).
double max_generalized_eigenvalue(const Eigen::MatrixXd& c, const Eigen::MatrixXd& g);

/// Worker count from EITLAB_THREADS (or LAB_THREADS), else hardware concurrency.
int default_thread_count();

/// Process-wide worker count used by the parallel loops in this library.
/// Starts at default_thread_count().
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; exceptions are rethrown on the caller's thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

} // namespace eitlab

#endif
