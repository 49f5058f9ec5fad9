#include "eitlab/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "eitlab/errors.hpp"

namespace eitlab {

struct SparseFactor::Impl {
    Eigen::SparseMatrix<double> matrix;
    std::variant<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>,
                 Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>
        solver;
};

SparseFactor::SparseFactor(const Eigen::SparseMatrix<double>& matrix, bool symmetric)
    : impl_(std::make_unique<Impl>())
{
    impl_->matrix = matrix;
    impl_->matrix.makeCompressed();
    bool ok = false;
    if (symmetric) {
        auto& s = impl_->solver.emplace<0>();
        s.compute(impl_->matrix);
        ok = s.info() == Eigen::Success;
    } else {
        auto& s = impl_->solver.emplace<1>();
        s.analyzePattern(impl_->matrix);
        s.factorize(impl_->matrix);
        ok = s.info() == Eigen::Success;
    }
    if (!ok)
        throw SolverError("sparse factorization failed (singular stiffness?)",
                          std::numeric_limits<double>::infinity());
}

SparseFactor::~SparseFactor() = default;
SparseFactor::SparseFactor(SparseFactor&&) noexcept = default;
SparseFactor& SparseFactor::operator=(SparseFactor&&) noexcept = default;

Eigen::Index SparseFactor::size() const
{
    return impl_->matrix.rows();
}

Eigen::VectorXd SparseFactor::solve(const Eigen::VectorXd& rhs) const
{
    auto apply = [this](const Eigen::VectorXd& b) -> Eigen::VectorXd {
        return std::visit([&b](const auto& s) -> Eigen::VectorXd { return s.solve(b); },
                          impl_->solver);
    };
    const double bnorm = rhs.norm();
    if (bnorm == 0.0)
        return Eigen::VectorXd::Zero(rhs.size());
    Eigen::VectorXd x = apply(rhs);
    Eigen::VectorXd r = rhs - impl_->matrix * x;
    double rel = r.norm() / bnorm;
    if (rel > 1e-13) {
        x += apply(r);
        r = rhs - impl_->matrix * x;
        rel = r.norm() / bnorm;
    }
    if (!(rel <= kMaxRelativeResidual))
        throw SolverError("linear solve residual " + std::to_string(rel) +
                              " exceeds tolerance",
                          rel);
    return x;
}

double weighted_operator_norm(const Eigen::MatrixXd& d, const Eigen::MatrixXd& gram_source,
                              const Eigen::MatrixXd& gram_target)
{
    if (d.rows() != gram_target.rows() || d.cols() != gram_source.rows())
        throw InvalidArgument("weighted_operator_norm: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> ls(gram_source);
    Eigen::LLT<Eigen::MatrixXd> lt(gram_target);
    if (ls.info() != Eigen::Success || lt.info() != Eigen::Success)
        throw InvalidArgument("weighted_operator_norm: Gram matrix not positive definite");
    // || L_t^T D L_s^{-T} ||_2
    const Eigen::MatrixXd right = ls.matrixU().solve(Eigen::MatrixXd::Identity(d.cols(), d.cols()));
    const Eigen::MatrixXd m = Eigen::MatrixXd(lt.matrixU()) * d * right;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double max_generalized_eigenvalue(const Eigen::MatrixXd& c, const Eigen::MatrixXd& g)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(c, g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw InvalidArgument("generalized eigenproblem failed (Gram matrix not SPD?)");
    return es.eigenvalues().maxCoeff();
}

int default_thread_count()
{
    for (const char* name : {"EITLAB_THREADS", "LAB_THREADS"})
        if (const char* v = std::getenv(name)) {
            const int n = std::atoi(v);
            if (n > 0)
                return n;
        }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {
std::atomic<int>& thread_setting()
{
    static std::atomic<int> n{default_thread_count()};
    return n;
}
} // namespace

int thread_count()
{
    return thread_setting().load();
}

void set_thread_count(int threads)
{
    if (threads < 1)
        throw InvalidArgument("thread count must be positive");
    thread_setting().store(threads);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body)
{
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(workers, n); ++w)
        pool.emplace_back(run);
    run();
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

} // namespace eitlab
