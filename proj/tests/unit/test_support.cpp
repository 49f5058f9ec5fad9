#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "eitlab/errors.hpp"
#include "eitlab/io.hpp"
#include "eitlab/linalg.hpp"
#include "eitlab/mesh.hpp"

using namespace eitlab;

TEST(SparseFactor, SolvesAndChecksResidual)
{
    SparseMatrix a(3, 3);
    a.insert(0, 0) = 4.0;
    a.insert(1, 1) = 3.0;
    a.insert(2, 2) = 2.0;
    a.insert(0, 1) = a.insert(1, 0) = 1.0;
    a.makeCompressed();
    for (bool sym : {true, false}) {
        const SparseFactor f(a, sym);
        const Eigen::Vector3d b(1.0, 2.0, 3.0);
        EXPECT_LT((a * f.solve(b) - b).norm(), 1e-14);
        EXPECT_EQ(f.size(), 3);
    }

    SparseMatrix s(2, 2);
    s.insert(0, 0) = s.insert(0, 1) = s.insert(1, 0) = s.insert(1, 1) = 1.0;
    EXPECT_THROW(
        {
            const SparseFactor f(s, true);
            f.solve(Eigen::Vector2d(1.0, 0.0));
        },
        SolverError);
}

TEST(WeightedNorm, MatchesSvdForIdentityGram)
{
    Eigen::MatrixXd d(3, 3);
    d << 1, 2, 0, 0, -1, 3, 2, 0, 1;
    const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(3, 3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
    EXPECT_NEAR(weighted_operator_norm(d, i, i), svd.singularValues()(0), 1e-13);
    EXPECT_NEAR(weighted_operator_norm(d, 4.0 * i, i), svd.singularValues()(0) / 2.0, 1e-13);
    EXPECT_THROW(weighted_operator_norm(d, -i, i), InvalidArgument);
    EXPECT_NEAR(max_generalized_eigenvalue(d.transpose() * d, i), std::pow(svd.singularValues()(0), 2), 1e-12);
}

TEST(Threads, ParallelForVisitsEachIndexOnce)
{
    for (int threads : {1, 2, 5}) {
        std::vector<std::atomic<int>> hits(97);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (const auto& h : hits)
            EXPECT_EQ(h.load(), 1);
    }
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7)
                                      throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Threads, SettingIsValidated)
{
    const int before = thread_count();
    set_thread_count(3);
    EXPECT_EQ(thread_count(), 3);
    EXPECT_THROW(set_thread_count(0), InvalidArgument);
    set_thread_count(before);
    ::setenv("EITLAB_THREADS", "6", 1);
    EXPECT_EQ(default_thread_count(), 6);
    ::unsetenv("EITLAB_THREADS");
    EXPECT_GE(default_thread_count(), 1);
}

TEST(Csv, NumbersRoundTrip)
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
        EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(Csv, HeaderRowsAndLineEndings)
{
    CsvWriter w({"a", "b"});
    w.row({1.0, 0.25}).row(std::vector<std::string>{"x", "2"});
    EXPECT_EQ(w.str(), "a,b\n1,0.25\nx,2\n");
    EXPECT_EQ(w.rows(), 2u);
    EXPECT_THROW(w.row({1.0}), InvalidArgument);
    EXPECT_THROW(CsvWriter({}), InvalidArgument);
}

TEST(Files, WriteCreatesDirectories)
{
    const auto dir = std::filesystem::temp_directory_path() / "eitlab_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_text_file(dir / "f.txt", "line\n");
    EXPECT_EQ(read_text_file(dir / "f.txt"), "line\n");
    std::filesystem::remove_all(dir.parent_path());
    EXPECT_THROW(read_text_file(dir / "missing.txt"), InvalidArgument);
}
