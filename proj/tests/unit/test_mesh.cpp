#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "eitlab/errors.hpp"
#include "eitlab/mesh.hpp"

using namespace eitlab;

namespace {

double boundary_mass_total(const Mesh& mesh)
{
    const SparseMatrix m = boundary_mass_matrix(mesh);
    return Eigen::VectorXd::Ones(m.rows()).dot(m * Eigen::VectorXd::Ones(m.cols()));
}

} // namespace

TEST(DiskMesh, LevelZeroIsValid)
{
    const Mesh m = generate_disk_mesh(0);
    EXPECT_GE(m.num_boundary_vertices(), 8u);
    EXPECT_EQ(check_mesh(m), "");
    for (std::size_t t = 0; t < m.num_triangles(); ++t)
        EXPECT_GT(m.area(t), 0.0);
}

TEST(DiskMesh, BoundaryCountDoublesPerLevel)
{
    for (int l = 0; l < 6; ++l)
        EXPECT_EQ(generate_disk_mesh(l + 1).num_boundary_vertices(),
                  2 * generate_disk_mesh(l).num_boundary_vertices());
}

TEST(DiskMesh, MeshSizeRoughlyHalves)
{
    const double r = generate_disk_mesh(3).h() / generate_disk_mesh(2).h();
    EXPECT_GE(r, 0.45);
    EXPECT_LE(r, 0.60);
}

TEST(DiskMesh, InvariantsAndAnglesOnAllTestLevels)
{
    for (int l = 0; l <= 6; ++l) {
        const Mesh m = generate_disk_mesh(l);
        EXPECT_EQ(check_mesh(m), "") << "level " << l;
        EXPECT_EQ(m.tag(), DomainTag::disk);
        EXPECT_GE(min_interior_angle_deg(m), 20.0) << "level " << l;
        for (int v : m.boundary_vertices())
            EXPECT_NEAR(m.vertices()[static_cast<std::size_t>(v)].norm(), 1.0, 1e-12);
    }
}

TEST(DiskMesh, CapacityGuard)
{
    EXPECT_THROW(generate_disk_mesh(10), CapacityError);
    EXPECT_THROW(generate_disk_mesh(-1), InvalidArgument);
}

TEST(DiskMesh, BoundaryParameterIsPolarAngle)
{
    const Mesh m = generate_disk_mesh(3);
    const auto& edges = m.boundary_edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Point p = m.vertices()[static_cast<std::size_t>(edges[i].a)];
        double theta = std::atan2(p.y(), p.x());
        if (theta < 0.0)
            theta += 2.0 * M_PI;
        EXPECT_NEAR(edges[i].s0, theta, 1e-12);
        EXPECT_EQ(edges[i].a, m.boundary_vertices()[i]);
    }
    EXPECT_DOUBLE_EQ(edges.back().s1, 2.0 * M_PI);
}

TEST(SquareMesh, Counting)
{
    const Mesh m2 = generate_square_mesh(2);
    EXPECT_EQ(m2.num_triangles(), 8u);
    EXPECT_EQ(m2.num_vertices(), 9u);
    EXPECT_EQ(generate_square_mesh(4).num_triangles(), 32u);
    EXPECT_NEAR(generate_square_mesh(5).h(), std::sqrt(2.0) / 5.0, 1e-14);
}

TEST(SquareMesh, AreasSumToOne)
{
    for (int n : {2, 3, 7, 16}) {
        const Mesh m = generate_square_mesh(n);
        EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
        EXPECT_EQ(check_mesh(m), "");
        EXPECT_EQ(m.tag(), DomainTag::square);
    }
}

TEST(SquareMesh, RejectsTooCoarse)
{
    EXPECT_THROW(generate_square_mesh(1), InvalidArgument);
}

TEST(BoundaryMass, DiskTotalMatchesInscribedPolygon)
{
    for (int l = 3; l <= 6; ++l) {
        const Mesh m = generate_disk_mesh(l);
        const double n = static_cast<double>(m.num_boundary_vertices());
        const double polygon = 2.0 * n * std::sin(M_PI / n);
        const double total = boundary_mass_total(m);
        EXPECT_NEAR(total, polygon, 1e-12);
        EXPECT_LE(std::abs(total - 2.0 * M_PI), 0.005 * 2.0 * M_PI);
    }
}

TEST(BoundaryMass, UnitSquarePerimeter)
{
    EXPECT_NEAR(boundary_mass_total(generate_square_mesh(2)), 4.0, 1e-14);
}

TEST(BoundaryMass, SymmetricPositiveSemidefinite)
{
    const Mesh m = generate_disk_mesh(3);
    const SparseMatrix mb = boundary_mass_matrix(m);
    EXPECT_NEAR((Eigen::MatrixXd(mb) - Eigen::MatrixXd(mb).transpose()).norm(), 0.0, 1e-15);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (int s = 0; s < 100; ++s) {
        Eigen::VectorXd x(m.num_vertices());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x(i) = normal(rng);
        EXPECT_GE(x.dot(mb * x), 0.0);
    }
    for (int k = 0; k < mb.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(mb, k); it; ++it) {
            EXPECT_TRUE(m.is_boundary(static_cast<int>(it.row())));
            EXPECT_TRUE(m.is_boundary(static_cast<int>(it.col())));
        }
}

TEST(MeshIo, BitExactRoundTrip)
{
    for (const Mesh& m : {generate_disk_mesh(3), generate_square_mesh(5)}) {
        std::stringstream ss;
        write_mesh(ss, m);
        const std::string first = ss.str();
        const Mesh back = read_mesh(ss);
        ASSERT_EQ(back.num_vertices(), m.num_vertices());
        for (std::size_t i = 0; i < m.num_vertices(); ++i) {
            EXPECT_EQ(back.vertices()[i].x(), m.vertices()[i].x());
            EXPECT_EQ(back.vertices()[i].y(), m.vertices()[i].y());
        }
        EXPECT_EQ(back.triangles(), m.triangles());
        std::stringstream again;
        write_mesh(again, back);
        EXPECT_EQ(again.str(), first);
    }
}

TEST(PointLocator, FindsContainingTriangle)
{
    const Mesh m = generate_disk_mesh(4);
    const PointLocator loc(m);
    for (std::size_t t = 0; t < m.num_triangles(); t += 17)
        EXPECT_EQ(loc.locate(m.centroid(t)), t);
}
