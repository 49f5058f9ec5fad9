#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SVD>
#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "eitlab/boundary_ops.hpp"
#include "eitlab/conductivity.hpp"
#include "eitlab/electrodes.hpp"
#include "eitlab/errors.hpp"

using namespace eitlab;

namespace {

double spectral(const Eigen::MatrixXd& m)
{
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

// Power I.V for two opposite electrodes of width 0.5, I = (1, -1), sigma = 1,
// from level-7 disk runs.
constexpr double kPowerFine[3] = {0.8890143734, 0.9061607209, 0.9157744833};
constexpr double kPowerImpedance[3] = {0.01, 0.1, 1.0};

} // namespace

TEST(ElectrodeConfig, Validation)
{
    EXPECT_NO_THROW(validate(equal_electrodes(4, 0.4, 0.1)));
    EXPECT_THROW(validate(equal_electrodes(1, 0.4, 0.1)), InvalidArgument);
    EXPECT_THROW(validate(equal_electrodes(4, 2.0, 0.1)), InvalidArgument); // overlapping
    EXPECT_THROW(validate(equal_electrodes(4, 0.4, 0.0)), InvalidArgument);
    ElectrodeConfig c = equal_electrodes(3, 0.3, 0.2);
    c.z2 = 0.1;
    EXPECT_THROW(validate(c), InvalidArgument);
}

TEST(Cem, ZeroCurrentGivesConstantPotential)
{
    const Mesh m = generate_disk_mesh(4);
    const CemSolution s = solve_cem(m, scalar_field(m, 1.0), equal_electrodes(4, 0.4, 0.1), Eigen::VectorXd::Zero(4));
    EXPECT_LT(s.voltages.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(s.interior.maxCoeff() - s.interior.minCoeff(), 1e-14);
}

TEST(Cem, FourFoldSymmetry)
{
    const Mesh m = generate_disk_mesh(5);
    Eigen::VectorXd i(4);
    i << 1.0, -1.0, 1.0, -1.0;
    const CemSolution s = solve_cem(m, scalar_field(m, 1.0), equal_electrodes(4, 0.4, 0.1), 0.7 * i);
    const double mag = std::abs(s.voltages(0));
    EXPECT_GT(mag, 0.0);
    for (int l = 0; l < 4; ++l) {
        EXPECT_EQ(s.voltages(l) > 0.0, i(l) > 0.0);
        EXPECT_NEAR(std::abs(s.voltages(l)), mag, 1e-6 * mag);
    }
}

TEST(Cem, VoltageConventionAndNormalization)
{
    const Mesh m = generate_disk_mesh(5);
    ElectrodeConfig c = equal_electrodes(5, 0.35, 0.1, 0.2);
    c.impedances = {0.05, 0.1, 0.2, 0.15, 0.3};
    c.z1 = 0.05;
    c.z2 = 0.3;
    Eigen::VectorXd i(5);
    i << 1.0, -0.3, 0.5, -2.0, 0.8;
    const CemSolution s = solve_cem(m, constant_tensor(m, 1.0, 2.0), c, i);
    const CemSolver solver(m, constant_tensor(m, 1.0, 2.0), c);
    for (int l = 0; l < 5; ++l) {
        const double v = solver.lengths()(l) * s.potentials(l) - c.impedances[static_cast<std::size_t>(l)] * i(l);
        EXPECT_NEAR(s.voltages(l), v, 1e-10 * s.voltages.cwiseAbs().maxCoeff());
    }
    EXPECT_LE(std::abs(s.voltages.sum()), 1e-10 * s.voltages.cwiseAbs().maxCoeff());
    EXPECT_FALSE(s.uexp_flagged);
}

TEST(Cem, PowerGrowsWithImpedance)
{
    const Mesh m = generate_disk_mesh(6);
    Eigen::VectorXd i(2);
    i << 1.0, -1.0;
    double previous = 0.0;
    for (int k = 0; k < 3; ++k) {
        const CemSolution s = solve_cem(m, scalar_field(m, 1.0), equal_electrodes(2, 0.5, kPowerImpedance[k]), i);
        const double p = i.dot(s.voltages);
        EXPECT_GT(p, previous);
        EXPECT_NEAR(p, kPowerFine[k], 0.005 * kPowerFine[k]);
        previous = p;
    }
}

TEST(Cem, RejectsUnbalancedCurrentsAndTinyElectrodes)
{
    const Mesh m = generate_disk_mesh(3);
    const CemSolver s(m, scalar_field(m, 1.0), equal_electrodes(4, 0.4, 0.1));
    EXPECT_THROW(s.solve(Eigen::VectorXd::Ones(4)), InvalidArgument);
    EXPECT_THROW(CemSolver(m, scalar_field(m, 1.0), equal_electrodes(4, 0.05, 0.1)), ResolutionError);
}

TEST(Resistance, StructuralProperties)
{
    const Mesh m = generate_disk_mesh(5);
    const Eigen::MatrixXd r = resistance_matrix(m, constant_tensor(m, 1.0, 2.0), equal_electrodes(6, 0.3, 0.2));
    EXPECT_LE((r - r.transpose()).norm(), 1e-8 * r.norm());
    EXPECT_LE((r * Eigen::VectorXd::Ones(6)).norm(), 1e-8 * r.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (r + r.transpose()));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * r.norm());
}

TEST(Resistance, ConductivityImpedanceScaling)
{
    // sigma I with impedance z is the unit field with impedance sigma z, scaled by 1/sigma
    const Mesh m = generate_disk_mesh(5);
    for (double z : {1e-3, 1.0})
        for (double s : {0.5, 2.0}) {
            const Eigen::MatrixXd rs = resistance_matrix(m, scalar_field(m, s), equal_electrodes(4, 0.4, z));
            const Eigen::MatrixXd r1 = resistance_matrix(m, scalar_field(m, 1.0), equal_electrodes(4, 0.4, s * z));
            EXPECT_LE((rs - r1 / s).norm(), 1e-10 * rs.norm());
        }
    // small impedance: nearly the pure geometric 1/sigma scaling
    const Eigen::MatrixXd a = resistance_matrix(m, scalar_field(m, 2.0), equal_electrodes(4, 0.4, 1e-3));
    const Eigen::MatrixXd b = resistance_matrix(m, scalar_field(m, 1.0), equal_electrodes(4, 0.4, 1e-3));
    EXPECT_LE((a - b / 2.0).norm(), 0.01 * a.norm());
    // the impedance still breaks the scaling, far above round-off
    for (double z : {1e-2, 1.0}) {
        const Eigen::MatrixXd c = resistance_matrix(m, scalar_field(m, 2.0), equal_electrodes(4, 0.4, z));
        const Eigen::MatrixXd d = resistance_matrix(m, scalar_field(m, 1.0), equal_electrodes(4, 0.4, z));
        EXPECT_GT((c - d / 2.0).norm(), 1e-5 * c.norm()) << "z = " << z;
    }
}

TEST(StabilityProbe, IdenticalAndPerturbed)
{
    const Mesh m = generate_disk_mesh(4);
    const BoundaryBasis b(m, 8);
    const ElectrodeConfig c = equal_electrodes(4, 0.4, 0.1);
    const ConductivityField a = scalar_field(m, 1.0);
    const auto [dr0, dnd0] = cem_stability_probe(m, a, a, c, b);
    EXPECT_LE(dr0, 1e-10);
    EXPECT_LE(dnd0, 1e-10);

    std::vector<double> s(m.num_triangles(), 1.0);
    s[m.num_triangles() / 3] = 3.0;
    const auto [dr, dnd] = cem_stability_probe(m, a, scalar_field(m, s), c, b);
    EXPECT_GT(dr, 0.0);
    EXPECT_GT(dnd, 0.0);
    EXPECT_TRUE(std::isfinite(dr / dnd));
}

TEST(StabilityProbe, ScalingFamilyRatio)
{
    const Mesh m = generate_disk_mesh(5);
    const BoundaryBasis b(m, 8);
    const ElectrodeConfig c = equal_electrodes(4, 0.4, 0.1);
    const ConductivityField a = scalar_field(m, 1.0);
    std::vector<double> ratios;
    for (double t : {0.01, 0.02, 0.04}) {
        const auto [dr, dnd] = cem_stability_probe(m, a, scalar_field(m, 1.0 + t), c, b);
        ratios.push_back(dr / dnd);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    EXPECT_GT(*lo, 0.0);
    EXPECT_LE(*hi / *lo, 2.0);
    EXPECT_NEAR(spectral(Eigen::MatrixXd::Identity(2, 2)), 1.0, 1e-15);
}

TEST(Resistance, CsvDump)
{
    Eigen::MatrixXd r(2, 2);
    r << 1.0, -1.0, -1.0, 1.0;
    std::ostringstream os;
    write_resistance_csv(os, r);
    EXPECT_EQ(os.str(), "l,m,value\n0,0,1\n0,1,-1\n1,0,-1\n1,1,1\n");
}

TEST(Resistance, ReciprocityAndPerElectrodeMonotonicity)
{
    const Mesh m = generate_disk_mesh(5);
    const ConductivityField a = constant_tensor(m, 1.0, 2.0);
    const Eigen::MatrixXd r = resistance_matrix(m, a, equal_electrodes(5, 0.3, 0.2));
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd i1(5);
        Eigen::VectorXd i2(5);
        for (int l = 0; l < 5; ++l) {
            i1(l) = normal(rng);
            i2(l) = normal(rng);
        }
        i1.array() -= i1.mean();
        i2.array() -= i2.mean();
        EXPECT_NEAR(i1.dot(r * i2), i2.dot(r * i1), 1e-10 * r.norm() * i1.norm() * i2.norm());
    }
    Eigen::VectorXd i(2);
    i << 1.0, -1.0;
    double previous = 0.0;
    for (double z0 : {0.05, 0.1, 0.5, 2.0}) {
        ElectrodeConfig c = equal_electrodes(2, 0.5, 0.1);
        c.impedances[0] = z0;
        c.z1 = std::min(z0, 0.1);
        c.z2 = std::max(z0, 0.1);
        const double p = i.dot(resistance_matrix(m, a, c) * i);
        EXPECT_GE(p, previous);
        previous = p;
    }
}
