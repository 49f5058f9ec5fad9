#ifndef EITLAB_ELECTRODES_HPP
#define EITLAB_ELECTRODES_HPP

#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eitlab/boundary_ops.hpp"
#include "eitlab/conductivity.hpp"
#include "eitlab/linalg.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

/// An electrode covers the boundary parameter interval [start, end) (radians,
/// taken modulo 2 pi, end - start < 2 pi).
struct Arc {
    double start = 0.0;
    double end = 0.0;
};

struct ElectrodeConfig {
    std::vector<Arc> arcs;
    std::vector<double> impedances;
    double z1 = 0.0; // declared lower bound on the impedances
    double z2 = 0.0; // declared upper bound

    int count() const { return static_cast<int>(arcs.size()); }
};

/// L equal electrodes of angular width `width`, centered at 2 pi l / L + offset.
ElectrodeConfig equal_electrodes(int count, double width, double impedance, double offset = 0.0);

/// Structural checks independent of the mesh: L >= 2, positive lengths,
/// pairwise disjoint closures, 0 < z1 <= z_l <= z2. Throws InvalidArgument.
void validate(const ElectrodeConfig& config);

struct CemSolution {
    Eigen::VectorXd interior; // nodal values u
    Eigen::VectorXd potentials; // U
    Eigen::VectorXd currents; // I
    Eigen::VectorXd voltages; // V_l = |e_l| U_l - z_l I_l, sum zero
    Eigen::VectorXd integrals; // int_{e_l} u, for the consistency diagnostic
    /// max_l |int_{e_l} u - V_l| / max_l |V_l|; flagged when above 1e-6.
    double uexp_defect = 0.0;
    bool uexp_flagged = false;
};

/// Factorized coupled system of the complete electrode model on one mesh and
/// field. solve() is const and thread-safe.
class CemSolver {
public:
    /// Throws ResolutionError if an electrode holds fewer than 2 boundary vertices.
    CemSolver(const Mesh& mesh, const ConductivityField& field, const ElectrodeConfig& config);

    /// Throws InvalidArgument when |sum I| > 1e-12 ||I||.
    CemSolution solve(const Eigen::VectorXd& currents) const;

    /// Electrode lengths |e_l|, exact on the boundary polygon.
    const Eigen::VectorXd& lengths() const noexcept { return lengths_; }
    int count() const noexcept { return static_cast<int>(lengths_.size()); }

private:
    const Mesh* mesh_;
    ElectrodeConfig config_;
    Eigen::VectorXd lengths_;
    std::vector<Eigen::VectorXd> moments_; // int_{e_l} psi_i, per vertex
    std::unique_ptr<SparseFactor> factor_;
    Eigen::Index nv_ = 0;
};

CemSolution solve_cem(const Mesh& mesh, const ConductivityField& field,
                      const ElectrodeConfig& config, const Eigen::VectorXd& currents);

/// L x L matrix mapping zero-sum current patterns to voltage patterns,
/// completed with R 1 = 0.
Eigen::MatrixXd resistance_matrix(const Mesh& mesh, const ConductivityField& field,
                                  const ElectrodeConfig& config);
Eigen::MatrixXd resistance_matrix(const CemSolver& solver);

/// (||R(A1) - R(A2)||_2, L2-L2 distance of the N-D maps).
std::pair<double, double> cem_stability_probe(const Mesh& mesh, const ConductivityField& a1,
                                              const ConductivityField& a2,
                                              const ElectrodeConfig& config,
                                              const BoundaryBasis& basis);

/// CSV "l,m,value".
void write_resistance_csv(std::ostream& os, const Eigen::MatrixXd& r);

} // namespace eitlab

#endif
