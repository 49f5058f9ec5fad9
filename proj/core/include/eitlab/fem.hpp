#ifndef EITLAB_FEM_HPP
#define EITLAB_FEM_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "eitlab/conductivity.hpp"
#include "eitlab/linalg.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

enum class ProblemKind { dirichlet, neumann };

struct FemSolution {
    Eigen::VectorXd nodal_values;
    ProblemKind kind = ProblemKind::dirichlet;
    double energy = 0.0; // integral of A grad u . grad u
    std::string field_ref;
    std::uint64_t mesh_id = 0;
};

/// P1 stiffness matrix, K_ij = sum_T |T| grad(phi_i)^T A_T grad(phi_j).
SparseMatrix assemble_stiffness(const Mesh& mesh, const ConductivityField& field);

// Boundary vectors are indexed in boundary-cycle order (mesh.boundary_vertices()).
Eigen::VectorXd boundary_trace(const Mesh& mesh, const Eigen::VectorXd& nodal);
Eigen::VectorXd lift_boundary(const Mesh& mesh, const Eigen::VectorXd& boundary_values);
/// Boundary mass matrix restricted to boundary vertices, cycle order.
SparseMatrix boundary_mass_cycle(const Mesh& mesh);
/// Exact integral over the boundary polygon of the piecewise-linear interpolant.
double boundary_integral(const Mesh& mesh, const Eigen::VectorXd& boundary_values);
double boundary_l2_norm(const Mesh& mesh, const Eigen::VectorXd& boundary_values);

/// Factorized Neumann problem for one field. The constant nullspace is
/// removed by pinning the first boundary vertex; solutions are shifted to
/// zero boundary mean. solve() is const and thread-safe.
class NeumannSolver {
public:
    NeumannSolver(const Mesh& mesh, const ConductivityField& field);

    /// Flux g given by its boundary-vertex samples; the load is M_boundary g.
    /// Throws InvalidArgument when |int g| > 1e-8 ||g||.
    FemSolution solve(const Eigen::VectorXd& flux) const;
    /// Full-length load vector whose entries sum to zero.
    FemSolution solve_load(const Eigen::VectorXd& load) const;

    const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    const Mesh& mesh() const noexcept { return *mesh_; }

private:
    const Mesh* mesh_;
    std::string field_ref_;
    SparseMatrix stiffness_;
    SparseMatrix boundary_mass_;
    Eigen::VectorXd boundary_weights_; // M_boundary * 1
    std::vector<int> free_; // reduced index -> vertex
    std::unique_ptr<SparseFactor> factor_;
};

/// Factorized interior block of the Dirichlet problem. solve() is const and
/// thread-safe.
class DirichletSolver {
public:
    DirichletSolver(const Mesh& mesh, const ConductivityField& field);

    /// `source`, when given, is a piecewise-constant density F (one value per triangle).
    FemSolution solve(const Eigen::VectorXd& boundary_values,
                      const Eigen::VectorXd* source = nullptr) const;

    const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    const Mesh& mesh() const noexcept { return *mesh_; }

private:
    const Mesh* mesh_;
    std::string field_ref_;
    SparseMatrix stiffness_;
    SparseMatrix coupling_; // interior rows, boundary columns
    std::vector<int> interior_;
    std::unique_ptr<SparseFactor> factor_;
};

FemSolution solve_dirichlet(const Mesh& mesh, const ConductivityField& field,
                            const Eigen::VectorXd& boundary_values,
                            const Eigen::VectorXd* source = nullptr);
FemSolution solve_neumann(const Mesh& mesh, const ConductivityField& field,
                          const Eigen::VectorXd& flux);

/// Integral of A grad u . grad v, exact for P1.
double energy_inner_product(const Mesh& mesh, const ConductivityField& field,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& v);
/// Same, checking that both solutions were computed on `mesh`.
double energy_inner_product(const Mesh& mesh, const ConductivityField& field,
                            const FemSolution& u, const FemSolution& v);

/// Per-element gradients, 2 rows per triangle.
Eigen::VectorXd element_gradients(const Mesh& mesh, const Eigen::VectorXd& nodal);

/// "vertex_index value" lines.
void write_solution(std::ostream& os, const FemSolution& solution);

} // namespace eitlab

#endif
