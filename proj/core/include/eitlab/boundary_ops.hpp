#ifndef EITLAB_BOUNDARY_OPS_HPP
#define EITLAB_BOUNDARY_OPS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "eitlab/conductivity.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

/// Zero-mean Fourier basis cos(k s), sin(k s), k = 1..K, sampled at the
/// boundary vertices through the boundary parameter s. Column 2(k-1) is the
/// cosine, column 2(k-1)+1 the sine of frequency k.
class BoundaryBasis {
public:
    /// Throws InvalidArgument for K < 1 and ResolutionError for K > nb / 8.
    BoundaryBasis(const Mesh& mesh, int max_frequency);

    int max_frequency() const noexcept { return k_; }
    int size() const noexcept { return 2 * k_; }
    static int frequency(int index) { return index / 2 + 1; }

    /// nb x 2K samples in boundary-cycle order.
    const Eigen::MatrixXd& functions() const noexcept { return functions_; }
    Eigen::VectorXd function(int index) const { return functions_.col(index); }
    /// Exact L2 inner products of the interpolants on the boundary polygon.
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    const SparseMatrix& boundary_mass() const noexcept { return mass_; }

    /// Coordinates of the L2 projection of a boundary function (cycle-order samples).
    Eigen::VectorXd project(const Eigen::VectorXd& boundary_values) const;
    Eigen::MatrixXd project(const Eigen::MatrixXd& boundary_values) const;
    /// Samples of sum_j c_j f_j.
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coordinates) const;
    /// G^{-1} rhs.
    Eigen::MatrixXd gram_solve(const Eigen::MatrixXd& rhs) const;

    std::uint64_t id() const noexcept { return id_; }
    std::uint64_t mesh_id() const noexcept { return mesh_id_; }

private:
    int k_;
    Eigen::MatrixXd functions_;
    Eigen::MatrixXd gram_;
    Eigen::LLT<Eigen::MatrixXd> gram_llt_;
    SparseMatrix mass_;
    std::uint64_t id_;
    std::uint64_t mesh_id_;
};

enum class Space { Hminus_half, L2, Hplus_half };
enum class OperatorKind { nd, dn, generic };

const char* to_string(Space space);
Space parse_space(const std::string& name);

/// Discrete boundary operator acting on basis coordinates.
///
/// For N-D the images are the boundary traces v_j of the Neumann solutions;
/// for D-N they are the boundary rows of K u_j (the discrete flux load of the
/// Dirichlet solution u_j). `matrix` is the action on coordinates: G^{-1}
/// F^T M v_j for N-D and G^{-1} F^T (K u_j) for D-N. The Galerkin form is
/// gram * matrix.
struct BoundaryOperator {
    Eigen::MatrixXd matrix;
    Eigen::MatrixXd images; // nb x 2K, may be empty
    Eigen::MatrixXd gram;
    OperatorKind kind = OperatorKind::generic;
    Space source = Space::L2;
    Space target = Space::L2;
    std::uint64_t basis_id = 0;
    std::string field_ref;

    Eigen::MatrixXd form() const { return gram * matrix; }
    bool has_images() const { return images.size() > 0; }
};

BoundaryOperator assemble_nd(const Mesh& mesh, const ConductivityField& field,
                             const BoundaryBasis& basis);
BoundaryOperator assemble_dn(const Mesh& mesh, const ConductivityField& field,
                             const BoundaryBasis& basis);

/// Largest generalized singular value of P - Q between L2-weighted coordinates.
double op_distance_l2l2(const BoundaryOperator& p, const BoundaryOperator& q);

/// Same with Fourier Sobolev weights (1 + k^2)^{s/2} on frequency k,
/// s = -1/2, 0, 1/2 for Hminus_half, L2, Hplus_half.
double op_distance_natural(const BoundaryOperator& p, const BoundaryOperator& q, Space source,
                           Space target);

/// Weight of frequency k in `space`.
double sobolev_weight(int k, Space space);

enum class GapSide { neumann, dirichlet };

/// Interior fields A^{i/2}(grad u - grad v) for each basis input.
/// KN: v = Neumann solution for g_j, u = Dirichlet solution for Lambda g_j.
/// KD: u = Dirichlet solution for phi_j, v = Neumann solution for Lambda phi_j.
struct GapOperator {
    int index = 2;
    GapSide side = GapSide::neumann;
    Eigen::MatrixXd columns; // 2 * num_triangles x 2K, element vectors stacked
    Eigen::MatrixXd gram_interior;
    Eigen::MatrixXd gram;
    // Diagnostics for the energy identity, per column.
    Eigen::VectorXd energy_u;
    Eigen::VectorXd energy_v;
    Eigen::VectorXd pairing; // <g_j, Lambda g_j> for KN, <phi_j, Lambda phi_j> for KD
};

/// Throws InvalidArgument for index 1 with a nonsymmetric field, or when the
/// reference operator is of the wrong kind for `side`.
GapOperator assemble_gap(const Mesh& mesh, const ConductivityField& field,
                         const BoundaryBasis& basis, const BoundaryOperator& reference, int index,
                         GapSide side);

/// sqrt of the largest lambda with gram_interior x = lambda G x.
double gap_norm_l2(const GapOperator& gap);

/// Element-wise A^{i/2} applied to stacked element vectors.
Eigen::VectorXd apply_tensor_power(const ConductivityField& field, int index,
                                   const Eigen::VectorXd& element_vectors);
/// Sum over elements of area * a_T . b_T.
double interior_inner_product(const Mesh& mesh, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// "i,j,value" rows of the coordinate matrix; the Gram matrix goes to `gram_os`.
void write_operator_csv(std::ostream& os, std::ostream& gram_os, const BoundaryOperator& op);
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m, const char* header = "i,j,value");

} // namespace eitlab

#endif
