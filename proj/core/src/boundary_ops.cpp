#include "eitlab/boundary_ops.hpp"

#include <atomic>
#include <cmath>
#include <ostream>

#include "eitlab/errors.hpp"
#include "eitlab/fem.hpp"
#include "eitlab/io.hpp"
#include "eitlab/linalg.hpp"

namespace eitlab {

namespace {

std::atomic<std::uint64_t> g_next_basis_id{1};

void check_basis(const Mesh& mesh, const BoundaryBasis& basis)
{
    if (basis.mesh_id() != mesh.id())
        throw InvalidArgument("boundary basis was built on a different mesh");
}

void check_pair(const BoundaryOperator& p, const BoundaryOperator& q)
{
    if (p.basis_id != q.basis_id || p.matrix.rows() != q.matrix.rows() ||
        p.matrix.cols() != q.matrix.cols())
        throw InvalidArgument("operators are expressed in different boundary bases");
}

Eigen::VectorXd weights(int size, Space space)
{
    Eigen::VectorXd w(size);
    for (int j = 0; j < size; ++j)
        w(j) = sobolev_weight(BoundaryBasis::frequency(j), space);
    return w;
}

} // namespace

BoundaryBasis::BoundaryBasis(const Mesh& mesh, int max_frequency)
    : k_(max_frequency), mass_(boundary_mass_cycle(mesh)), id_(g_next_basis_id++),
      mesh_id_(mesh.id())
{
    const auto nb = static_cast<int>(mesh.num_boundary_vertices());
    if (k_ < 1)
        throw InvalidArgument("boundary basis needs K >= 1");
    if (8 * k_ > nb)
        throw ResolutionError("K = " + std::to_string(k_) + " aliases on " + std::to_string(nb) +
                              " boundary vertices (need K <= " + std::to_string(nb / 8) + ")");
    functions_.resize(nb, 2 * k_);
    for (int i = 0; i < nb; ++i) {
        const double s = mesh.boundary_edges()[static_cast<std::size_t>(i)].s0;
        for (int k = 1; k <= k_; ++k) {
            functions_(i, 2 * (k - 1)) = std::cos(k * s);
            functions_(i, 2 * (k - 1) + 1) = std::sin(k * s);
        }
    }
    const Eigen::VectorXd w = mass_ * Eigen::VectorXd::Ones(nb);
    const Eigen::RowVectorXd means = (w.transpose() * functions_) / w.sum();
    functions_.rowwise() -= means;
    gram_ = functions_.transpose() * (mass_ * functions_);
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
    gram_llt_.compute(gram_);
    if (gram_llt_.info() != Eigen::Success)
        throw ResolutionError("boundary basis Gram matrix is not positive definite");
}

Eigen::VectorXd BoundaryBasis::project(const Eigen::VectorXd& boundary_values) const
{
    if (boundary_values.size() != functions_.rows())
        throw InvalidArgument("project: wrong number of boundary values");
    return gram_llt_.solve(functions_.transpose() * (mass_ * boundary_values));
}

Eigen::MatrixXd BoundaryBasis::project(const Eigen::MatrixXd& boundary_values) const
{
    if (boundary_values.rows() != functions_.rows())
        throw InvalidArgument("project: wrong number of boundary values");
    return gram_llt_.solve(functions_.transpose() * (mass_ * boundary_values));
}

Eigen::VectorXd BoundaryBasis::synthesize(const Eigen::VectorXd& coordinates) const
{
    if (coordinates.size() != size())
        throw InvalidArgument("synthesize: wrong number of coordinates");
    return functions_ * coordinates;
}

Eigen::MatrixXd BoundaryBasis::gram_solve(const Eigen::MatrixXd& rhs) const
{
    return gram_llt_.solve(rhs);
}

const char* to_string(Space space)
{
    switch (space) {
    case Space::Hminus_half:
        return "Hminus_half";
    case Space::L2:
        return "L2";
    case Space::Hplus_half:
        return "Hplus_half";
    }
    return "?";
}

Space parse_space(const std::string& name)
{
    if (name == "Hminus_half")
        return Space::Hminus_half;
    if (name == "L2")
        return Space::L2;
    if (name == "Hplus_half")
        return Space::Hplus_half;
    throw InvalidArgument("unknown space tag '" + name + "'");
}

double sobolev_weight(int k, Space space)
{
    const double base = 1.0 + static_cast<double>(k) * k;
    switch (space) {
    case Space::Hminus_half:
        return std::pow(base, -0.25);
    case Space::L2:
        return 1.0;
    case Space::Hplus_half:
        return std::pow(base, 0.25);
    }
    throw InvalidArgument("invalid space tag");
}

BoundaryOperator assemble_nd(const Mesh& mesh, const ConductivityField& field,
                             const BoundaryBasis& basis)
{
    check_basis(mesh, basis);
    const NeumannSolver solver(mesh, field);
    const int n = basis.size();
    BoundaryOperator op;
    op.images.resize(basis.functions().rows(), n);
    parallel_for(static_cast<std::size_t>(n), thread_count(), [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        op.images.col(jj) = boundary_trace(mesh, solver.solve(basis.functions().col(jj)).nodal_values);
    });
    op.matrix = basis.project(op.images);
    op.gram = basis.gram();
    op.kind = OperatorKind::nd;
    op.source = Space::Hminus_half;
    op.target = Space::Hplus_half;
    op.basis_id = basis.id();
    op.field_ref = field.label();
    return op;
}

BoundaryOperator assemble_dn(const Mesh& mesh, const ConductivityField& field,
                             const BoundaryBasis& basis)
{
    check_basis(mesh, basis);
    const DirichletSolver solver(mesh, field);
    const int n = basis.size();
    BoundaryOperator op;
    op.images.resize(basis.functions().rows(), n);
    parallel_for(static_cast<std::size_t>(n), thread_count(), [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const FemSolution u = solver.solve(basis.functions().col(jj));
        const Eigen::VectorXd load = solver.stiffness() * u.nodal_values;
        op.images.col(jj) = boundary_trace(mesh, load);
    });
    op.matrix = basis.gram_solve(basis.functions().transpose() * op.images);
    op.gram = basis.gram();
    op.kind = OperatorKind::dn;
    op.source = Space::Hplus_half;
    op.target = Space::Hminus_half;
    op.basis_id = basis.id();
    op.field_ref = field.label();
    return op;
}

double op_distance_l2l2(const BoundaryOperator& p, const BoundaryOperator& q)
{
    check_pair(p, q);
    return weighted_operator_norm(p.matrix - q.matrix, p.gram, p.gram);
}

double op_distance_natural(const BoundaryOperator& p, const BoundaryOperator& q, Space source,
                           Space target)
{
    check_pair(p, q);
    const auto allowed = [](OperatorKind kind, Space s, Space t) {
        switch (kind) {
        case OperatorKind::nd:
            return s != Space::Hplus_half && t != Space::Hminus_half;
        case OperatorKind::dn:
            return s != Space::Hminus_half && t != Space::Hplus_half;
        case OperatorKind::generic:
            return true;
        }
        return false;
    };
    if (!allowed(p.kind, source, target) || !allowed(q.kind, source, target))
        throw InvalidArgument(std::string("spaces ") + to_string(source) + " -> " +
                              to_string(target) + " do not match the operator kind");
    const auto n = static_cast<int>(p.matrix.rows());
    const Eigen::VectorXd ws = weights(n, source);
    const Eigen::VectorXd wt = weights(n, target);
    const Eigen::MatrixXd gs = ws.asDiagonal() * p.gram * ws.asDiagonal();
    const Eigen::MatrixXd gt = wt.asDiagonal() * p.gram * wt.asDiagonal();
    return weighted_operator_norm(p.matrix - q.matrix, gs, gt);
}

Eigen::VectorXd apply_tensor_power(const ConductivityField& field, int index,
                                   const Eigen::VectorXd& element_vectors)
{
    if (index != 1 && index != 2)
        throw InvalidArgument("gap index must be 1 or 2");
    if (index == 1 && !field.is_symmetric())
        throw InvalidArgument("A^{1/2} needs a symmetric conductivity field");
    if (element_vectors.size() != 2 * static_cast<Eigen::Index>(field.size()))
        throw InvalidArgument("apply_tensor_power: wrong vector size");
    Eigen::VectorXd out(element_vectors.size());
    for (std::size_t t = 0; t < field.size(); ++t) {
        const auto k = 2 * static_cast<Eigen::Index>(t);
        const Tensor a = index == 2 ? field[t] : principal_sqrt(field[t]);
        out.segment<2>(k) = a * element_vectors.segment<2>(k);
    }
    return out;
}

double interior_inner_product(const Mesh& mesh, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const auto n = 2 * static_cast<Eigen::Index>(mesh.num_triangles());
    if (a.size() != n || b.size() != n)
        throw InvalidArgument("interior_inner_product: wrong vector size");
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto k = 2 * static_cast<Eigen::Index>(t);
        s += mesh.area(t) * a.segment<2>(k).dot(b.segment<2>(k));
    }
    return s;
}

GapOperator assemble_gap(const Mesh& mesh, const ConductivityField& field,
                         const BoundaryBasis& basis, const BoundaryOperator& reference, int index,
                         GapSide side)
{
    check_basis(mesh, basis);
    if (index != 1 && index != 2)
        throw InvalidArgument("gap index must be 1 or 2");
    if (index == 1 && !field.is_symmetric())
        throw InvalidArgument("KN_1/KD_1 are defined for symmetric conductivity fields only");
    if (reference.basis_id != basis.id())
        throw InvalidArgument("reference operator uses a different boundary basis");
    if (side == GapSide::neumann && reference.kind == OperatorKind::dn)
        throw InvalidArgument("KN needs an N-D type reference operator");
    if (side == GapSide::dirichlet && reference.kind == OperatorKind::nd)
        throw InvalidArgument("KD needs a D-N type reference operator");

    const NeumannSolver neumann(mesh, field);
    const DirichletSolver dirichlet(mesh, field);
    const int n = basis.size();
    const auto ne = 2 * static_cast<Eigen::Index>(mesh.num_triangles());
    const SparseMatrix& mass = basis.boundary_mass();

    GapOperator gap;
    gap.index = index;
    gap.side = side;
    gap.columns.resize(ne, n);
    gap.energy_u.resize(n);
    gap.energy_v.resize(n);
    gap.pairing.resize(n);
    parallel_for(static_cast<std::size_t>(n), thread_count(), [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const Eigen::VectorXd f = basis.functions().col(jj);
        FemSolution u;
        FemSolution v;
        if (side == GapSide::neumann) {
            const Eigen::VectorXd trace = reference.has_images()
                                              ? Eigen::VectorXd(reference.images.col(jj))
                                              : basis.synthesize(reference.matrix.col(jj));
            v = neumann.solve(f);
            u = dirichlet.solve(trace);
            gap.pairing(jj) = f.dot(mass * trace);
        } else {
            const Eigen::VectorXd load = reference.has_images()
                                             ? Eigen::VectorXd(reference.images.col(jj))
                                             : Eigen::VectorXd(mass * basis.synthesize(reference.matrix.col(jj)));
            u = dirichlet.solve(f);
            v = neumann.solve_load(lift_boundary(mesh, load));
            gap.pairing(jj) = f.dot(load);
        }
        gap.energy_u(jj) = u.energy;
        gap.energy_v(jj) = v.energy;
        const Eigen::VectorXd diff =
            element_gradients(mesh, u.nodal_values) - element_gradients(mesh, v.nodal_values);
        gap.columns.col(jj) = apply_tensor_power(field, index, diff);
    });
    Eigen::VectorXd area(ne);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        area.segment<2>(2 * static_cast<Eigen::Index>(t)).setConstant(mesh.area(t));
    gap.gram_interior = gap.columns.transpose() * area.asDiagonal() * gap.columns;
    gap.gram_interior = 0.5 * (gap.gram_interior + gap.gram_interior.transpose()).eval();
    gap.gram = basis.gram();
    return gap;
}

double gap_norm_l2(const GapOperator& gap)
{
    return std::sqrt(std::max(0.0, max_generalized_eigenvalue(gap.gram_interior, gap.gram)));
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m, const char* header)
{
    os << header << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << i << ',' << j << ',' << format_number(m(i, j)) << '\n';
}

void write_operator_csv(std::ostream& os, std::ostream& gram_os, const BoundaryOperator& op)
{
    write_matrix_csv(os, op.matrix);
    write_matrix_csv(gram_os, op.gram);
}

} // namespace eitlab
