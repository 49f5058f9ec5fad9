#include "eitlab/fem.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "eitlab/errors.hpp"

namespace eitlab {

namespace {

void check_field(const Mesh& mesh, const ConductivityField& field)
{
    if (field.size() != mesh.num_triangles())
        throw InvalidArgument("conductivity field has " + std::to_string(field.size()) +
                              " elements, mesh has " + std::to_string(mesh.num_triangles()));
}

} // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const ConductivityField& field)
{
    check_field(mesh, field);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = p1_gradients(mesh, t);
        // row i is the test function
        const Eigen::Matrix3d ke = mesh.area(t) * g * field[t] * g.transpose();
        const auto& tri = mesh.triangles()[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j], ke(i, j));
    }
    SparseMatrix k(static_cast<Eigen::Index>(mesh.num_vertices()),
                   static_cast<Eigen::Index>(mesh.num_vertices()));
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

Eigen::VectorXd boundary_trace(const Mesh& mesh, const Eigen::VectorXd& nodal)
{
    if (nodal.size() != static_cast<Eigen::Index>(mesh.num_vertices()))
        throw InvalidArgument("boundary_trace: nodal vector has the wrong size");
    const auto& bv = mesh.boundary_vertices();
    Eigen::VectorXd out(static_cast<Eigen::Index>(bv.size()));
    for (std::size_t i = 0; i < bv.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = nodal(bv[i]);
    return out;
}

Eigen::VectorXd lift_boundary(const Mesh& mesh, const Eigen::VectorXd& boundary_values)
{
    const auto& bv = mesh.boundary_vertices();
    if (boundary_values.size() != static_cast<Eigen::Index>(bv.size()))
        throw InvalidArgument("boundary data has " + std::to_string(boundary_values.size()) +
                              " entries, mesh has " + std::to_string(bv.size()) +
                              " boundary vertices");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (std::size_t i = 0; i < bv.size(); ++i)
        out(bv[i]) = boundary_values(static_cast<Eigen::Index>(i));
    return out;
}

SparseMatrix boundary_mass_cycle(const Mesh& mesh)
{
    const auto nb = static_cast<Eigen::Index>(mesh.num_boundary_vertices());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * static_cast<std::size_t>(nb));
    for (const auto& e : mesh.boundary_edges()) {
        const double len = (mesh.vertices()[static_cast<std::size_t>(e.a)] -
                            mesh.vertices()[static_cast<std::size_t>(e.b)])
                               .norm();
        const int a = mesh.boundary_index(e.a);
        const int b = mesh.boundary_index(e.b);
        trip.emplace_back(a, a, len / 3.0);
        trip.emplace_back(b, b, len / 3.0);
        trip.emplace_back(a, b, len / 6.0);
        trip.emplace_back(b, a, len / 6.0);
    }
    SparseMatrix m(nb, nb);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

double boundary_integral(const Mesh& mesh, const Eigen::VectorXd& boundary_values)
{
    if (boundary_values.size() != static_cast<Eigen::Index>(mesh.num_boundary_vertices()))
        throw InvalidArgument("boundary_integral: wrong number of boundary values");
    double s = 0.0;
    for (const auto& e : mesh.boundary_edges()) {
        const double len = (mesh.vertices()[static_cast<std::size_t>(e.a)] -
                            mesh.vertices()[static_cast<std::size_t>(e.b)])
                               .norm();
        s += 0.5 * len *
             (boundary_values(mesh.boundary_index(e.a)) + boundary_values(mesh.boundary_index(e.b)));
    }
    return s;
}

double boundary_l2_norm(const Mesh& mesh, const Eigen::VectorXd& boundary_values)
{
    const SparseMatrix m = boundary_mass_cycle(mesh);
    return std::sqrt(std::max(0.0, boundary_values.dot(m * boundary_values)));
}

NeumannSolver::NeumannSolver(const Mesh& mesh, const ConductivityField& field)
    : mesh_(&mesh), field_ref_(field.label()), stiffness_(assemble_stiffness(mesh, field)),
      boundary_mass_(boundary_mass_cycle(mesh))
{
    const int nv = static_cast<int>(mesh.num_vertices());
    const int pin = mesh.boundary_vertices().front();
    boundary_weights_ = boundary_mass_ * Eigen::VectorXd::Ones(boundary_mass_.rows());

    std::vector<int> reduced(static_cast<std::size_t>(nv), -1);
    for (int v = 0; v < nv; ++v)
        if (v != pin) {
            reduced[static_cast<std::size_t>(v)] = static_cast<int>(free_.size());
            free_.push_back(v);
        }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(stiffness_.nonZeros()));
    for (int c = 0; c < stiffness_.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(stiffness_, c); it; ++it) {
            const int r = reduced[static_cast<std::size_t>(it.row())];
            const int cc = reduced[static_cast<std::size_t>(it.col())];
            if (r >= 0 && cc >= 0)
                trip.emplace_back(r, cc, it.value());
        }
    SparseMatrix kr(nv - 1, nv - 1);
    kr.setFromTriplets(trip.begin(), trip.end());
    factor_ = std::make_unique<SparseFactor>(kr, field.is_symmetric());
}

FemSolution NeumannSolver::solve(const Eigen::VectorXd& flux) const
{
    if (flux.size() != boundary_mass_.rows())
        throw InvalidArgument("Neumann data has " + std::to_string(flux.size()) +
                              " entries, mesh has " + std::to_string(boundary_mass_.rows()) +
                              " boundary vertices");
    const double mean = boundary_weights_.dot(flux);
    const double norm = std::sqrt(std::max(0.0, flux.dot(boundary_mass_ * flux)));
    if (std::abs(mean) > 1e-8 * norm) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "Neumann data violates compatibility: integral of g = %.3e",
                      mean);
        throw InvalidArgument(buf);
    }
    const Eigen::VectorXd load_b = boundary_mass_ * flux;
    return solve_load(lift_boundary(*mesh_, load_b));
}

FemSolution NeumannSolver::solve_load(const Eigen::VectorXd& load) const
{
    const auto nv = static_cast<Eigen::Index>(mesh_->num_vertices());
    if (load.size() != nv)
        throw InvalidArgument("Neumann load has the wrong size");
    if (std::abs(load.sum()) > 1e-8 * std::max(load.cwiseAbs().sum(), 1e-300))
        throw InvalidArgument("Neumann load does not sum to zero (defect " +
                              std::to_string(load.sum()) + ")");
    Eigen::VectorXd rhs(nv - 1);
    for (std::size_t i = 0; i < free_.size(); ++i)
        rhs(static_cast<Eigen::Index>(i)) = load(free_[i]);
    const Eigen::VectorXd x = factor_->solve(rhs);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(nv);
    for (std::size_t i = 0; i < free_.size(); ++i)
        u(free_[i]) = x(static_cast<Eigen::Index>(i));
    const double shift = boundary_weights_.dot(boundary_trace(*mesh_, u)) / boundary_weights_.sum();
    u.array() -= shift;

    FemSolution s;
    s.energy = u.dot(stiffness_ * u);
    s.nodal_values = std::move(u);
    s.kind = ProblemKind::neumann;
    s.field_ref = field_ref_;
    s.mesh_id = mesh_->id();
    return s;
}

DirichletSolver::DirichletSolver(const Mesh& mesh, const ConductivityField& field)
    : mesh_(&mesh), field_ref_(field.label()), stiffness_(assemble_stiffness(mesh, field))
{
    const int nv = static_cast<int>(mesh.num_vertices());
    std::vector<int> reduced(static_cast<std::size_t>(nv), -1);
    for (int v = 0; v < nv; ++v)
        if (!mesh.is_boundary(v)) {
            reduced[static_cast<std::size_t>(v)] = static_cast<int>(interior_.size());
            interior_.push_back(v);
        }
    const auto ni = static_cast<Eigen::Index>(interior_.size());
    const auto nb = static_cast<Eigen::Index>(mesh.num_boundary_vertices());
    std::vector<Eigen::Triplet<double>> kii;
    std::vector<Eigen::Triplet<double>> kib;
    for (int c = 0; c < stiffness_.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(stiffness_, c); it; ++it) {
            const int r = reduced[static_cast<std::size_t>(it.row())];
            if (r < 0)
                continue;
            const int cc = reduced[static_cast<std::size_t>(it.col())];
            if (cc >= 0)
                kii.emplace_back(r, cc, it.value());
            else
                kib.emplace_back(r, mesh.boundary_index(static_cast<int>(it.col())), it.value());
        }
    coupling_.resize(ni, nb);
    coupling_.setFromTriplets(kib.begin(), kib.end());
    if (ni > 0) {
        SparseMatrix k(ni, ni);
        k.setFromTriplets(kii.begin(), kii.end());
        factor_ = std::make_unique<SparseFactor>(k, field.is_symmetric());
    }
}

FemSolution DirichletSolver::solve(const Eigen::VectorXd& boundary_values,
                                   const Eigen::VectorXd* source) const
{
    Eigen::VectorXd u = lift_boundary(*mesh_, boundary_values);
    const auto ni = static_cast<Eigen::Index>(interior_.size());
    if (ni > 0) {
        Eigen::VectorXd rhs = -(coupling_ * boundary_values);
        if (source) {
            if (source->size() != static_cast<Eigen::Index>(mesh_->num_triangles()))
                throw InvalidArgument("source density needs one value per triangle");
            Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_->num_vertices()));
            for (std::size_t t = 0; t < mesh_->num_triangles(); ++t)
                for (int v : mesh_->triangles()[t])
                    f(v) += (*source)(static_cast<Eigen::Index>(t)) * mesh_->area(t) / 3.0;
            for (Eigen::Index i = 0; i < ni; ++i)
                rhs(i) += f(interior_[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd x = factor_->solve(rhs);
        for (Eigen::Index i = 0; i < ni; ++i)
            u(interior_[static_cast<std::size_t>(i)]) = x(i);
    }
    FemSolution s;
    s.energy = u.dot(stiffness_ * u);
    s.nodal_values = std::move(u);
    s.kind = ProblemKind::dirichlet;
    s.field_ref = field_ref_;
    s.mesh_id = mesh_->id();
    return s;
}

FemSolution solve_dirichlet(const Mesh& mesh, const ConductivityField& field,
                            const Eigen::VectorXd& boundary_values, const Eigen::VectorXd* source)
{
    return DirichletSolver(mesh, field).solve(boundary_values, source);
}

FemSolution solve_neumann(const Mesh& mesh, const ConductivityField& field,
                          const Eigen::VectorXd& flux)
{
    return NeumannSolver(mesh, field).solve(flux);
}

double energy_inner_product(const Mesh& mesh, const ConductivityField& field,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    check_field(mesh, field);
    const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
    if (u.size() != nv || v.size() != nv)
        throw InvalidArgument("energy_inner_product: nodal vectors do not match the mesh");
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = p1_gradients(mesh, t);
        const auto& tri = mesh.triangles()[t];
        const Eigen::Vector3d ue(u(tri[0]), u(tri[1]), u(tri[2]));
        const Eigen::Vector3d ve(v(tri[0]), v(tri[1]), v(tri[2]));
        const Eigen::Vector2d gu = g.transpose() * ue;
        const Eigen::Vector2d gv = g.transpose() * ve;
        s += mesh.area(t) * gv.dot(field[t] * gu);
    }
    return s;
}

double energy_inner_product(const Mesh& mesh, const ConductivityField& field, const FemSolution& u,
                            const FemSolution& v)
{
    if (u.mesh_id != mesh.id() || v.mesh_id != mesh.id())
        throw InvalidArgument("energy_inner_product: solutions come from a different mesh");
    return energy_inner_product(mesh, field, u.nodal_values, v.nodal_values);
}

Eigen::VectorXd element_gradients(const Mesh& mesh, const Eigen::VectorXd& nodal)
{
    if (nodal.size() != static_cast<Eigen::Index>(mesh.num_vertices()))
        throw InvalidArgument("element_gradients: nodal vector has the wrong size");
    Eigen::VectorXd out(2 * static_cast<Eigen::Index>(mesh.num_triangles()));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = p1_gradients(mesh, t);
        const auto& tri = mesh.triangles()[t];
        const Eigen::Vector3d ue(nodal(tri[0]), nodal(tri[1]), nodal(tri[2]));
        out.segment<2>(2 * static_cast<Eigen::Index>(t)) = g.transpose() * ue;
    }
    return out;
}

void write_solution(std::ostream& os, const FemSolution& solution)
{
    char buf[64];
    for (Eigen::Index i = 0; i < solution.nodal_values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%ld %.17g\n", static_cast<long>(i), solution.nodal_values(i));
        os << buf;
    }
}

} // namespace eitlab
