#include "eitlab/electrodes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/SVD>

#include "eitlab/errors.hpp"
#include "eitlab/fem.hpp"
#include "eitlab/io.hpp"

namespace eitlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Arc as one or two subintervals of [0, 2 pi].
std::vector<std::pair<double, double>> pieces(const Arc& arc)
{
    const double len = arc.end - arc.start;
    double a = std::fmod(arc.start, kTwoPi);
    if (a < 0.0)
        a += kTwoPi;
    const double b = a + len;
    if (b <= kTwoPi)
        return {{a, b}};
    return {{a, kTwoPi}, {0.0, b - kTwoPi}};
}

bool inside(const Arc& arc, double s)
{
    for (const auto& [a, b] : pieces(arc))
        if (s >= a && s <= b)
            return true;
    return false;
}

} // namespace

ElectrodeConfig equal_electrodes(int count, double width, double impedance, double offset)
{
    ElectrodeConfig c;
    for (int l = 0; l < count; ++l) {
        const double center = kTwoPi * l / count + offset;
        c.arcs.push_back({center - 0.5 * width, center + 0.5 * width});
        c.impedances.push_back(impedance);
    }
    c.z1 = impedance;
    c.z2 = impedance;
    return c;
}

void validate(const ElectrodeConfig& config)
{
    const auto n = config.arcs.size();
    if (n < 2)
        throw InvalidArgument("the electrode model needs at least 2 electrodes");
    if (config.impedances.size() != n)
        throw InvalidArgument("one contact impedance per electrode required");
    if (!(config.z1 > 0.0) || !(config.z1 <= config.z2))
        throw InvalidArgument("impedance bounds need 0 < Z1 <= Z2");
    for (std::size_t l = 0; l < n; ++l) {
        const double len = config.arcs[l].end - config.arcs[l].start;
        if (!(len > 0.0) || !(len < kTwoPi))
            throw InvalidArgument("electrode " + std::to_string(l) + " has invalid arc length");
        const double z = config.impedances[l];
        if (!(z >= config.z1 && z <= config.z2))
            throw InvalidArgument("impedance of electrode " + std::to_string(l) +
                                  " lies outside [Z1, Z2]");
    }
    std::vector<std::pair<double, double>> all;
    for (const auto& arc : config.arcs) {
        double a = std::fmod(arc.start, kTwoPi);
        if (a < 0.0)
            a += kTwoPi;
        all.emplace_back(a, a + arc.end - arc.start);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double next = i + 1 < n ? all[i + 1].first : all[0].first + kTwoPi;
        if (!(all[i].second < next))
            throw InvalidArgument("electrode closures must be pairwise disjoint");
    }
}

CemSolver::CemSolver(const Mesh& mesh, const ConductivityField& field, const ElectrodeConfig& config)
    : mesh_(&mesh), config_(config)
{
    validate(config_);
    const int nl = config_.count();
    nv_ = static_cast<Eigen::Index>(mesh.num_vertices());
    lengths_ = Eigen::VectorXd::Zero(nl);
    moments_.assign(static_cast<std::size_t>(nl), Eigen::VectorXd::Zero(nv_));

    std::vector<Eigen::Triplet<double>> trip;
    const SparseMatrix k = assemble_stiffness(mesh, field);
    for (int c = 0; c < k.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(k, c); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.value());

    for (int l = 0; l < nl; ++l) {
        const Arc& arc = config_.arcs[static_cast<std::size_t>(l)];
        const double w = 1.0 / config_.impedances[static_cast<std::size_t>(l)];
        int vertices = 0;
        for (std::size_t i = 0; i < mesh.boundary_edges().size(); ++i)
            if (inside(arc, mesh.boundary_edges()[i].s0))
                ++vertices;
        if (vertices < 2)
            throw ResolutionError("electrode " + std::to_string(l) + " covers " +
                                  std::to_string(vertices) + " boundary vertices (need >= 2)");
        Eigen::VectorXd& m = moments_[static_cast<std::size_t>(l)];
        for (const auto& e : mesh.boundary_edges()) {
            const double le = (mesh.vertices()[static_cast<std::size_t>(e.a)] -
                               mesh.vertices()[static_cast<std::size_t>(e.b)])
                                  .norm();
            for (const auto& [a, b] : pieces(arc)) {
                const double x0 = std::max(a, e.s0);
                const double x1 = std::min(b, e.s1);
                if (!(x1 > x0))
                    continue;
                const double t0 = (x0 - e.s0) / (e.s1 - e.s0);
                const double t1 = (x1 - e.s0) / (e.s1 - e.s0);
                // psi_a = 1 - t, psi_b = t on the edge
                const double ia = le * ((t1 - t1 * t1 / 2) - (t0 - t0 * t0 / 2));
                const double ib = le * (t1 * t1 - t0 * t0) / 2;
                const double iaa = le * (std::pow(1 - t0, 3) - std::pow(1 - t1, 3)) / 3;
                const double ibb = le * (t1 * t1 * t1 - t0 * t0 * t0) / 3;
                const double iab = le * ((t1 * t1 / 2 - t1 * t1 * t1 / 3) - (t0 * t0 / 2 - t0 * t0 * t0 / 3));
                lengths_(l) += le * (t1 - t0);
                m(e.a) += ia;
                m(e.b) += ib;
                trip.emplace_back(e.a, e.a, w * iaa);
                trip.emplace_back(e.b, e.b, w * ibb);
                trip.emplace_back(e.a, e.b, w * iab);
                trip.emplace_back(e.b, e.a, w * iab);
            }
        }
        // the last electrode potential is pinned to zero
        if (l < nl - 1) {
            const auto row = nv_ + l;
            for (Eigen::Index i = 0; i < nv_; ++i)
                if (m(i) != 0.0) {
                    trip.emplace_back(i, row, -w * m(i));
                    trip.emplace_back(row, i, -w * m(i));
                }
            trip.emplace_back(row, row, w * lengths_(l));
        }
    }
    const auto n = nv_ + nl - 1;
    SparseMatrix b(n, n);
    b.setFromTriplets(trip.begin(), trip.end());
    factor_ = std::make_unique<SparseFactor>(b, field.is_symmetric());
}

CemSolution CemSolver::solve(const Eigen::VectorXd& currents) const
{
    const int nl = count();
    if (currents.size() != nl)
        throw InvalidArgument("current pattern needs one entry per electrode");
    if (std::abs(currents.sum()) > 1e-12 * std::max(currents.norm(), 1e-300))
        throw InvalidArgument("current pattern must sum to zero (sum = " +
                              format_number(currents.sum()) + ")");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv_ + nl - 1);
    rhs.tail(nl - 1) = currents.head(nl - 1);
    const Eigen::VectorXd x = factor_->solve(rhs);

    CemSolution s;
    s.currents = currents;
    s.interior = x.head(nv_);
    s.potentials = Eigen::VectorXd::Zero(nl);
    s.potentials.head(nl - 1) = x.tail(nl - 1);
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(config_.impedances.data(), nl);
    Eigen::VectorXd v = lengths_.cwiseProduct(s.potentials) - z.cwiseProduct(currents);
    const double shift = -v.sum() / lengths_.sum();
    s.interior.array() += shift;
    s.potentials.array() += shift;
    s.voltages = lengths_.cwiseProduct(s.potentials) - z.cwiseProduct(currents);

    s.integrals.resize(nl);
    for (int l = 0; l < nl; ++l)
        s.integrals(l) = moments_[static_cast<std::size_t>(l)].dot(s.interior);
    const double scale = s.voltages.cwiseAbs().maxCoeff();
    s.uexp_defect = scale > 0.0 ? (s.integrals - s.voltages).cwiseAbs().maxCoeff() / scale
                                : (s.integrals - s.voltages).cwiseAbs().maxCoeff();
    s.uexp_flagged = s.uexp_defect > 1e-6;
    return s;
}

CemSolution solve_cem(const Mesh& mesh, const ConductivityField& field,
                      const ElectrodeConfig& config, const Eigen::VectorXd& currents)
{
    return CemSolver(mesh, field, config).solve(currents);
}

Eigen::MatrixXd resistance_matrix(const CemSolver& solver)
{
    const int nl = solver.count();
    Eigen::MatrixXd cols(nl, nl - 1);
    parallel_for(static_cast<std::size_t>(nl - 1), thread_count(), [&](std::size_t j) {
        Eigen::VectorXd pattern = Eigen::VectorXd::Zero(nl);
        pattern(static_cast<Eigen::Index>(j)) = 1.0;
        pattern(nl - 1) = -1.0;
        cols.col(static_cast<Eigen::Index>(j)) = solver.solve(pattern).voltages;
    });
    // R e_l - R e_L = V^(l) and sum_m R e_m = 0
    Eigen::MatrixXd r(nl, nl);
    const Eigen::VectorXd last = -cols.rowwise().sum() / nl;
    for (int l = 0; l < nl - 1; ++l)
        r.col(l) = cols.col(l) + last;
    r.col(nl - 1) = last;
    return r;
}

Eigen::MatrixXd resistance_matrix(const Mesh& mesh, const ConductivityField& field,
                                  const ElectrodeConfig& config)
{
    return resistance_matrix(CemSolver(mesh, field, config));
}

std::pair<double, double> cem_stability_probe(const Mesh& mesh, const ConductivityField& a1,
                                              const ConductivityField& a2,
                                              const ElectrodeConfig& config,
                                              const BoundaryBasis& basis)
{
    const Eigen::MatrixXd dr = resistance_matrix(mesh, a1, config) - resistance_matrix(mesh, a2, config);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dr);
    const double nd = op_distance_l2l2(assemble_nd(mesh, a1, basis), assemble_nd(mesh, a2, basis));
    return {svd.singularValues()(0), nd};
}

void write_resistance_csv(std::ostream& os, const Eigen::MatrixXd& r)
{
    write_matrix_csv(os, r, "l,m,value");
}

} // namespace eitlab
