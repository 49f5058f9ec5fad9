#include "eitlab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eitlab/errors.hpp"
#include "eitlab/fem.hpp"
#include "eitlab/linalg.hpp"

namespace eitlab {

MeasurementSet::MeasurementSet(Eigen::MatrixXd currents, Eigen::MatrixXd voltages,
                               Eigen::MatrixXd voltage_traces)
    : currents_(std::move(currents)), voltages_(std::move(voltages)),
      traces_(std::move(voltage_traces))
{
    if (currents_.cols() != voltages_.cols() || currents_.rows() != voltages_.rows())
        throw InvalidArgument("measurement set: currents and voltages differ in shape");
    if (currents_.cols() == 0)
        throw InvalidArgument("measurement set is empty");
    if (traces_.size() > 0 && traces_.cols() != currents_.cols())
        throw InvalidArgument("measurement set: one voltage trace per measurement required");
    for (Eigen::Index i = 0; i < currents_.cols(); ++i)
        if (currents_.col(i).norm() == 0.0)
            throw InvalidArgument("measurement " + std::to_string(i) + " has zero current");
}

MeasurementSet MeasurementSet::scaled(double c) const
{
    return MeasurementSet(c * currents_, c * voltages_,
                          traces_.size() > 0 ? Eigen::MatrixXd(c * traces_) : Eigen::MatrixXd());
}

MeasurementSet synthetic_measurements(const BoundaryOperator& nd, const Eigen::MatrixXd& currents)
{
    if (currents.rows() != nd.matrix.cols())
        throw InvalidArgument("current coordinates do not match the operator basis");
    Eigen::MatrixXd traces;
    if (nd.has_images())
        traces = nd.images * currents;
    return MeasurementSet(currents, nd.matrix * currents, std::move(traces));
}

MeasurementSet synthetic_measurements(const BoundaryOperator& nd)
{
    return synthetic_measurements(nd, Eigen::MatrixXd::Identity(nd.matrix.cols(), nd.matrix.cols()));
}

const char* to_string(FunctionalKind kind)
{
    switch (kind) {
    case FunctionalKind::J0:
        return "J0";
    case FunctionalKind::J1:
        return "J1";
    case FunctionalKind::J2:
        return "J2";
    }
    return "?";
}

FunctionalKind parse_functional(const std::string& name)
{
    if (name == "J0")
        return FunctionalKind::J0;
    if (name == "J1")
        return FunctionalKind::J1;
    if (name == "J2")
        return FunctionalKind::J2;
    throw InvalidArgument("unknown functional '" + name + "'");
}

namespace {

void check_data(const Mesh& mesh, const BoundaryBasis& basis, const MeasurementSet& data)
{
    if (basis.mesh_id() != mesh.id())
        throw InvalidArgument("boundary basis was built on a different mesh");
    if (data.currents().rows() != basis.size())
        throw InvalidArgument("measurement coordinates do not match the basis size");
    if (data.has_traces() && data.voltage_traces().rows() != basis.functions().rows())
        throw InvalidArgument("voltage traces do not match the boundary of the mesh");
}

FunctionalValue finish(FunctionalKind kind, std::vector<double> terms)
{
    FunctionalValue v;
    v.kind = kind;
    v.value = std::accumulate(terms.begin(), terms.end(), 0.0);
    v.per_measurement = std::move(terms);
    return v;
}

Eigen::VectorXd dirichlet_data(const BoundaryBasis& basis, const MeasurementSet& data, Eigen::Index i)
{
    return data.has_traces() ? Eigen::VectorXd(data.voltage_traces().col(i))
                             : basis.synthesize(data.voltages().col(i));
}

FunctionalValue eval_kv(FunctionalKind kind, const Mesh& mesh, const ConductivityField& field,
                        const BoundaryBasis& basis, const MeasurementSet& data)
{
    check_data(mesh, basis, data);
    const int index = kind == FunctionalKind::J1 ? 1 : 2;
    if (index == 1 && !field.is_symmetric())
        throw InvalidArgument("J1 needs a symmetric conductivity field");
    const NeumannSolver neumann(mesh, field);
    const DirichletSolver dirichlet(mesh, field);
    std::vector<double> terms(static_cast<std::size_t>(data.count()));
    parallel_for(terms.size(), thread_count(), [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const FemSolution v = neumann.solve(basis.synthesize(data.currents().col(ii)));
        const FemSolution u = dirichlet.solve(dirichlet_data(basis, data, ii));
        const Eigen::VectorXd diff =
            element_gradients(mesh, u.nodal_values) - element_gradients(mesh, v.nodal_values);
        const Eigen::VectorXd w = apply_tensor_power(field, index, diff);
        terms[i] = interior_inner_product(mesh, w, w);
    });
    return finish(kind, std::move(terms));
}

} // namespace

FunctionalValue eval_j0(const Mesh& mesh, const ConductivityField& field,
                        const BoundaryBasis& basis, const MeasurementSet& data)
{
    check_data(mesh, basis, data);
    const NeumannSolver neumann(mesh, field);
    std::vector<double> terms(static_cast<std::size_t>(data.count()));
    parallel_for(terms.size(), thread_count(), [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const FemSolution v = neumann.solve(basis.synthesize(data.currents().col(ii)));
        const Eigen::VectorXd r = basis.project(boundary_trace(mesh, v.nodal_values)) -
                                  data.voltages().col(ii);
        terms[i] = std::max(0.0, r.dot(basis.gram() * r));
    });
    return finish(FunctionalKind::J0, std::move(terms));
}

FunctionalValue eval_j1(const Mesh& mesh, const ConductivityField& field,
                        const BoundaryBasis& basis, const MeasurementSet& data)
{
    return eval_kv(FunctionalKind::J1, mesh, field, basis, data);
}

FunctionalValue eval_j2(const Mesh& mesh, const ConductivityField& field,
                        const BoundaryBasis& basis, const MeasurementSet& data)
{
    return eval_kv(FunctionalKind::J2, mesh, field, basis, data);
}

FunctionalValue eval_functional(FunctionalKind kind, const Mesh& mesh,
                                const ConductivityField& field, const BoundaryBasis& basis,
                                const MeasurementSet& data)
{
    switch (kind) {
    case FunctionalKind::J0:
        return eval_j0(mesh, field, basis, data);
    case FunctionalKind::J1:
        return eval_j1(mesh, field, basis, data);
    case FunctionalKind::J2:
        return eval_j2(mesh, field, basis, data);
    }
    throw InvalidArgument("invalid functional kind");
}

std::vector<double> j1_energy_terms(const Mesh& mesh, const ConductivityField& field,
                                    const BoundaryBasis& basis, const MeasurementSet& data)
{
    check_data(mesh, basis, data);
    const NeumannSolver neumann(mesh, field);
    const DirichletSolver dirichlet(mesh, field);
    std::vector<double> terms(static_cast<std::size_t>(data.count()));
    for (Eigen::Index i = 0; i < data.count(); ++i) {
        const Eigen::VectorXd g = basis.synthesize(data.currents().col(i));
        const Eigen::VectorXd phi = dirichlet_data(basis, data, i);
        const FemSolution v = neumann.solve(g);
        const FemSolution u = dirichlet.solve(phi);
        terms[static_cast<std::size_t>(i)] =
            u.energy + v.energy - 2.0 * g.dot(basis.boundary_mass() * phi);
    }
    return terms;
}

namespace {

// One projected coordinate move. `f` evaluates the functional at a trial
// coordinate value; returns true and updates x, fx when a decrease is found.
template <class F>
bool coordinate_move(F&& f, double& x, double& fx, double lo, double hi)
{
    const double delta = 1e-3 * std::max(std::abs(x), 1e-3);
    const double xp = std::min(x + delta, hi);
    const double xm = std::max(x - delta, lo);
    if (!(xp > xm))
        return false;
    const double fp = xp > x ? f(xp) : fx;
    const double fm = xm < x ? f(xm) : fx;

    double best_x = x;
    double best_f = fx;
    const auto consider = [&](double cx, double cf) {
        if (cf < best_f) {
            best_x = cx;
            best_f = cf;
        }
    };
    consider(xp, fp);
    consider(xm, fm);

    double trial = x;
    if (xm < x && x < xp) {
        // parabola through the three samples
        const double d1 = (fp - fx) / (xp - x);
        const double d0 = (fx - fm) / (x - xm);
        const double curv = (d1 - d0) / (0.5 * (xp - xm));
        const double slope = (d1 * (x - xm) + d0 * (xp - x)) / (xp - xm);
        trial = curv > 0.0 ? x - slope / curv : (slope < 0.0 ? x + 10.0 * delta : x - 10.0 * delta);
    } else {
        const double slope = (fp - fm) / (xp - xm);
        trial = slope < 0.0 ? x + 10.0 * delta : x - 10.0 * delta;
    }
    trial = std::clamp(trial, lo, hi);
    if (trial != x && trial != xp && trial != xm)
        consider(trial, f(trial));
    if (best_f < fx) {
        x = best_x;
        fx = best_f;
        return true;
    }
    return false;
}

} // namespace

MinimizeResult minimize_scalar(const Mesh& mesh, const BoundaryBasis& basis,
                               const MeasurementSet& data, FunctionalKind kind,
                               const ConductivityField& init, double lower, double upper, int steps)
{
    if (init.kind() != TensorKind::scalar)
        throw InvalidArgument("minimize_scalar needs a scalar initial field");
    if (!(lower > 0.0) || !(lower <= upper))
        throw InvalidArgument("minimize_scalar needs 0 < lower <= upper");
    if (steps < 0)
        throw InvalidArgument("minimize_scalar needs steps >= 0");
    std::vector<double> sigma(init.size());
    for (std::size_t t = 0; t < init.size(); ++t) {
        sigma[t] = init[t](0, 0);
        if (sigma[t] < lower || sigma[t] > upper)
            throw InvalidArgument("initial field lies outside the bounds");
    }
    const auto evaluate = [&](const std::vector<double>& s) {
        return eval_functional(kind, mesh, scalar_field(mesh, s, init.label()), basis, data).value;
    };

    double fx = evaluate(sigma);
    MinimizeResult result{init, {fx}, 0};
    for (int step = 0; step < steps && fx > 0.0; ++step) {
        bool moved = false;

        // uniform scaling, parameterized by log factor
        {
            const std::vector<double> base = sigma;
            double lo_log = -std::numeric_limits<double>::infinity();
            double hi_log = std::numeric_limits<double>::infinity();
            for (double s : base) {
                lo_log = std::max(lo_log, std::log(lower / s));
                hi_log = std::min(hi_log, std::log(upper / s));
            }
            const auto scaled = [&](double tau) {
                std::vector<double> s = base;
                for (double& v : s)
                    v = std::clamp(v * std::exp(tau), lower, upper);
                return s;
            };
            double tau = 0.0;
            if (coordinate_move([&](double t) { return evaluate(scaled(t)); }, tau, fx,
                                std::min(lo_log, 0.0), std::max(hi_log, 0.0))) {
                sigma = scaled(tau);
                moved = true;
                ++result.accepted_moves;
            }
        }

        for (std::size_t t = 0; t < sigma.size(); ++t) {
            double x = sigma[t];
            const auto f = [&](double trial) {
                std::vector<double> s = sigma;
                s[t] = trial;
                return evaluate(s);
            };
            if (coordinate_move(f, x, fx, lower, upper)) {
                sigma[t] = x;
                moved = true;
                ++result.accepted_moves;
            }
        }
        result.trace.push_back(fx);
        if (!moved)
            break;
    }
    if (result.accepted_moves > 0)
        result.field = scalar_field(mesh, sigma, init.label());
    return result;
}

} // namespace eitlab
