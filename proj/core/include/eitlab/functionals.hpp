#ifndef EITLAB_FUNCTIONALS_HPP
#define EITLAB_FUNCTIONALS_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "eitlab/boundary_ops.hpp"
#include "eitlab/conductivity.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

/// Current/voltage pairs in basis coordinates, one column per measurement.
/// `voltage_traces`, when present, holds the full boundary samples of each
/// voltage (nb x n) and is used as Dirichlet data instead of the projection.
class MeasurementSet {
public:
    MeasurementSet(Eigen::MatrixXd currents, Eigen::MatrixXd voltages,
                   Eigen::MatrixXd voltage_traces = {});

    int count() const noexcept { return static_cast<int>(currents_.cols()); }
    const Eigen::MatrixXd& currents() const noexcept { return currents_; }
    const Eigen::MatrixXd& voltages() const noexcept { return voltages_; }
    const Eigen::MatrixXd& voltage_traces() const noexcept { return traces_; }
    bool has_traces() const noexcept { return traces_.size() > 0; }

    /// Same measurements with currents and voltages multiplied by c.
    MeasurementSet scaled(double c) const;

private:
    Eigen::MatrixXd currents_;
    Eigen::MatrixXd voltages_;
    Eigen::MatrixXd traces_;
};

/// phi_i = N-D(A) g_i for the given current coordinates (columns), with traces.
MeasurementSet synthetic_measurements(const BoundaryOperator& nd, const Eigen::MatrixXd& currents);
/// All 2K basis functions as currents.
MeasurementSet synthetic_measurements(const BoundaryOperator& nd);

enum class FunctionalKind { J0, J1, J2 };
const char* to_string(FunctionalKind kind);
FunctionalKind parse_functional(const std::string& name);

struct FunctionalValue {
    FunctionalKind kind = FunctionalKind::J0;
    double value = 0.0;
    std::vector<double> per_measurement;
};

/// Sum over i of the L2 distance squared between the projected Neumann trace
/// for g_i and phi_i.
FunctionalValue eval_j0(const Mesh& mesh, const ConductivityField& field,
                        const BoundaryBasis& basis, const MeasurementSet& data);
/// Sum over i of ||A^{1/2}(grad u_i - grad v_i)||^2; needs a symmetric field.
FunctionalValue eval_j1(const Mesh& mesh, const ConductivityField& field,
                        const BoundaryBasis& basis, const MeasurementSet& data);
/// Sum over i of ||A(grad u_i - grad v_i)||^2.
FunctionalValue eval_j2(const Mesh& mesh, const ConductivityField& field,
                        const BoundaryBasis& basis, const MeasurementSet& data);
FunctionalValue eval_functional(FunctionalKind kind, const Mesh& mesh,
                                const ConductivityField& field, const BoundaryBasis& basis,
                                const MeasurementSet& data);

/// Terms of the energy expansion of J1: E(u_i) + E(v_i) - 2 <g_i, phi_i>.
std::vector<double> j1_energy_terms(const Mesh& mesh, const ConductivityField& field,
                                    const BoundaryBasis& basis, const MeasurementSet& data);

struct MinimizeResult {
    ConductivityField field;
    std::vector<double> trace; // trace[0] is the initial value, one entry per step after
    int accepted_moves = 0;
};

/// Projected finite-difference coordinate descent on per-element scalar
/// conductivities. Each step sweeps the uniform scaling direction followed by
/// every element value, taking a clamped Newton step from central
/// differences and keeping it only if the functional decreases. Stops early
/// when a sweep makes no progress.
MinimizeResult minimize_scalar(const Mesh& mesh, const BoundaryBasis& basis,
                               const MeasurementSet& data, FunctionalKind kind,
                               const ConductivityField& init, double lower, double upper, int steps);

} // namespace eitlab

#endif
