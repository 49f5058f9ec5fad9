#ifndef EITLAB_HOMOGENIZATION_HPP
#define EITLAB_HOMOGENIZATION_HPP

#include <vector>

#include <Eigen/Core>

#include "eitlab/conductivity.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

/// Laminate sequence aimed at diag(a, b), 0 < a <= b, with the two phases
/// b -+ sqrt(b (b - a)) at fraction 1/2 stacked along e1.
struct GSequenceSpec {
    double a = 1.0;
    double b = 1.0;
    std::vector<int> periods;
    double fraction = 0.5;
    Eigen::Vector2d direction = Eigen::Vector2d::UnitX();

    /// Throws InvalidArgument unless 0 < a <= b.
    static GSequenceSpec for_target(double a, double b, std::vector<int> periods);

    double phase_low() const;
    double phase_high() const;
    Tensor target() const;
    LaminateSpec laminate(int period_count) const;
};

enum class EffectiveMethod { analytic_laminate, cell_problem };

struct EffectiveTensor {
    Tensor tensor = Tensor::Identity();
    EffectiveMethod method = EffectiveMethod::analytic_laminate;
};

/// Rank-one laminate: harmonic mean across the layers (along `direction`),
/// arithmetic mean along them. `fraction` is the share of `low`.
EffectiveTensor laminate_effective(double low, double high, double fraction,
                                   const Eigen::Vector2d& direction);
EffectiveTensor laminate_effective(const GSequenceSpec& spec);

/// Periodic unit cell given as a pixel image: cell(r, c) is the conductivity
/// on [c/m_x, (c+1)/m_x) x [r/m_y, (r+1)/m_y). Solved with P1 elements on a
/// structured periodic resolution x resolution grid. Throws ResolutionError
/// unless the grid aligns with the pixels and every pixel spans at least two
/// cells per direction.
EffectiveTensor cell_problem_effective(const Eigen::MatrixXd& cell, int resolution);

/// Two-stripe cell of a laminate along e1 (low phase on the left half).
Eigen::MatrixXd laminate_cell(double low, double high);
/// 2 x 2 checkerboard with values t and 1/t.
Eigen::MatrixXd checkerboard_cell(double t);

/// One laminate field per period count. Throws ResolutionError naming the
/// first period count whose period is below 4h.
std::vector<ConductivityField> build_g_sequence(const Mesh& mesh, const GSequenceSpec& spec);

/// Area fraction of elements carrying the high phase value.
double high_phase_fraction(const Mesh& mesh, const ConductivityField& field, double high);

} // namespace eitlab

#endif
