#include "eitlab/homogenization.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "eitlab/errors.hpp"
#include "eitlab/linalg.hpp"

namespace eitlab {

GSequenceSpec GSequenceSpec::for_target(double a, double b, std::vector<int> periods)
{
    if (!(a > 0.0) || !(a <= b))
        throw InvalidArgument("G-sequence target diag(a, b) needs 0 < a <= b");
    for (int n : periods)
        if (n < 1)
            throw InvalidArgument("period counts must be positive");
    GSequenceSpec s;
    s.a = a;
    s.b = b;
    s.periods = std::move(periods);
    return s;
}

double GSequenceSpec::phase_low() const
{
    return b - std::sqrt(b * (b - a));
}

double GSequenceSpec::phase_high() const
{
    return b + std::sqrt(b * (b - a));
}

Tensor GSequenceSpec::target() const
{
    Tensor t = Tensor::Zero();
    t(0, 0) = a;
    t(1, 1) = b;
    return t;
}

LaminateSpec GSequenceSpec::laminate(int period_count) const
{
    LaminateSpec l;
    l.value_low = phase_low();
    l.value_high = phase_high();
    l.volume_fraction = fraction;
    l.period_count = period_count;
    l.direction = direction;
    return l;
}

EffectiveTensor laminate_effective(double low, double high, double fraction,
                                   const Eigen::Vector2d& direction)
{
    if (!(low > 0.0) || !(high > 0.0))
        throw InvalidArgument("laminate phases must be positive");
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw InvalidArgument("laminate fraction must lie in [0, 1]");
    if (!(direction.norm() > 0.0))
        throw InvalidArgument("laminate direction must be nonzero");
    const double harmonic = 1.0 / (fraction / low + (1.0 - fraction) / high);
    const double arithmetic = fraction * low + (1.0 - fraction) * high;
    const Eigen::Vector2d n = direction.normalized();
    const Eigen::Vector2d t(-n.y(), n.x());
    EffectiveTensor e;
    e.tensor = harmonic * n * n.transpose() + arithmetic * t * t.transpose();
    e.method = EffectiveMethod::analytic_laminate;
    return e;
}

EffectiveTensor laminate_effective(const GSequenceSpec& spec)
{
    return laminate_effective(spec.phase_low(), spec.phase_high(), spec.fraction, spec.direction);
}

Eigen::MatrixXd laminate_cell(double low, double high)
{
    Eigen::MatrixXd c(1, 2);
    c << low, high;
    return c;
}

Eigen::MatrixXd checkerboard_cell(double t)
{
    if (!(t > 0.0))
        throw InvalidArgument("checkerboard contrast must be positive");
    Eigen::MatrixXd c(2, 2);
    c << t, 1.0 / t, 1.0 / t, t;
    return c;
}

EffectiveTensor cell_problem_effective(const Eigen::MatrixXd& cell, int resolution)
{
    const auto my = static_cast<int>(cell.rows());
    const auto mx = static_cast<int>(cell.cols());
    if (mx < 1 || my < 1)
        throw InvalidArgument("cell image is empty");
    if ((cell.array() <= 0.0).any())
        throw InvalidArgument("cell conductivities must be positive");
    const int n = resolution;
    if (n < 2 || n % mx != 0 || n % my != 0 || n < 2 * mx || n < 2 * my)
        throw ResolutionError("cell resolution " + std::to_string(n) +
                              " does not resolve a " + std::to_string(my) + " x " +
                              std::to_string(mx) + " phase image");

    const double h = 1.0 / n;
    const double area = 0.5 * h * h;
    // local vertex offsets of the two triangles of a grid square
    const int off[2][3][2] = {{{0, 0}, {1, 0}, {1, 1}}, {{0, 0}, {1, 1}, {0, 1}}};
    Eigen::Matrix<double, 3, 2> grads[2];
    for (int k = 0; k < 2; ++k) {
        Eigen::Matrix3d m;
        for (int v = 0; v < 3; ++v)
            m.row(v) << 1.0, off[k][v][0] * h, off[k][v][1] * h;
        const Eigen::Matrix3d inv = m.inverse();
        grads[k] = inv.bottomRows<2>().transpose();
    }
    const auto node = [n](int i, int j) { return ((j % n + n) % n) * n + ((i % n + n) % n); };
    const auto sigma = [&](int i, int j) { return cell(j * my / n, i * mx / n); };

    const int nv = n * n;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(18) * nv);
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(nv, 2);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double s = sigma(i, j);
            for (int k = 0; k < 2; ++k) {
                int idx[3];
                for (int v = 0; v < 3; ++v)
                    idx[v] = node(i + off[k][v][0], j + off[k][v][1]);
                const Eigen::Matrix3d ke = area * s * grads[k] * grads[k].transpose();
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b)
                        trip.emplace_back(idx[a], idx[b], ke(a, b));
                    load.row(idx[a]) -= area * s * grads[k].row(a);
                }
            }
        }
    // node 0 is pinned; the periodic load sums to zero
    std::vector<Eigen::Triplet<double>> reduced;
    reduced.reserve(trip.size());
    for (const auto& t : trip)
        if (t.row() > 0 && t.col() > 0)
            reduced.emplace_back(t.row() - 1, t.col() - 1, t.value());
    SparseMatrix k(nv - 1, nv - 1);
    k.setFromTriplets(reduced.begin(), reduced.end());
    const SparseFactor factor(k, true);

    Eigen::Matrix2d eff = Eigen::Matrix2d::Zero();
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd chi = Eigen::VectorXd::Zero(nv);
        chi.tail(nv - 1) = factor.solve(load.col(c).tail(nv - 1));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                for (int kk = 0; kk < 2; ++kk) {
                    Eigen::Vector2d g = Eigen::Vector2d::Unit(c);
                    for (int v = 0; v < 3; ++v)
                        g += chi(node(i + off[kk][v][0], j + off[kk][v][1])) *
                             grads[kk].row(v).transpose();
                    eff.col(c) += area * sigma(i, j) * g;
                }
    }
    if (std::abs(eff(0, 1) - eff(1, 0)) > 1e-8 * eff.norm())
        throw SolverError("cell problem produced a nonsymmetric effective tensor",
                          std::abs(eff(0, 1) - eff(1, 0)));
    EffectiveTensor e;
    e.tensor = 0.5 * (eff + eff.transpose());
    e.method = EffectiveMethod::cell_problem;
    return e;
}

std::vector<ConductivityField> build_g_sequence(const Mesh& mesh, const GSequenceSpec& spec)
{
    std::vector<ConductivityField> out;
    out.reserve(spec.periods.size());
    for (int n : spec.periods) {
        const LaminateSpec lam = spec.laminate(n);
        const double period = laminate_period(mesh, lam);
        if (period < 4.0 * mesh.h())
            throw ResolutionError("period count n = " + std::to_string(n) +
                                  " is not resolved: period " + std::to_string(period) +
                                  " < 4h = " + std::to_string(4.0 * mesh.h()));
        out.push_back(laminate_field(mesh, lam));
    }
    return out;
}

double high_phase_fraction(const Mesh& mesh, const ConductivityField& field, double high)
{
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        if (field[t](0, 0) == high)
            s += mesh.area(t);
    return s / mesh.total_area();
}

} // namespace eitlab
