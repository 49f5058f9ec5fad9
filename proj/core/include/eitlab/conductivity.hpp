#ifndef EITLAB_CONDUCTIVITY_HPP
#define EITLAB_CONDUCTIVITY_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eitlab/mesh.hpp"

namespace eitlab {

using Tensor = Eigen::Matrix2d;

enum class TensorKind { scalar, symmetric, general };

const char* to_string(TensorKind kind);

/// Declared ellipticity constants: A xi.xi >= alpha |xi|^2, ||A|| <= beta and
/// A^{-1} xi.xi >= |xi|^2 / beta_tilde.
struct Ellipticity {
    double alpha = 1.0;
    double beta = 1.0;
    double beta_tilde = 1.0;
};

/// Piecewise-constant conductivity: one 2x2 tensor per mesh triangle.
/// Construction validates every element against the declared kind and bounds
/// and throws InvalidArgument on violation. Immutable afterwards.
class ConductivityField {
public:
    ConductivityField(std::vector<Tensor> per_element, TensorKind kind, Ellipticity bounds,
                      std::string label);

    /// Detects the narrowest kind and the tightest bounds from the data.
    static ConductivityField from_tensors(std::vector<Tensor> per_element, std::string label);

    const Tensor& operator[](std::size_t t) const { return per_element_[t]; }
    const std::vector<Tensor>& tensors() const noexcept { return per_element_; }
    std::size_t size() const noexcept { return per_element_.size(); }
    TensorKind kind() const noexcept { return kind_; }
    bool is_symmetric() const noexcept { return kind_ != TensorKind::general; }
    const Ellipticity& bounds() const noexcept { return bounds_; }
    double alpha() const noexcept { return bounds_.alpha; }
    double beta() const noexcept { return bounds_.beta; }
    double beta_tilde() const noexcept { return bounds_.beta_tilde; }
    const std::string& label() const noexcept { return label_; }

private:
    std::vector<Tensor> per_element_;
    TensorKind kind_;
    Ellipticity bounds_;
    std::string label_;
};

// Class membership of a single tensor.
bool satisfies_ell1(const Tensor& a, double alpha, double beta);
/// Checked on the fixed set of 16 unit directions at angles 2 pi k / 16.
bool satisfies_ell2(const Tensor& a, double alpha, double beta_tilde);
bool in_class(const Tensor& a, TensorKind kind, const Ellipticity& bounds);
/// Nearest member of the symmetric (eigenvalue clipping) or scalar class in
/// [alpha, beta]; the general class is projected through the symmetric one.
Tensor project_to_class(const Tensor& a, TensorKind kind, double alpha, double beta);

double operator_norm(const Tensor& a);
/// Principal square root of a symmetric positive semidefinite tensor.
Tensor principal_sqrt(const Tensor& a);

ConductivityField scalar_field(const Mesh& mesh, double sigma);
ConductivityField scalar_field(const Mesh& mesh, const std::vector<double>& sigma,
                               std::string label = "scalar");
/// diag(a, b) on every element.
ConductivityField constant_tensor(const Mesh& mesh, double a, double b);

/// Two-phase layered scalar conductivity. Stripes are orthogonal to
/// `direction`; one period spans (domain extent along direction)/period_count
/// and holds the low phase on its first `volume_fraction` part.
struct LaminateSpec {
    double value_low = 1.0;
    double value_high = 1.0;
    double volume_fraction = 0.5;
    int period_count = 1;
    Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
};

/// Elements take the phase containing their centroid. Throws ResolutionError
/// when the period is shorter than 2h.
ConductivityField laminate_field(const Mesh& mesh, const LaminateSpec& spec);

/// Length of one laminate period on this mesh.
double laminate_period(const Mesh& mesh, const LaminateSpec& spec);

/// Sufficient condition for approximating a symmetric tensor with eigenvalues
/// (lambda_min, lambda_max) in [alpha, beta] by two-phase scalar laminates with
/// phases eps and 1/eps; planar case with theta = 1/3.
bool check_suffapprox(double lambda_min, double lambda_max, double alpha, double beta, double eps);

/// Boundary-fixing diffeomorphism of the closed domain with its Jacobian.
struct DiffeoSpec {
    std::function<Point(const Point&)> forward;
    std::function<Eigen::Matrix2d(const Point&)> jacobian;
};

DiffeoSpec identity_diffeo();
/// (r, theta) -> (r, theta + strength (1 - r)) on the unit disk.
DiffeoSpec radial_twist(double strength);

/// Damped Newton solve of forward(x) = y from `start`; InversionError after 50 steps.
Point invert_diffeo(const DiffeoSpec& diffeo, const Point& y, const Point& start);

/// Samples det J > 0 on a grid and checks boundary vertices stay fixed to 1e-12.
/// Returns an empty string when both hold.
std::string check_diffeo(const DiffeoSpec& diffeo, const Mesh& mesh, int grid = 32);

/// J A J^T / |det J| evaluated at x = forward^{-1}(centroid) of each target
/// element; A is looked up on `source_mesh`.
ConductivityField push_forward(const Mesh& source_mesh, const ConductivityField& field,
                               const DiffeoSpec& diffeo, const Mesh& target_mesh);

/// Sum over elements of area * ||A1 - A2|| (operator norm).
double l1_distance(const Mesh& mesh, const ConductivityField& a1, const ConductivityField& a2);
double linf_distance(const ConductivityField& a1, const ConductivityField& a2);

/// One line per element, "a11 a12 a21 a22", 17 significant digits.
void write_field(std::ostream& os, const ConductivityField& field);
std::vector<Tensor> read_field_tensors(std::istream& is);

} // namespace eitlab

#endif
