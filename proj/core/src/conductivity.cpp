#include "eitlab/conductivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "eitlab/errors.hpp"

namespace eitlab {

namespace {

constexpr double kSlack = 1e-12;
constexpr int kProbeDirections = 16;

bool le(double x, double y)
{
    return x <= y + kSlack * std::max(std::abs(x), std::abs(y));
}

Eigen::Vector2d sym_eigenvalues(const Tensor& a)
{
    const Tensor s = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Tensor> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

const char* to_string(TensorKind kind)
{
    switch (kind) {
    case TensorKind::scalar:
        return "scalar";
    case TensorKind::symmetric:
        return "symmetric";
    case TensorKind::general:
        return "general";
    }
    return "?";
}

bool satisfies_ell1(const Tensor& a, double alpha, double beta)
{
    return le(alpha, sym_eigenvalues(a)(0)) && le(operator_norm(a), beta);
}

bool satisfies_ell2(const Tensor& a, double alpha, double beta_tilde)
{
    const double det = a.determinant();
    if (!(std::abs(det) > 0.0))
        return false;
    const Tensor inv = a.inverse();
    for (int k = 0; k < kProbeDirections; ++k) {
        const double t = 2.0 * std::numbers::pi * k / kProbeDirections;
        const Eigen::Vector2d xi(std::cos(t), std::sin(t));
        if (!le(alpha, xi.dot(a * xi)) || !le(1.0 / beta_tilde, xi.dot(inv * xi)))
            return false;
    }
    return true;
}

bool in_class(const Tensor& a, TensorKind kind, const Ellipticity& b)
{
    switch (kind) {
    case TensorKind::scalar:
        return a(0, 1) == 0.0 && a(1, 0) == 0.0 && a(0, 0) == a(1, 1) && le(b.alpha, a(0, 0)) &&
               le(a(0, 0), b.beta);
    case TensorKind::symmetric: {
        if (std::abs(a(0, 1) - a(1, 0)) > kSlack * a.norm())
            return false;
        const auto ev = sym_eigenvalues(a);
        return le(b.alpha, ev(0)) && le(ev(1), b.beta);
    }
    case TensorKind::general:
        return satisfies_ell2(a, b.alpha, b.beta_tilde);
    }
    return false;
}

Tensor project_to_class(const Tensor& a, TensorKind kind, double alpha, double beta)
{
    if (kind == TensorKind::scalar) {
        const double s = std::clamp(0.5 * a.trace(), alpha, beta);
        return s * Tensor::Identity();
    }
    const Tensor s = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Tensor> es(s);
    Eigen::Vector2d ev = es.eigenvalues();
    if (ev(0) >= alpha && ev(1) <= beta)
        return s;
    for (int i = 0; i < 2; ++i)
        ev(i) = std::clamp(ev(i), alpha, beta);
    Tensor p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    p(1, 0) = p(0, 1);
    return p;
}

double operator_norm(const Tensor& a)
{
    Eigen::JacobiSVD<Tensor> svd(a);
    return svd.singularValues()(0);
}

Tensor principal_sqrt(const Tensor& a)
{
    Eigen::SelfAdjointEigenSolver<Tensor> es(0.5 * (a + a.transpose()));
    const Eigen::Vector2d r = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
}

ConductivityField::ConductivityField(std::vector<Tensor> per_element, TensorKind kind,
                                     Ellipticity bounds, std::string label)
    : per_element_(std::move(per_element)), kind_(kind), bounds_(bounds), label_(std::move(label))
{
    if (!(bounds_.alpha > 0.0) || !le(bounds_.alpha, bounds_.beta) ||
        !le(bounds_.alpha, bounds_.beta_tilde))
        throw InvalidArgument("ellipticity bounds need 0 < alpha <= beta, beta_tilde");
    for (std::size_t t = 0; t < per_element_.size(); ++t)
        if (!in_class(per_element_[t], kind_, bounds_))
            throw InvalidArgument("element " + std::to_string(t) + " of field '" + label_ +
                                  "' is outside the declared " + to_string(kind_) + " class");
}

ConductivityField ConductivityField::from_tensors(std::vector<Tensor> per_element, std::string label)
{
    if (per_element.empty())
        throw InvalidArgument("empty conductivity field");
    bool scalar = true;
    bool symmetric = true;
    double alpha = std::numeric_limits<double>::max();
    double beta = 0.0;
    double beta_tilde = 0.0;
    for (const auto& a : per_element) {
        if (!(a(0, 1) == 0.0 && a(1, 0) == 0.0 && a(0, 0) == a(1, 1)))
            scalar = false;
        if (a(0, 1) != a(1, 0))
            symmetric = false;
        alpha = std::min(alpha, sym_eigenvalues(a)(0));
        beta = std::max(beta, operator_norm(a));
        if (std::abs(a.determinant()) > 0.0)
            beta_tilde = std::max(beta_tilde, 1.0 / sym_eigenvalues(a.inverse())(0));
    }
    if (!(alpha > 0.0))
        throw InvalidArgument("field '" + label + "' is not elliptic (min eigenvalue " +
                              fmt_double(alpha) + ")");
    const TensorKind kind =
        scalar ? TensorKind::scalar : (symmetric ? TensorKind::symmetric : TensorKind::general);
    if (kind != TensorKind::general)
        beta_tilde = beta;
    return ConductivityField(std::move(per_element), kind, {alpha, beta, beta_tilde},
                             std::move(label));
}

ConductivityField scalar_field(const Mesh& mesh, double sigma)
{
    if (!(sigma > 0.0))
        throw InvalidArgument("scalar conductivity must be positive");
    return ConductivityField(std::vector<Tensor>(mesh.num_triangles(), sigma * Tensor::Identity()),
                             TensorKind::scalar, {sigma, sigma, sigma},
                             "scalar(" + fmt_double(sigma) + ")");
}

ConductivityField scalar_field(const Mesh& mesh, const std::vector<double>& sigma, std::string label)
{
    if (sigma.size() != mesh.num_triangles())
        throw InvalidArgument("scalar field needs one value per triangle");
    std::vector<Tensor> t;
    t.reserve(sigma.size());
    double lo = std::numeric_limits<double>::max();
    double hi = 0.0;
    for (double s : sigma) {
        if (!(s > 0.0))
            throw InvalidArgument("scalar conductivity must be positive");
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        t.push_back(s * Tensor::Identity());
    }
    return ConductivityField(std::move(t), TensorKind::scalar, {lo, hi, hi}, std::move(label));
}

ConductivityField constant_tensor(const Mesh& mesh, double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw InvalidArgument("constant_tensor needs a, b > 0");
    Tensor d = Tensor::Zero();
    d(0, 0) = a;
    d(1, 1) = b;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    return ConductivityField(std::vector<Tensor>(mesh.num_triangles(), d),
                             a == b ? TensorKind::scalar : TensorKind::symmetric, {lo, hi, hi},
                             "diag(" + fmt_double(a) + "," + fmt_double(b) + ")");
}

double laminate_period(const Mesh& mesh, const LaminateSpec& spec)
{
    const Eigen::Vector2d d = spec.direction.normalized();
    double lo = std::numeric_limits<double>::max();
    double hi = -lo;
    for (const auto& p : mesh.vertices()) {
        lo = std::min(lo, p.dot(d));
        hi = std::max(hi, p.dot(d));
    }
    return (hi - lo) / spec.period_count;
}

ConductivityField laminate_field(const Mesh& mesh, const LaminateSpec& spec)
{
    if (!(spec.value_low > 0.0) || !(spec.value_high > 0.0))
        throw InvalidArgument("laminate phase values must be positive");
    if (spec.value_low > spec.value_high)
        throw InvalidArgument("laminate needs value_low <= value_high");
    if (!(spec.volume_fraction > 0.0 && spec.volume_fraction < 1.0))
        throw InvalidArgument("laminate volume fraction must lie in (0, 1)");
    if (spec.period_count < 1)
        throw InvalidArgument("laminate period count must be positive");
    if (!(spec.direction.norm() > 0.0))
        throw InvalidArgument("laminate direction must be nonzero");

    const Eigen::Vector2d d = spec.direction.normalized();
    const double period = laminate_period(mesh, spec);
    if (period < 2.0 * mesh.h())
        throw ResolutionError("laminate period " + fmt_double(period) +
                              " is finer than twice the mesh size " + fmt_double(mesh.h()) +
                              " (n = " + std::to_string(spec.period_count) + ")");
    double lo = std::numeric_limits<double>::max();
    for (const auto& p : mesh.vertices())
        lo = std::min(lo, p.dot(d));

    std::vector<double> sigma(mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double s = (mesh.centroid(t).dot(d) - lo) / period;
        const double frac = s - std::floor(s);
        sigma[t] = frac < spec.volume_fraction ? spec.value_low : spec.value_high;
    }
    return scalar_field(mesh, sigma,
                        "laminate(" + fmt_double(spec.value_low) + "," + fmt_double(spec.value_high) +
                            ",n=" + std::to_string(spec.period_count) + ")");
}

bool check_suffapprox(double lambda_min, double lambda_max, double alpha, double beta, double eps)
{
    if (!(eps > 0.0 && eps < 1.0) || !(alpha > 0.0))
        return false;
    constexpr double n = 2.0;
    constexpr double theta = 1.0 / 3.0;
    const double a1 = eps;
    const double b1 = 1.0 / eps;
    const double lp = theta * a1 + (1.0 - theta) * b1;
    const double lm = 1.0 / (theta / a1 + (1.0 - theta) / b1);
    const double lam[2] = {lambda_min, lambda_max};

    // lambda_- <= alpha <= lambda_i <= beta <= lambda_+
    if (!(le(lm, alpha) && le(alpha, lambda_min) && le(lambda_min, lambda_max) &&
          le(lambda_max, beta) && le(beta, lp)))
        return false;

    // Lower chain; every denominator must be positive.
    if (!(lambda_min > a1 && alpha > a1 && lm > a1 && lp > a1))
        return false;
    double s = 0.0;
    for (double l : lam)
        s += 1.0 / (l - a1);
    const double r2b = n / (alpha - a1);
    const double r2c = 1.0 / (lm - a1);
    const double r2d = r2c + (n - 1.0) / (lp - a1);
    if (!(le(s, r2b) && le(r2b, r2c) && le(r2c, r2d)))
        return false;

    // Upper chain.
    if (!(b1 > lambda_max && b1 > beta && b1 > lp && b1 > lm))
        return false;
    double u = 0.0;
    for (double l : lam)
        u += 1.0 / (b1 - l);
    const double r3b = n / (b1 - beta);
    const double r3c = (n - 1.0) / (b1 - lp);
    const double r3d = 1.0 / (b1 - lm) + (n - 1.0) / (b1 - lp);
    return le(u, r3b) && le(r3b, r3c) && le(r3c, r3d);
}

DiffeoSpec identity_diffeo()
{
    return {[](const Point& p) { return p; },
            [](const Point&) -> Eigen::Matrix2d { return Eigen::Matrix2d::Identity(); }};
}

DiffeoSpec radial_twist(double strength)
{
    auto rot = [](double t) {
        Eigen::Matrix2d r;
        r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        return r;
    };
    DiffeoSpec d;
    d.forward = [strength, rot](const Point& p) -> Point {
        return rot(strength * (1.0 - p.norm())) * p;
    };
    d.jacobian = [strength, rot](const Point& p) -> Eigen::Matrix2d {
        const double r = p.norm();
        const Eigen::Matrix2d rm = rot(strength * (1.0 - r));
        if (r == 0.0)
            return rm;
        Eigen::Matrix2d quarter;
        quarter << 0.0, -1.0, 1.0, 0.0;
        const Eigen::Vector2d dr = rm * quarter * p;
        return rm - strength * dr * (p / r).transpose();
    };
    return d;
}

Point invert_diffeo(const DiffeoSpec& diffeo, const Point& y, const Point& start)
{
    constexpr int kMaxIter = 50;
    const double tol = 1e-14 * std::max(1.0, y.norm());
    Point x = start;
    Eigen::Vector2d res = diffeo.forward(x) - y;
    for (int it = 0; it < kMaxIter; ++it) {
        if (res.norm() <= tol)
            return x;
        const Eigen::Matrix2d j = diffeo.jacobian(x);
        const Eigen::Vector2d dx = j.partialPivLu().solve(res);
        double step = 1.0;
        Point xn = x - dx;
        Eigen::Vector2d rn = diffeo.forward(xn) - y;
        while (rn.norm() >= res.norm() && step > 1e-6) {
            step *= 0.5;
            xn = x - step * dx;
            rn = diffeo.forward(xn) - y;
        }
        if (rn.norm() >= res.norm())
            break;
        x = xn;
        res = rn;
    }
    if (res.norm() <= tol)
        return x;
    std::ostringstream msg;
    msg << "Newton inversion of the diffeomorphism failed at y = (" << y.x() << ", " << y.y()
        << "), residual " << res.norm();
    throw InversionError(msg.str());
}

std::string check_diffeo(const DiffeoSpec& diffeo, const Mesh& mesh, int grid)
{
    for (int v : mesh.boundary_vertices()) {
        const Point& p = mesh.vertices()[static_cast<std::size_t>(v)];
        if ((diffeo.forward(p) - p).norm() > 1e-12)
            return "boundary vertex " + std::to_string(v) + " is moved";
    }
    Eigen::Vector2d lo = mesh.vertices().front();
    Eigen::Vector2d hi = lo;
    for (const auto& p : mesh.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    for (int j = 0; j <= grid; ++j)
        for (int i = 0; i <= grid; ++i) {
            const Point p(lo.x() + (hi.x() - lo.x()) * i / grid, lo.y() + (hi.y() - lo.y()) * j / grid);
            if (mesh.tag() == DomainTag::disk && p.norm() > 1.0)
                continue;
            if (!(diffeo.jacobian(p).determinant() > 0.0))
                return "Jacobian determinant is not positive at (" + fmt_double(p.x()) + ", " +
                       fmt_double(p.y()) + ")";
        }
    return {};
}

ConductivityField push_forward(const Mesh& source_mesh, const ConductivityField& field,
                               const DiffeoSpec& diffeo, const Mesh& target_mesh)
{
    if (field.size() != source_mesh.num_triangles())
        throw InvalidArgument("push_forward: field does not match the source mesh");
    const PointLocator locator(source_mesh);
    std::vector<Tensor> out(target_mesh.num_triangles());
    for (std::size_t t = 0; t < target_mesh.num_triangles(); ++t) {
        const Point y = target_mesh.centroid(t);
        const Point x = invert_diffeo(diffeo, y, y);
        const Eigen::Matrix2d j = diffeo.jacobian(x);
        const Tensor& a = field[locator.locate(x)];
        Tensor p = j * a * j.transpose() / std::abs(j.determinant());
        if (field.is_symmetric())
            p(1, 0) = p(0, 1) = 0.5 * (p(0, 1) + p(1, 0));
        out[t] = p;
    }
    return ConductivityField::from_tensors(std::move(out), "push_forward(" + field.label() + ")");
}

double l1_distance(const Mesh& mesh, const ConductivityField& a1, const ConductivityField& a2)
{
    if (a1.size() != mesh.num_triangles() || a2.size() != mesh.num_triangles())
        throw InvalidArgument("l1_distance: fields do not match the mesh");
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        s += mesh.area(t) * operator_norm(a1[t] - a2[t]);
    return s;
}

double linf_distance(const ConductivityField& a1, const ConductivityField& a2)
{
    if (a1.size() != a2.size())
        throw InvalidArgument("linf_distance: fields have different sizes");
    double m = 0.0;
    for (std::size_t t = 0; t < a1.size(); ++t)
        m = std::max(m, operator_norm(a1[t] - a2[t]));
    return m;
}

void write_field(std::ostream& os, const ConductivityField& field)
{
    char buf[160];
    for (const auto& a : field.tensors()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", a(0, 0), a(0, 1), a(1, 0), a(1, 1));
        os << buf;
    }
}

std::vector<Tensor> read_field_tensors(std::istream& is)
{
    std::vector<Tensor> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        Tensor a;
        std::string tok[4];
        if (!(ls >> tok[0] >> tok[1] >> tok[2] >> tok[3]))
            throw InvalidArgument("field dump: malformed line '" + line + "'");
        for (int k = 0; k < 4; ++k)
            a(k / 2, k % 2) = std::strtod(tok[k].c_str(), nullptr);
        out.push_back(a);
    }
    return out;
}

} // namespace eitlab
