#include "eitlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "eitlab/boundary_ops.hpp"
#include "eitlab/conductivity.hpp"
#include "eitlab/errors.hpp"
#include "eitlab/fem.hpp"
#include "eitlab/functionals.hpp"
#include "eitlab/homogenization.hpp"
#include "eitlab/io.hpp"
#include "eitlab/thresholds.hpp"

namespace eitlab {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

void check(ExperimentOutput& out, std::string name, bool pass, std::string detail)
{
    out.assertions.push_back({std::move(name), pass, std::move(detail)});
}

std::string num(double v)
{
    return format_number(v);
}

bool strictly_decreasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1]))
            return false;
    return true;
}

ConductivityField inclusion_field(const Mesh& mesh, const Eigen::Vector2d& center, double radius,
                                  double inside, double outside = 1.0)
{
    std::vector<double> s(mesh.num_triangles(), outside);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        if ((mesh.centroid(t) - center).norm() < radius)
            s[t] = inside;
    return scalar_field(mesh, s, "inclusion(r=" + num(radius) + ")");
}

// Golden-section minimization of a unimodal function on [lo, hi].
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iterations)
{
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < iterations; ++i) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

} // namespace

Mesh MeshConfig::build() const
{
    return domain == DomainTag::disk ? generate_disk_mesh(level) : generate_square_mesh(n);
}

double fit_exponent(const std::vector<std::pair<double, double>>& rows)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : rows)
        if (x > 0.0 && y > 0.0)
            pts.emplace_back(std::log(x), std::log(y));
    if (pts.size() < 4)
        throw InsufficientData("exponent fit needs at least 4 rows with positive size and distance, got " +
                               std::to_string(pts.size()));
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (!(sxx > 0.0))
        throw InsufficientData("exponent fit needs at least two distinct sizes");
    return sxy / sxx;
}

bool ExperimentOutput::passed() const
{
    return !assertions.empty() &&
           std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

std::string ExperimentOutput::verdict_json() const
{
    OrderedJson j;
    j["experiment"] = experiment;
    j["passed"] = passed();
    OrderedJson list = OrderedJson::array();
    for (const auto& a : assertions)
        list.push_back(OrderedJson{{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    j["assertions"] = list;
    OrderedJson m = OrderedJson::object();
    for (const auto& [k, v] : metrics)
        m[k] = std::isfinite(v) ? OrderedJson(v) : OrderedJson(nullptr);
    j["metrics"] = m;
    OrderedJson n = OrderedJson::object();
    for (const auto& [k, v] : notes)
        n[k] = v;
    j["notes"] = n;
    return j.dump(2) + "\n";
}

void ExperimentOutput::write(const std::filesystem::path& dir) const
{
    for (const auto& [name, content] : files)
        write_text_file(dir / name, content);
    write_text_file(dir / (experiment + "_verdict.json"), verdict_json());
}

const std::string& ExperimentOutput::file(const std::string& name) const
{
    for (const auto& f : files)
        if (f.first == name)
            return f.second;
    throw InvalidArgument("experiment produced no file named " + name);
}

double ExperimentOutput::metric(const std::string& name) const
{
    for (const auto& m : metrics)
        if (m.first == name)
            return m.second;
    throw InvalidArgument("experiment recorded no metric named " + name);
}

ExperimentOutput run_gconv(const GconvConfig& config)
{
    namespace th = thresholds;
    ExperimentOutput out;
    out.experiment = "gconv";
    const Mesh mesh = config.mesh.build();
    const BoundaryBasis basis(mesh, config.basis_k);
    const GSequenceSpec spec = GSequenceSpec::for_target(config.a, config.b, config.periods);
    const ConductivityField target = constant_tensor(mesh, config.a, config.b);
    const BoundaryOperator nd_t = assemble_nd(mesh, target, basis);
    const BoundaryOperator dn_t = assemble_dn(mesh, target, basis);
    const MeasurementSet data = synthetic_measurements(nd_t);

    // Reference operators for the stronger semicontinuity diagnostic.
    const ConductivityField ref = scalar_field(mesh, std::sqrt(config.a * config.b));
    const BoundaryOperator nd_r = assemble_nd(mesh, ref, basis);
    const BoundaryOperator dn_r = assemble_dn(mesh, ref, basis);

    CsvWriter csv({"n", "d_l2l2", "d_natural_nd", "d_natural_dn", "J0", "J1", "J2"});
    std::vector<double> d;
    std::vector<double> nat_nd;
    std::vector<double> nat_dn;
    std::vector<double> j0;
    std::vector<double> j1;
    std::vector<double> j2s;
    std::vector<double> ref_nd;
    std::vector<double> ref_dn;
    for (int n : config.periods) {
        GSequenceSpec one = spec;
        one.periods = {n};
        std::vector<ConductivityField> seq;
        try {
            seq = build_g_sequence(mesh, one);
        } catch (const ResolutionError& e) {
            check(out, "resolved_n" + std::to_string(n), false, e.what());
            continue;
        }
        const BoundaryOperator nd = assemble_nd(mesh, seq[0], basis);
        const BoundaryOperator dn = assemble_dn(mesh, seq[0], basis);
        d.push_back(op_distance_l2l2(nd, nd_t));
        nat_nd.push_back(op_distance_natural(nd, nd_t, Space::Hminus_half, Space::Hplus_half));
        nat_dn.push_back(op_distance_natural(dn, dn_t, Space::Hplus_half, Space::Hminus_half));
        ref_nd.push_back(op_distance_natural(nd, nd_r, Space::Hminus_half, Space::Hplus_half));
        ref_dn.push_back(op_distance_natural(dn, dn_r, Space::Hplus_half, Space::Hminus_half));
        j0.push_back(eval_j0(mesh, seq[0], basis, data).value);
        j1.push_back(eval_j1(mesh, seq[0], basis, data).value);
        j2s.push_back(eval_j2(mesh, seq[0], basis, data).value);
        csv.row({static_cast<double>(n), d.back(), nat_nd.back(), nat_dn.back(), j0.back(), j1.back(), j2s.back()});
    }
    out.files.emplace_back("gconv.csv", csv.str());

    if (config.a == config.b) {
        const double worst = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
        check(out, "constant_target_noise", worst < th::kConstantTargetNoise,
              "max d_l2l2 = " + num(worst) + " (limit " + num(th::kConstantTargetNoise) + ")");
    } else if (d.size() >= 2) {
        check(out, "d_l2l2_strictly_decreasing", strictly_decreasing(d), "over " + std::to_string(d.size()) + " periods");
        const double ratio = d.back() / d.front();
        out.metrics.emplace_back("d_ratio_last_first", ratio);
        check(out, "d_l2l2_ratio", ratio < th::kGconvRatio,
              "d_last/d_first = " + num(ratio) + " (limit " + num(th::kGconvRatio) + ")");
        const double r0 = j0.back() / j0.front();
        const double r1 = j1.back() / j1.front();
        out.metrics.emplace_back("J0_ratio_last_first", r0);
        out.metrics.emplace_back("J1_ratio_last_first", r1);
        check(out, "J0_decay", r0 < th::kFunctionalDecayRatio, "J0 last/first = " + num(r0));
        check(out, "J1_decay", r1 < th::kFunctionalDecayRatio, "J1 last/first = " + num(r1));
    } else {
        check(out, "single_period_run", !d.empty(), "no trend assertion for fewer than 2 periods");
    }

    if (!d.empty()) {
        // Semicontinuity surrogate with the synthetic target data as Lambda.
        const double lim_nd = op_distance_natural(nd_t, nd_t, Space::Hminus_half, Space::Hplus_half);
        const double lim_dn = op_distance_natural(dn_t, dn_t, Space::Hplus_half, Space::Hminus_half);
        const double min_nd = *std::min_element(nat_nd.begin(), nat_nd.end());
        const double min_dn = *std::min_element(nat_dn.begin(), nat_dn.end());
        out.metrics.emplace_back("lsc_nd_limit", lim_nd);
        out.metrics.emplace_back("lsc_nd_min", min_nd);
        out.metrics.emplace_back("lsc_dn_limit", lim_dn);
        out.metrics.emplace_back("lsc_dn_min", min_dn);
        const double j2_lim = eval_j2(mesh, target, basis, data).value;
        const double j2_min = *std::min_element(j2s.begin(), j2s.end());
        out.metrics.emplace_back("J2_limit", j2_lim);
        out.metrics.emplace_back("J2_min", j2_min);
        check(out, "lsc_J2", j2_lim <= (1.0 + th::kLscSlack) * j2_min,
              num(j2_lim) + " <= (1 + " + num(th::kLscSlack) + ") * " + num(j2_min));
        check(out, "lsc_natural_nd", lim_nd <= (1.0 + th::kLscSlack) * min_nd,
              num(lim_nd) + " <= (1 + " + num(th::kLscSlack) + ") * " + num(min_nd));
        check(out, "lsc_natural_dn", lim_dn <= (1.0 + th::kLscSlack) * min_dn,
              num(lim_dn) + " <= (1 + " + num(th::kLscSlack) + ") * " + num(min_dn));

        // Same inequality with Lambda = operators of sqrt(ab) I; reported only.
        const double rl_nd = op_distance_natural(nd_t, nd_r, Space::Hminus_half, Space::Hplus_half);
        const double rl_dn = op_distance_natural(dn_t, dn_r, Space::Hplus_half, Space::Hminus_half);
        const double rm_nd = *std::min_element(ref_nd.begin(), ref_nd.end());
        const double rm_dn = *std::min_element(ref_dn.begin(), ref_dn.end());
        out.metrics.emplace_back("lsc_sqrt_ab_nd_limit", rl_nd);
        out.metrics.emplace_back("lsc_sqrt_ab_nd_min", rm_nd);
        out.metrics.emplace_back("lsc_sqrt_ab_dn_limit", rl_dn);
        out.metrics.emplace_back("lsc_sqrt_ab_dn_min", rm_dn);
        out.notes.emplace_back("lsc_sqrt_ab_nd", rl_nd <= (1.0 + th::kLscSlack) * rm_nd ? "holds" : "violated");
        out.notes.emplace_back("lsc_sqrt_ab_dn", rl_dn <= (1.0 + th::kLscSlack) * rm_dn ? "holds" : "violated");
    }
    return out;
}

ExperimentOutput run_nonexistence(const NonexistenceConfig& config)
{
    namespace th = thresholds;
    ExperimentOutput out;
    out.experiment = "nonexistence";
    if (config.a == config.b) {
        check(out, "applicable", false,
              "FAIL-NOT-APPLICABLE: isotropic target, the constant sigma = " + num(config.a) +
                  " is a minimizer");
        return out;
    }
    if (config.grid_count < 3)
        throw InvalidArgument("nonexistence: grid needs at least 3 points");
    const GSequenceSpec spec = GSequenceSpec::for_target(config.a, config.b, config.periods);
    const double lo = config.grid_min.value_or(spec.phase_low());
    const double hi = config.grid_max.value_or(spec.phase_high());
    if (!(lo > 0.0 && lo < hi))
        throw InvalidArgument("nonexistence: sigma grid needs 0 < min < max");
    const double sqrt_ab = std::sqrt(config.a * config.b);

    const Mesh mesh = config.mesh.build();
    const BoundaryBasis basis(mesh, config.basis_k);
    const ConductivityField target = constant_tensor(mesh, config.a, config.b);
    const BoundaryOperator nd_t = assemble_nd(mesh, target, basis);
    const MeasurementSet data = synthetic_measurements(nd_t);

    // (i) laminate upper bounds
    CsvWriter lam({"n", "J0", "KN1_norm"});
    std::vector<double> lam_j0;
    for (const auto& field : build_g_sequence(mesh, spec)) {
        lam_j0.push_back(eval_j0(mesh, field, basis, data).value);
        const double kn1 =
            gap_norm_l2(assemble_gap(mesh, field, basis, nd_t, 1, GapSide::neumann));
        lam.row({static_cast<double>(spec.periods[lam_j0.size() - 1]), lam_j0.back(), kn1});
    }
    out.files.emplace_back("nonexistence_laminate.csv", lam.str());

    // (ii) constant scalars
    const auto j0_const = [&](double s) {
        return eval_j0(mesh, scalar_field(mesh, s), basis, data).value;
    };
    CsvWriter grid({"sigma", "J0"});
    std::vector<double> sig(static_cast<std::size_t>(config.grid_count));
    std::vector<double> val(sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i) {
        sig[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(sig.size() - 1);
        val[i] = j0_const(sig[i]);
        grid.row({sig[i], val[i]});
    }
    out.files.emplace_back("nonexistence_grid.csv", grid.str());
    const auto best = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
    const double grid_argmin = sig[best];
    const double grid_min = val[best];
    const auto [ref_argmin, ref_min] =
        golden_min(j0_const, sig[best > 0 ? best - 1 : 0], sig[std::min(best + 1, sig.size() - 1)], 30);
    const double scalar_min = std::min(grid_min, ref_min);

    // (iii) local minimizer on a coarse mesh
    const Mesh coarse = generate_disk_mesh(config.minimizer_level);
    const BoundaryBasis coarse_basis(coarse, config.minimizer_k);
    const MeasurementSet coarse_data =
        synthetic_measurements(assemble_nd(coarse, constant_tensor(coarse, config.a, config.b), coarse_basis));
    CsvWriter trace({"init", "step", "value"});
    double minimizer_best = std::numeric_limits<double>::infinity();
    for (double init : config.minimizer_inits) {
        const double s0 = std::clamp(init, lo, hi);
        const MinimizeResult r = minimize_scalar(coarse, coarse_basis, coarse_data, FunctionalKind::J0,
                                                 scalar_field(coarse, s0), lo, hi, config.minimizer_steps);
        for (std::size_t k = 0; k < r.trace.size(); ++k)
            trace.row({s0, static_cast<double>(k), r.trace[k]});
        minimizer_best = std::min(minimizer_best, r.trace.back());
    }
    out.files.emplace_back("nonexistence_minimizer.csv", trace.str());
    const double coarse_scalar_min =
        golden_min([&](double s) { return eval_j0(coarse, scalar_field(coarse, s), coarse_basis, coarse_data).value; },
                   lo, hi, 40)
            .second;

    out.metrics.emplace_back("laminate_J0_first", lam_j0.front());
    out.metrics.emplace_back("laminate_J0_last", lam_j0.back());
    out.metrics.emplace_back("grid_argmin", grid_argmin);
    out.metrics.emplace_back("grid_min", grid_min);
    out.metrics.emplace_back("refined_argmin", ref_argmin);
    out.metrics.emplace_back("refined_min", ref_min);
    out.metrics.emplace_back("tail_over_scalar_min", lam_j0.back() / scalar_min);
    out.metrics.emplace_back("minimizer_best", minimizer_best);
    out.metrics.emplace_back("coarse_scalar_min", coarse_scalar_min);

    check(out, "laminate_tail_below_scalar_min", lam_j0.back() < th::kNonexistenceFactor * scalar_min,
          "J0(n=" + std::to_string(spec.periods.back()) + ") = " + num(lam_j0.back()) + " vs " +
              num(th::kNonexistenceFactor) + " * " + num(scalar_min));
    const double rel = std::abs(grid_argmin - sqrt_ab) / sqrt_ab;
    check(out, "grid_argmin_near_sqrt_ab", rel <= th::kArgminRelative,
          "argmin " + num(grid_argmin) + ", relative offset " + num(rel));
    if (lam_j0.size() >= 2)
        check(out, "laminate_J0_decreases", lam_j0.back() < lam_j0.front(),
              num(lam_j0.back()) + " < " + num(lam_j0.front()));
    out.notes.emplace_back("minimizer", "coarse-mesh local descent; best J0 " + num(minimizer_best) +
                                            " vs coarse constant-scalar minimum " + num(coarse_scalar_min));
    return out;
}

ExperimentOutput run_pushforward(const PushforwardConfig& config)
{
    namespace th = thresholds;
    ExperimentOutput out;
    out.experiment = "pushforward";
    if (config.levels.empty())
        throw InvalidArgument("pushforward: no refinement levels given");
    const DiffeoSpec phi = radial_twist(config.twist);
    CsvWriter csv({"level", "h", "distance"});
    std::vector<double> dist;
    for (int level : config.levels) {
        const Mesh mesh = generate_disk_mesh(level);
        const std::string bad = check_diffeo(phi, mesh);
        if (!bad.empty()) {
            check(out, "diffeo_level" + std::to_string(level), false, bad);
            continue;
        }
        const BoundaryBasis basis(mesh, config.basis_k);
        const ConductivityField a = constant_tensor(mesh, config.a, config.b);
        const ConductivityField pa = push_forward(mesh, a, phi, mesh);
        dist.push_back(op_distance_l2l2(assemble_nd(mesh, a, basis), assemble_nd(mesh, pa, basis)));
        csv.row({static_cast<double>(level), mesh.h(), dist.back()});
    }
    out.files.emplace_back("pushforward.csv", csv.str());
    if (config.twist == 0.0) {
        const double worst = dist.empty() ? 0.0 : *std::max_element(dist.begin(), dist.end());
        check(out, "identity_map", worst <= th::kIdentityDistance, "max distance " + num(worst));
        return out;
    }
    if (dist.size() < 2) {
        check(out, "enough_levels", false, "need at least two levels for a trend");
        return out;
    }
    check(out, "distance_strictly_decreasing", strictly_decreasing(dist), "levels " + std::to_string(dist.size()));
    for (std::size_t i = 1; i < dist.size(); ++i) {
        const double r = dist[i] / dist[i - 1];
        out.metrics.emplace_back("ratio_level" + std::to_string(config.levels[i]), r);
        check(out, "ratio_level" + std::to_string(config.levels[i]), r <= th::kPushforwardRatio,
              "d_" + std::to_string(config.levels[i]) + "/d_" + std::to_string(config.levels[i - 1]) +
                  " = " + num(r));
    }
    return out;
}

ExperimentOutput run_continuity_sweep(const ContinuityConfig& config,
                                      std::vector<ContinuityResult>* results)
{
    namespace th = thresholds;
    ExperimentOutput out;
    out.experiment = "continuity_sweep";
    const Mesh mesh = config.mesh.build();
    const BoundaryBasis basis(mesh, config.basis_k);
    const ConductivityField base = scalar_field(mesh, 1.0);
    const BoundaryOperator nd0 = assemble_nd(mesh, base, basis);

    CsvWriter csv({"family", "size", "distance"});
    ContinuityResult linf{"linf_scaling", {}, 0.0, {}, {}, {}};
    for (double t : config.linf_t) {
        const ConductivityField a = scalar_field(mesh, 1.0 + t);
        const double size = linf_distance(a, base);
        const double dist = op_distance_l2l2(assemble_nd(mesh, a, basis), nd0);
        linf.rows.emplace_back(size, dist);
        csv.row(std::vector<std::string>{linf.family, num(size), num(dist)});
    }
    ContinuityResult l1{"l1_inclusion", {}, 0.0, {}, {}, {}};
    for (double r : config.l1_radii) {
        const ConductivityField a =
            inclusion_field(mesh, config.bump_center, r, 1.0 + config.bump_height);
        const double size = l1_distance(mesh, a, base);
        const double dist = op_distance_l2l2(assemble_nd(mesh, a, basis), nd0);
        l1.rows.emplace_back(size, dist);
        csv.row(std::vector<std::string>{l1.family, num(size), num(dist)});
    }
    out.files.emplace_back("continuity_sweep.csv", csv.str());

    linf.fitted_exponent = fit_exponent(linf.rows);
    l1.fitted_exponent = fit_exponent(l1.rows);
    out.metrics.emplace_back("linf_exponent", linf.fitted_exponent);
    out.metrics.emplace_back("l1_exponent", l1.fitted_exponent);
    check(out, "linf_lipschitz",
          linf.fitted_exponent >= th::kLinfExponentLow && linf.fitted_exponent <= th::kLinfExponentHigh,
          "exponent " + num(linf.fitted_exponent));
    check(out, "l1_holder", l1.fitted_exponent > 0.0 && l1.fitted_exponent <= th::kL1ExponentHigh,
          "exponent " + num(l1.fitted_exponent));
    out.notes.emplace_back("meyers", "Q1 and the conjugate exponents p, q are not computed");
    if (results) {
        results->push_back(linf);
        results->push_back(l1);
    }
    return out;
}

ExperimentOutput run_electrode_stability(const ElectrodeStabilityConfig& config)
{
    namespace th = thresholds;
    ExperimentOutput out;
    out.experiment = "electrode_stability";
    const Mesh mesh = config.mesh.build();
    const BoundaryBasis basis(mesh, config.basis_k);
    const ConductivityField base = scalar_field(mesh, 1.0);
    const CemSolver solver(mesh, base, config.electrodes);
    const Eigen::MatrixXd r0 = resistance_matrix(solver);
    const BoundaryOperator nd0 = assemble_nd(mesh, base, basis);
    const double rnorm = r0.norm();
    const auto spectral = [](const Eigen::MatrixXd& m) {
        return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    };

    const double asym = (r0 - r0.transpose()).norm() / rnorm;
    const double null = (r0 * Eigen::VectorXd::Ones(r0.cols())).norm() / rnorm;
    out.metrics.emplace_back("R_asymmetry", asym);
    out.metrics.emplace_back("R_null_defect", null);
    check(out, "R_symmetric", asym <= th::kResistanceStructure, "||R - R^T|| / ||R|| = " + num(asym));
    check(out, "R_null_vector", null <= th::kResistanceStructure, "||R 1|| / ||R|| = " + num(null));

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;
    double worst_power = std::numeric_limits<double>::infinity();
    for (int s = 0; s < config.passivity_samples; ++s) {
        Eigen::VectorXd i(r0.cols());
        for (Eigen::Index k = 0; k < i.size(); ++k)
            i(k) = normal(rng);
        i.array() -= i.mean();
        worst_power = std::min(worst_power, i.dot(r0 * i) / i.squaredNorm());
    }
    out.metrics.emplace_back("min_power_ratio", worst_power);
    check(out, "passivity", worst_power >= -1e-12 * spectral(r0),
          std::to_string(config.passivity_samples) + " patterns, min I.RI/|I|^2 = " + num(worst_power));

    Eigen::VectorXd pattern = Eigen::VectorXd::Zero(r0.cols());
    pattern(0) = 1.0;
    pattern(pattern.size() - 1) = -1.0;
    const CemSolution probe = solver.solve(pattern);
    out.metrics.emplace_back("uexp_defect", probe.uexp_defect);
    out.notes.emplace_back("uexp", probe.uexp_flagged ? "flagged: int u over e_l differs from V_l"
                                                      : "consistent");

    // identical fields
    {
        const auto [dr, dnd] = cem_stability_probe(mesh, base, base, config.electrodes, basis);
        check(out, "identical_fields", dr <= 1e-10 && dnd <= 1e-10,
              "dR = " + num(dr) + ", dND = " + num(dnd));
    }

    CsvWriter csv({"id", "dR", "dND", "ratio"});
    std::vector<double> ratios;
    const auto add = [&](const std::string& id, const ConductivityField& a) {
        const double dr = spectral(resistance_matrix(mesh, a, config.electrodes) - r0);
        const double dnd = op_distance_l2l2(assemble_nd(mesh, a, basis), nd0);
        const double ratio = dr / dnd;
        ratios.push_back(ratio);
        csv.row(std::vector<std::string>{id, num(dr), num(dnd), num(ratio)});
    };
    for (double t : config.scalings)
        add("scale_" + num(t), scalar_field(mesh, 1.0 + t));
    for (std::size_t k = 0; k < config.inclusions.size(); ++k) {
        const Inclusion& inc = config.inclusions[k];
        add("inclusion_" + std::to_string(k), inclusion_field(mesh, inc.center, inc.radius, inc.value));
    }
    // Laminate against its G-limit: joins the family, and is compared with the
    // line (1 + margin) * C * ||dND|| where C is the largest ratio of the rest.
    std::optional<double> lam_ratio;
    double family_max = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    if (config.laminate_n) {
        const GSequenceSpec spec =
            GSequenceSpec::for_target(config.laminate_a, config.laminate_b, {*config.laminate_n});
        const ConductivityField lam = build_g_sequence(mesh, spec).front();
        const ConductivityField lim = constant_tensor(mesh, config.laminate_a, config.laminate_b);
        const auto [dr, dnd] = cem_stability_probe(mesh, lam, lim, config.electrodes, basis);
        lam_ratio = dr / dnd;
        ratios.push_back(*lam_ratio);
        csv.row(std::vector<std::string>{"laminate_" + std::to_string(*config.laminate_n), num(dr), num(dnd),
                                         num(*lam_ratio)});
        out.metrics.emplace_back("laminate_dR", dr);
        out.metrics.emplace_back("laminate_dND", dnd);
        out.metrics.emplace_back("laminate_line", (1.0 + th::kLaminateLine) * family_max * dnd);
        out.notes.emplace_back("laminate_line", *lam_ratio <= (1.0 + th::kLaminateLine) * family_max
                                                     ? "below"
                                                     : "above");
    }
    out.files.emplace_back("electrode_stability.csv", csv.str());
    if (ratios.empty()) {
        check(out, "family_nonempty", false, "no perturbations configured");
        return out;
    }
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    out.metrics.emplace_back("ratio_min", lo);
    out.metrics.emplace_back("ratio_max", hi);
    check(out, "ratios_positive", lo > 0.0 && std::isfinite(hi), "min ratio " + num(lo));
    check(out, "ratio_spread", hi / lo <= th::kStabilitySpread,
          "max/min = " + num(hi / lo) + " (limit " + num(th::kStabilitySpread) + ")");

    return out;
}

ExperimentOutput run_spectrum(const SpectrumConfig& config)
{
    namespace th = thresholds;
    ExperimentOutput out;
    out.experiment = "spectrum";
    if (config.mesh.domain != DomainTag::disk)
        throw InvalidArgument("spectrum: the separation-of-variables reference needs the disk");
    const Mesh mesh = config.mesh.build();
    const BoundaryBasis basis(mesh, config.basis_k);
    const ConductivityField a = scalar_field(mesh, config.sigma);
    const BoundaryOperator nd = assemble_nd(mesh, a, basis);
    const BoundaryOperator dn = assemble_dn(mesh, a, basis);
    const auto eig = [&](const BoundaryOperator& op) {
        const Eigen::MatrixXd f = op.form();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (f + f.transpose()), op.gram,
                                                                     Eigen::EigenvaluesOnly);
        return Eigen::VectorXd(es.eigenvalues());
    };
    const Eigen::VectorXd end = eig(nd); // ascending
    const Eigen::VectorXd edn = eig(dn);
    const int n = basis.size();
    CsvWriter csv({"operator", "k", "eigenvalue", "reference", "relative_error"});
    double worst_nd = 0.0;
    double worst_dn = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = BoundaryBasis::frequency(i);
        const double ref = 1.0 / (config.sigma * k);
        const double v = end(n - 1 - i);
        const double err = std::abs(v - ref) / ref;
        worst_nd = std::max(worst_nd, err);
        csv.row(std::vector<std::string>{"nd", std::to_string(k), num(v), num(ref), num(err)});
    }
    for (int i = 0; i < n; ++i) {
        const int k = BoundaryBasis::frequency(i);
        const double ref = config.sigma * k;
        const double v = edn(i);
        const double err = std::abs(v - ref) / ref;
        worst_dn = std::max(worst_dn, err);
        csv.row(std::vector<std::string>{"dn", std::to_string(k), num(v), num(ref), num(err)});
    }
    out.files.emplace_back("spectrum.csv", csv.str());
    out.metrics.emplace_back("worst_nd_relative_error", worst_nd);
    out.metrics.emplace_back("worst_dn_relative_error", worst_dn);
    check(out, "nd_spectrum", worst_nd <= th::kSpectrumRelative, "worst relative error " + num(worst_nd));
    check(out, "dn_spectrum", worst_dn <= th::kSpectrumRelative, "worst relative error " + num(worst_dn));
    return out;
}

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"gconv", "nonexistence", "pushforward",
                                                "continuity_sweep", "electrode_stability", "spectrum"};
    return names;
}

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

MeshConfig parse_mesh(const Json& root)
{
    if (!root.contains("mesh"))
        throw InvalidArgument("config is missing the 'mesh' block");
    const Json& m = root.at("mesh");
    MeshConfig c;
    const std::string domain = get_or<std::string>(m, "domain", "disk");
    if (domain == "disk") {
        c.domain = DomainTag::disk;
        if (!m.contains("level"))
            throw InvalidArgument("disk mesh config needs 'level'");
        c.level = m.at("level").get<int>();
    } else if (domain == "square") {
        c.domain = DomainTag::square;
        if (!m.contains("n"))
            throw InvalidArgument("square mesh config needs 'n'");
        c.n = m.at("n").get<int>();
    } else {
        throw InvalidArgument("unknown mesh domain '" + domain + "'");
    }
    return c;
}

std::pair<double, double> parse_target(const Json& root, double a, double b)
{
    if (!root.contains("target"))
        return {a, b};
    const auto t = root.at("target").get<std::vector<double>>();
    if (t.size() != 2)
        throw InvalidArgument("'target' must be [a, b]");
    return {t[0], t[1]};
}

Inclusion parse_inclusion(const Json& j)
{
    Inclusion inc;
    const auto c = get_or<std::vector<double>>(j, "center", {0.0, 0.0});
    if (c.size() != 2)
        throw InvalidArgument("inclusion center must have two coordinates");
    inc.center = Eigen::Vector2d(c[0], c[1]);
    inc.radius = get_or<double>(j, "radius", inc.radius);
    inc.value = get_or<double>(j, "value", inc.value);
    return inc;
}

ElectrodeConfig parse_electrodes(const Json& j)
{
    ElectrodeConfig e;
    if (j.contains("count")) {
        e = equal_electrodes(j.at("count").get<int>(), j.at("width").get<double>(),
                             j.at("impedance").get<double>(), get_or<double>(j, "offset", 0.0));
    } else {
        for (const auto& arc : j.at("arcs")) {
            const auto v = arc.get<std::vector<double>>();
            if (v.size() != 2)
                throw InvalidArgument("electrode arcs are [start, end] pairs");
            e.arcs.push_back({v[0], v[1]});
        }
        e.impedances = j.at("impedances").get<std::vector<double>>();
        const auto [mn, mx] = std::minmax_element(e.impedances.begin(), e.impedances.end());
        e.z1 = get_or<double>(j, "Z1", e.impedances.empty() ? 0.0 : *mn);
        e.z2 = get_or<double>(j, "Z2", e.impedances.empty() ? 0.0 : *mx);
    }
    validate(e);
    return e;
}

ExperimentOutput dispatch(const Json& root, const std::string& name)
{
    if (name == "gconv") {
        GconvConfig c;
        c.mesh = parse_mesh(root);
        c.basis_k = get_or<int>(root, "basis_K", c.basis_k);
        std::tie(c.a, c.b) = parse_target(root, c.a, c.b);
        c.periods = get_or<std::vector<int>>(root, "periods", c.periods);
        return run_gconv(c);
    }
    if (name == "nonexistence") {
        NonexistenceConfig c;
        c.mesh = parse_mesh(root);
        c.basis_k = get_or<int>(root, "basis_K", c.basis_k);
        std::tie(c.a, c.b) = parse_target(root, c.a, c.b);
        c.periods = get_or<std::vector<int>>(root, "periods", c.periods);
        if (root.contains("sigma_grid")) {
            const Json& g = root.at("sigma_grid");
            c.grid_count = get_or<int>(g, "count", c.grid_count);
            if (g.contains("min"))
                c.grid_min = g.at("min").get<double>();
            if (g.contains("max"))
                c.grid_max = g.at("max").get<double>();
        }
        if (root.contains("minimizer")) {
            const Json& m = root.at("minimizer");
            c.minimizer_level = get_or<int>(m, "level", c.minimizer_level);
            c.minimizer_k = get_or<int>(m, "basis_K", c.minimizer_k);
            c.minimizer_steps = get_or<int>(m, "steps", c.minimizer_steps);
            c.minimizer_inits = get_or<std::vector<double>>(m, "inits", c.minimizer_inits);
        }
        return run_nonexistence(c);
    }
    if (name == "pushforward") {
        PushforwardConfig c;
        c.levels = get_or<std::vector<int>>(root, "levels", c.levels);
        c.basis_k = get_or<int>(root, "basis_K", c.basis_k);
        c.twist = get_or<double>(root, "twist", c.twist);
        std::tie(c.a, c.b) = parse_target(root, c.a, c.b);
        return run_pushforward(c);
    }
    if (name == "continuity_sweep") {
        ContinuityConfig c;
        c.mesh = parse_mesh(root);
        c.basis_k = get_or<int>(root, "basis_K", c.basis_k);
        c.linf_t = get_or<std::vector<double>>(root, "linf_t", c.linf_t);
        c.l1_radii = get_or<std::vector<double>>(root, "l1_radii", c.l1_radii);
        c.bump_height = get_or<double>(root, "bump_height", c.bump_height);
        const auto center = get_or<std::vector<double>>(root, "bump_center", {0.0, 0.0});
        if (center.size() != 2)
            throw InvalidArgument("bump_center must have two coordinates");
        c.bump_center = Eigen::Vector2d(center[0], center[1]);
        return run_continuity_sweep(c);
    }
    if (name == "electrode_stability") {
        ElectrodeStabilityConfig c;
        c.mesh = parse_mesh(root);
        c.basis_k = get_or<int>(root, "basis_K", c.basis_k);
        if (root.contains("electrodes"))
            c.electrodes = parse_electrodes(root.at("electrodes"));
        c.scalings = get_or<std::vector<double>>(root, "scalings", c.scalings);
        if (root.contains("inclusions"))
            for (const auto& inc : root.at("inclusions"))
                c.inclusions.push_back(parse_inclusion(inc));
        c.passivity_samples = get_or<int>(root, "passivity_samples", c.passivity_samples);
        c.seed = get_or<std::uint64_t>(root, "seed", c.seed);
        if (root.contains("laminate_check")) {
            const Json& l = root.at("laminate_check");
            c.laminate_n = l.at("n").get<int>();
            std::tie(c.laminate_a, c.laminate_b) = parse_target(l, c.laminate_a, c.laminate_b);
        }
        return run_electrode_stability(c);
    }
    if (name == "spectrum") {
        SpectrumConfig c;
        c.mesh = parse_mesh(root);
        c.basis_k = get_or<int>(root, "basis_K", c.basis_k);
        c.sigma = get_or<double>(root, "sigma", c.sigma);
        return run_spectrum(c);
    }
    throw InvalidArgument("unknown experiment '" + name + "'");
}

} // namespace

ExperimentOutput run_experiment_json(const std::string& json_text, const std::string& experiment)
{
    Json root;
    try {
        root = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw InvalidArgument("config must be a JSON object");
    std::string name = experiment;
    if (root.contains("experiment")) {
        const auto declared = root.at("experiment").get<std::string>();
        if (!name.empty() && declared != name)
            throw InvalidArgument("config declares experiment '" + declared + "', command asked for '" +
                                  name + "'");
        name = declared;
    }
    if (name.empty())
        throw InvalidArgument("config does not name an experiment");
    try {
        return dispatch(root, name);
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("malformed config: ") + e.what());
    }
}

} // namespace eitlab
