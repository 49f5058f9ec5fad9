#ifndef EITLAB_EXPERIMENTS_HPP
#define EITLAB_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eitlab/electrodes.hpp"
#include "eitlab/mesh.hpp"

namespace eitlab {

struct MeshConfig {
    DomainTag domain = DomainTag::disk;
    int level = 6; // disk refinement level
    int n = 32; // square subdivisions

    Mesh build() const;
};

struct GconvConfig {
    MeshConfig mesh;
    int basis_k = 8;
    double a = 1.0;
    double b = 2.0;
    std::vector<int> periods{2, 4, 8, 16};
};

struct NonexistenceConfig {
    MeshConfig mesh;
    int basis_k = 8;
    double a = 1.0;
    double b = 2.0;
    std::vector<int> periods{2, 4, 8, 16};
    int grid_count = 64;
    // Defaults to the laminate phase range when unset.
    std::optional<double> grid_min;
    std::optional<double> grid_max;
    int minimizer_level = 2;
    int minimizer_k = 4;
    int minimizer_steps = 30;
    std::vector<double> minimizer_inits{1.0, 1.4142135623730951, 2.0};
};

struct PushforwardConfig {
    std::vector<int> levels{4, 5, 6};
    int basis_k = 8;
    double twist = 0.3;
    double a = 1.0;
    double b = 2.0;
};

struct Inclusion {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 0.3;
    double value = 2.0; // conductivity inside, background 1
};

struct ContinuityConfig {
    MeshConfig mesh;
    int basis_k = 8;
    std::vector<double> linf_t{0.01, 0.02, 0.04, 0.08};
    std::vector<double> l1_radii{0.4, 0.3, 0.2, 0.1};
    double bump_height = 1.0;
    Eigen::Vector2d bump_center = Eigen::Vector2d::Zero();
};

struct ElectrodeStabilityConfig {
    MeshConfig mesh;
    int basis_k = 8;
    ElectrodeConfig electrodes = equal_electrodes(4, 0.4, 0.1);
    std::vector<double> scalings{0.01, 0.02, 0.04};
    std::vector<Inclusion> inclusions;
    int passivity_samples = 100;
    std::uint64_t seed = 1;
    // Adds a laminate with this period count, measured against its G-limit
    // diag(a, b), to the perturbation family.
    std::optional<int> laminate_n;
    double laminate_a = 1.0;
    double laminate_b = 2.0;
};

struct SpectrumConfig {
    MeshConfig mesh;
    int basis_k = 8;
    double sigma = 1.0;
};

/// Log-log least-squares fit of distance against perturbation size.
struct ContinuityResult {
    std::string family;
    std::vector<std::pair<double, double>> rows; // (size, distance)
    double fitted_exponent = 0.0;
    // Meyers exponent Q1 and the conjugate pair p, q are not computed; these
    // stay empty and are reported as null.
    std::optional<double> meyers_q1;
    std::optional<double> conjugate_p;
    std::optional<double> conjugate_q;
};

/// Least-squares slope of log(distance) against log(size). Rows with a zero
/// size or distance are skipped; throws InsufficientData below 4 usable rows.
double fit_exponent(const std::vector<std::pair<double, double>>& rows);

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentOutput {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> files; // file name, contents
    std::vector<Assertion> assertions;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::pair<std::string, std::string>> notes;

    bool passed() const;
    /// Machine-readable verdict block, deterministic key order.
    std::string verdict_json() const;
    /// Writes every file plus "<experiment>_verdict.json" into `dir`.
    void write(const std::filesystem::path& dir) const;
    const std::string& file(const std::string& name) const;
    double metric(const std::string& name) const;
};

ExperimentOutput run_gconv(const GconvConfig& config);
ExperimentOutput run_nonexistence(const NonexistenceConfig& config);
ExperimentOutput run_pushforward(const PushforwardConfig& config);
ExperimentOutput run_continuity_sweep(const ContinuityConfig& config,
                                      std::vector<ContinuityResult>* results = nullptr);
ExperimentOutput run_electrode_stability(const ElectrodeStabilityConfig& config);
ExperimentOutput run_spectrum(const SpectrumConfig& config);

const std::vector<std::string>& experiment_names();

/// Parses a JSON config document and runs the experiment it names. A non-empty
/// `experiment` must match the document's "experiment" field when present.
/// Throws InvalidArgument on malformed or incomplete configs.
ExperimentOutput run_experiment_json(const std::string& json_text, const std::string& experiment = "");

} // namespace eitlab

#endif
