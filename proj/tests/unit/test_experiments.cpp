#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "eitlab/errors.hpp"
#include "eitlab/experiments.hpp"

using namespace eitlab;

namespace {

std::size_t count_lines(const std::string& s)
{
    std::size_t n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

const Assertion* find(const ExperimentOutput& out, const std::string& name)
{
    for (const auto& a : out.assertions)
        if (a.name == name)
            return &a;
    return nullptr;
}

} // namespace

TEST(FitExponent, ExactPowerLaw)
{
    std::vector<std::pair<double, double>> rows;
    for (double x : {0.1, 0.2, 0.4, 0.8})
        rows.emplace_back(x, 3.0 * std::pow(x, 0.7));
    EXPECT_NEAR(fit_exponent(rows), 0.7, 1e-12);
}

TEST(FitExponent, ZeroRowsExcluded)
{
    std::vector<std::pair<double, double>> rows{{0.0, 0.0}, {0.1, 0.1}, {0.2, 0.2}, {0.4, 0.4}, {0.8, 0.8}};
    EXPECT_NEAR(fit_exponent(rows), 1.0, 1e-12);
    rows.pop_back();
    EXPECT_THROW(fit_exponent(rows), InsufficientData);
}

TEST(Gconv, SinglePeriodHasNoTrendAssertion)
{
    GconvConfig c;
    c.mesh.level = 4;
    c.basis_k = 4;
    c.periods = {2};
    const ExperimentOutput out = run_gconv(c);
    EXPECT_EQ(count_lines(out.file("gconv.csv")), 2u);
    EXPECT_EQ(find(out, "d_l2l2_strictly_decreasing"), nullptr);
    EXPECT_EQ(find(out, "d_l2l2_ratio"), nullptr);
}

TEST(Gconv, ConstantTargetIsNoise)
{
    GconvConfig c;
    c.a = c.b = 1.5;
    const ExperimentOutput out = run_gconv(c);
    EXPECT_EQ(count_lines(out.file("gconv.csv")), 5u);
    const Assertion* a = find(out, "constant_target_noise");
    ASSERT_NE(a, nullptr);
    EXPECT_TRUE(a->pass) << a->detail;
}

TEST(Gconv, UnresolvedPeriodReportedPerN)
{
    GconvConfig c;
    c.mesh.level = 3;
    c.basis_k = 4;
    c.periods = {2, 64};
    const ExperimentOutput out = run_gconv(c);
    const Assertion* a = find(out, "resolved_n64");
    ASSERT_NE(a, nullptr);
    EXPECT_FALSE(a->pass);
    EXPECT_FALSE(out.passed());
}

TEST(Nonexistence, IsotropicTargetNotApplicable)
{
    NonexistenceConfig c;
    c.a = c.b = 2.0;
    const ExperimentOutput out = run_nonexistence(c);
    EXPECT_FALSE(out.passed());
    ASSERT_EQ(out.assertions.size(), 1u);
    EXPECT_NE(out.assertions[0].detail.find("FAIL-NOT-APPLICABLE"), std::string::npos);
}

TEST(Pushforward, IdentityMapIsExact)
{
    PushforwardConfig c;
    c.levels = {3, 4};
    c.twist = 0.0;
    const ExperimentOutput out = run_pushforward(c);
    EXPECT_TRUE(out.passed());
    const Assertion* a = find(out, "identity_map");
    ASSERT_NE(a, nullptr);
    EXPECT_TRUE(a->pass) << a->detail;
}

TEST(Spectrum, ScalingHalvesEigenvalues)
{
    SpectrumConfig c;
    c.mesh.level = 5;
    c.basis_k = 4;
    c.sigma = 2.0;
    const ExperimentOutput two = run_spectrum(c);
    c.sigma = 1.0;
    const ExperimentOutput one = run_spectrum(c);
    EXPECT_TRUE(two.passed());
    EXPECT_TRUE(one.passed());
    EXPECT_NEAR(two.metric("worst_nd_relative_error"), one.metric("worst_nd_relative_error"), 1e-10);
}

TEST(Spectrum, AliasingRefused)
{
    SpectrumConfig c;
    c.mesh.level = 3;
    c.basis_k = 9;
    EXPECT_THROW(run_spectrum(c), ResolutionError);
}

TEST(Continuity, ZeroPerturbationExcludedFromFit)
{
    ContinuityConfig c;
    c.mesh.level = 4;
    c.linf_t = {0.0, 0.01, 0.02, 0.04, 0.08};
    std::vector<ContinuityResult> results;
    const ExperimentOutput out = run_continuity_sweep(c, &results);
    ASSERT_EQ(results.size(), 2u);
    EXPECT_EQ(results[0].rows.front().second, 0.0);
    EXPECT_NEAR(results[0].fitted_exponent, 1.0, 0.1);
    EXPECT_FALSE(results[0].meyers_q1.has_value());
    for (const auto& r : results)
        for (const auto& [size, dist] : r.rows)
            EXPECT_GE(dist, 0.0);
}

TEST(Json, ConfigErrors)
{
    EXPECT_THROW(run_experiment_json("{not json"), InvalidArgument);
    EXPECT_THROW(run_experiment_json(R"({"experiment": "spectrum"})"), InvalidArgument);
    EXPECT_THROW(run_experiment_json(R"({"experiment": "warp", "mesh": {"level": 2}})"), InvalidArgument);
    EXPECT_THROW(run_experiment_json(R"({"mesh": {"level": 2}})"), InvalidArgument);
    EXPECT_THROW(run_experiment_json(R"({"experiment": "spectrum", "mesh": {"level": 4}})", "gconv"),
                 InvalidArgument);
    EXPECT_THROW(run_experiment_json(R"({"experiment": "spectrum", "mesh": {"domain": "disk"}})"),
                 InvalidArgument);
    EXPECT_THROW(run_experiment_json(R"({"experiment": "spectrum", "mesh": {"level": "six"}})"),
                 InvalidArgument);
}

TEST(Json, VerdictBlockAndDeterminism)
{
    const std::string cfg =
        R"({"experiment": "electrode_stability", "mesh": {"domain": "disk", "level": 4}, "basis_K": 4,
            "inclusions": [{"center": [0.2, 0.1], "radius": 0.3, "value": 1.5}], "seed": 5})";
    const ExperimentOutput a = run_experiment_json(cfg);
    const ExperimentOutput b = run_experiment_json(cfg, "electrode_stability");
    ASSERT_EQ(a.files.size(), b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i)
        EXPECT_EQ(a.files[i].second, b.files[i].second);
    EXPECT_EQ(a.verdict_json(), b.verdict_json());

    const auto v = nlohmann::json::parse(a.verdict_json());
    EXPECT_EQ(v["experiment"], "electrode_stability");
    EXPECT_EQ(v["passed"].get<bool>(), a.passed());
    ASSERT_TRUE(v["assertions"].is_array());
    for (const auto& item : v["assertions"]) {
        EXPECT_TRUE(item["name"].is_string());
        EXPECT_TRUE(item["pass"].is_boolean());
    }
    const std::string& csv = a.file("electrode_stability.csv");
    EXPECT_EQ(csv.rfind("id,dR,dND,ratio\n", 0), 0u);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Json, SeedChangesOnlyRandomProbes)
{
    const std::string base = R"({"experiment": "electrode_stability", "mesh": {"level": 4}, "basis_K": 4, "seed": )";
    const ExperimentOutput a = run_experiment_json(base + "1}");
    const ExperimentOutput b = run_experiment_json(base + "2}");
    EXPECT_EQ(a.file("electrode_stability.csv"), b.file("electrode_stability.csv"));
    EXPECT_NE(a.metric("min_power_ratio"), b.metric("min_power_ratio"));
}

TEST(Json, SquareDomainAccepted)
{
    const ExperimentOutput out = run_experiment_json(
        R"({"experiment": "continuity_sweep", "mesh": {"domain": "square", "n": 16}, "basis_K": 4,
            "bump_center": [0.5, 0.5], "l1_radii": [0.3, 0.2, 0.15, 0.1]})");
    EXPECT_EQ(out.experiment, "continuity_sweep");
    EXPECT_GT(out.metric("linf_exponent"), 0.9);
}
