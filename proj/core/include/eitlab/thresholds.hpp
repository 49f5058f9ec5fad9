#ifndef EITLAB_THRESHOLDS_HPP
#define EITLAB_THRESHOLDS_HPP

// Empirical thresholds used by the experiment assertions. Values marked
// "calibrated" were fixed after the oracle runs whose logs live in
// tests/oracle_logs/; changing one requires a new log next to the old one.

namespace eitlab::thresholds {

// Relative tolerance of the disk spectrum against 1/k and k.
// calibrated: oracle_logs/spectrum_level6.log (worst 0.26% at k = 8)
inline constexpr double kSpectrumRelative = 0.02;

// d_16 / d_2 along the laminate sequence for diag(1, 2), level-6 disk, K = 8.
// calibrated: oracle_logs/gconv_level6.log (observed 0.1685)
inline constexpr double kGconvRatio = 0.35;

// J0 and J1 final/initial ratio along the same sequence.
// calibrated: oracle_logs/gconv_level6.log (observed 0.0119 and 0.1427)
inline constexpr double kFunctionalDecayRatio = 0.35;

// Constant target: every laminate degenerates, d_l2l2 is solver noise.
inline constexpr double kConstantTargetNoise = 1e-3;

// Finite-sample slack of the lower-semicontinuity surrogate (relative).
// oracle_logs/gconv_level6.log: limit distance 0, sequence minima 0.0848 (N-D), 0.2333 (D-N)
inline constexpr double kLscSlack = 0.05;

// Laminate tail J0 against the best constant scalar J0.
// calibrated: oracle_logs/nonexistence_level6.log (observed 0.0272)
inline constexpr double kNonexistenceFactor = 0.1;
// Relative distance of the constant-scalar argmin from sqrt(ab).
// calibrated: oracle_logs/nonexistence_level6.log (grid argmin 1.349, 4.6%)
inline constexpr double kArgminRelative = 0.05;

// Push-forward distance ratio between consecutive levels.
// calibrated: oracle_logs/pushforward.log (observed 0.276, 0.258)
inline constexpr double kPushforwardRatio = 0.7;
// s = 0: identity map, distances are round-off.
inline constexpr double kIdentityDistance = 1e-10;

// Fitted exponents of the continuity sweep.
inline constexpr double kLinfExponentLow = 0.9;
inline constexpr double kLinfExponentHigh = 1.1;
inline constexpr double kL1ExponentHigh = 1.05;

// max/min of ||dR|| / ||dND|| over the electrode perturbation family.
// calibrated: oracle_logs/electrode_stability_level6.log (observed 1.36)
inline constexpr double kStabilitySpread = 4.0;
inline constexpr double kResistanceStructure = 1e-8;
// Margin over the measured constant for the laminate-vs-limit check.
inline constexpr double kLaminateLine = 0.1;

} // namespace eitlab::thresholds

#endif
