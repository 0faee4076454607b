#pragma once

#include "ancsp/joint_adaptive.hpp"
#include "ancsp/signal_core.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace ancsp {

/// The physical plant: primary path p_o (reference to error sensor) and
/// secondary path s_o (control source to error sensor).
struct PlantConfig {
    ImpulseResponse primary;
    ImpulseResponse secondary;

    int sample_rate() const noexcept { return primary.sample_rate(); }
    /// Throws InvalidInput when the two paths disagree on sample rate.
    void validate() const;
};

struct FixedControl {
    ImpulseResponse w;
};

/// Switches between two filters every `period` samples, starting with `first`.
struct AlternatingControl {
    ImpulseResponse first;
    ImpulseResponse second;
    std::size_t period = 1;
};

/// Control filter adapted by filtered-reference NLMS, with the reference
/// filtered through the identifier's current secondary-path estimate.
struct AdaptiveControl {
    ImpulseResponse initial;
    NlmsParams params;
};

using ControlPolicy = std::variant<FixedControl, AlternatingControl, AdaptiveControl>;
using ModelingAlgorithm = std::variant<NlmsParams, RlsParams>;

/// Identifier lengths; 0 means "same as the plant path".
struct IdentifierShape {
    std::size_t primary_length = 0;
    std::size_t secondary_length = 0;
};

struct SimOptions {
    /// Recorded into SimResult::seed, not used for any draw.
    std::uint64_t seed = 0;
    /// Attenuation is measured over the last min(window, iterations) samples.
    std::size_t attenuation_window = 10000;
    /// Log the control filter taps at every iteration (large for long runs).
    bool record_control_history = false;
};

struct SimResult {
    std::vector<double> e;         // physical error at the error sensor
    std::vector<double> e1;        // identifier residual
    std::vector<double> x2;        // control output fed to the identifier
    std::vector<double> mis_s_db;  // NaN when s_o has zero norm
    std::vector<double> mis_p_db;  // NaN when p_o has zero norm
    /// Error with the control output forced to zero (adaptive runs only).
    std::vector<double> e_uncontrolled;
    /// Control taps in force at each iteration, if requested.
    std::vector<std::vector<double>> control_history;

    ImpulseResponse p_hat;
    ImpulseResponse s_hat;
    ImpulseResponse w;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::optional<double> attenuation_db;
};

/// Identifies the joint model while the control filter follows a Fixed or
/// Alternating policy. At sample n:
///   x2(n) = sum_k w_n(k) x(n-k),   e(n) = (p_o * x)(n) + (s_o * x2)(n),
/// and the identifier consumes (x(n), x2(n), e(n)). Past x2 samples keep the
/// filter that produced them.
/// Throws InvalidInput for an AdaptiveControl policy or a short noise
/// record, Divergence if the identifier blows up.
SimResult run_modeling_experiment(const PlantConfig& plant, const ControlPolicy& policy,
                                  const ModelingAlgorithm& algorithm, const Signal& noise,
                                  std::size_t iterations, IdentifierShape shape = {},
                                  const SimOptions& options = {});

/// Runs control and identification at the same time. The control output
/// y(n) = w(n)^T x(n) drives the plant; w follows filtered-reference NLMS,
///   w <- w - mu e(n) f(n) / (f(n)^T f(n) + eps),
/// where f is the reference filtered by the live secondary-path estimate
/// (one new sample per step, older samples are not refiltered).
/// attenuation_db compares e with e_uncontrolled.
SimResult run_simultaneous(const PlantConfig& plant, const AdaptiveControl& control,
                           const ModelingAlgorithm& algorithm, const Signal& noise, std::size_t iterations,
                           IdentifierShape shape = {}, const SimOptions& options = {});

} // namespace ancsp
