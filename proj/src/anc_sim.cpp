#include "ancsp/anc_sim.hpp"

#include "ancsp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ancsp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Every filtering dot product in the loops goes through here so that
// equivalent configurations produce bit-identical traces.
double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

struct NlmsIdentifier {
    JointModelState state;
    NlmsParams params;

    double step(double x1, double x2, double d) { return nlms_step(state, params, x1, x2, d); }
    const JointModelState& model() const noexcept { return state; }
};

struct RlsIdentifier {
    RlsState state;
    RlsParams params;

    double step(double x1, double x2, double d) { return rls_step(state, params, x1, x2, d); }
    const JointModelState& model() const noexcept { return state.model(); }
};

using Identifier = std::variant<NlmsIdentifier, RlsIdentifier>;

Identifier make_identifier(const ModelingAlgorithm& algorithm, std::size_t L, std::size_t M, int sample_rate) {
    return std::visit(
        [&](const auto& params) -> Identifier {
            params.validate();
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, NlmsParams>) {
                return NlmsIdentifier{JointModelState(L, M, sample_rate), params};
            } else {
                return RlsIdentifier{RlsState(L, M, params, sample_rate), params};
            }
        },
        algorithm);
}

struct Shape {
    std::size_t l;
    std::size_t m;
};

Shape resolve_shape(const PlantConfig& plant, IdentifierShape shape) {
    return {shape.primary_length == 0 ? plant.primary.size() : shape.primary_length,
            shape.secondary_length == 0 ? plant.secondary.size() : shape.secondary_length};
}

void check_inputs(const PlantConfig& plant, const Signal& noise, std::size_t iterations) {
    plant.validate();
    if (noise.sample_rate() != plant.sample_rate()) {
        throw InvalidInput("noise sample rate does not match the plant");
    }
    if (noise.size() < iterations) {
        throw InvalidInput("noise has " + std::to_string(noise.size()) + " samples but " +
                           std::to_string(iterations) + " iterations were requested");
    }
}

// Per-iteration bookkeeping shared by both simulations.
class Recorder {
public:
    Recorder(const PlantConfig& plant, std::size_t iterations, SimResult& out)
        : s_o_(plant.secondary.taps()), p_o_(plant.primary.taps()),
          s_ok_(plant.secondary.norm() > 0.0), p_ok_(plant.primary.norm() > 0.0), out_(out) {
        out_.e.reserve(iterations);
        out_.e1.reserve(iterations);
        out_.x2.reserve(iterations);
        out_.mis_s_db.reserve(iterations);
        out_.mis_p_db.reserve(iterations);
    }

    void record(double e, double e1, double x2, const JointModelState& model) {
        out_.e.push_back(e);
        out_.e1.push_back(e1);
        out_.x2.push_back(x2);
        out_.mis_s_db.push_back(s_ok_ ? misalignment_db(s_o_, model.secondary_coefficients()) : kNaN);
        out_.mis_p_db.push_back(p_ok_ ? misalignment_db(p_o_, model.primary_coefficients()) : kNaN);
    }

private:
    std::span<const double> s_o_;
    std::span<const double> p_o_;
    bool s_ok_;
    bool p_ok_;
    SimResult& out_;
};

SimResult empty_result(const PlantConfig& plant, Shape shape, const ImpulseResponse& w, std::uint64_t seed) {
    return SimResult{{}, {}, {}, {}, {}, {}, {},
                     ImpulseResponse::zeros(shape.l, plant.sample_rate()),
                     ImpulseResponse::zeros(shape.m, plant.sample_rate()),
                     w, 0, seed, std::nullopt};
}

std::vector<double> padded(const ImpulseResponse& ir, std::size_t n) {
    std::vector<double> v(n, 0.0);
    std::copy(ir.taps().begin(), ir.taps().end(), v.begin());
    return v;
}

} // namespace

void PlantConfig::validate() const {
    if (primary.sample_rate() != secondary.sample_rate()) {
        throw InvalidInput("primary and secondary paths have different sample rates");
    }
}

SimResult run_modeling_experiment(const PlantConfig& plant, const ControlPolicy& policy,
                                  const ModelingAlgorithm& algorithm, const Signal& noise,
                                  std::size_t iterations, IdentifierShape shape_in, const SimOptions& options) {
    check_inputs(plant, noise, iterations);
    if (std::holds_alternative<AdaptiveControl>(policy)) {
        throw InvalidInput("run_modeling_experiment takes a Fixed or Alternating policy; use run_simultaneous");
    }

    // Both policies reduce to a pair of equal-length filters and a period.
    std::vector<double> filters[2];
    std::size_t period = 0;
    if (const auto* fixed = std::get_if<FixedControl>(&policy)) {
        filters[0] = padded(fixed->w, fixed->w.size());
        filters[1] = filters[0];
        period = std::numeric_limits<std::size_t>::max();
    } else {
        const auto& alt = std::get<AlternatingControl>(policy);
        if (alt.period == 0) throw InvalidInput("alternating period must be at least 1");
        const std::size_t n = std::max(alt.first.size(), alt.second.size());
        filters[0] = padded(alt.first, n);
        filters[1] = padded(alt.second, n);
        period = alt.period;
    }
    const std::size_t N = filters[0].size();
    const int fs = plant.sample_rate();

    const Shape shape = resolve_shape(plant, shape_in);
    Identifier identifier = make_identifier(algorithm, shape.l, shape.m, fs);

    const auto p_o = plant.primary.taps();
    const auto s_o = plant.secondary.taps();
    DelayLine xh(std::max(N, p_o.size()));
    DelayLine x2h(s_o.size());

    SimResult out = empty_result(plant, shape, ImpulseResponse(filters[0], fs), options.seed);
    Recorder recorder(plant, iterations, out);
    std::size_t active = 0;

    std::visit(
        [&](auto& id) {
            for (std::size_t n = 0; n < iterations; ++n) {
                active = (n / period) % 2;
                const std::span<const double> w = filters[active];
                const double x = noise[n];
                xh.push(x);
                const double x2 = dot(w, xh.window().first(N));
                x2h.push(x2);
                const double e = dot(p_o, xh.window().first(p_o.size())) + dot(s_o, x2h.window());
                const double e1 = id.step(x, x2, e);
                recorder.record(e, e1, x2, id.model());
                if (options.record_control_history) out.control_history.emplace_back(w.begin(), w.end());
            }
            out.p_hat = id.model().p_hat();
            out.s_hat = id.model().s_hat();
        },
        identifier);

    out.w = ImpulseResponse(filters[active], fs);
    out.iterations = iterations;
    return out;
}

SimResult run_simultaneous(const PlantConfig& plant, const AdaptiveControl& control,
                           const ModelingAlgorithm& algorithm, const Signal& noise, std::size_t iterations,
                           IdentifierShape shape_in, const SimOptions& options) {
    check_inputs(plant, noise, iterations);
    control.params.validate();
    if (control.initial.sample_rate() != plant.sample_rate()) {
        throw InvalidInput("control filter sample rate does not match the plant");
    }
    const int fs = plant.sample_rate();
    const Shape shape = resolve_shape(plant, shape_in);
    Identifier identifier = make_identifier(algorithm, shape.l, shape.m, fs);

    std::vector<double> w(control.initial.taps().begin(), control.initial.taps().end());
    const std::size_t N = w.size();
    const double mu = control.params.step_size;
    const double eps = control.params.regularizer;

    const auto p_o = plant.primary.taps();
    const auto s_o = plant.secondary.taps();
    DelayLine xh(std::max({N, p_o.size(), shape.m}));
    DelayLine yh(s_o.size());
    DelayLine fh(N);

    SimResult out = empty_result(plant, shape, control.initial, options.seed);
    out.e_uncontrolled.reserve(iterations);
    Recorder recorder(plant, iterations, out);

    std::visit(
        [&](auto& id) {
            for (std::size_t n = 0; n < iterations; ++n) {
                const double x = noise[n];
                xh.push(x);
                const double y = dot(w, xh.window().first(N));
                yh.push(y);
                const double d = dot(p_o, xh.window().first(p_o.size()));
                const double e = d + dot(s_o, yh.window());
                const double e1 = id.step(x, y, e);
                recorder.record(e, e1, y, id.model());
                out.e_uncontrolled.push_back(d);
                if (options.record_control_history) out.control_history.push_back(w);

                const auto s_hat = id.model().secondary_coefficients();
                fh.push(dot(s_hat, xh.window().first(s_hat.size())));
                const auto f = fh.window();
                const double energy = dot(f, f) + eps;
                if (mu != 0.0 && energy > 0.0) {
                    const double g = mu * e / energy;
                    for (std::size_t k = 0; k < N; ++k) w[k] -= g * f[k];
                    if (!std::all_of(w.begin(), w.end(), [](double t) { return std::isfinite(t); })) {
                        throw Divergence("control filter", n + 1);
                    }
                }
            }
            out.p_hat = id.model().p_hat();
            out.s_hat = id.model().s_hat();
        },
        identifier);

    out.w = ImpulseResponse(w, fs);
    out.iterations = iterations;

    const std::size_t window = std::min(options.attenuation_window, iterations);
    if (window > 0) {
        const Signal before(out.e_uncontrolled, fs);
        const Signal after(out.e, fs);
        double p_before = 0.0;
        for (double v : before.samples().last(window)) p_before += v * v;
        if (p_before > 0.0) out.attenuation_db = attenuation_db(before, after, window);
    }
    return out;
}

} // namespace ancsp
