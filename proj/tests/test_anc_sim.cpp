#include "oracles.hpp"

#include <doctest.h>

#include "ancsp/anc_sim.hpp"
#include "ancsp/errors.hpp"

#include <cmath>

using namespace ancsp;

namespace {

constexpr int kFs = 1000;

PlantConfig small_plant() {
    return {synth_path(11, 6, 1, 0.8, kFs), synth_path(12, 4, 1, 0.8, kFs)};
}

ImpulseResponse ir(std::vector<double> taps) { return ImpulseResponse(std::move(taps), kFs); }

// x2(n) = sum_k w_n(k) x(n - k) with the per-sample filters from the history log.
std::vector<double> replay_control(const std::vector<std::vector<double>>& history, std::span<const double> x) {
    std::vector<double> y(history.size(), 0.0);
    for (std::size_t n = 0; n < history.size(); ++n) {
        for (std::size_t k = 0; k < history[n].size() && k <= n; ++k) y[n] += history[n][k] * x[n - k];
    }
    return y;
}

} // namespace

TEST_CASE("silent plant leaves every error at zero") {
    const PlantConfig plant{ir({0.0, 0.0, 0.0}), ir({0.0, 0.0})};
    const auto noise = white_noise(1, 500, kFs);
    const auto r = run_modeling_experiment(plant, FixedControl{ir({1.0, 0.5})}, NlmsParams{}, noise, 500);
    REQUIRE(r.e.size() == 500);
    for (std::size_t n = 0; n < 500; ++n) {
        CHECK(r.e[n] == 0.0);
        CHECK(r.e1[n] == 0.0);
        CHECK(std::isnan(r.mis_s_db[n]));
        CHECK(std::isnan(r.mis_p_db[n]));
    }
    CHECK(r.p_hat.norm() == 0.0);
    CHECK(r.s_hat.norm() == 0.0);
}

TEST_CASE("fixed modeling: plant output matches a direct convolution oracle") {
    const auto plant = small_plant();
    const std::vector<double> w = {0.7, -0.2, 0.4};
    const auto noise = white_noise(2, 800, kFs);
    const auto r = run_modeling_experiment(plant, FixedControl{ir(w)}, NlmsParams{}, noise, 800);
    const auto x2 = oracle::convolve_truncated(w, noise.samples());
    const auto d = oracle::convolve_truncated(plant.primary.taps(), noise.samples());
    const auto y = oracle::convolve_truncated(plant.secondary.taps(), x2);
    for (std::size_t n = 0; n < 800; ++n) {
        CHECK(r.x2[n] == doctest::Approx(x2[n]).epsilon(1e-12));
        CHECK(std::abs(r.e[n] - (d[n] + y[n])) <= 1e-12);
    }
}

TEST_CASE("fixed modeling: residual trace equals a standalone identifier fed the same stream") {
    const auto plant = small_plant();
    const auto noise = white_noise(3, 600, kFs);
    const NlmsParams params{0.3, 1e-6};
    const auto r = run_modeling_experiment(plant, FixedControl{ir({1.0, 0.3, -0.1, 0.2, 0.05})}, params, noise, 600,
                                           IdentifierShape{7, 5});
    JointModelState id(7, 5, kFs);
    for (std::size_t n = 0; n < 600; ++n) CHECK(nlms_step(id, params, noise[n], r.x2[n], r.e[n]) == r.e1[n]);
    CHECK(r.p_hat.taps().size() == 7);
    CHECK(r.s_hat.taps().size() == 5);
    for (std::size_t k = 0; k < 7; ++k) CHECK(r.p_hat[k] == id.primary_coefficients()[k]);
    for (std::size_t k = 0; k < 5; ++k) CHECK(r.s_hat[k] == id.secondary_coefficients()[k]);
    CHECK(r.mis_s_db.back() == misalignment_db(plant.secondary, r.s_hat));
}

TEST_CASE("simultaneous run with zero control step equals fixed modeling bit for bit") {
    const auto plant = small_plant();
    const auto noise = white_noise(4, 1000, kFs);
    const auto w0 = ir({0.2, -0.4, 0.1});
    for (const ModelingAlgorithm alg : {ModelingAlgorithm{NlmsParams{0.5, 1e-6}}, ModelingAlgorithm{RlsParams{1.0, 1e2}}}) {
        const auto fixed = run_modeling_experiment(plant, FixedControl{w0}, alg, noise, 1000);
        const auto sim = run_simultaneous(plant, AdaptiveControl{w0, NlmsParams{0.0, 1e-6}}, alg, noise, 1000);
        CHECK(sim.e == fixed.e);
        CHECK(sim.e1 == fixed.e1);
        CHECK(sim.x2 == fixed.x2);
        CHECK(sim.p_hat.taps()[0] == fixed.p_hat.taps()[0]);
        CHECK(std::equal(sim.s_hat.taps().begin(), sim.s_hat.taps().end(), fixed.s_hat.taps().begin()));
        CHECK(std::equal(sim.w.taps().begin(), sim.w.taps().end(), w0.taps().begin()));
    }
}

TEST_CASE("plant and control are linear in the excitation") {
    const auto plant = small_plant();
    const auto noise = white_noise(5, 400, kFs);
    std::vector<double> doubled(noise.samples().begin(), noise.samples().end());
    for (auto& v : doubled) v *= 2.0;
    const FixedControl w{ir({0.5, 0.25})};
    const auto a = run_modeling_experiment(plant, w, NlmsParams{}, noise, 400);
    const auto b = run_modeling_experiment(plant, w, NlmsParams{}, Signal(doubled, kFs), 400);
    for (std::size_t n = 0; n < 400; ++n) {
        CHECK(b.e[n] == 2.0 * a.e[n]);
        CHECK(b.x2[n] == 2.0 * a.x2[n]);
    }
}

TEST_CASE("alternating policy switches filters on schedule and x2 replays from the log") {
    const auto plant = small_plant();
    const auto noise = white_noise(6, 90, kFs);
    SimOptions opts;
    opts.record_control_history = true;
    const AlternatingControl alt{ir({0.0, 1.0}), ir({1.0, 0.0}), 3};
    const auto r = run_modeling_experiment(plant, alt, NlmsParams{}, noise, 90, {}, opts);
    REQUIRE(r.control_history.size() == 90);
    for (std::size_t n = 0; n < 90; ++n) {
        const bool first = (n / 3) % 2 == 0;
        CHECK(r.control_history[n] == (first ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0}));
    }
    const auto y = replay_control(r.control_history, noise.samples());
    for (std::size_t n = 0; n < 90; ++n) CHECK(r.x2[n] == doctest::Approx(y[n]).epsilon(1e-14));
    CHECK_THROWS_AS(run_modeling_experiment(plant, AlternatingControl{ir({1.0}), ir({0.0}), 0}, NlmsParams{}, noise, 90),
                    InvalidInput);
}

TEST_CASE("simultaneous run: control log replays x2 and the plant output") {
    const auto plant = small_plant();
    const auto noise = white_noise(7, 3000, kFs);
    SimOptions opts;
    opts.record_control_history = true;
    std::vector<double> init(8, 0.0);
    init[0] = 1.0;
    const auto r = run_simultaneous(plant, AdaptiveControl{ir(init), NlmsParams{0.05, 1e-6}}, NlmsParams{0.5, 1e-6},
                                    noise, 3000, {}, opts);
    const auto y = replay_control(r.control_history, noise.samples());
    const auto d = oracle::convolve_truncated(plant.primary.taps(), noise.samples());
    const auto sy = oracle::convolve_truncated(plant.secondary.taps(), y);
    for (std::size_t n = 0; n < 3000; ++n) {
        CHECK(std::abs(r.x2[n] - y[n]) <= 1e-10);
        CHECK(std::abs(r.e_uncontrolled[n] - d[n]) <= 1e-12);
        CHECK(std::abs(r.e[n] - (d[n] + sy[n])) <= 1e-10);
    }
}

TEST_CASE("attenuation matches a two-pass power oracle") {
    const auto plant = small_plant();
    const auto noise = white_noise(8, 5000, kFs);
    SimOptions opts;
    opts.attenuation_window = 1000;
    // A non-zero start excites x2, otherwise s_hat and the control update stay at zero.
    std::vector<double> init(8, 0.0);
    init[0] = 0.1;
    const auto r = run_simultaneous(plant, AdaptiveControl{ir(init), NlmsParams{0.1, 1e-6}}, NlmsParams{0.5, 1e-6},
                                    noise, 5000, {}, opts);
    REQUIRE(r.attenuation_db.has_value());
    const auto d = oracle::convolve_truncated(plant.primary.taps(), noise.samples());
    long double before = 0.0L, after = 0.0L;
    for (std::size_t n = 4000; n < 5000; ++n) before += static_cast<long double>(d[n]) * d[n];
    for (std::size_t n = 4000; n < 5000; ++n) after += static_cast<long double>(r.e[n]) * r.e[n];
    const double expect = static_cast<double>(10.0L * std::log10(before / after));
    CHECK(std::abs(*r.attenuation_db - expect) <= 1e-9);
    CHECK(*r.attenuation_db > 3.0);
}

TEST_CASE("simulation determinism and validation") {
    const auto plant = small_plant();
    const auto noise = white_noise(9, 700, kFs);
    const AdaptiveControl ctl{ir({0.0, 0.0, 0.0}), NlmsParams{0.1, 1e-6}};
    const auto a = run_simultaneous(plant, ctl, RlsParams{}, noise, 700);
    const auto b = run_simultaneous(plant, ctl, RlsParams{}, noise, 700);
    CHECK(a.e == b.e);
    CHECK(a.mis_s_db == b.mis_s_db);

    CHECK_THROWS_AS(run_modeling_experiment(plant, ctl, NlmsParams{}, noise, 700), InvalidInput);
    CHECK_THROWS_AS(run_modeling_experiment(plant, FixedControl{ir({1.0})}, NlmsParams{}, noise, 701), InvalidInput);
    CHECK_THROWS_AS(run_simultaneous(plant, ctl, NlmsParams{}, Signal(std::vector<double>(700, 0.0), 2000), 700),
                    InvalidInput);
    CHECK_THROWS_AS(run_simultaneous(plant, AdaptiveControl{ir({0.0}), NlmsParams{2.5, 1e-6}}, NlmsParams{}, noise, 700),
                    InvalidInput);
    const PlantConfig mixed{ImpulseResponse({1.0}, 1000), ImpulseResponse({1.0}, 2000)};
    CHECK_THROWS_AS(run_modeling_experiment(mixed, FixedControl{ir({1.0})}, NlmsParams{}, noise, 10), InvalidInput);

    const auto empty = run_modeling_experiment(plant, FixedControl{ir({1.0})}, NlmsParams{}, noise, 0);
    CHECK(empty.iterations == 0);
    CHECK(empty.e.empty());
}
