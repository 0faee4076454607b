#pragma once

#include "ancsp/anc_sim.hpp"
#include "ancsp/rank_analysis.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ancsp {

enum class ControlMode { Fixed, Alternating, Simultaneous };
enum class ControlInit { FirstLast, Impulse, Taps };
enum class NoiseKind { Bandpass, White };

/// Every knob of a scenario run. Defaults follow the duct setup: 1 kHz
/// sampling, 48-tap paths, 200-400 Hz excitation.
struct ScenarioConfig {
    std::string scenario = "fig2c";
    std::uint64_t seed = 7;
    std::size_t iters = 200000;

    int sample_rate = 1000;
    NoiseKind noise = NoiseKind::Bandpass;
    double f_low = 200.0;
    double f_high = 400.0;

    std::size_t primary_length = 48;
    std::size_t secondary_length = 48;
    std::size_t primary_delay = 2;
    std::size_t secondary_delay = 1;
    double path_decay = 0.9;
    std::uint64_t primary_seed = 7;
    std::uint64_t secondary_seed = 26;

    std::size_t model_primary_length = 0;    // 0: same as primary_length
    std::size_t model_secondary_length = 0;  // 0: same as secondary_length

    ControlMode mode = ControlMode::Fixed;
    std::size_t control_length = 49;
    ControlInit control_init = ControlInit::FirstLast;
    std::vector<double> control_taps;    // used when control_init = taps
    std::vector<double> control_taps_b;  // second filter of an alternating policy
    std::size_t alternating_period = 1;
    double control_mu = 0.1;
    double control_eps = 1e-6;

    std::string algorithm = "nlms";  // nlms | rls
    double mu = 0.5;
    double eps = 1e-6;
    double lambda = 0.9995;
    double delta = 1e2;

    std::size_t attenuation_window = 10000;
    std::size_t mse_block = 256;
    std::string out = ".";
};

struct ScenarioInfo {
    std::string_view name;
    std::string_view description;
};

/// The six built-in scenarios in display order.
std::span<const ScenarioInfo> builtin_scenarios() noexcept;
/// One line per scenario: `name  description`.
std::string list_scenarios();

/// Defaults for a named scenario. Throws ConfigError for unknown names.
ScenarioConfig scenario_defaults(std::string_view name);

/// Applies one `key = value` setting. Throws ConfigError on unknown keys or
/// unparsable values. The `scenario` key is rejected here; it selects the
/// defaults and is handled by parse_config_text.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Parses flat `key = value` text with `#` comments. If the text names a
/// scenario it must agree with `scenario` when that is non-empty; the
/// resulting config starts from that scenario's defaults.
ScenarioConfig parse_config_text(std::string_view text, std::string_view scenario = {});

/// Every key in a fixed order, reals at 17 significant digits; feeding the
/// result back through parse_config_text reproduces cfg exactly.
std::string serialize_config(const ScenarioConfig& cfg);

/// Keys and their meaning, for --help.
std::string config_help();

/// Throws ConfigError on inconsistent settings.
void validate_config(const ScenarioConfig& cfg);

/// Control filter(s) the config describes: one for fixed and simultaneous
/// modes, two for alternating.
std::vector<ImpulseResponse> control_filters(const ScenarioConfig& cfg);

PlantConfig build_plant(const ScenarioConfig& cfg);
Signal build_noise(const ScenarioConfig& cfg, std::size_t n_samples);

struct ScenarioOutcome {
    ScenarioConfig config;
    PlantConfig plant;
    SimResult result;
    /// Fixed mode: predicted case and empirical rank of R_x on the
    /// scenario's own excitation, T = 50 (L+M).
    std::optional<RankReport> rank;

    double final_mis_s_db() const;
    double final_mis_p_db() const;
};

ScenarioOutcome run_scenario(const ScenarioConfig& cfg);

/// `scenario,seed,iters,final_mis_s_db,final_mis_p_db,attenuation_db`
std::string summary_header();
std::string summary_line(const ScenarioOutcome& outcome);
/// Human-readable table printed after a run.
std::string summary_table(const ScenarioOutcome& outcome);

/// Writes every output file of a run into `dir` (created if missing) and
/// returns their paths in write order. Throws IoError.
std::vector<std::filesystem::path> write_outputs(const ScenarioOutcome& outcome, const std::filesystem::path& dir);

/// `iter,e,e1,mis_s_db,mis_p_db`
void write_trace_csv(std::ostream& os, const SimResult& result);
/// `iter,mse_e1_db,mse_e_db`, one row per complete or trailing block.
void write_mse_csv(std::ostream& os, const SimResult& result, std::size_t block);

// Rank sweep -----------------------------------------------------------------

struct SweepParams {
    std::size_t l_min = 3, l_max = 8;
    std::size_t m_min = 3, m_max = 8;
    std::size_t n_min = 1;
    std::size_t n_max = 0;  // 0: up to L + 3 for each L
    std::size_t trials = 3;
    std::uint64_t seed = 1;
    std::size_t t_factor = 100;  // T = t_factor (L + M)
    bool zero_tail = false;      // zero every control tap beyond L
    bool schur = false;          // also measure rank(I - A)
    /// Control taps are drawn with random sign and magnitude uniform in
    /// [0.5, 1.5] unless this is set, in which case they are N(0, 1). Gaussian
    /// draws occasionally give a tail tap so small that R_x is numerically
    /// deficient although structurally full rank.
    bool gaussian_taps = false;
};

struct SweepRow {
    std::size_t l, m, n, trial;
    CasePrediction predicted;
    std::size_t rank;
    std::size_t deficiency;
    std::optional<std::size_t> schur_rank;
    bool agree;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double agreement() const;
};

/// Control taps and broadband excitation for every instance come from seeds
/// derived from (seed, instance counter), so instances are independent.
SweepResult rank_sweep(const SweepParams& params);
void write_sweep_csv(std::ostream& os, const SweepResult& result, bool schur);

/// Seed for the `counter`-th independent stream under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept;

} // namespace ancsp
