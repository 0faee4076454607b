#include "ancsp/experiment.hpp"

#include "ancsp/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace ancsp {

namespace {

constexpr std::array<ScenarioInfo, 6> kScenarios{{
    {"fig2a", "fixed control filter, N = 24 < L, first and last taps 1; Case 2, secondary estimate not unique"},
    {"fig2b", "fixed control filter, N = 48 = L, first and last taps 1; Case 2, error concentrated at tap 1"},
    {"fig2c", "fixed control filter, N = 49 > L, first and last taps 1; Case 3, unique secondary estimate"},
    {"fig3", "N = 2 control filter alternated between [0 1] and [1 0] at each iteration, NLMS modeling"},
    {"fig4", "control and modeling launched simultaneously, N = 48 impulse start, NLMS modeling"},
    {"fig5", "control and modeling launched simultaneously, N = 48 impulse start, RLS modeling"},
}};

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "': expected " +
                      std::string(expected));
}

template <class T>
T parse_number(std::string_view key, std::string_view value, std::string_view expected) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) bad_value(key, value, expected);
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    const double v = parse_number<double>(key, value, "a real number");
    if (!std::isfinite(v)) bad_value(key, value, "a finite real number");
    return v;
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
    std::vector<double> out;
    if (value.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        const auto item = trim(value.substr(start, comma == std::string_view::npos ? value.npos : comma - start));
        out.push_back(parse_real(key, item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_real(v[i]);
    }
    return out;
}

template <class E>
struct EnumName {
    E value;
    std::string_view name;
};

constexpr std::array<EnumName<ControlMode>, 3> kModes{
    {{ControlMode::Fixed, "fixed"}, {ControlMode::Alternating, "alternating"}, {ControlMode::Simultaneous, "simultaneous"}}};
constexpr std::array<EnumName<ControlInit>, 3> kInits{
    {{ControlInit::FirstLast, "first_last"}, {ControlInit::Impulse, "impulse"}, {ControlInit::Taps, "taps"}}};
constexpr std::array<EnumName<NoiseKind>, 2> kNoises{{{NoiseKind::Bandpass, "bandpass"}, {NoiseKind::White, "white"}}};

template <class E, std::size_t K>
E parse_enum(const std::array<EnumName<E>, K>& table, std::string_view key, std::string_view value) {
    for (const auto& entry : table) {
        if (entry.name == value) return entry.value;
    }
    std::string expected = "one of";
    for (const auto& entry : table) expected += " " + std::string(entry.name);
    bad_value(key, value, expected);
}

template <class E, std::size_t K>
std::string enum_name(const std::array<EnumName<E>, K>& table, E value) {
    for (const auto& entry : table) {
        if (entry.value == value) return std::string(entry.name);
    }
    return "?";
}

struct Key {
    std::string_view name;
    std::string_view help;
    std::function<void(ScenarioConfig&, std::string_view)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

template <class T>
Key count_key(std::string_view name, std::string_view help, T ScenarioConfig::*field) {
    return {name, help,
            [name, field](ScenarioConfig& c, std::string_view v) {
                c.*field = parse_number<T>(name, v, "a non-negative integer");
            },
            [field](const ScenarioConfig& c) { return std::to_string(c.*field); }};
}

Key real_key(std::string_view name, std::string_view help, double ScenarioConfig::*field) {
    return {name, help, [name, field](ScenarioConfig& c, std::string_view v) { c.*field = parse_real(name, v); },
            [field](const ScenarioConfig& c) { return format_real(c.*field); }};
}

Key list_key(std::string_view name, std::string_view help, std::vector<double> ScenarioConfig::*field) {
    return {name, help, [name, field](ScenarioConfig& c, std::string_view v) { c.*field = parse_list(name, v); },
            [field](const ScenarioConfig& c) { return join(c.*field); }};
}

template <class E, std::size_t K>
Key enum_key(std::string_view name, std::string_view help, E ScenarioConfig::*field,
             const std::array<EnumName<E>, K>& table) {
    return {name, help,
            [name, field, &table](ScenarioConfig& c, std::string_view v) { c.*field = parse_enum(table, name, v); },
            [field, &table](const ScenarioConfig& c) { return enum_name(table, c.*field); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back(count_key("seed", "excitation noise seed", &ScenarioConfig::seed));
        k.push_back(count_key("iters", "number of samples simulated", &ScenarioConfig::iters));
        k.push_back(Key{"sample_rate", "sample rate in Hz",
                        [](ScenarioConfig& c, std::string_view v) {
                            c.sample_rate = parse_number<int>("sample_rate", v, "a positive integer");
                        },
                        [](const ScenarioConfig& c) { return std::to_string(c.sample_rate); }});
        k.push_back(enum_key("noise", "excitation: bandpass | white", &ScenarioConfig::noise, kNoises));
        k.push_back(real_key("f_low", "lower band edge of the excitation, Hz", &ScenarioConfig::f_low));
        k.push_back(real_key("f_high", "upper band edge of the excitation, Hz", &ScenarioConfig::f_high));
        k.push_back(count_key("primary_length", "true primary path length L", &ScenarioConfig::primary_length));
        k.push_back(count_key("secondary_length", "true secondary path length M", &ScenarioConfig::secondary_length));
        k.push_back(count_key("primary_delay", "leading zero taps of the primary path", &ScenarioConfig::primary_delay));
        k.push_back(
            count_key("secondary_delay", "leading zero taps of the secondary path", &ScenarioConfig::secondary_delay));
        k.push_back(real_key("path_decay", "per-tap envelope decay of both paths, (0, 1]", &ScenarioConfig::path_decay));
        k.push_back(count_key("primary_seed", "seed of the synthetic primary path", &ScenarioConfig::primary_seed));
        k.push_back(count_key("secondary_seed", "seed of the synthetic secondary path", &ScenarioConfig::secondary_seed));
        k.push_back(count_key("model_primary_length", "identifier primary length (0 = primary_length)",
                              &ScenarioConfig::model_primary_length));
        k.push_back(count_key("model_secondary_length", "identifier secondary length (0 = secondary_length)",
                              &ScenarioConfig::model_secondary_length));
        k.push_back(enum_key("mode", "control policy: fixed | alternating | simultaneous", &ScenarioConfig::mode, kModes));
        k.push_back(count_key("control_length", "control filter length N", &ScenarioConfig::control_length));
        k.push_back(enum_key("control_init", "control filter start: first_last | impulse | taps",
                             &ScenarioConfig::control_init, kInits));
        k.push_back(list_key("control_taps", "explicit control taps (control_init = taps)", &ScenarioConfig::control_taps));
        k.push_back(
            list_key("control_taps_b", "second filter of an alternating policy", &ScenarioConfig::control_taps_b));
        k.push_back(count_key("alternating_period", "samples between filter switches", &ScenarioConfig::alternating_period));
        k.push_back(real_key("control_mu", "control filter NLMS step size", &ScenarioConfig::control_mu));
        k.push_back(real_key("control_eps", "control filter NLMS regularizer", &ScenarioConfig::control_eps));
        k.push_back(Key{"algorithm", "modeling algorithm: nlms | rls",
                        [](ScenarioConfig& c, std::string_view v) {
                            if (v != "nlms" && v != "rls") bad_value("algorithm", v, "nlms or rls");
                            c.algorithm = std::string(v);
                        },
                        [](const ScenarioConfig& c) { return c.algorithm; }});
        k.push_back(real_key("mu", "identifier NLMS step size, [0, 2)", &ScenarioConfig::mu));
        k.push_back(real_key("eps", "identifier NLMS regularizer", &ScenarioConfig::eps));
        k.push_back(real_key("lambda", "RLS forgetting factor, (0, 1]", &ScenarioConfig::lambda));
        k.push_back(real_key("delta", "RLS initialization, P = I / delta", &ScenarioConfig::delta));
        k.push_back(count_key("attenuation_window", "final samples used for attenuation",
                              &ScenarioConfig::attenuation_window));
        k.push_back(count_key("mse_block", "block length of the MSE trace", &ScenarioConfig::mse_block));
        k.push_back(Key{"out", "output directory",
                        [](ScenarioConfig& c, std::string_view v) { c.out = std::string(v); },
                        [](const ScenarioConfig& c) { return c.out; }});
        return k;
    }();
    return table;
}

std::vector<double> sweep_taps(std::uint64_t seed, std::size_t n, bool gaussian) {
    std::mt19937_64 rng(seed);
    std::vector<double> taps(n);
    if (gaussian) {
        std::normal_distribution<double> g(0.0, 1.0);
        for (auto& t : taps) t = g(rng);
    } else {
        std::uniform_real_distribution<double> mag(0.5, 1.5);
        for (auto& t : taps) {
            const double m = mag(rng);
            t = (rng() & 1U) ? m : -m;
        }
    }
    return taps;
}

std::string db_or_nan(std::optional<double> v) { return v ? format_db(*v) : "nan"; }

std::string fixed2(double v) {
    if (std::isnan(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", std::max(v, kDbFloor));
    return buf;
}

} // namespace

// Scenarios -------------------------------------------------------------------

std::span<const ScenarioInfo> builtin_scenarios() noexcept { return kScenarios; }

std::string list_scenarios() {
    std::string out;
    for (const auto& s : kScenarios) {
        out += std::string(s.name);
        out.append(8 - s.name.size(), ' ');
        out += std::string(s.description);
        out += '\n';
    }
    return out;
}

ScenarioConfig scenario_defaults(std::string_view name) {
    ScenarioConfig c;
    c.scenario = std::string(name);
    if (name == "fig2a" || name == "fig2b" || name == "fig2c") {
        c.mode = ControlMode::Fixed;
        c.control_init = ControlInit::FirstLast;
        c.control_length = name == "fig2a" ? 24 : name == "fig2b" ? 48 : 49;
    } else if (name == "fig3") {
        c.mode = ControlMode::Alternating;
        c.control_length = 2;
        c.control_init = ControlInit::Taps;
        c.control_taps = {0.0, 1.0};
        c.control_taps_b = {1.0, 0.0};
        c.alternating_period = 1;
    } else if (name == "fig4" || name == "fig5") {
        c.mode = ControlMode::Simultaneous;
        c.control_length = 48;
        c.control_init = ControlInit::Impulse;
        c.algorithm = name == "fig4" ? "nlms" : "rls";
    } else {
        throw ConfigError("unknown scenario '" + std::string(name) + "'");
    }
    return c;
}

// Config text -------------------------------------------------------------------

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
    for (const auto& k : keys()) {
        if (k.name == key) {
            k.set(cfg, trim(value));
            return;
        }
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ScenarioConfig parse_config_text(std::string_view text, std::string_view scenario) {
    std::vector<std::pair<std::string_view, std::string_view>> entries;
    std::string_view named;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "scenario") {
            named = value;
        } else {
            entries.emplace_back(key, value);
        }
    }
    if (!named.empty() && !scenario.empty() && named != scenario) {
        throw ConfigError("config file is for scenario '" + std::string(named) + "' but '" + std::string(scenario) +
                          "' was requested");
    }
    const std::string_view chosen = !scenario.empty() ? scenario : named;
    if (chosen.empty()) throw ConfigError("no scenario named on the command line or in the config file");

    ScenarioConfig cfg = scenario_defaults(chosen);
    for (const auto& [key, value] : entries) apply_setting(cfg, key, value);
    return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
    std::string out = "scenario = " + cfg.scenario + "\n";
    for (const auto& k : keys()) {
        out += std::string(k.name) + " = " + k.get(cfg) + "\n";
    }
    return out;
}

std::string config_help() {
    std::string out = "Config file: one 'key = value' per line, '#' starts a comment.\n";
    out += "  scenario               built-in scenario supplying the defaults\n";
    for (const auto& k : keys()) {
        std::string name(k.name);
        name.resize(std::max<std::size_t>(name.size(), 22), ' ');
        out += "  " + name + " " + std::string(k.help) + "\n";
    }
    return out;
}

void validate_config(const ScenarioConfig& c) {
    const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (c.sample_rate <= 0) fail("sample_rate must be positive");
    if (c.noise == NoiseKind::Bandpass && !(c.f_low > 0.0 && c.f_low < c.f_high && c.f_high < 0.5 * c.sample_rate)) {
        fail("band edges must satisfy 0 < f_low < f_high < sample_rate/2");
    }
    if (c.primary_length == 0 || c.secondary_length == 0) fail("path lengths must be at least 1");
    if (c.primary_delay >= c.primary_length) fail("primary_delay must be shorter than primary_length");
    if (c.secondary_delay >= c.secondary_length) fail("secondary_delay must be shorter than secondary_length");
    if (!(c.path_decay > 0.0 && c.path_decay <= 1.0)) fail("path_decay must lie in (0, 1]");
    if (c.control_length == 0) fail("control_length must be at least 1");
    if (c.control_init == ControlInit::Taps && c.control_taps.size() != c.control_length) {
        fail("control_taps must list exactly control_length taps");
    }
    if (c.mode == ControlMode::Alternating) {
        if (c.control_taps_b.empty()) fail("alternating mode needs control_taps_b");
        if (c.alternating_period == 0) fail("alternating_period must be at least 1");
    }
    if (c.algorithm != "nlms" && c.algorithm != "rls") fail("algorithm must be nlms or rls");
    if (c.attenuation_window == 0) fail("attenuation_window must be at least 1");
    if (c.mse_block == 0) fail("mse_block must be at least 1");
    try {
        NlmsParams{c.mu, c.eps}.validate();
        RlsParams{c.lambda, c.delta}.validate();
        NlmsParams{c.control_mu, c.control_eps}.validate();
    } catch (const InvalidInput& e) {
        fail(e.what());
    }
}

std::vector<ImpulseResponse> control_filters(const ScenarioConfig& c) {
    std::vector<double> w;
    switch (c.control_init) {
    case ControlInit::FirstLast:
        w.assign(c.control_length, 0.0);
        w.front() = 1.0;
        w.back() = 1.0;
        break;
    case ControlInit::Impulse:
        w.assign(c.control_length, 0.0);
        w.front() = 1.0;
        break;
    case ControlInit::Taps:
        w = c.control_taps;
        break;
    }
    std::vector<ImpulseResponse> out;
    out.emplace_back(std::move(w), c.sample_rate);
    if (c.mode == ControlMode::Alternating) out.emplace_back(c.control_taps_b, c.sample_rate);
    return out;
}

PlantConfig build_plant(const ScenarioConfig& c) {
    return {synth_path(c.primary_seed, c.primary_length, c.primary_delay, c.path_decay, c.sample_rate),
            synth_path(c.secondary_seed, c.secondary_length, c.secondary_delay, c.path_decay, c.sample_rate)};
}

Signal build_noise(const ScenarioConfig& c, std::size_t n_samples) {
    if (c.noise == NoiseKind::White) return white_noise(c.seed, n_samples, c.sample_rate);
    return bandlimited_noise(c.seed, n_samples, c.f_low, c.f_high, c.sample_rate);
}

// Runs ------------------------------------------------------------------------

double ScenarioOutcome::final_mis_s_db() const {
    if (!(plant.secondary.norm() > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return misalignment_db(plant.secondary, result.s_hat);
}

double ScenarioOutcome::final_mis_p_db() const {
    if (!(plant.primary.norm() > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return misalignment_db(plant.primary, result.p_hat);
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg) {
    validate_config(cfg);
    const PlantConfig plant = build_plant(cfg);
    const auto filters = control_filters(cfg);
    const IdentifierShape shape{cfg.model_primary_length, cfg.model_secondary_length};
    const std::size_t l_hat = cfg.model_primary_length ? cfg.model_primary_length : cfg.primary_length;
    const std::size_t m_hat = cfg.model_secondary_length ? cfg.model_secondary_length : cfg.secondary_length;

    // The rank report reuses the run's excitation, so draw enough for both.
    const std::size_t rank_T = 50 * (l_hat + m_hat);
    const std::size_t rank_samples = rank_T + std::max(l_hat, m_hat) - 1;
    const bool fixed = cfg.mode == ControlMode::Fixed;
    const Signal noise = build_noise(cfg, fixed ? std::max(cfg.iters, rank_samples) : cfg.iters);

    ModelingAlgorithm algo = NlmsParams{cfg.mu, cfg.eps};
    if (cfg.algorithm == "rls") algo = RlsParams{cfg.lambda, cfg.delta};

    SimOptions options;
    options.seed = cfg.seed;
    options.attenuation_window = cfg.attenuation_window;

    const auto simulate = [&]() -> SimResult {
        switch (cfg.mode) {
        case ControlMode::Fixed:
            return run_modeling_experiment(plant, FixedControl{filters[0]}, algo, noise, cfg.iters, shape, options);
        case ControlMode::Alternating:
            return run_modeling_experiment(plant, AlternatingControl{filters[0], filters[1], cfg.alternating_period},
                                           algo, noise, cfg.iters, shape, options);
        case ControlMode::Simultaneous:
            break;
        }
        return run_simultaneous(plant, AdaptiveControl{filters[0], NlmsParams{cfg.control_mu, cfg.control_eps}}, algo,
                                noise, cfg.iters, shape, options);
    };
    ScenarioOutcome outcome{cfg, plant, simulate(), std::nullopt};

    if (fixed) {
        const Signal x2 = fir_filter(filters[0], noise);
        const auto data = build_data_matrices(noise, x2, l_hat, m_hat, rank_T, rank_samples - 1);
        RankReport report = empirical_rank(joint_autocorrelation(data));
        report.predicted = predict_case(filters[0].size(), l_hat, m_hat, filters[0].taps());
        outcome.rank = std::move(report);
    }
    return outcome;
}

std::string summary_header() { return "scenario,seed,iters,final_mis_s_db,final_mis_p_db,attenuation_db"; }

std::string summary_line(const ScenarioOutcome& o) {
    return o.config.scenario + "," + std::to_string(o.config.seed) + "," + std::to_string(o.result.iterations) + "," +
           format_db(o.final_mis_s_db()) + "," + format_db(o.final_mis_p_db()) + "," +
           db_or_nan(o.result.attenuation_db);
}

std::string summary_table(const ScenarioOutcome& o) {
    const auto& c = o.config;
    std::ostringstream os;
    const auto row = [&os](std::string_view label, const std::string& value) {
        std::string l(label);
        l.resize(22, ' ');
        os << l << value << '\n';
    };
    row("scenario", c.scenario);
    row("seed", std::to_string(c.seed));
    row("iterations", std::to_string(o.result.iterations));
    row("control", enum_name(kModes, c.mode) + ", N = " + std::to_string(o.result.w.size()));
    row("modeling", c.algorithm);
    if (o.rank) {
        if (o.rank->predicted) {
            row("predicted case", std::string(case_label(*o.rank->predicted)) + " (" +
                                      std::string(verdict_name(*o.rank->predicted)) + ")");
        }
        row("empirical rank", std::to_string(o.rank->rank) + " / " + std::to_string(o.rank->dimension) +
                                  " (deficiency " + std::to_string(o.rank->deficiency) + ")");
    }
    row("final mis s_hat [dB]", fixed2(o.final_mis_s_db()));
    row("final mis p_hat [dB]", fixed2(o.final_mis_p_db()));
    row("attenuation [dB]", o.result.attenuation_db ? fixed2(*o.result.attenuation_db) : "n/a");
    return os.str();
}

void write_trace_csv(std::ostream& os, const SimResult& r) {
    os << "iter,e,e1,mis_s_db,mis_p_db\n";
    for (std::size_t n = 0; n < r.iterations; ++n) {
        os << (n + 1) << ',' << format_real(r.e[n]) << ',' << format_real(r.e1[n]) << ',' << format_db(r.mis_s_db[n])
           << ',' << format_db(r.mis_p_db[n]) << '\n';
    }
}

void write_mse_csv(std::ostream& os, const SimResult& r, std::size_t block) {
    if (block == 0) throw InvalidInput("MSE block length must be at least 1");
    os << "iter,mse_e1_db,mse_e_db\n";
    for (std::size_t start = 0; start < r.iterations; start += block) {
        const std::size_t end = std::min(start + block, r.iterations);
        double s1 = 0.0;
        double se = 0.0;
        for (std::size_t n = start; n < end; ++n) {
            s1 += r.e1[n] * r.e1[n];
            se += r.e[n] * r.e[n];
        }
        const double len = static_cast<double>(end - start);
        os << end << ',' << format_db(10.0 * std::log10(s1 / len)) << ',' << format_db(10.0 * std::log10(se / len))
           << '\n';
    }
}

std::vector<std::filesystem::path> write_outputs(const ScenarioOutcome& o, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    const auto emit = [&](const std::string& suffix, const auto& writer) {
        const auto path = dir / (o.config.scenario + suffix);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + path.string() + " for writing");
        writer(f);
        f.flush();
        if (!f) throw IoError("failed writing " + path.string());
        written.push_back(path);
    };

    emit("_trace.csv", [&](std::ostream& f) { write_trace_csv(f, o.result); });
    emit("_mse.csv", [&](std::ostream& f) { write_mse_csv(f, o.result, o.config.mse_block); });
    emit("_s_hat.csv", [&](std::ostream& f) { write_impulse_response_csv(f, o.result.s_hat); });
    emit("_p_hat.csv", [&](std::ostream& f) { write_impulse_response_csv(f, o.result.p_hat); });
    emit("_w.csv", [&](std::ostream& f) { write_impulse_response_csv(f, o.result.w); });
    emit("_s_true.csv", [&](std::ostream& f) { write_impulse_response_csv(f, o.plant.secondary); });
    emit("_p_true.csv", [&](std::ostream& f) { write_impulse_response_csv(f, o.plant.primary); });
    if (o.rank) emit("_rank.csv", [&](std::ostream& f) { write_rank_report_csv(f, *o.rank); });
    emit("_summary.csv", [&](std::ostream& f) { f << summary_header() << '\n' << summary_line(o) << '\n'; });
    emit("_config.txt", [&](std::ostream& f) { f << serialize_config(o.config); });
    return written;
}

// Rank sweep --------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept {
    // splitmix64 finalizer over a Weyl sequence.
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SweepResult::agreement() const {
    if (rows.empty()) return 1.0;
    const auto ok = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.agree; });
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

SweepResult rank_sweep(const SweepParams& p) {
    if (p.l_min == 0 || p.m_min == 0 || p.n_min == 0) throw ConfigError("sweep ranges must start at 1 or above");
    if (p.l_min > p.l_max || p.m_min > p.m_max) throw ConfigError("sweep ranges must be non-empty");
    if (p.trials == 0) throw ConfigError("sweep needs at least one trial");
    if (p.t_factor == 0) throw ConfigError("sweep t_factor must be positive");

    constexpr int kFs = 1000;
    SweepResult out;
    std::uint64_t counter = 0;
    for (std::size_t L = p.l_min; L <= p.l_max; ++L) {
        for (std::size_t M = p.m_min; M <= p.m_max; ++M) {
            const std::size_t n_hi = p.n_max ? p.n_max : L + 3;
            for (std::size_t N = p.n_min; N <= n_hi; ++N) {
                for (std::size_t trial = 0; trial < p.trials; ++trial, ++counter) {
                    std::vector<double> taps = sweep_taps(derive_seed(p.seed, 2 * counter), N, p.gaussian_taps);
                    if (p.zero_tail && N > L) std::fill(taps.begin() + static_cast<std::ptrdiff_t>(L), taps.end(), 0.0);
                    const ImpulseResponse w(taps, kFs);

                    const std::size_t T = p.t_factor * (L + M);
                    const Signal x = white_noise(derive_seed(p.seed, 2 * counter + 1), T + N + M + L, kFs);
                    const Signal x2 = fir_filter(w, x);
                    const DataMatrices data = build_data_matrices(x, x2, L, M, T, x.size() - 1);
                    const RankReport report = empirical_rank(joint_autocorrelation(data));
                    const CasePrediction pred = predict_case(N, L, M, w.taps());

                    bool agree = (report.deficiency > 0) == !pred.full_rank;
                    if (pred.label == IdentifiabilityCase::Case1) agree = agree && report.rank == L;
                    if (pred.label == IdentifiabilityCase::Case3 && pred.full_rank) agree = agree && report.rank == L + M;

                    SweepRow row{L, M, N, trial, pred, report.rank, report.deficiency, std::nullopt, agree};
                    if (p.schur) row.schur_rank = reduced_block_rank(projection_row_space(data));
                    out.rows.push_back(row);
                }
            }
        }
    }
    return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result, bool schur) {
    os << "L,M,N,trial,predicted_case,predicted_verdict,empirical_rank,deficiency,agree";
    if (schur) os << ",schur_rank,schur_identity";
    os << '\n';
    for (const auto& r : result.rows) {
        os << r.l << ',' << r.m << ',' << r.n << ',' << (r.trial + 1) << ',' << case_label(r.predicted) << ','
           << verdict_name(r.predicted) << ',' << r.rank << ',' << r.deficiency << ',' << (r.agree ? 1 : 0);
        if (schur) {
            const std::size_t s = r.schur_rank.value_or(0);
            os << ',' << s << ',' << (r.schur_rank && r.rank == r.l + s ? 1 : 0);
        }
        os << '\n';
    }
    os << "agreement," << format_real(result.agreement()) << '\n';
}

} // namespace ancsp
