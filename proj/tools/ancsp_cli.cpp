// Command-line front end. Talks to the library only through the C API.
#include "ancsp/ancsp.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

int exit_code(ancsp_status s) {
    switch (s) {
    case ANCSP_OK: return kExitOk;
    case ANCSP_ERR_CONFIG:
    case ANCSP_ERR_INVALID_ARGUMENT: return kExitConfig;
    case ANCSP_ERR_DIVERGENCE: return kExitDivergence;
    case ANCSP_ERR_IO: return kExitIo;
    default: return kExitFailure;
    }
}

// One machine-readable line on stderr: `ERROR <kind>: <message>`.
int report(ancsp_status s) {
    std::fprintf(stderr, "ERROR %s: %s\n", ancsp_status_name(s), ancsp_last_error());
    return exit_code(s);
}

// Fetches a string through the (buf, cap, needed) protocol.
template <class F>
ancsp_status fetch(std::string& out, F&& call) {
    size_t needed = 0;
    call(nullptr, 0, &needed);
    if (needed == 0) return ANCSP_ERR_INTERNAL;
    std::vector<char> buf(needed);
    const ancsp_status s = call(buf.data(), buf.size(), &needed);
    if (s == ANCSP_OK) out.assign(buf.data());
    return s;
}

struct RunArgs {
    std::string scenario;
    std::string config_file;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t iters = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* iters_opt = nullptr;
};

int cmd_run(const RunArgs& a) {
    ancsp_config* cfg = nullptr;
    ancsp_status s = a.config_file.empty() ? ancsp_config_create(a.scenario.c_str(), &cfg)
                                           : ancsp_config_load_file(a.config_file.c_str(), a.scenario.c_str(), &cfg);
    if (s != ANCSP_OK) return report(s);

    const auto set = [&](const char* key, const std::string& value) {
        if (s == ANCSP_OK) s = ancsp_config_set(cfg, key, value.c_str());
    };
    if (*a.seed_opt) set("seed", std::to_string(a.seed));
    if (*a.iters_opt) set("iters", std::to_string(a.iters));
    if (!a.out.empty()) set("out", a.out);

    std::string serialized;
    if (s == ANCSP_OK) s = fetch(serialized, [&](char* b, size_t c, size_t* n) { return ancsp_config_serialize(cfg, b, c, n); });
    std::string out_dir = ".";
    if (s == ANCSP_OK) {
        const auto pos = serialized.find("\nout = ");
        if (pos != std::string::npos) {
            const auto start = pos + 7;
            out_dir = serialized.substr(start, serialized.find('\n', start) - start);
        }
    }

    ancsp_result* result = nullptr;
    if (s == ANCSP_OK) s = ancsp_run(cfg, &result);
    ancsp_config_destroy(cfg);
    if (s != ANCSP_OK) return report(s);

    s = ancsp_result_write(result, out_dir.c_str(), [](const char* path, void*) { std::printf("OUT %s\n", path); },
                           nullptr);
    std::string table;
    std::string line;
    if (s == ANCSP_OK) {
        s = fetch(table, [&](char* b, size_t c, size_t* n) { return ancsp_result_summary_table(result, b, c, n); });
    }
    if (s == ANCSP_OK) {
        s = fetch(line, [&](char* b, size_t c, size_t* n) { return ancsp_result_summary_line(result, b, c, n); });
    }
    ancsp_result_destroy(result);
    if (s != ANCSP_OK) return report(s);

    std::printf("%s", table.c_str());
    std::printf("SUMMARY %s\nSUMMARY %s\n", ancsp_summary_header(), line.c_str());
    return kExitOk;
}

int cmd_list() {
    std::string text;
    const ancsp_status s = fetch(text, [](char* b, size_t c, size_t* n) { return ancsp_list_scenarios(b, c, n); });
    if (s != ANCSP_OK) return report(s);
    std::printf("%s", text.c_str());
    return kExitOk;
}

int cmd_predict(std::size_t n, std::size_t l, std::size_t m, const std::string& taps_file) {
    std::vector<double> taps;
    if (!taps_file.empty()) {
        size_t count = 0;
        ancsp_status s = ancsp_read_taps_csv(taps_file.c_str(), nullptr, 0, &count);
        if (s != ANCSP_OK) return report(s);
        taps.resize(count);
        s = ancsp_read_taps_csv(taps_file.c_str(), taps.data(), taps.size(), &count);
        if (s != ANCSP_OK) return report(s);
    }
    ancsp_case_prediction p{};
    const ancsp_status s = ancsp_predict_case(n, l, m, taps.empty() ? nullptr : taps.data(), taps.size(), &p);
    if (s != ANCSP_OK) return report(s);
    std::printf("N,L,M,predicted_case,predicted_verdict\n%zu,%zu,%zu,%s,%s\n", n, l, m, p.label,
                p.full_rank ? "full" : "deficient");
    return kExitOk;
}

int cmd_sweep(const ancsp_sweep_params& params, const std::string& out_file) {
    ancsp_sweep* sweep = nullptr;
    ancsp_status s = ancsp_sweep_run(&params, &sweep);
    if (s != ANCSP_OK) return report(s);
    std::string csv;
    s = fetch(csv, [&](char* b, size_t c, size_t* n) { return ancsp_sweep_csv(sweep, b, c, n); });
    ancsp_sweep_destroy(sweep);
    if (s != ANCSP_OK) return report(s);

    if (out_file.empty()) {
        std::printf("%s", csv.c_str());
        return kExitOk;
    }
    std::FILE* f = std::fopen(out_file.c_str(), "wb");
    if (!f) {
        std::fprintf(stderr, "ERROR io: cannot open %s for writing\n", out_file.c_str());
        return kExitIo;
    }
    const bool ok = std::fwrite(csv.data(), 1, csv.size(), f) == csv.size();
    if (std::fclose(f) != 0 || !ok) {
        std::fprintf(stderr, "ERROR io: failed writing %s\n", out_file.c_str());
        return kExitIo;
    }
    std::printf("OUT %s\n", out_file.c_str());
    return kExitOk;
}

std::string config_keys_help() {
    std::string text;
    if (fetch(text, [](char* b, size_t c, size_t* n) { return ancsp_config_help(b, c, n); }) != ANCSP_OK) return {};
    return text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secondary-path identifiability experiments for active noise control"};
    app.require_subcommand(1);
    app.footer("\n" + config_keys_help() +
               "\nExit codes: 0 success, 2 config error, 3 divergence, 4 I/O error.");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run a built-in scenario and write its CSVs");
    run_cmd->add_option("scenario", run.scenario, "scenario name (see `list`)")->required();
    run.seed_opt = run_cmd->add_option("--seed", run.seed, "excitation seed");
    run.iters_opt = run_cmd->add_option("--iters", run.iters, "number of iterations");
    run_cmd->add_option("--out", run.out, "output directory");
    run_cmd->add_option("--config", run.config_file, "key = value config file");

    app.add_subcommand("list", "list the built-in scenarios");

    std::size_t pn = 0, pl = 0, pm = 0;
    std::string taps_file;
    auto* predict_cmd = app.add_subcommand("predict-case", "predict identifiability from filter lengths");
    predict_cmd->add_option("--n", pn, "control filter length N")->required()->check(CLI::PositiveNumber);
    predict_cmd->add_option("--l", pl, "primary model length L")->required()->check(CLI::PositiveNumber);
    predict_cmd->add_option("--m", pm, "secondary model length M")->required()->check(CLI::PositiveNumber);
    predict_cmd->add_option("--taps", taps_file, "control taps as an index,tap CSV");

    ancsp_sweep_params sweep{};
    ancsp_sweep_params_default(&sweep);
    std::string sweep_out;
    bool zero_tail = false;
    bool schur = false;
    bool gaussian = false;
    auto* sweep_cmd = app.add_subcommand("rank-sweep", "compare predicted and measured rank over a grid");
    sweep_cmd->add_option("--l-min", sweep.l_min, "smallest L")->capture_default_str();
    sweep_cmd->add_option("--l-max", sweep.l_max, "largest L")->capture_default_str();
    sweep_cmd->add_option("--m-min", sweep.m_min, "smallest M")->capture_default_str();
    sweep_cmd->add_option("--m-max", sweep.m_max, "largest M")->capture_default_str();
    sweep_cmd->add_option("--n-min", sweep.n_min, "smallest N")->capture_default_str();
    sweep_cmd->add_option("--n-max", sweep.n_max, "largest N (0: L + 3)")->capture_default_str();
    sweep_cmd->add_option("--trials", sweep.trials, "trials per (L, M, N)")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "master seed")->capture_default_str();
    sweep_cmd->add_option("--t-factor", sweep.t_factor, "T = t_factor (L + M)")->capture_default_str();
    sweep_cmd->add_flag("--zero-tail", zero_tail, "zero every control tap beyond L");
    sweep_cmd->add_flag("--schur", schur, "add rank(I - A) columns");
    sweep_cmd->add_flag("--gaussian-taps", gaussian, "draw control taps from N(0, 1)");
    sweep_cmd->add_option("--out", sweep_out, "write the CSV to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "ERROR config: %s\n", e.what());
        return kExitConfig;
    }

    if (*run_cmd) return cmd_run(run);
    if (*predict_cmd) return cmd_predict(pn, pl, pm, taps_file);
    if (*sweep_cmd) {
        sweep.zero_tail = zero_tail ? 1 : 0;
        sweep.schur = schur ? 1 : 0;
        sweep.gaussian_taps = gaussian ? 1 : 0;
        return cmd_sweep(sweep, sweep_out);
    }
    return cmd_list();
}
