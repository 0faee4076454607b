#include "ancsp/ancsp.h"

#include "ancsp/errors.hpp"
#include "ancsp/experiment.hpp"

#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

using namespace ancsp;

struct ancsp_config {
    ScenarioConfig cfg;
};

struct ancsp_result {
    ScenarioOutcome outcome;
};

struct ancsp_sweep {
    SweepResult result;
    bool schur;
};

struct ancsp_identifier {
    std::optional<JointModelState> nlms;
    NlmsParams nlms_params;
    std::optional<RlsState> rls;
    RlsParams rls_params;

    const JointModelState& model() const { return nlms ? *nlms : rls->model(); }
};

namespace {

thread_local std::string g_last_error;

ancsp_status fail(ancsp_status status, std::string msg) {
    g_last_error = std::move(msg);
    return status;
}

// Runs f, translating exceptions into status codes.
template <class F>
ancsp_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const ConfigError& e) {
        return fail(ANCSP_ERR_CONFIG, e.what());
    } catch (const Divergence& e) {
        return fail(ANCSP_ERR_DIVERGENCE, e.what());
    } catch (const IoError& e) {
        return fail(ANCSP_ERR_IO, e.what());
    } catch (const DegenerateInput& e) {
        return fail(ANCSP_ERR_DEGENERATE_INPUT, e.what());
    } catch (const NumericalBreakdown& e) {
        return fail(ANCSP_ERR_NUMERICAL, e.what());
    } catch (const InvalidInput& e) {
        return fail(ANCSP_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(ANCSP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(ANCSP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(ANCSP_ERR_INTERNAL, "unknown error");
    }
}

ancsp_status copy_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) {
        return fail(ANCSP_ERR_INVALID_ARGUMENT, "buffer too small: " + std::to_string(s.size() + 1) + " bytes needed");
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return ANCSP_OK;
}

ancsp_status copy_values(std::span<const double> v, double* buf, size_t cap, size_t* count) {
    const size_t n = std::min(cap, v.size());
    if (n && !buf) return fail(ANCSP_ERR_INVALID_ARGUMENT, "null output buffer");
    std::copy_n(v.begin(), n, buf);
    if (count) *count = v.size();
    return ANCSP_OK;
}

#define ANCSP_REQUIRE(cond, what)                                                                                     \
    do {                                                                                                              \
        if (!(cond)) return fail(ANCSP_ERR_INVALID_ARGUMENT, what);                                                  \
    } while (0)

std::string_view opt(const char* s) { return s ? std::string_view(s) : std::string_view{}; }

} // namespace

extern "C" {

const char* ancsp_last_error(void) { return g_last_error.c_str(); }

const char* ancsp_status_name(ancsp_status status) {
    switch (status) {
    case ANCSP_OK: return "ok";
    case ANCSP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ANCSP_ERR_CONFIG: return "config";
    case ANCSP_ERR_DIVERGENCE: return "divergence";
    case ANCSP_ERR_IO: return "io";
    case ANCSP_ERR_DEGENERATE_INPUT: return "degenerate_input";
    case ANCSP_ERR_NUMERICAL: return "numerical";
    case ANCSP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* ancsp_version(void) { return "0.1.0"; }

ancsp_status ancsp_list_scenarios(char* buf, size_t cap, size_t* needed) {
    return guarded([&] { return copy_string(list_scenarios(), buf, cap, needed); });
}

ancsp_status ancsp_config_create(const char* scenario, ancsp_config** out) {
    ANCSP_REQUIRE(scenario && out, "null argument");
    return guarded([&] {
        *out = new ancsp_config{scenario_defaults(scenario)};
        return ANCSP_OK;
    });
}

ancsp_status ancsp_config_parse(const char* text, const char* scenario, ancsp_config** out) {
    ANCSP_REQUIRE(text && out, "null argument");
    return guarded([&] {
        *out = new ancsp_config{parse_config_text(text, opt(scenario))};
        return ANCSP_OK;
    });
}

ancsp_status ancsp_config_load_file(const char* path, const char* scenario, ancsp_config** out) {
    ANCSP_REQUIRE(path && out, "null argument");
    return guarded([&] {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError(std::string("cannot open config file ") + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        *out = new ancsp_config{parse_config_text(ss.str(), opt(scenario))};
        return ANCSP_OK;
    });
}

ancsp_status ancsp_config_set(ancsp_config* cfg, const char* key, const char* value) {
    ANCSP_REQUIRE(cfg && key && value, "null argument");
    return guarded([&] {
        apply_setting(cfg->cfg, key, value);
        return ANCSP_OK;
    });
}

ancsp_status ancsp_config_serialize(const ancsp_config* cfg, char* buf, size_t cap, size_t* needed) {
    ANCSP_REQUIRE(cfg, "null config");
    return guarded([&] { return copy_string(serialize_config(cfg->cfg), buf, cap, needed); });
}

ancsp_status ancsp_config_help(char* buf, size_t cap, size_t* needed) {
    return guarded([&] { return copy_string(config_help(), buf, cap, needed); });
}

void ancsp_config_destroy(ancsp_config* cfg) { delete cfg; }

ancsp_status ancsp_run(const ancsp_config* cfg, ancsp_result** out) {
    ANCSP_REQUIRE(cfg && out, "null argument");
    return guarded([&] {
        *out = new ancsp_result{run_scenario(cfg->cfg)};
        return ANCSP_OK;
    });
}

size_t ancsp_result_iterations(const ancsp_result* r) { return r ? r->outcome.result.iterations : 0; }

double ancsp_result_final_mis_s_db(const ancsp_result* r) { return r ? r->outcome.final_mis_s_db() : 0.0; }

double ancsp_result_final_mis_p_db(const ancsp_result* r) { return r ? r->outcome.final_mis_p_db() : 0.0; }

int ancsp_result_attenuation_db(const ancsp_result* r, double* out) {
    if (!r || !r->outcome.result.attenuation_db) return 0;
    if (out) *out = *r->outcome.result.attenuation_db;
    return 1;
}

ancsp_status ancsp_result_trace(const ancsp_result* r, int which, double* buf, size_t cap, size_t* count) {
    ANCSP_REQUIRE(r, "null result");
    const auto& res = r->outcome.result;
    switch (which) {
    case 0: return copy_values(res.e, buf, cap, count);
    case 1: return copy_values(res.e1, buf, cap, count);
    case 2: return copy_values(res.mis_s_db, buf, cap, count);
    case 3: return copy_values(res.mis_p_db, buf, cap, count);
    default: return fail(ANCSP_ERR_INVALID_ARGUMENT, "trace selector must be 0..3");
    }
}

ancsp_status ancsp_result_filter(const ancsp_result* r, int which, double* buf, size_t cap, size_t* count) {
    ANCSP_REQUIRE(r, "null result");
    const auto& o = r->outcome;
    switch (which) {
    case 0: return copy_values(o.result.p_hat.taps(), buf, cap, count);
    case 1: return copy_values(o.result.s_hat.taps(), buf, cap, count);
    case 2: return copy_values(o.result.w.taps(), buf, cap, count);
    case 3: return copy_values(o.plant.primary.taps(), buf, cap, count);
    case 4: return copy_values(o.plant.secondary.taps(), buf, cap, count);
    default: return fail(ANCSP_ERR_INVALID_ARGUMENT, "filter selector must be 0..4");
    }
}

int ancsp_result_rank(const ancsp_result* r, size_t* rank, size_t* dimension, int* predicted_full) {
    if (!r || !r->outcome.rank) return 0;
    const auto& rep = *r->outcome.rank;
    if (rank) *rank = rep.rank;
    if (dimension) *dimension = rep.dimension;
    if (predicted_full) *predicted_full = rep.predicted ? (rep.predicted->full_rank ? 1 : 0) : -1;
    return 1;
}

ancsp_status ancsp_result_summary_line(const ancsp_result* r, char* buf, size_t cap, size_t* needed) {
    ANCSP_REQUIRE(r, "null result");
    return guarded([&] { return copy_string(summary_line(r->outcome), buf, cap, needed); });
}

ancsp_status ancsp_result_summary_table(const ancsp_result* r, char* buf, size_t cap, size_t* needed) {
    ANCSP_REQUIRE(r, "null result");
    return guarded([&] { return copy_string(summary_table(r->outcome), buf, cap, needed); });
}

const char* ancsp_summary_header(void) {
    static const std::string header = summary_header();
    return header.c_str();
}

ancsp_status ancsp_result_write(const ancsp_result* r, const char* dir, ancsp_path_callback cb, void* user) {
    ANCSP_REQUIRE(r && dir, "null argument");
    return guarded([&] {
        for (const auto& p : write_outputs(r->outcome, dir)) {
            if (cb) cb(p.string().c_str(), user);
        }
        return ANCSP_OK;
    });
}

void ancsp_result_destroy(ancsp_result* r) { delete r; }

ancsp_status ancsp_predict_case(size_t N, size_t L, size_t M, const double* taps, size_t n_taps,
                                ancsp_case_prediction* out) {
    ANCSP_REQUIRE(out, "null output");
    ANCSP_REQUIRE(taps || n_taps == 0, "null taps with non-zero count");
    return guarded([&] {
        const CasePrediction p = predict_case(N, L, M, std::span<const double>(taps, n_taps));
        out->case_number = static_cast<int>(p.label) + 1;
        out->full_rank = p.full_rank ? 1 : 0;
        out->tail_condition_failed = p.tail_condition_failed ? 1 : 0;
        const auto label = case_label(p);
        const size_t n = std::min(label.size(), sizeof out->label - 1);
        std::memcpy(out->label, label.data(), n);
        out->label[n] = '\0';
        return ANCSP_OK;
    });
}

ancsp_status ancsp_read_taps_csv(const char* path, double* buf, size_t cap, size_t* count) {
    ANCSP_REQUIRE(path, "null path");
    return guarded([&] {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError(std::string("cannot open taps file ") + path);
        const ImpulseResponse ir = read_impulse_response_csv(f, 1000);
        return copy_values(ir.taps(), buf, cap, count);
    });
}

ancsp_status ancsp_tv_identifiability(const double* w_a, size_t n_a, const double* w_b, size_t n_b, size_t M,
                                      int* identifiable, size_t* rank) {
    ANCSP_REQUIRE(w_a && w_b, "null taps");
    return guarded([&] {
        const ImpulseResponse a(std::vector<double>(w_a, w_a + n_a), 1000);
        const ImpulseResponse b(std::vector<double>(w_b, w_b + n_b), 1000);
        const TvIdentifiability t = tv_identifiability(a, b, M);
        if (identifiable) *identifiable = t.identifiable ? 1 : 0;
        if (rank) *rank = t.rank;
        return ANCSP_OK;
    });
}

void ancsp_sweep_params_default(ancsp_sweep_params* p) {
    if (!p) return;
    const SweepParams d;
    *p = ancsp_sweep_params{d.l_min, d.l_max, d.m_min,   d.m_max,          d.n_min,      d.n_max,
                            d.trials, d.seed, d.t_factor, d.zero_tail ? 1 : 0, d.schur ? 1 : 0, d.gaussian_taps ? 1 : 0};
}

ancsp_status ancsp_sweep_run(const ancsp_sweep_params* p, ancsp_sweep** out) {
    ANCSP_REQUIRE(p && out, "null argument");
    return guarded([&] {
        SweepParams sp;
        sp.l_min = p->l_min;
        sp.l_max = p->l_max;
        sp.m_min = p->m_min;
        sp.m_max = p->m_max;
        sp.n_min = p->n_min;
        sp.n_max = p->n_max;
        sp.trials = p->trials;
        sp.seed = p->seed;
        sp.t_factor = p->t_factor;
        sp.zero_tail = p->zero_tail != 0;
        sp.schur = p->schur != 0;
        sp.gaussian_taps = p->gaussian_taps != 0;
        *out = new ancsp_sweep{rank_sweep(sp), sp.schur};
        return ANCSP_OK;
    });
}

double ancsp_sweep_agreement(const ancsp_sweep* s) { return s ? s->result.agreement() : 0.0; }

size_t ancsp_sweep_rows(const ancsp_sweep* s) { return s ? s->result.rows.size() : 0; }

ancsp_status ancsp_sweep_csv(const ancsp_sweep* s, char* buf, size_t cap, size_t* needed) {
    ANCSP_REQUIRE(s, "null sweep");
    return guarded([&] {
        std::ostringstream os;
        write_sweep_csv(os, s->result, s->schur);
        return copy_string(os.str(), buf, cap, needed);
    });
}

void ancsp_sweep_destroy(ancsp_sweep* s) { delete s; }

ancsp_status ancsp_identifier_create_nlms(size_t L, size_t M, double mu, double eps, ancsp_identifier** out) {
    ANCSP_REQUIRE(out, "null output");
    return guarded([&] {
        const NlmsParams params{mu, eps};
        params.validate();
        auto id = std::make_unique<ancsp_identifier>();
        id->nlms.emplace(L, M);
        id->nlms_params = params;
        *out = id.release();
        return ANCSP_OK;
    });
}

ancsp_status ancsp_identifier_create_rls(size_t L, size_t M, double lambda, double delta, ancsp_identifier** out) {
    ANCSP_REQUIRE(out, "null output");
    return guarded([&] {
        const RlsParams params{lambda, delta};
        params.validate();
        auto id = std::make_unique<ancsp_identifier>();
        id->rls.emplace(L, M, params);
        id->rls_params = params;
        *out = id.release();
        return ANCSP_OK;
    });
}

ancsp_status ancsp_identifier_step(ancsp_identifier* id, double x1, double x2, double d, double* e1) {
    ANCSP_REQUIRE(id, "null identifier");
    return guarded([&] {
        const double e = id->nlms ? nlms_step(*id->nlms, id->nlms_params, x1, x2, d)
                                  : rls_step(*id->rls, id->rls_params, x1, x2, d);
        if (e1) *e1 = e;
        return ANCSP_OK;
    });
}

ancsp_status ancsp_identifier_coefficients(const ancsp_identifier* id, double* buf, size_t cap, size_t* count) {
    ANCSP_REQUIRE(id, "null identifier");
    const auto& c = id->model().coefficients();
    return copy_values(std::span<const double>(c.data(), static_cast<size_t>(c.size())), buf, cap, count);
}

void ancsp_identifier_destroy(ancsp_identifier* id) { delete id; }

} // extern "C"
