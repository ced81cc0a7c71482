#include "kicked_duo.h"

#include <cstring>
#include <map>
#include <optional>
#include <string>

#include "kduo/harness.hpp"
#include "kduo/io.hpp"

struct kd_spec {
    std::map<std::string, std::string> kv;
    std::string preset;
    std::string scale = "desk";
    std::optional<std::string> resume;
    int workers = -1;  // <0: unset
    std::optional<std::string> out_dir;
};

namespace {

thread_local std::string t_last_error;

kd_status fail(kd_status s, const std::string& msg) {
    t_last_error = msg;
    return s;
}

template <typename F>
kd_status guarded(F&& f) {
    try {
        f();
        t_last_error.clear();
        return KD_OK;
    } catch (const kduo::NumericGuardError& e) {
        return fail(KD_ERR_NUMERIC_GUARD, e.what());
    } catch (const kduo::ConfigError& e) {
        return fail(KD_ERR_CONFIG, e.what());
    } catch (const kduo::IoError& e) {
        return fail(KD_ERR_IO, e.what());
    } catch (const kduo::StateError& e) {
        return fail(KD_ERR_STATE, e.what());
    } catch (const std::exception& e) {
        return fail(KD_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(KD_ERR_INTERNAL, "unknown error");
    }
}

kduo::ExperimentSpec build(const kd_spec& s) {
    kduo::ExperimentSpec spec = kduo::spec_from_kv(s.kv);
    if (!s.preset.empty()) kduo::apply_preset(spec, s.preset, s.scale);
    if (s.resume) {
        if (!s.preset.empty())
            throw kduo::ConfigError("resume applies to single runs, not presets");
        spec.resume_path = *s.resume;
    }
    if (s.workers >= 0) spec.workers = s.workers;
    if (s.out_dir) spec.out_dir = *s.out_dir;
    return spec;
}

}  // namespace

extern "C" {

kd_spec* kd_spec_create(void) { return new (std::nothrow) kd_spec; }

void kd_spec_free(kd_spec* spec) { delete spec; }

kd_status kd_spec_load_config(kd_spec* spec, const char* path) {
    if (!spec || !path) return fail(KD_ERR_ARG, "NULL argument");
    return guarded([&] {
        for (auto& [k, v] : kduo::parse_kv_file(path)) {
            kduo::spec_from_kv({{k, v}});  // fail fast per pair
            spec->kv[k] = v;
        }
    });
}

kd_status kd_spec_set(kd_spec* spec, const char* key, const char* value) {
    if (!spec || !key || !value) return fail(KD_ERR_ARG, "NULL argument");
    return guarded([&] {
        kduo::spec_from_kv({{std::string(key), std::string(value)}});
        spec->kv[key] = value;
    });
}

kd_status kd_spec_get(const kd_spec* spec, const char* key, char* buf,
                      size_t buflen) {
    if (!spec || !key || !buf || buflen == 0)
        return fail(KD_ERR_ARG, "NULL argument");
    const auto it = spec->kv.find(key);
    if (it == spec->kv.end())
        return fail(KD_ERR_ARG, std::string("key not set: ") + key);
    std::strncpy(buf, it->second.c_str(), buflen - 1);
    buf[buflen - 1] = '\0';
    t_last_error.clear();
    return KD_OK;
}

kd_status kd_spec_apply_preset(kd_spec* spec, const char* name,
                               const char* scale) {
    if (!spec || !name || !scale) return fail(KD_ERR_ARG, "NULL argument");
    return guarded([&] {
        kduo::ExperimentSpec probe;  // validates name/scale now
        kduo::apply_preset(probe, name, scale);
        spec->preset = name;
        spec->scale = scale;
    });
}

kd_status kd_spec_set_resume(kd_spec* spec, const char* checkpoint_path) {
    if (!spec || !checkpoint_path) return fail(KD_ERR_ARG, "NULL argument");
    spec->resume = checkpoint_path;
    t_last_error.clear();
    return KD_OK;
}

kd_status kd_spec_set_workers(kd_spec* spec, int workers) {
    if (!spec || workers < 0) return fail(KD_ERR_ARG, "workers must be >= 0");
    spec->workers = workers;
    t_last_error.clear();
    return KD_OK;
}

kd_status kd_spec_set_output_dir(kd_spec* spec, const char* dir) {
    if (!spec || !dir) return fail(KD_ERR_ARG, "NULL argument");
    spec->out_dir = dir;
    t_last_error.clear();
    return KD_OK;
}

kd_status kd_run(const kd_spec* spec) {
    if (!spec) return fail(KD_ERR_ARG, "NULL spec");
    return guarded([&] { kduo::run(build(*spec)); });
}

kd_status kd_compare_csv(const char* quantum_csv, const char* classical_csv,
                         const char* out_csv, double* max_abs_diff,
                         double* mean_abs_diff) {
    if (!quantum_csv || !classical_csv || !out_csv)
        return fail(KD_ERR_ARG, "NULL argument");
    return guarded([&] {
        const kduo::TimeSeries q = kduo::TimeSeries::read_csv(quantum_csv);
        const kduo::TimeSeries c = kduo::TimeSeries::read_csv(classical_csv);
        const kduo::CompareSummary s = kduo::compare_series(q, c, out_csv);
        if (max_abs_diff) *max_abs_diff = s.max_abs_diff;
        if (mean_abs_diff) *mean_abs_diff = s.mean_abs_diff;
    });
}

const char* kd_last_error(void) { return t_last_error.c_str(); }

const char* kd_version(void) { return kduo::kVersion; }

void kd_request_interrupt(void) { *kduo::interrupt_flag() = 1; }

}  // extern "C"
