#pragma once

#include <csignal>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kduo/classical.hpp"
#include "kduo/observables.hpp"
#include "kduo/params.hpp"
#include "kduo/propagator.hpp"

namespace kduo {

inline constexpr const char* kVersion = "0.1.0";

enum class RunMode {
    Quantum,
    Classical,
    SingleRotorQuantum,
    SingleRotorClassical,
    Compare,
    Sweep,
};

RunMode parse_mode(const std::string& name);
std::string mode_name(RunMode m);

// A fully resolved experiment. Sweeps and figure presets expand into several
// concrete runs internally; everything an output consumer needs to rerun the
// experiment lands in the metadata sidecars.
struct ExperimentSpec {
    RunMode mode = RunMode::Quantum;
    ModelParams params;
    std::string preset;             // "", or fig1..fig5
    std::string scale = "desk";     // paper | desk
    std::string sweep_param;        // sweep mode: parameter name (currently "w")
    std::vector<double> sweep_values;
    std::int64_t record_every = 1;
    std::uint64_t seed = 12345;
    std::string out_dir = "out";
    int workers = 0;                // 0 = hardware concurrency; env overrides
    std::size_t particles = 100000;
    GuardConfig guard;
    bool compute_sl = false;
    bool compute_svn = false;
    bool compute_scl = false;
    int scl_R_bins = 64;
    double scl_P_width = 0.0;       // 0 = use K
    bool kick_literal = false;
    bool emit_distribution = false;
    bool emit_ensemble = false;
    std::int64_t fit_lo = 20, fit_hi = 200;
    std::string label;              // output stem override for single runs
    std::optional<std::string> resume_path;
    std::optional<std::string> compare_quantum, compare_classical;
};

// Builds a spec from key=value pairs; unknown keys fail fast naming the key.
ExperimentSpec spec_from_kv(const std::map<std::string, std::string>& kv);

// Replaces mode/params/run lists with a figure preset at the given scale.
// Config-provided physics keys are superseded; seed/out_dir/workers persist.
void apply_preset(ExperimentSpec& spec, const std::string& name,
                  const std::string& scale);

struct CompareSummary {
    std::size_t rows = 0;
    double max_abs_diff = 0.0;
    double mean_abs_diff = 0.0;
    double rel_gap_final = 0.0;  // |cl - qm| / cl at the last aligned row
};

// Difference report for two delta2 series on identical n grids.
CompareSummary compare_series(const TimeSeries& quantum,
                              const TimeSeries& classical,
                              const std::string& out_csv);

// Executes the experiment, writing CSVs and metadata under spec.out_dir.
// Throws ConfigError / NumericGuardError / IoError / StateError.
void run(const ExperimentSpec& spec);

// Cooperative interrupt flag for checkpoint-on-interrupt; a signal handler
// may set this to any nonzero value.
volatile std::sig_atomic_t* interrupt_flag();

}  // namespace kduo
