#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dyncs/dynamic.hpp"
#include "dyncs/simulate.hpp"
#include "dyncs/tuning.hpp"
#include "dyncs/weak_threshold.hpp"

namespace dyncs {

struct ExperimentConfig {
    std::string kind = "phase"; // phase | dynamic | mri | tune | weak-threshold
    std::vector<std::string> algos;
    int trials = 100;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    int jobs = 0;   // 0 = logical cores
    bool trace = false;
    std::string manifest_path; // tuned-parameter manifest (read or write)

    // phase-transition settings
    Index m = 200;
    Index s = 20;
    Index u = 2;
    Index e = 2;
    std::vector<Index> n_grid; // empty = default sweep
    double sigma_x2 = 5.0;
    bool prior_good = true; // signal-value prior quality for the residual tracker

    // dynamic-sequence settings
    SignalModelParams model;
    Index n_init = 180;
    Index n_steady = 60;
    double sigma_obs2 = 4e-4;
    std::string bpdn_gamma_scale = "sqrt-m"; // or "sqrt-log-m"

    // image-sequence settings
    PhantomSpec phantom;
    double mri_sigma_obs2 = 10.0;
    double mri_init_fraction = 0.18;
    double mri_steady_fraction = 0.06;

    // weak-threshold sweep settings
    std::vector<double> tau_grid;
    double wt_gamma1 = 0.1;
    double wt_p1 = 1.0;
    double wt_p2 = 0.05;
    int wt_grid = 64;
    int wt_delta_grid = 400;
};

struct PhaseRow {
    Index n = 0;
    Index s = 0;
    std::string algo;
    int trials = 0;
    int successes = 0;
    double prob = 0.0;
};

struct DynCurve {
    std::string algo;
    Vec nrmse;               // per t (1-based time in CSV output)
    Vec support_miss;        // mean |N_t \ Nhat_t| per t
    Vec support_extra;       // mean |Nhat_t \ N_t| per t
    Vec wall_ms;             // mean per-step wall time
    double mean_wall_ms = 0.0;
};

struct WeakRow {
    double tau = 0.0;
    double delta_c = 0.0;
};

struct TuneManifest {
    double gamma = 0.0;
    double lambda = 0.0;
    double alpha = 0.0;
    double tau = 0.0;
    double gamma_init = 0.0;
    double sigma_sys2 = 0.0;
    double sigma_obs2 = 0.0;

    void save(const std::string& path) const;
    static TuneManifest load(const std::string& path);
};

std::vector<PhaseRow> run_phase_transition(const ExperimentConfig& cfg);
std::vector<DynCurve> run_dynamic_experiment(const ExperimentConfig& cfg);
std::vector<DynCurve> run_mri_experiment(const ExperimentConfig& cfg);
std::vector<WeakRow> run_weak_threshold_sweep(const ExperimentConfig& cfg);
/// Generates the calibration frames for the configured dynamic preset, runs
/// the tuning procedure, and returns the manifest.
TuneManifest run_tune(const ExperimentConfig& cfg);

/// Deterministic trial-parallel map: fn(trial) for trial in [0, trials).
void parallel_trials(int trials, int jobs, const std::function<void(int)>& fn);

// CSV / SVG / JSON-lines artifacts (CSV is the contractual format)
void write_phase_csv(const std::string& path, const std::vector<PhaseRow>& rows);
void write_dynamic_csv(const std::string& path, const std::vector<DynCurve>& curves);
void write_timing_csv(const std::string& path, const std::vector<DynCurve>& curves);
void write_weak_csv(const std::string& path, const std::vector<WeakRow>& rows);
void write_trace_jsonl(const std::string& path, const std::vector<DynCurve>& curves);
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<std::pair<std::string, Vec>>& series, double x0 = 1.0,
                     double dx = 1.0);

/// Per-frame measurement bundle shared by the dynamic harnesses.
struct GeneratedSequence {
    SequenceTrace trace;
    std::vector<MeasurementOperator> ops; // per t
    std::vector<Vec> ys;                  // per t
};
GeneratedSequence make_dynamic_instance(const ExperimentConfig& cfg, std::uint64_t trial);

} // namespace dyncs
