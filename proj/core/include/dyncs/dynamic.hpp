#pragma once

#include <functional>
#include <vector>

#include "dyncs/dcs_amp.hpp"
#include "dyncs/kalman.hpp"
#include "dyncs/solvers_pks.hpp"
#include "dyncs/support_est.hpp"

namespace dyncs {

enum class DynAlgo {
    Bpdn,            // plain per-frame BPDN (no memory)
    BpdnResidual,    // BPDN on the measurement residual
    BpResidual,      // constrained l1 on the measurement residual
    ModBpdn,         // support prior from the previous estimate
    WeightedL1,      // soft support prior
    StreamingModWl1, // magnitude-weighted l1
    RegModBpdn,      // support + value prior
    IhtPks,
    ModCsNoisy,
    KfModCs,
    PmCsKf,
    DcsAmp,
    ZaLms,
};

const char* to_string(DynAlgo a);
DynAlgo dyn_algo_from_string(const std::string& name);

enum class MuPolicy { PreviousEstimate, FirstEstimate };
enum class InitPolicy { BpdnExtraMeasurements, GivenX0 };

struct ZaLmsConfig {
    double step = 5e-3;      // LMS step mu
    double gamma = 1e-4;     // zero-attractor weight
    int passes = 1;          // randomized re-passes over each frame's rows
    std::uint64_t shuffle_seed = 11;
};

struct DynamicRunConfig {
    double gamma = 1e-2;  // l1 weight for Lagrangian programs
    double lambda = 0.0;  // quadratic prior weight (reg-mod)
    double tau = 0.0;     // weighted-l1 weight on T
    double alpha = 0.0;   // support zeroing threshold
    double eps = 0.0;     // noise-norm bound for constrained programs
    Index sparsity = 0;   // IHT-family sparsity target
    MuPolicy mu_policy = MuPolicy::PreviousEstimate;
    SupportMode support_mode = SupportMode::Simple;
    bool auto_add_del_thresholds = true; // derive add/del thresholds per step
    SupportEstimatorConfig est;
    KfModCsConfig kf;
    PmCsKfConfig pm;
    AmpParams amp;
    ZaLmsConfig zalms;
    InitPolicy init = InitPolicy::GivenX0;
    double init_gamma = 0.0; // BPDN weight for the first frame (0 = derive)
    SolverOptions solver;
};

/// Rolling state shared by the step operations. Every step reads only this
/// state plus (y_t, A_t); nothing downstream of t is ever touched.
struct DynState {
    Vec xhat;
    SupportSet support;
    Vec xhat_first; // retained first-frame estimate for the value-prior policy
    KfState kf;
    PmCsKfState pm;
    AmpState amp;
    Vec zalms_h;
    Index t = 0;
};

/// First-frame recovery: BPDN with the configured (or derived) weight, then
/// automatic thresholding of the estimate.
std::pair<Vec, SupportSet> init_first_frame(const Vec& y0, const MeasurementOperator& a0,
                                            const DynamicRunConfig& cfg);

void step_dynamic_modbpdn(DynState& st, const Vec& y, const MeasurementOperator& a,
                          const DynamicRunConfig& cfg);
void step_dynamic_weighted_l1(DynState& st, const Vec& y, const MeasurementOperator& a,
                              const DynamicRunConfig& cfg);
void step_dynamic_iht_pks(DynState& st, const Vec& y, const MeasurementOperator& a, Index s,
                          const DynamicRunConfig& cfg);
void step_streaming_modwl1(DynState& st, const Vec& y, const MeasurementOperator& a,
                           const DynamicRunConfig& cfg);
void step_dynamic_regmod_bpdn(DynState& st, const Vec& y, const MeasurementOperator& a,
                              const DynamicRunConfig& cfg);
void step_dynamic_modcs_noisy(DynState& st, const Vec& y, const MeasurementOperator& a,
                              const DynamicRunConfig& cfg);
void step_bp_residual(DynState& st, const Vec& y, const MeasurementOperator& a,
                      const DynamicRunConfig& cfg, bool lagrangian);

/// Scalar-stream adaptive filter: rows of each frame are consumed one at a
/// time with the sign-attracted LMS update; the frame estimate is the weight
/// vector after that frame's rows.
struct ZaLmsSnapshot {
    std::vector<Vec> xhat;
};
ZaLmsSnapshot za_lms_track(const std::vector<Vec>& ys,
                           const std::vector<const MeasurementOperator*>& as, const ZaLmsConfig& cfg,
                           Vec h0 = {});

struct SequenceResult {
    std::vector<Vec> xhat;
    std::vector<SupportSet> support;
    Vec nrmse; // vs truth when provided (single-trial ratio per t)
    std::vector<double> wall_ms;
};

struct Frame {
    const Vec* y = nullptr;
    const MeasurementOperator* a = nullptr;
};

/// Runs one algorithm over a frame sequence. The state is advanced strictly
/// in time order; with InitPolicy::GivenX0 the caller provides the starting
/// estimate (x0, n0), otherwise frame 0 is consumed by the BPDN initializer.
SequenceResult run_dynamic(DynAlgo algo, const std::vector<Frame>& frames,
                           const DynamicRunConfig& cfg, const Vec* x0 = nullptr,
                           const SupportSet* n0 = nullptr,
                           const std::vector<Vec>* truth = nullptr);

} // namespace dyncs
