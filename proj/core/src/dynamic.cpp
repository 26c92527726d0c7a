#include "dyncs/dynamic.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dyncs/rip.hpp"
#include "dyncs/rng.hpp"
#include "dyncs/simulate.hpp"

namespace dyncs {

const char* to_string(DynAlgo a) {
    switch (a) {
        case DynAlgo::Bpdn: return "bpdn";
        case DynAlgo::BpdnResidual: return "bpdn-residual";
        case DynAlgo::BpResidual: return "bp-residual";
        case DynAlgo::ModBpdn: return "mod-bpdn";
        case DynAlgo::WeightedL1: return "weighted-l1";
        case DynAlgo::StreamingModWl1: return "streaming-mod-wl1";
        case DynAlgo::RegModBpdn: return "reg-mod-bpdn";
        case DynAlgo::IhtPks: return "iht-pks";
        case DynAlgo::ModCsNoisy: return "modcs-noisy";
        case DynAlgo::KfModCs: return "kf-modcs";
        case DynAlgo::PmCsKf: return "pm-cs-kf";
        case DynAlgo::DcsAmp: return "dcs-amp";
        case DynAlgo::ZaLms: return "za-lms";
    }
    return "?";
}

DynAlgo dyn_algo_from_string(const std::string& name) {
    for (DynAlgo a : {DynAlgo::Bpdn, DynAlgo::BpdnResidual, DynAlgo::BpResidual, DynAlgo::ModBpdn,
                      DynAlgo::WeightedL1, DynAlgo::StreamingModWl1, DynAlgo::RegModBpdn,
                      DynAlgo::IhtPks, DynAlgo::ModCsNoisy, DynAlgo::KfModCs, DynAlgo::PmCsKf,
                      DynAlgo::DcsAmp, DynAlgo::ZaLms})
        if (name == to_string(a)) return a;
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::pair<Vec, SupportSet> init_first_frame(const Vec& y0, const MeasurementOperator& a0,
                                            const DynamicRunConfig& cfg) {
    double gamma = cfg.init_gamma;
    if (gamma <= 0.0) {
        // max(1e-2 ||A'y||_inf, sigma_obs sqrt(m)) with sigma_obs read off eps
        const double aty = a0.adjoint(y0).lpNorm<Eigen::Infinity>();
        const double sigma = std::sqrt(std::max(cfg.kf.sigma_obs2, 0.0));
        gamma = std::max(1e-2 * aty, sigma * std::sqrt(static_cast<double>(a0.cols())));
        if (gamma <= 0.0) gamma = 1e-2 * std::max(aty, 1.0);
    }
    SolverResult res = solve_bpdn({a0, y0, cfg.eps, gamma}, cfg.solver);
    if (res.xhat.cwiseAbs().maxCoeff() == 0.0) return {res.xhat, SupportSet{}};
    const double alpha = auto_alpha(res.xhat, cfg.est);
    SupportSet n0 = estimate_support_simple(res.xhat, alpha);
    // least-squares refit on the detected support removes the l1 shrinkage bias
    if (!n0.empty() && n0.size() <= a0.rows()) {
        try {
            return {scatter(pseudo_inverse_on_support(a0, n0, y0), n0, a0.cols()), n0};
        } catch (const std::runtime_error&) {
            // ill-conditioned refit: keep the raw estimate
        }
    }
    return {res.xhat, n0};
}

namespace {

void update_support(DynState& st, const Vec& y, const MeasurementOperator& a, const Vec& xhat,
                    const DynamicRunConfig& cfg) {
    if (cfg.support_mode == SupportMode::AddLsDel) {
        SupportEstimatorConfig est = cfg.est;
        if (cfg.auto_add_del_thresholds) {
            const AddDelThresholds thr =
                auto_alpha_add_del(y, a, st.support, xhat, st.xhat, est);
            est.alpha_add = thr.alpha_add;
            est.alpha_del = thr.alpha_del;
        }
        const AddLsDelResult r = estimate_support_add_ls_del(y, a, st.support, xhat, est);
        st.support = r.support;
        st.xhat = r.x_final;
    } else {
        st.support = estimate_support_simple(xhat, cfg.alpha);
        st.xhat = xhat;
    }
}

} // namespace

void step_dynamic_modbpdn(DynState& st, const Vec& y, const MeasurementOperator& a,
                          const DynamicRunConfig& cfg) {
    SolverOptions opts = cfg.solver;
    opts.warm_start = st.xhat.size() > 0 ? &st.xhat : nullptr;
    SolverResult res = solve_mod_bpdn({a, y, cfg.eps, cfg.gamma}, st.support, cfg.gamma, opts);
    update_support(st, y, a, res.xhat, cfg);
    ++st.t;
}

void step_dynamic_weighted_l1(DynState& st, const Vec& y, const MeasurementOperator& a,
                              const DynamicRunConfig& cfg) {
    // Lagrangian weighted form: gamma ||b_{T^c}||_1 + gamma tau ||b_T||_1 + 0.5 ||y - Ab||^2
    LagrangianSpec spec;
    spec.weights = Vec::Constant(a.cols(), cfg.gamma);
    for (Index i : st.support) spec.weights[i] = cfg.gamma * cfg.tau;
    SolverOptions opts = cfg.solver;
    opts.warm_start = st.xhat.size() > 0 ? &st.xhat : nullptr;
    SolverResult res = solve_lagrangian_l1(a, y, spec, opts);
    update_support(st, y, a, res.xhat, cfg);
    ++st.t;
}

void step_dynamic_iht_pks(DynState& st, const Vec& y, const MeasurementOperator& a, Index s,
                          const DynamicRunConfig& cfg) {
    SupportSet t = st.support;
    if (t.size() > s) {
        // keep the s largest previous-estimate entries so |T| <= s holds
        Vec masked = Vec::Zero(a.cols());
        for (Index i : t) masked[i] = st.xhat.size() > 0 ? st.xhat[i] : 1.0;
        t = SupportSet::from_nonzeros(hard_threshold(masked, s));
    }
    SolverOptions opts = cfg.solver;
    opts.warm_start = st.xhat.size() > 0 ? &st.xhat : nullptr;
    SolverResult res = solve_iht_pks({a, y, cfg.eps, cfg.gamma}, t, s, opts);
    st.support = estimate_support_simple(res.xhat, 0.0);
    st.xhat = res.xhat;
    ++st.t;
}

void step_streaming_modwl1(DynState& st, const Vec& y, const MeasurementOperator& a,
                           const DynamicRunConfig& cfg) {
    const Index m = a.cols();
    LagrangianSpec spec;
    const double l1 = st.xhat.size() > 0 ? st.xhat.cwiseAbs().sum() : 0.0;
    if (l1 > 0.0) {
        const double beta = static_cast<double>(a.rows()) * st.xhat.squaredNorm() / (l1 * l1);
        spec.weights.resize(m);
        for (Index i = 0; i < m; ++i)
            spec.weights[i] = cfg.gamma / (beta * std::abs(st.xhat[i]) + 1.0);
    } else {
        spec.weights = Vec::Constant(m, cfg.gamma); // degenerate previous estimate
    }
    SolverOptions opts = cfg.solver;
    opts.warm_start = st.xhat.size() > 0 ? &st.xhat : nullptr;
    SolverResult res = solve_lagrangian_l1(a, y, spec, opts);
    st.support = estimate_support_simple(res.xhat, cfg.alpha);
    st.xhat = res.xhat;
    ++st.t;
}

void step_dynamic_regmod_bpdn(DynState& st, const Vec& y, const MeasurementOperator& a,
                              const DynamicRunConfig& cfg) {
    const Index m = a.cols();
    const Vec& mu_src = cfg.mu_policy == MuPolicy::FirstEstimate && st.xhat_first.size() == m
                            ? st.xhat_first
                            : st.xhat;
    PriorKnowledge prior;
    prior.t = st.support;
    prior.gamma = cfg.gamma;
    prior.lambda = cfg.lambda;
    prior.mu_hat = Vec::Zero(m);
    if (mu_src.size() == m)
        for (Index i : st.support) prior.mu_hat[i] = mu_src[i];
    SolverOptions opts = cfg.solver;
    opts.warm_start = st.xhat.size() > 0 ? &st.xhat : nullptr;
    SolverResult res = solve_reg_mod_bpdn({a, y, cfg.eps, cfg.gamma}, prior, opts);
    update_support(st, y, a, res.xhat, cfg);
    ++st.t;
}

void step_dynamic_modcs_noisy(DynState& st, const Vec& y, const MeasurementOperator& a,
                              const DynamicRunConfig& cfg) {
    SolverOptions opts = cfg.solver;
    opts.warm_start = st.xhat.size() > 0 ? &st.xhat : nullptr;
    SolverResult res = solve_modified_cs({a, y, cfg.eps, cfg.gamma}, st.support,
                                         /*noisy=*/cfg.eps > 0.0, opts);
    update_support(st, y, a, res.xhat, cfg);
    ++st.t;
}

void step_bp_residual(DynState& st, const Vec& y, const MeasurementOperator& a,
                      const DynamicRunConfig& cfg, bool lagrangian) {
    const Index m = a.cols();
    const Vec prev = st.xhat.size() == m ? st.xhat : Vec::Zero(m);
    const Vec resid = y - a.apply(prev);
    Vec correction;
    if (lagrangian) {
        LagrangianSpec spec;
        spec.weights = Vec::Constant(m, cfg.gamma);
        correction = solve_lagrangian_l1(a, resid, spec, cfg.solver).xhat;
    } else {
        correction = solve_constrained_l1(a, resid, Vec::Ones(m), cfg.eps, cfg.solver).xhat;
    }
    st.xhat = prev + correction;
    st.support = estimate_support_simple(st.xhat, cfg.alpha);
    ++st.t;
}

ZaLmsSnapshot za_lms_track(const std::vector<Vec>& ys,
                           const std::vector<const MeasurementOperator*>& as, const ZaLmsConfig& cfg,
                           Vec h0) {
    if (ys.size() != as.size() || ys.empty()) throw std::invalid_argument("za_lms_track: frame counts");
    const Index m = as.front()->cols();
    Vec h = h0.size() == m ? std::move(h0) : Vec::Zero(m);
    Rng rng(derive_seed(cfg.shuffle_seed, "za-lms-shuffle", 0));
    ZaLmsSnapshot out;
    for (std::size_t t = 0; t < ys.size(); ++t) {
        const MeasurementOperator& a = *as[t];
        const Index n = a.rows();
        std::vector<Index> order(static_cast<std::size_t>(n));
        for (Index k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = k;
        for (int pass = 0; pass < std::max(1, cfg.passes); ++pass) {
            if (pass > 0) {
                for (Index k = n - 1; k > 0; --k) {
                    const Index j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(k + 1)));
                    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(j)]);
                }
            }
            for (Index k : order) {
                Vec e_k = Vec::Zero(n);
                e_k[k] = 1.0;
                const Vec row = a.adjoint(e_k);
                const double err = ys[t][k] - row.dot(h);
                for (Index i = 0; i < m; ++i) {
                    const double sgn = h[i] > 0.0 ? 1.0 : (h[i] < 0.0 ? -1.0 : 0.0);
                    h[i] += cfg.step * err * row[i] - cfg.step * cfg.gamma * sgn;
                }
            }
        }
        out.xhat.push_back(h);
    }
    return out;
}

SequenceResult run_dynamic(DynAlgo algo, const std::vector<Frame>& frames,
                           const DynamicRunConfig& cfg, const Vec* x0, const SupportSet* n0,
                           const std::vector<Vec>* truth) {
    if (frames.empty()) throw std::invalid_argument("run_dynamic: no frames");
    const Index m = frames.front().a->cols();

    DynState st;
    std::size_t first = 0;
    SequenceResult out;
    auto emit = [&](double ms) {
        out.xhat.push_back(st.xhat);
        out.support.push_back(st.support);
        out.wall_ms.push_back(ms);
    };

    if (cfg.init == InitPolicy::GivenX0) {
        if (x0 == nullptr || n0 == nullptr)
            throw std::invalid_argument("run_dynamic: GivenX0 needs x0 and n0");
        st.xhat = *x0;
        st.support = *n0;
    } else {
        const auto t0 = std::chrono::steady_clock::now();
        auto [xi, ni] = init_first_frame(*frames[0].y, *frames[0].a, cfg);
        st.xhat = std::move(xi);
        st.support = std::move(ni);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        first = 1;
        emit(ms);
    }
    st.xhat_first = st.xhat;

    switch (algo) {
        case DynAlgo::KfModCs: {
            KfModCsConfig kf = cfg.kf;
            kf.gamma = cfg.gamma;
            kf.alpha = cfg.alpha;
            st.kf = KfState::initial(st.xhat, st.support, kf.sigma_sys2, m);
            for (std::size_t t = first; t < frames.size(); ++t) {
                const auto t0 = std::chrono::steady_clock::now();
                step_kf_modcs(st.kf, *frames[t].y, *frames[t].a, kf);
                st.xhat = st.kf.xhat;
                st.support = st.kf.support;
                emit(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count());
            }
            break;
        }
        case DynAlgo::PmCsKf: {
            st.pm = PmCsKfState::initial(st.xhat, cfg.pm.sigma_sys2);
            for (std::size_t t = first; t < frames.size(); ++t) {
                const auto t0 = std::chrono::steady_clock::now();
                step_pm_cs_kf(st.pm, *frames[t].y, *frames[t].a, cfg.pm);
                st.xhat = st.pm.xhat;
                st.support = estimate_support_simple(st.xhat, cfg.alpha);
                emit(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count());
            }
            break;
        }
        case DynAlgo::DcsAmp: {
            st.amp = AmpState::initial(m, cfg.amp);
            for (std::size_t t = first; t < frames.size(); ++t) {
                const auto t0 = std::chrono::steady_clock::now();
                dcs_amp_filter_step(st.amp, *frames[t].y, *frames[t].a);
                st.xhat = st.amp.xhat;
                st.support = estimate_support_simple(st.xhat, cfg.alpha);
                emit(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count());
            }
            break;
        }
        case DynAlgo::ZaLms: {
            st.zalms_h = st.xhat;
            for (std::size_t t = first; t < frames.size(); ++t) {
                const auto t0 = std::chrono::steady_clock::now();
                ZaLmsSnapshot snap = za_lms_track({*frames[t].y}, {frames[t].a}, cfg.zalms, st.zalms_h);
                st.zalms_h = snap.xhat.front();
                st.xhat = st.zalms_h;
                st.support = estimate_support_simple(st.xhat, cfg.alpha);
                emit(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count());
            }
            break;
        }
        default: {
            for (std::size_t t = first; t < frames.size(); ++t) {
                const auto t0 = std::chrono::steady_clock::now();
                const Vec& y = *frames[t].y;
                const MeasurementOperator& a = *frames[t].a;
                switch (algo) {
                    case DynAlgo::Bpdn: {
                        SolverOptions opts = cfg.solver;
                        opts.warm_start = st.xhat.size() > 0 ? &st.xhat : nullptr;
                        SolverResult res = solve_bpdn({a, y, cfg.eps, cfg.gamma}, opts);
                        st.xhat = res.xhat;
                        st.support = estimate_support_simple(st.xhat, cfg.alpha);
                        ++st.t;
                        break;
                    }
                    case DynAlgo::BpdnResidual:
                        step_bp_residual(st, y, a, cfg, /*lagrangian=*/true);
                        break;
                    case DynAlgo::BpResidual:
                        step_bp_residual(st, y, a, cfg, /*lagrangian=*/false);
                        break;
                    case DynAlgo::ModBpdn:
                        step_dynamic_modbpdn(st, y, a, cfg);
                        break;
                    case DynAlgo::WeightedL1:
                        step_dynamic_weighted_l1(st, y, a, cfg);
                        break;
                    case DynAlgo::StreamingModWl1:
                        step_streaming_modwl1(st, y, a, cfg);
                        break;
                    case DynAlgo::RegModBpdn:
                        step_dynamic_regmod_bpdn(st, y, a, cfg);
                        break;
                    case DynAlgo::IhtPks:
                        step_dynamic_iht_pks(st, y, a, cfg.sparsity, cfg);
                        break;
                    case DynAlgo::ModCsNoisy:
                        step_dynamic_modcs_noisy(st, y, a, cfg);
                        break;
                    default:
                        throw std::logic_error("run_dynamic: unhandled algorithm");
                }
                emit(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                         .count());
            }
        }
    }

    if (truth != nullptr) {
        out.nrmse.resize(static_cast<Index>(out.xhat.size()));
        for (std::size_t t = 0; t < out.xhat.size(); ++t)
            out.nrmse[static_cast<Index>(t)] = nrmse_single((*truth)[t], out.xhat[t]);
    }
    return out;
}

} // namespace dyncs
