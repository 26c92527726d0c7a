#include "dyncs/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "dyncs/rng.hpp"

namespace dyncs {

void parallel_trials(int trials, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 1 || trials <= 1) {
        for (int t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(std::min(jobs, trials)));
    for (int w = 0; w < std::min(jobs, trials); ++w) {
        pool.emplace_back([&]() {
            for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) fn(t);
        });
    }
    for (auto& th : pool) th.join();
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out.precision(12);
    return out;
}

} // namespace

void write_phase_csv(const std::string& path, const std::vector<PhaseRow>& rows) {
    auto out = open_out(path);
    out << "n,s,algo,trials,successes,prob\n";
    for (const auto& r : rows)
        out << r.n << "," << r.s << "," << r.algo << "," << r.trials << "," << r.successes << ","
            << r.prob << "\n";
}

namespace {

std::vector<const DynCurve*> sorted_by_algo(const std::vector<DynCurve>& curves) {
    std::vector<const DynCurve*> ptrs;
    for (const auto& c : curves) ptrs.push_back(&c);
    std::sort(ptrs.begin(), ptrs.end(),
              [](const DynCurve* a, const DynCurve* b) { return a->algo < b->algo; });
    return ptrs;
}

} // namespace

void write_dynamic_csv(const std::string& path, const std::vector<DynCurve>& curves) {
    auto out = open_out(path);
    out << "t,algo,nrmse\n";
    for (const DynCurve* c : sorted_by_algo(curves))
        for (Index t = 0; t < c->nrmse.size(); ++t)
            out << (t + 1) << "," << c->algo << "," << c->nrmse[t] << "\n";
}

void write_timing_csv(const std::string& path, const std::vector<DynCurve>& curves) {
    auto out = open_out(path);
    out << "algo,mean_wall_ms\n";
    for (const DynCurve* c : sorted_by_algo(curves)) out << c->algo << "," << c->mean_wall_ms << "\n";
}

void write_weak_csv(const std::string& path, const std::vector<WeakRow>& rows) {
    auto out = open_out(path);
    out << "tau,delta_c\n";
    for (const auto& r : rows) out << r.tau << "," << r.delta_c << "\n";
}

void write_trace_jsonl(const std::string& path, const std::vector<DynCurve>& curves) {
    auto out = open_out(path);
    for (const DynCurve* c : sorted_by_algo(curves)) {
        for (Index t = 0; t < c->nrmse.size(); ++t) {
            out << "{\"t\":" << (t + 1) << ",\"algo\":\"" << c->algo << "\",\"nrmse\":" << c->nrmse[t]
                << ",\"support_miss\":" << (c->support_miss.size() > t ? c->support_miss[t] : 0.0)
                << ",\"support_extra\":" << (c->support_extra.size() > t ? c->support_extra[t] : 0.0)
                << ",\"wall_ms\":" << (c->wall_ms.size() > t ? c->wall_ms[t] : 0.0) << "}\n";
        }
    }
}

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<std::pair<std::string, Vec>>& series, double x0, double dx) {
    auto out = open_out(path);
    const double w = 760, h = 480, ml = 70, mr = 160, mt = 40, mb = 50;
    double ymin = 0.0, ymax = 1e-12, xmax = 1.0;
    for (const auto& [name, v] : series) {
        for (Index i = 0; i < v.size(); ++i)
            if (std::isfinite(v[i])) ymax = std::max(ymax, v[i]);
        xmax = std::max(xmax, x0 + dx * static_cast<double>(v.size() - 1));
    }
    ymax *= 1.05;
    auto xm = [&](double x) { return ml + (x - x0) / std::max(1e-12, xmax - x0) * (w - ml - mr); };
    auto ym = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    for (int g = 0; g <= 4; ++g) {
        const double yv = ymin + (ymax - ymin) * g / 4.0;
        out << "<text x=\"" << ml - 8 << "\" y=\"" << ym(yv) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << std::setprecision(3) << yv << "</text>\n";
        const double xv = x0 + (xmax - x0) * g / 4.0;
        out << "<text x=\"" << xm(xv) << "\" y=\"" << h - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << std::setprecision(4) << xv
            << "</text>\n";
    }
    int ci = 0;
    for (const auto& [name, v] : series) {
        const char* color = colors[ci % 10];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (Index i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) continue;
            out << xm(x0 + dx * static_cast<double>(i)) << "," << ym(std::min(v[i], ymax)) << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << w - mr + 10 << "\" y=\"" << mt + 16 * ci + 10
            << "\" font-size=\"12\" fill=\"" << color << "\">" << name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

void TuneManifest::save(const std::string& path) const {
    auto out = open_out(path);
    out.precision(17);
    out << "[tuned]\n";
    out << "gamma = " << gamma << "\n";
    out << "lambda = " << lambda << "\n";
    out << "alpha = " << alpha << "\n";
    out << "tau = " << tau << "\n";
    out << "gamma_init = " << gamma_init << "\n";
    out << "sigma_sys2 = " << sigma_sys2 << "\n";
    out << "sigma_obs2 = " << sigma_obs2 << "\n";
}

TuneManifest TuneManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("TuneManifest: cannot open " + path);
    TuneManifest m;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key, eq;
        double value;
        if (!(ls >> key >> eq >> value) || eq != "=") continue;
        if (key == "gamma") m.gamma = value;
        else if (key == "lambda") m.lambda = value;
        else if (key == "alpha") m.alpha = value;
        else if (key == "tau") m.tau = value;
        else if (key == "gamma_init") m.gamma_init = value;
        else if (key == "sigma_sys2") m.sigma_sys2 = value;
        else if (key == "sigma_obs2") m.sigma_obs2 = value;
    }
    return m;
}

// ---------------------------------------------------------------------------
// phase-transition experiment
// ---------------------------------------------------------------------------

std::vector<PhaseRow> run_phase_transition(const ExperimentConfig& cfg) {
    std::vector<std::string> algos = cfg.algos;
    if (algos.empty()) algos = {"bp", "bp-residual", "ls-cs", "modcs", "wl1"};
    std::vector<Index> grid = cfg.n_grid;
    if (grid.empty())
        for (Index n = 30; n <= std::min<Index>(150, cfg.m); n += 5) grid.push_back(n);
    if (grid.empty()) throw std::invalid_argument("run_phase_transition: empty measurement grid");
    for (Index n : grid)
        if (n > cfg.m) throw std::invalid_argument("run_phase_transition: grid value n > m");
    if (cfg.trials < 1) throw std::invalid_argument("run_phase_transition: trials must be >= 1");

    const Index n_max = *std::max_element(grid.begin(), grid.end());
    const double tau_w = cfg.s > 0 ? static_cast<double>(cfg.e) / static_cast<double>(cfg.s) : 0.0;

    // successes[trial][algo][n index]
    std::vector<std::vector<std::vector<int>>> successes(
        static_cast<std::size_t>(cfg.trials),
        std::vector<std::vector<int>>(algos.size(), std::vector<int>(grid.size(), 0)));

    parallel_trials(cfg.trials, cfg.jobs, [&](int trial) {
        Rng rng(derive_seed(cfg.seed, "phase-trial", static_cast<std::uint64_t>(trial)));
        const Index m = cfg.m;
        // true support, signal, support knowledge, value prior
        std::vector<Index> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), Index{0});
        for (Index k = 0; k < m; ++k) {
            const Index j = k + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m - k)));
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(j)]);
        }
        SupportSet nset(std::vector<Index>(perm.begin(), perm.begin() + cfg.s));
        SupportSet delta_u(std::vector<Index>(perm.begin(), perm.begin() + cfg.u));
        SupportSet delta_e(std::vector<Index>(perm.begin() + cfg.s, perm.begin() + cfg.s + cfg.e));
        const SupportSet t = nset.set_difference(delta_u).set_union(delta_e);

        Vec x = Vec::Zero(m);
        const double sx = std::sqrt(cfg.sigma_x2);
        for (Index i : nset) x[i] = sx * rng.gaussian();

        const double sig_nu = std::sqrt((cfg.prior_good ? 1e-4 : 1.0) * cfg.sigma_x2);
        Vec mu = Vec::Zero(m);
        for (Index i : t) mu[i] = x[i] + sig_nu * rng.gaussian();

        Mat g(n_max, m);
        for (Index r = 0; r < n_max; ++r)
            for (Index c = 0; c < m; ++c) g(r, c) = rng.gaussian();

        SolverOptions opts;
        opts.tol = 1e-6;
        opts.max_iter = 5000;

        for (std::size_t ni = 0; ni < grid.size(); ++ni) {
            const Index n = grid[ni];
            const MeasurementOperator a = MeasurementOperator::dense(g.topRows(n));
            const Vec y = a.apply(x);
            const Problem prob{a, y, 0.0, 0.0};
            for (std::size_t ai = 0; ai < algos.size(); ++ai) {
                Vec xhat;
                const std::string& algo = algos[ai];
                if (algo == "bp") {
                    xhat = solve_weighted_l1(prob, Vec::Ones(m), Constraint::Equality, opts).xhat;
                } else if (algo == "modcs") {
                    xhat = solve_modified_cs(prob, t, /*noisy=*/false, opts).xhat;
                } else if (algo == "wl1") {
                    PriorKnowledge prior;
                    prior.t = t;
                    prior.tau = tau_w;
                    xhat = solve_weighted_l1_pks(prob, prior, /*noisy=*/false, opts).xhat;
                } else if (algo == "ls-cs") {
                    try {
                        xhat = solve_lscs(prob, t, opts).xhat;
                    } catch (const std::runtime_error&) {
                        continue; // rank-deficient A_T at tiny n counts as failure
                    }
                } else if (algo == "bp-residual") {
                    const Vec resid = y - a.apply(mu);
                    xhat = mu + solve_constrained_l1(a, resid, Vec::Ones(m), 0.0, opts).xhat;
                } else {
                    throw std::invalid_argument("run_phase_transition: unknown algorithm " + algo);
                }
                if ((x - xhat).norm() < 1e-6 * x.norm())
                    successes[static_cast<std::size_t>(trial)][ai][ni] += 1;
            }
        }
    });

    std::vector<PhaseRow> rows;
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        for (std::size_t ni = 0; ni < grid.size(); ++ni) {
            PhaseRow r;
            r.n = grid[ni];
            r.s = cfg.s;
            r.algo = algos[ai];
            r.trials = cfg.trials;
            for (int trial = 0; trial < cfg.trials; ++trial)
                r.successes += successes[static_cast<std::size_t>(trial)][ai][ni];
            r.prob = static_cast<double>(r.successes) / static_cast<double>(r.trials);
            rows.push_back(std::move(r));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const PhaseRow& a, const PhaseRow& b) {
        return std::tie(a.algo, a.s, a.n) < std::tie(b.algo, b.s, b.n);
    });
    return rows;
}

// ---------------------------------------------------------------------------
// dynamic sparse-sequence experiment
// ---------------------------------------------------------------------------

GeneratedSequence make_dynamic_instance(const ExperimentConfig& cfg, std::uint64_t trial) {
    GeneratedSequence out;
    SignalModelParams model = cfg.model;
    model.seed = derive_seed(cfg.seed, "trace", trial);
    out.trace = generate_model_sequence(model);
    const MeasurementOperator a_init =
        make_gaussian_operator(cfg.n_init, model.m, derive_seed(cfg.seed, "a-init", trial), true);
    const MeasurementOperator a_steady =
        make_gaussian_operator(cfg.n_steady, model.m, derive_seed(cfg.seed, "a-steady", trial), true);
    for (Index t = 0; t < model.t_len; ++t) {
        const MeasurementOperator& op = t < 2 ? a_init : a_steady;
        out.ops.push_back(op);
        out.ys.push_back(add_noise(op.apply(out.trace.x[static_cast<std::size_t>(t)]), cfg.sigma_obs2,
                                   derive_seed(cfg.seed, "noise", trial * 100000 + static_cast<std::uint64_t>(t))));
    }
    return out;
}

namespace {

double init_gamma_for(const ExperimentConfig& cfg, const MeasurementOperator& a, const Vec& y1,
                      const Vec& y2) {
    const double aty = std::max(a.adjoint(y1).lpNorm<Eigen::Infinity>(),
                                a.adjoint(y2).lpNorm<Eigen::Infinity>());
    const double scale = cfg.bpdn_gamma_scale == "sqrt-log-m"
                             ? std::sqrt(std::log(static_cast<double>(cfg.model.m)))
                             : std::sqrt(static_cast<double>(cfg.model.m));
    return std::max(1e-2 * aty, std::sqrt(cfg.sigma_obs2) * scale);
}

struct TrialSetup {
    Vec xhat1, xhat2;
    SupportSet n1, n2;
    double gamma_init = 0.0;
    TunedParams reg;   // best-lambda tuning
    double gamma_mod = 0.0; // gamma at the small-lambda grid point
    double tau = 0.0;
    KfParams kf;
    AmpParams amp;
};

TrialSetup calibrate(const ExperimentConfig& cfg, const GeneratedSequence& inst,
                     const TuneManifest* manifest = nullptr) {
    TrialSetup s;
    const MeasurementOperator& a = inst.ops[0];
    s.gamma_init = manifest != nullptr && manifest->gamma_init > 0.0
                       ? manifest->gamma_init
                       : init_gamma_for(cfg, a, inst.ys[0], inst.ys[1]);
    SolverOptions opts;
    s.xhat1 = solve_bpdn({a, inst.ys[0], 0.0, s.gamma_init}, opts).xhat;
    SolverOptions opts2 = opts;
    opts2.warm_start = &s.xhat1;
    s.xhat2 = solve_bpdn({a, inst.ys[1], 0.0, s.gamma_init}, opts2).xhat;

    if (manifest != nullptr) {
        // fixed parameters from a stored manifest replace per-trial tuning
        s.reg.gamma = manifest->gamma;
        s.reg.lambda = manifest->lambda;
        s.reg.alpha = manifest->alpha;
        s.gamma_mod = manifest->gamma;
        s.tau = std::clamp(manifest->tau, 0.0, 1.0);
        s.kf.sigma_sys2 = manifest->sigma_sys2;
        s.kf.sigma_obs2 = manifest->sigma_obs2;
        s.n1 = estimate_support_simple(s.xhat1, s.reg.alpha);
        s.n2 = estimate_support_simple(s.xhat2, s.reg.alpha);
    } else {
        s.reg = tune_gamma_lambda(s.xhat1, s.xhat2, inst.ys[1], a, default_lambda_grid());
        const TunedParams mod = tune_gamma_lambda(s.xhat1, s.xhat2, inst.ys[1], a, {1e-4});
        s.gamma_mod = mod.gamma;
        s.n1 = estimate_support_simple(s.xhat1, s.reg.alpha);
        s.n2 = estimate_support_simple(s.xhat2, s.reg.alpha);
        s.tau = s.n2.empty() ? 0.0
                             : static_cast<double>(s.n1.set_difference(s.n2).size()) /
                                   static_cast<double>(s.n2.size());
        s.kf = tune_kf_params(s.xhat1, s.xhat2, inst.ys[1], a, s.reg.alpha);
    }

    // Bernoulli-Gaussian-AR parameters: moment-based start, refined by EM on
    // the calibration frames
    AmpParams amp;
    const Index m = a.cols();
    amp.lambda = std::clamp(static_cast<double>(s.n2.size()) / static_cast<double>(m), 1e-3, 0.5);
    amp.p10 = std::clamp(0.1 * amp.lambda, 1e-4, 0.45);
    double mean_amp = 0.0, var_amp = 0.0;
    if (!s.n2.empty()) {
        for (Index i : s.n2) mean_amp += s.xhat2[i];
        mean_amp /= static_cast<double>(s.n2.size());
        for (Index i : s.n2) var_amp += (s.xhat2[i] - mean_amp) * (s.xhat2[i] - mean_amp);
        var_amp /= static_cast<double>(s.n2.size());
    }
    amp.zeta = mean_amp;
    amp.alpha_ar = 0.1;
    amp.rho = std::max(1e-6, var_amp * (2.0 - amp.alpha_ar) / amp.alpha_ar);
    amp.sigma_e2 = std::max(1e-8, s.kf.sigma_obs2);
    for (int it = 0; it < 3; ++it) {
        AmpState st = AmpState::initial(m, amp);
        dcs_amp_filter_step(st, inst.ys[0], inst.ops[0]);
        dcs_amp_filter_step(st, inst.ys[1], inst.ops[1]);
        amp = dcs_amp_em_update(st).after;
        amp.inner_iters = 25;
    }
    s.amp = amp;
    return s;
}

DynamicRunConfig config_for(DynAlgo algo, const ExperimentConfig& cfg, const TrialSetup& s) {
    DynamicRunConfig rc;
    rc.alpha = s.reg.alpha;
    rc.eps = 0.0;
    rc.solver.tol = 1e-6;
    switch (algo) {
        case DynAlgo::Bpdn:
        case DynAlgo::BpdnResidual:
            rc.gamma = s.gamma_init;
            break;
        case DynAlgo::StreamingModWl1:
            rc.gamma = s.gamma_init;
            break;
        case DynAlgo::ModBpdn:
            rc.gamma = s.gamma_mod;
            break;
        case DynAlgo::WeightedL1:
            rc.gamma = s.gamma_mod;
            rc.tau = s.tau;
            break;
        case DynAlgo::RegModBpdn:
            rc.gamma = s.reg.gamma;
            rc.lambda = s.reg.lambda;
            rc.mu_policy = MuPolicy::PreviousEstimate;
            break;
        case DynAlgo::KfModCs:
            rc.gamma = s.gamma_mod;
            rc.kf.gamma = s.gamma_mod;
            rc.kf.alpha = s.reg.alpha;
            rc.kf.sigma_sys2 = s.kf.sigma_sys2;
            rc.kf.sigma_obs2 = s.kf.sigma_obs2;
            break;
        case DynAlgo::PmCsKf:
            rc.pm.sigma_sys2 = s.kf.sigma_sys2;
            rc.pm.sigma_obs2 = s.kf.sigma_obs2;
            // pseudo-measurement noise on the scale of the l1 constraint
            rc.pm.r_eps = std::max(1.0, std::pow(s.xhat2.cwiseAbs().sum(), 2));
            break;
        case DynAlgo::DcsAmp:
            rc.amp = s.amp;
            rc.amp.inner_iters = 25;
            break;
        case DynAlgo::ModCsNoisy:
            rc.eps = 1.1 * std::sqrt(cfg.sigma_obs2 * static_cast<double>(cfg.n_steady));
            break;
        case DynAlgo::IhtPks:
            rc.sparsity = cfg.model.s;
            break;
        case DynAlgo::ZaLms:
            rc.zalms.step = 0.5 / static_cast<double>(cfg.model.m);
            rc.zalms.gamma = 1e-3;
            break;
        case DynAlgo::BpResidual:
            rc.eps = 1.1 * std::sqrt(cfg.sigma_obs2 * static_cast<double>(cfg.n_steady));
            break;
    }
    return rc;
}

} // namespace

std::vector<DynCurve> run_dynamic_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("run_dynamic_experiment: trials must be >= 1");
    if (cfg.model.t_len < 3)
        throw std::invalid_argument("run_dynamic_experiment: need the two calibration frames plus one");
    std::vector<std::string> names = cfg.algos;
    if (names.empty())
        names = {"bpdn", "bpdn-residual", "pm-cs-kf", "mod-bpdn", "weighted-l1",
                 "streaming-mod-wl1", "reg-mod-bpdn", "kf-modcs", "dcs-amp"};
    std::vector<DynAlgo> algos;
    for (const auto& n : names) algos.push_back(dyn_algo_from_string(n));
    const Index t_len = cfg.model.t_len;

    // estimates[algo][trial][t], truths[trial][t]
    std::vector<std::vector<std::vector<Vec>>> estimates(
        algos.size(), std::vector<std::vector<Vec>>(static_cast<std::size_t>(cfg.trials)));
    std::vector<std::vector<Vec>> truths(static_cast<std::size_t>(cfg.trials));
    std::vector<std::vector<std::vector<SupportSet>>> est_supports(
        algos.size(), std::vector<std::vector<SupportSet>>(static_cast<std::size_t>(cfg.trials)));
    std::vector<std::vector<SupportSet>> true_supports(static_cast<std::size_t>(cfg.trials));
    std::vector<std::vector<Vec>> wall(algos.size(),
                                       std::vector<Vec>(static_cast<std::size_t>(cfg.trials)));

    TuneManifest manifest;
    const bool have_manifest = !cfg.manifest_path.empty();
    if (have_manifest) manifest = TuneManifest::load(cfg.manifest_path);

    parallel_trials(cfg.trials, cfg.jobs, [&](int trial) {
        const GeneratedSequence inst = make_dynamic_instance(cfg, static_cast<std::uint64_t>(trial));
        const TrialSetup setup = calibrate(cfg, inst, have_manifest ? &manifest : nullptr);
        truths[static_cast<std::size_t>(trial)] = inst.trace.x;
        true_supports[static_cast<std::size_t>(trial)] = inst.trace.support;

        std::vector<Frame> frames;
        for (Index t = 0; t < t_len; ++t)
            frames.push_back({&inst.ys[static_cast<std::size_t>(t)], &inst.ops[static_cast<std::size_t>(t)]});
        const std::vector<Frame> tail(frames.begin() + 2, frames.end());

        for (std::size_t ai = 0; ai < algos.size(); ++ai) {
            const DynAlgo algo = algos[ai];
            const DynamicRunConfig rc = config_for(algo, cfg, setup);
            SequenceResult res;
            std::vector<Vec> timeline;
            Vec wall_t = Vec::Zero(t_len);
            if (algo == DynAlgo::DcsAmp || algo == DynAlgo::ZaLms) {
                // these trackers consume the whole stream with their own state
                Vec zero = Vec::Zero(cfg.model.m);
                SupportSet empty;
                DynamicRunConfig rc_all = rc;
                res = run_dynamic(algo, frames, rc_all, &zero, &empty);
                timeline = res.xhat;
                for (Index t = 0; t < t_len; ++t) wall_t[t] = res.wall_ms[static_cast<std::size_t>(t)];
            } else {
                res = run_dynamic(algo, tail, rc, &setup.xhat2, &setup.n2);
                timeline.push_back(setup.xhat1);
                timeline.push_back(setup.xhat2);
                for (auto& xh : res.xhat) timeline.push_back(xh);
                for (Index t = 2; t < t_len; ++t)
                    wall_t[t] = res.wall_ms[static_cast<std::size_t>(t - 2)];
            }
            est_supports[ai][static_cast<std::size_t>(trial)].clear();
            for (const Vec& xh : timeline)
                est_supports[ai][static_cast<std::size_t>(trial)].push_back(
                    estimate_support_simple(xh, setup.reg.alpha));
            estimates[ai][static_cast<std::size_t>(trial)] = std::move(timeline);
            wall[ai][static_cast<std::size_t>(trial)] = wall_t;
        }
    });

    std::vector<DynCurve> curves;
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        DynCurve c;
        c.algo = names[ai];
        c.nrmse = nrmse_trace(truths, estimates[ai]);
        c.support_miss = Vec::Zero(t_len);
        c.support_extra = Vec::Zero(t_len);
        c.wall_ms = Vec::Zero(t_len);
        for (int trial = 0; trial < cfg.trials; ++trial) {
            for (Index t = 0; t < t_len; ++t) {
                const auto& truth = true_supports[static_cast<std::size_t>(trial)][static_cast<std::size_t>(t)];
                const auto& est = est_supports[ai][static_cast<std::size_t>(trial)][static_cast<std::size_t>(t)];
                c.support_miss[t] += static_cast<double>(truth.set_difference(est).size());
                c.support_extra[t] += static_cast<double>(est.set_difference(truth).size());
                c.wall_ms[t] += wall[ai][static_cast<std::size_t>(trial)][t];
            }
        }
        c.support_miss /= static_cast<double>(cfg.trials);
        c.support_extra /= static_cast<double>(cfg.trials);
        c.wall_ms /= static_cast<double>(cfg.trials);
        c.mean_wall_ms = c.wall_ms.tail(t_len - 2).mean();
        curves.push_back(std::move(c));
    }
    return curves;
}

// ---------------------------------------------------------------------------
// undersampled image-sequence experiment
// ---------------------------------------------------------------------------

namespace {

Vec flatten_coeffs(const Mat& frame, int levels) {
    Mat coeffs = dwt2_forward(frame, levels);
    Mat coeffs_t = coeffs.transpose();
    return Eigen::Map<const Vec>(coeffs_t.data(), coeffs.size());
}

} // namespace

std::vector<DynCurve> run_mri_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("run_mri_experiment: trials must be >= 1");
    std::vector<std::string> names = cfg.algos;
    if (names.empty())
        names = {"reg-mod-bpdn", "mod-bpdn", "weighted-l1", "kf-modcs", "dcs-amp",
                 "bpdn-residual", "bpdn", "pm-cs-kf"};
    std::vector<DynAlgo> algos;
    for (const auto& n : names) algos.push_back(dyn_algo_from_string(n));

    PhantomSpec pspec = cfg.phantom;
    pspec.seed = derive_seed(cfg.seed, "phantom", 0);
    const PhantomSequence phantom = generate_phantom_sequence(pspec);
    const Index m = pspec.m1 * pspec.m2;
    const Index t_len = static_cast<Index>(phantom.frames.size());
    const Index n_init = static_cast<Index>(std::lround(cfg.mri_init_fraction * static_cast<double>(m)));
    const Index n_steady =
        static_cast<Index>(std::lround(cfg.mri_steady_fraction * static_cast<double>(m)));

    std::vector<Vec> truth;
    for (const Mat& f : phantom.frames) truth.push_back(flatten_coeffs(f, pspec.wavelet_levels));

    std::vector<std::vector<std::vector<Vec>>> estimates(
        algos.size(), std::vector<std::vector<Vec>>(static_cast<std::size_t>(cfg.trials)));
    std::vector<std::vector<Vec>> truths(static_cast<std::size_t>(cfg.trials), truth);
    std::vector<std::vector<Vec>> wall(algos.size(),
                                       std::vector<Vec>(static_cast<std::size_t>(cfg.trials)));

    parallel_trials(cfg.trials, cfg.jobs, [&](int trial) {
        // per-frame operators and measurements
        std::vector<MeasurementOperator> ops;
        std::vector<Vec> ys;
        std::vector<Vec> colnorms;
        for (Index t = 0; t < t_len; ++t) {
            const Index n = t < 2 ? n_init : n_steady;
            MeasurementOperator op = make_partial_fourier_operator(
                pspec.m1, pspec.m2, n, derive_seed(cfg.seed, "mri-mask", static_cast<std::uint64_t>(trial) * 100000 + static_cast<std::uint64_t>(t)));
            ys.push_back(add_noise(op.apply(truth[static_cast<std::size_t>(t)]), cfg.mri_sigma_obs2,
                                   derive_seed(cfg.seed, "mri-noise", static_cast<std::uint64_t>(trial) * 100000 + static_cast<std::uint64_t>(t))));
            colnorms.push_back(op.column_norms());
            ops.push_back(std::move(op));
        }

        // calibration on the first two frames (unit-column frame for tuning)
        const double gamma_init =
            std::max(1e-2 * ops[0].adjoint(ys[0]).lpNorm<Eigen::Infinity>(),
                     std::sqrt(cfg.mri_sigma_obs2 * static_cast<double>(m)));
        auto weights_for = [&](Index t, double gamma, const SupportSet* zero_on = nullptr) {
            Vec w = gamma * colnorms[static_cast<std::size_t>(t)];
            if (zero_on != nullptr)
                for (Index i : *zero_on) w[i] = 0.0;
            return w;
        };
        SolverOptions opts;
        opts.tol = 1e-5;
        opts.max_iter = 6000;

        auto bpdn_at = [&](Index t, const Vec* warm) {
            LagrangianSpec spec;
            spec.weights = weights_for(t, gamma_init);
            SolverOptions o = opts;
            o.warm_start = warm;
            return solve_lagrangian_l1(ops[static_cast<std::size_t>(t)], ys[static_cast<std::size_t>(t)], spec, o).xhat;
        };
        const Vec xhat1 = bpdn_at(0, nullptr);
        const Vec xhat2 = bpdn_at(1, &xhat1);

        // tuned weights from the unit-column view of frame 1
        double gamma_reg = 0.0, lambda_reg = 0.0, gamma_mod = 0.0, alpha = 0.0;
        {
            const TunedParams reg = tune_gamma_lambda(xhat1, xhat2, ys[1], ops[1], default_lambda_grid());
            const TunedParams mod = tune_gamma_lambda(xhat1, xhat2, ys[1], ops[1], {1e-4});
            gamma_reg = reg.gamma;
            lambda_reg = reg.lambda;
            gamma_mod = mod.gamma;
            alpha = reg.alpha;
        }
        const SupportSet n2 = estimate_support_simple(xhat2, alpha);
        const KfParams kfp = tune_kf_params(xhat1, xhat2, ys[1], ops[1], alpha);

        for (std::size_t ai = 0; ai < algos.size(); ++ai) {
            const DynAlgo algo = algos[ai];
            std::vector<Vec> timeline = {xhat1, xhat2};
            Vec wall_t = Vec::Zero(t_len);

            Vec xhat = xhat2;
            SupportSet support = n2;
            KfState kf = KfState::initial(xhat2, n2, kfp.sigma_sys2, m);
            PmCsKfState pm = PmCsKfState::initial(xhat2, kfp.sigma_sys2);
            AmpParams ampp;
            ampp.lambda = std::clamp(static_cast<double>(n2.size()) / static_cast<double>(m), 1e-3, 0.6);
            ampp.p10 = std::clamp(0.05 * ampp.lambda, 1e-4, 0.4);
            ampp.zeta = 0.0;
            ampp.alpha_ar = 0.05;
            ampp.rho = std::max(1e-6, xhat2.squaredNorm() / std::max<Index>(1, n2.size()) *
                                          (2.0 - ampp.alpha_ar) / ampp.alpha_ar);
            ampp.sigma_e2 = std::max(1e-6, kfp.sigma_obs2 * static_cast<double>(m) /
                                               static_cast<double>(2 * n_steady));
            AmpState amp = AmpState::initial(m, ampp);
            amp.record_history = false;

            PmCsKfConfig pmcfg;
            pmcfg.sigma_sys2 = kfp.sigma_sys2;
            pmcfg.sigma_obs2 = std::max(kfp.sigma_obs2, cfg.mri_sigma_obs2);
            KfModCsConfig kfcfg;
            kfcfg.sigma_sys2 = kfp.sigma_sys2;
            kfcfg.sigma_obs2 = std::max(kfp.sigma_obs2, cfg.mri_sigma_obs2);
            kfcfg.alpha = alpha;

            for (Index t = 2; t < t_len; ++t) {
                const auto t0 = std::chrono::steady_clock::now();
                const MeasurementOperator& a = ops[static_cast<std::size_t>(t)];
                const Vec& y = ys[static_cast<std::size_t>(t)];
                SolverOptions o = opts;
                o.warm_start = &xhat;
                switch (algo) {
                    case DynAlgo::Bpdn: {
                        LagrangianSpec spec;
                        spec.weights = weights_for(t, gamma_init);
                        xhat = solve_lagrangian_l1(a, y, spec, o).xhat;
                        break;
                    }
                    case DynAlgo::BpdnResidual: {
                        LagrangianSpec spec;
                        spec.weights = weights_for(t, gamma_init);
                        const Vec resid = y - a.apply(xhat);
                        SolverOptions o2 = opts;
                        xhat = xhat + solve_lagrangian_l1(a, resid, spec, o2).xhat;
                        break;
                    }
                    case DynAlgo::ModBpdn: {
                        LagrangianSpec spec;
                        spec.weights = weights_for(t, gamma_mod, &support);
                        xhat = solve_lagrangian_l1(a, y, spec, o).xhat;
                        support = estimate_support_simple(xhat, alpha);
                        break;
                    }
                    case DynAlgo::WeightedL1: {
                        Vec w = weights_for(t, gamma_mod);
                        const double tau = 0.05;
                        for (Index i : support) w[i] *= tau;
                        LagrangianSpec spec;
                        spec.weights = std::move(w);
                        xhat = solve_lagrangian_l1(a, y, spec, o).xhat;
                        support = estimate_support_simple(xhat, alpha);
                        break;
                    }
                    case DynAlgo::RegModBpdn: {
                        LagrangianSpec spec;
                        spec.weights = weights_for(t, gamma_reg, &support);
                        spec.lambda = lambda_reg;
                        spec.prior_set = &support;
                        spec.mu = &xhat;
                        xhat = solve_lagrangian_l1(a, y, spec, o).xhat;
                        support = estimate_support_simple(xhat, alpha);
                        break;
                    }
                    case DynAlgo::KfModCs: {
                        step_kf_modcs(kf, y, a, kfcfg);
                        xhat = kf.xhat;
                        support = kf.support;
                        break;
                    }
                    case DynAlgo::PmCsKf: {
                        step_pm_cs_kf(pm, y, a, pmcfg);
                        xhat = pm.xhat;
                        break;
                    }
                    case DynAlgo::DcsAmp: {
                        dcs_amp_filter_step(amp, y, a);
                        xhat = amp.xhat;
                        break;
                    }
                    default:
                        throw std::invalid_argument("run_mri_experiment: unsupported algorithm " +
                                                    names[ai]);
                }
                wall_t[t] =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
                timeline.push_back(xhat);
            }
            estimates[ai][static_cast<std::size_t>(trial)] = std::move(timeline);
            wall[ai][static_cast<std::size_t>(trial)] = wall_t;
        }
    });

    std::vector<DynCurve> curves;
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        DynCurve c;
        c.algo = names[ai];
        c.nrmse = nrmse_trace(truths, estimates[ai]);
        c.wall_ms = Vec::Zero(t_len);
        for (int trial = 0; trial < cfg.trials; ++trial) c.wall_ms += wall[ai][static_cast<std::size_t>(trial)];
        c.wall_ms /= static_cast<double>(cfg.trials);
        c.mean_wall_ms = t_len > 2 ? c.wall_ms.tail(t_len - 2).mean() : 0.0;
        curves.push_back(std::move(c));
    }
    return curves;
}

// ---------------------------------------------------------------------------
// weak-threshold sweep and parameter tuning
// ---------------------------------------------------------------------------

std::vector<WeakRow> run_weak_threshold_sweep(const ExperimentConfig& cfg) {
    std::vector<double> taus = cfg.tau_grid;
    if (taus.empty()) taus = {0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
    std::vector<WeakRow> rows;
    for (double tau : taus) {
        WeakThresholdQuery q;
        q.gamma1 = cfg.wt_gamma1;
        q.gamma2 = 1.0 - cfg.wt_gamma1;
        q.p1 = cfg.wt_p1;
        q.p2 = cfg.wt_p2;
        q.omega = tau > 0.0 ? 1.0 / tau : std::numeric_limits<double>::infinity();
        q.grid = cfg.wt_grid;
        q.delta_grid = cfg.wt_delta_grid;
        rows.push_back({tau, weak_threshold(q)});
    }
    return rows;
}

TuneManifest run_tune(const ExperimentConfig& cfg) {
    const GeneratedSequence inst = make_dynamic_instance(cfg, 0);
    const TrialSetup setup = calibrate(cfg, inst);
    TuneManifest m;
    m.gamma = setup.reg.gamma;
    m.lambda = setup.reg.lambda;
    m.alpha = setup.reg.alpha;
    m.tau = setup.tau;
    m.gamma_init = setup.gamma_init;
    m.sigma_sys2 = setup.kf.sigma_sys2;
    m.sigma_obs2 = setup.kf.sigma_obs2;
    return m;
}

} // namespace dyncs
