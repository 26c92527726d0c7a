#include "dyncs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "dyncs/rng.hpp"
#include "dyncs/wavelet.hpp"

namespace dyncs {

namespace {

enum class Phase { Increasing, Large, Decreasing };

struct ElementState {
    Phase phase = Phase::Increasing;
    double sign = 1.0;
    double mag = 0.0;
    int grow_steps = 0;   // completed growth steps since add
    int decay_left = 0;   // steps until zero
    double decay_step = 0.0;
    std::size_t event = SIZE_MAX;    // index into add_events
    std::size_t rm_event = SIZE_MAX; // index into remove_events
};

} // namespace

SequenceTrace generate_model_sequence(const SignalModelParams& p) {
    if (p.s + p.s_a > p.m) throw std::invalid_argument("generate_model_sequence: s + s_a must be <= m");
    if (p.s < 1 || p.t_len < 1 || p.b < 1 || p.d_min < 1 || p.a_min <= 0.0 || p.r_min <= 0.0)
        throw std::invalid_argument("generate_model_sequence: parameters must be positive");
    Rng rng(derive_seed(p.seed, "model-sequence", 0));
    const double ell = p.large_threshold();
    const double cap = p.large_cap();

    SequenceTrace tr;
    tr.m = p.m;
    std::vector<ElementState> st(static_cast<std::size_t>(p.m));
    std::vector<char> active(static_cast<std::size_t>(p.m), 0);

    // initial frame: s large-set elements
    {
        std::vector<Index> all(static_cast<std::size_t>(p.m));
        std::iota(all.begin(), all.end(), Index{0});
        for (Index k = 0; k < p.s; ++k) {
            const Index pick = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(p.m - k)));
            std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(k + pick)]);
        }
        for (Index k = 0; k < p.s; ++k) {
            const Index j = all[static_cast<std::size_t>(k)];
            auto& e = st[static_cast<std::size_t>(j)];
            e.phase = Phase::Large;
            e.sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            e.mag = rng.uniform(ell * 1.0001, cap);
            active[static_cast<std::size_t>(j)] = 1;
        }
    }

    auto snapshot = [&]() {
        Vec x = Vec::Zero(p.m);
        std::vector<Index> supp;
        for (Index j = 0; j < p.m; ++j) {
            if (active[static_cast<std::size_t>(j)]) {
                x[j] = st[static_cast<std::size_t>(j)].sign * st[static_cast<std::size_t>(j)].mag;
                supp.push_back(j);
            }
        }
        tr.x.push_back(std::move(x));
        tr.support.emplace_back(std::move(supp));
    };
    snapshot();

    // zero-hit bookings per step, so support removals never exceed s_a
    std::vector<Index> zero_slots(static_cast<std::size_t>(p.t_len), 0);

    for (Index t = 1; t < p.t_len; ++t) {
        const Index prev_size = tr.support.back().size();
        std::vector<char> zeroed_now(static_cast<std::size_t>(p.m), 0);

        // decreasing elements keep decaying
        for (Index j = 0; j < p.m; ++j) {
            auto& e = st[static_cast<std::size_t>(j)];
            if (!active[static_cast<std::size_t>(j)] || e.phase != Phase::Decreasing) continue;
            e.mag = std::max(0.0, e.mag - e.decay_step);
            --e.decay_left;
            if (e.decay_left <= 0 || e.mag <= 0.0) {
                e.mag = 0.0;
                active[static_cast<std::size_t>(j)] = 0;
                zeroed_now[static_cast<std::size_t>(j)] = 1;
                tr.remove_events[e.rm_event].t_zero = t;
            }
        }

        // departures from the large set
        std::vector<Index> large;
        for (Index j = 0; j < p.m; ++j) {
            const auto& e = st[static_cast<std::size_t>(j)];
            if (active[static_cast<std::size_t>(j)] && e.phase == Phase::Large && e.mag >= ell)
                large.push_back(j);
        }
        Index departures = 0;
        for (Index k = 0; k < p.s_a; ++k)
            if (rng.bernoulli(0.5)) ++departures;
        departures = std::min<Index>(departures, static_cast<Index>(large.size()));
        for (Index k = 0; k < departures; ++k) {
            const std::size_t pick = rng.uniform_index(large.size());
            const Index j = large[pick];
            large.erase(large.begin() + static_cast<std::ptrdiff_t>(pick));
            // choose a zero-hit step in (t-1, t+b-1] whose removal slot is free
            int steps = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p.b)));
            int chosen = 0;
            for (int off = 0; off < p.b; ++off) {
                const int cand = 1 + (steps - 1 + off) % p.b;
                const Index tz = std::min<Index>(t + cand - 1, p.t_len - 1);
                if (zero_slots[static_cast<std::size_t>(tz)] < p.s_a) {
                    chosen = cand;
                    break;
                }
            }
            if (chosen == 0) continue; // every slot booked; skip this departure
            auto& e = st[static_cast<std::size_t>(j)];
            e.phase = Phase::Decreasing;
            e.decay_left = chosen;
            e.rm_event = tr.remove_events.size();
            tr.remove_events.push_back({j, t, 0});
            zero_slots[static_cast<std::size_t>(std::min<Index>(t + chosen - 1, p.t_len - 1))] += 1;
            if (chosen == 1) {
                e.mag = 0.0;
                active[static_cast<std::size_t>(j)] = 0;
                zeroed_now[static_cast<std::size_t>(j)] = 1;
                tr.remove_events.back().t_zero = t;
            } else {
                // drop below the large threshold now, then decay linearly to zero
                e.mag = 0.9 * ell * static_cast<double>(chosen - 1) / static_cast<double>(chosen);
                e.decay_step = e.mag / static_cast<double>(chosen - 1);
                e.decay_left = chosen - 1;
            }
        }

        // additions
        const Index room = p.s - std::min(p.s, prev_size);
        const Index adds = std::min(p.s_a, room);
        for (Index k = 0; k < adds; ++k) {
            std::vector<Index> inactive;
            for (Index j = 0; j < p.m; ++j)
                if (!active[static_cast<std::size_t>(j)] && !zeroed_now[static_cast<std::size_t>(j)])
                    inactive.push_back(j);
            if (inactive.empty()) break;
            const Index j = inactive[rng.uniform_index(inactive.size())];
            auto& e = st[static_cast<std::size_t>(j)];
            e = ElementState{};
            e.phase = Phase::Increasing;
            e.sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            e.mag = rng.uniform(p.a_min, 2.0 * p.a_min);
            e.grow_steps = 0;
            e.event = tr.add_events.size();
            tr.add_events.push_back({j, t, e.mag, {}});
            active[static_cast<std::size_t>(j)] = 1;
        }

        // growth of increasing elements (added strictly before t)
        for (Index j = 0; j < p.m; ++j) {
            auto& e = st[static_cast<std::size_t>(j)];
            if (!active[static_cast<std::size_t>(j)] || e.phase != Phase::Increasing) continue;
            if (e.event != SIZE_MAX && tr.add_events[e.event].t == t) continue; // added this step
            const double r = rng.uniform(p.r_min, 2.0 * p.r_min);
            e.mag += r;
            ++e.grow_steps;
            if (e.event != SIZE_MAX) tr.add_events[e.event].rates.push_back(r);
            if (e.grow_steps >= p.d_min && e.mag > ell) e.phase = Phase::Large;
        }

        // drift of large-set magnitudes (experiment preset)
        if (p.experiment_drift) {
            for (Index j = 0; j < p.m; ++j) {
                auto& e = st[static_cast<std::size_t>(j)];
                if (!active[static_cast<std::size_t>(j)] || e.phase != Phase::Large) continue;
                if (e.mag <= cap) e.mag += rng.uniform(p.r_min, 2.0 * p.r_min);
            }
        }

        snapshot();
    }
    return tr;
}

TraceAudit audit_trace(const SequenceTrace& tr, const SignalModelParams& p) {
    TraceAudit audit;
    auto fail = [&](const std::string& why) {
        audit.ok = false;
        audit.violation = why;
        return audit;
    };
    const double ell = p.large_threshold();
    const Index t_len = static_cast<Index>(tr.x.size());
    for (Index t = 0; t < t_len; ++t) {
        if (tr.support[static_cast<std::size_t>(t)].size() > p.s)
            return fail("support size exceeds s at t=" + std::to_string(t));
        if (t > 0) {
            const auto& cur = tr.support[static_cast<std::size_t>(t)];
            const auto& prev = tr.support[static_cast<std::size_t>(t - 1)];
            if (cur.set_difference(prev).size() > p.s_a)
                return fail("more than s_a additions at t=" + std::to_string(t));
            if (prev.set_difference(cur).size() > p.s_a)
                return fail("more than s_a removals at t=" + std::to_string(t));
        }
    }
    // decay horizon: once an element drops below the large threshold while
    // decreasing, it must reach zero within b steps
    for (Index j = 0; j < tr.m; ++j) {
        for (Index t = 1; t < t_len; ++t) {
            const double prev = std::abs(tr.x[static_cast<std::size_t>(t - 1)][j]);
            const double cur = std::abs(tr.x[static_cast<std::size_t>(t)][j]);
            const bool leaves = prev >= ell && cur < prev && cur < ell && cur > 0.0;
            if (!leaves) continue;
            bool zeroed = false;
            for (Index tau = t; tau < std::min(t_len, t + p.b); ++tau) {
                if (tr.x[static_cast<std::size_t>(tau)][j] == 0.0) {
                    zeroed = true;
                    break;
                }
            }
            if (!zeroed && t + p.b <= t_len)
                return fail("element " + std::to_string(j) + " leaving at t=" + std::to_string(t) +
                            " not zero within b steps");
        }
    }
    // growth duration and rate for every add event
    for (const auto& ev : tr.add_events) {
        if (ev.a_init < p.a_min) return fail("add magnitude below a_min");
        const Index span = std::min<Index>(p.d_min, t_len - 1 - ev.t);
        for (Index d = 0; d < span; ++d) {
            const double before = std::abs(tr.x[static_cast<std::size_t>(ev.t + d)][ev.index]);
            const double after = std::abs(tr.x[static_cast<std::size_t>(ev.t + d + 1)][ev.index]);
            if (after - before < p.r_min - 1e-12)
                return fail("growth rate below r_min for element " + std::to_string(ev.index));
        }
    }
    return audit;
}

void save_trace_events_csv(const std::string& path, const SequenceTrace& tr) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_trace_events_csv: cannot open " + path);
    out << "kind,index,t,value\n";
    for (const auto& ev : tr.add_events) out << "add," << ev.index << "," << ev.t << "," << ev.a_init << "\n";
    for (const auto& ev : tr.remove_events) {
        out << "leave," << ev.index << "," << ev.t_leave << ",0\n";
        if (ev.t_zero > 0) out << "zero," << ev.index << "," << ev.t_zero << ",0\n";
    }
}

MeasurementOperator make_gaussian_operator(Index n, Index m, std::uint64_t seed, bool unit_columns) {
    Rng rng(derive_seed(seed, "gaussian-operator", 0));
    Mat a(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) a(i, j) = rng.gaussian();
    MeasurementOperator op = MeasurementOperator::dense(std::move(a));
    if (unit_columns) return normalize_columns(op).first;
    return op;
}

namespace {

// weighted sample without replacement (exponential-sort keys)
std::vector<Index> weighted_sample(const std::vector<double>& w, Index count, Rng& rng) {
    std::vector<std::pair<double, Index>> keys;
    keys.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        keys.emplace_back(-std::log(u) / w[i], static_cast<Index>(i));
    }
    std::nth_element(keys.begin(), keys.begin() + count, keys.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Index k = 0; k < count; ++k) out.push_back(keys[static_cast<std::size_t>(k)].second);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

MeasurementOperator make_partial_fourier_operator(Index m1, Index m2, Index n, std::uint64_t seed,
                                                  WaveletSpec wavelet) {
    const Index m = m1 * m2;
    if (n > m) throw std::invalid_argument("make_partial_fourier_operator: n > m");
    Rng rng(derive_seed(seed, "fourier-mask", 0));

    // masks live on the conjugate-canonical half-grid (real images carry no
    // extra information on the mirrored frequencies)
    std::vector<Index> universe;
    for (Index f = 0; f < m; ++f)
        if (conjugate_canonical(f, m1, m2) == f) universe.push_back(f);
    const std::size_t mc = universe.size();
    if (n >= static_cast<Index>(mc)) // full sampling: every canonical frequency
        return MeasurementOperator::partial_fourier_dwt(m1, m2, universe, wavelet);

    std::vector<double> weight(mc);
    const double kmax = std::hypot(static_cast<double>(m1) / 2.0, static_cast<double>(m2) / 2.0);
    for (std::size_t i = 0; i < mc; ++i) {
        const Index k1 = universe[i] / m2, k2 = universe[i] % m2;
        const double f1 = static_cast<double>(std::min(k1, m1 - k1));
        const double f2 = static_cast<double>(std::min(k2, m2 - k2));
        const double r = std::hypot(f1, f2) / kmax;
        weight[i] = std::pow(1.0 + r, -2.0);
    }

    // the 50% * 40% * 30% intersection yields a 6% sampling rate; rescale the
    // three fractions so the same recipe reaches the requested rate. The
    // final trim is uniform, so the intersection is kept only barely above n
    // (oversampling it would let the trim wash out the low-frequency bias).
    const double f_target = static_cast<double>(n) / static_cast<double>(m);
    const double base[3] = {0.5, 0.4, 0.3};
    double scale = std::cbrt(f_target / 0.06);

    for (int attempt = 0; attempt < 64; ++attempt, scale *= 1.05) {
        std::vector<int> hits(mc, 0);
        for (double frac : base) {
            const Index count = std::min<Index>(
                static_cast<Index>(mc),
                static_cast<Index>(std::lround(std::min(1.0, frac * scale) * static_cast<double>(mc))));
            for (Index i : weighted_sample(weight, count, rng)) ++hits[static_cast<std::size_t>(i)];
        }
        std::vector<Index> inter;
        for (std::size_t i = 0; i < mc; ++i)
            if (hits[i] == 3) inter.push_back(universe[i]);
        if (static_cast<Index>(inter.size()) < n) continue;
        // n rows uniformly at random from the intersection
        for (Index k = 0; k < n; ++k) {
            const std::size_t j = static_cast<std::size_t>(k) +
                                  rng.uniform_index(inter.size() - static_cast<std::size_t>(k));
            std::swap(inter[static_cast<std::size_t>(k)], inter[j]);
        }
        inter.resize(static_cast<std::size_t>(n));
        std::sort(inter.begin(), inter.end());
        return MeasurementOperator::partial_fourier_dwt(m1, m2, std::move(inter), wavelet);
    }
    throw std::runtime_error("make_partial_fourier_operator: mask intersection stayed below n");
}

Vec add_noise(const Vec& clean, double sigma2, std::uint64_t seed) {
    if (sigma2 < 0.0) throw std::invalid_argument("add_noise: negative variance");
    if (sigma2 == 0.0) return clean;
    Rng rng(derive_seed(seed, "noise", 0));
    const double sd = std::sqrt(sigma2);
    Vec out = clean;
    for (Index i = 0; i < out.size(); ++i) out[i] += sd * rng.gaussian();
    return out;
}

Vec nrmse_trace(const std::vector<std::vector<Vec>>& truth,
                const std::vector<std::vector<Vec>>& estimate) {
    if (truth.empty() || truth.size() != estimate.size())
        throw std::invalid_argument("nrmse_trace: trial counts differ");
    const std::size_t t_len = truth.front().size();
    Vec out(static_cast<Index>(t_len));
    for (std::size_t t = 0; t < t_len; ++t) {
        double err = 0.0, ref = 0.0;
        for (std::size_t trial = 0; trial < truth.size(); ++trial) {
            err += (truth[trial][t] - estimate[trial][t]).squaredNorm();
            ref += truth[trial][t].squaredNorm();
        }
        out[static_cast<Index>(t)] = ref > 0.0 ? std::sqrt(err) / std::sqrt(ref)
                                               : (err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    }
    return out;
}

double nrmse_single(const Vec& truth, const Vec& estimate) {
    const double ref = truth.norm();
    if (ref == 0.0) return (estimate - truth).norm() > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return (truth - estimate).norm() / ref;
}

SupportSet energy_support(const Vec& coeffs, double fraction) {
    const double energy = coeffs.squaredNorm();
    if (energy <= 0.0) return {};
    std::vector<Index> idx(static_cast<std::size_t>(coeffs.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::sort(idx.begin(), idx.end(), [&](Index i, Index j) {
        const double ai = std::abs(coeffs[i]), aj = std::abs(coeffs[j]);
        return ai != aj ? ai > aj : i < j;
    });
    std::vector<Index> keep;
    double cum = 0.0;
    for (Index i : idx) {
        keep.push_back(i);
        cum += coeffs[i] * coeffs[i];
        if (cum >= fraction * energy) break;
    }
    return SupportSet(std::move(keep));
}

PhantomSequence generate_phantom_sequence(const PhantomSpec& spec) {
    const Index m1 = spec.m1, m2 = spec.m2;
    const Index m = m1 * m2;
    PhantomSequence seq;
    Rng rng(derive_seed(spec.seed, "phantom", 0));
    const double cx0 = 0.42 * static_cast<double>(m2);
    const double cy0 = 0.55 * static_cast<double>(m1);
    const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;

    for (Index t = 0; t < spec.t_len; ++t) {
        Mat img(m1, m2);
        const double cx = cx0 + dir * spec.motion_step * static_cast<double>(t);
        const double cy = cy0 + 0.6 * dir * spec.motion_step * static_cast<double>(t);
        for (Index r = 0; r < m1; ++r) {
            for (Index c = 0; c < m2; ++c) {
                const double xr = static_cast<double>(r) / static_cast<double>(m1);
                const double xc = static_cast<double>(c) / static_cast<double>(m2);
                double v = spec.background_amp * (0.55 + 0.45 * std::cos(M_PI * (xr - 0.5)) *
                                                             std::cos(M_PI * (xc - 0.5)));
                // static bright plate with sharp edges
                if (r >= m1 / 8 && r < m1 / 8 + m1 / 5 && c >= (5 * m2) / 8 && c < (5 * m2) / 8 + m2 / 5)
                    v += spec.edge_amp;
                const double d2 = (static_cast<double>(r) - cy) * (static_cast<double>(r) - cy) +
                                  (static_cast<double>(c) - cx) * (static_cast<double>(c) - cx);
                v += spec.blob_amp * std::exp(-0.5 * d2 / (spec.blob_sigma * spec.blob_sigma));
                img(r, c) = v;
            }
        }
        Mat coeffs = dwt2_forward(img, spec.wavelet_levels);
        Mat coeffs_t = coeffs.transpose();
        Vec flat = Eigen::Map<const Vec>(coeffs_t.data(), m);
        seq.wavelet_support.push_back(energy_support(flat, spec.energy_fraction));
        seq.frames.push_back(std::move(img));
    }

    if (spec.verify) {
        for (std::size_t t = 0; t < seq.frames.size(); ++t) {
            const Index sz = seq.wavelet_support[t].size();
            if (sz < (5 * m) / 100 || sz > (9 * m) / 100)
                throw std::runtime_error("generate_phantom_sequence: support size " + std::to_string(sz) +
                                         " outside [5%, 9%] of m at frame " + std::to_string(t));
            if (t > 0) {
                const Index adds = seq.wavelet_support[t].set_difference(seq.wavelet_support[t - 1]).size();
                const Index dels = seq.wavelet_support[t - 1].set_difference(seq.wavelet_support[t]).size();
                if (static_cast<double>(std::max(adds, dels)) > 0.02 * static_cast<double>(sz))
                    throw std::runtime_error("generate_phantom_sequence: support change above 2% at frame " +
                                             std::to_string(t));
            }
        }
    }
    return seq;
}

} // namespace dyncs
