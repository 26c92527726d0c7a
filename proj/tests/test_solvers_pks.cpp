#include <doctest.h>

#include "dyncs/rip.hpp"
#include "dyncs/simulate.hpp"
#include "dyncs/solvers_pks.hpp"
#include "dyncs/tuning.hpp"
#include "instances.hpp"

using namespace dyncs;

TEST_SUITE_BEGIN("solvers-pks");

namespace {

struct Pks {
    MeasurementOperator a;
    Vec x;
    SupportSet supp;
    Vec y;
};

Pks noisefree_instance(Index n, Index m, Index s, std::uint64_t seed) {
    Rng rng(seed);
    MeasurementOperator a = normalize_columns(make_gaussian_operator(n, m, seed + 1000)).first;
    SupportSet supp;
    Vec x = instances::sparse_signal(m, s, 1.0, 2.0, rng, &supp);
    Vec y = a.apply(x);
    return {std::move(a), std::move(x), std::move(supp), std::move(y)};
}

} // namespace

TEST_CASE("lscs: exact support knowledge recovers in the LS stage") {
    const Pks p = noisefree_instance(10, 20, 3, 1);
    const SolverResult r = solve_lscs({p.a, p.y, 0.0, 0.0}, p.supp);
    CHECK((r.xhat - p.x).norm() <= 1e-8 * p.x.norm());
}

TEST_CASE("lscs with empty support is the plain constrained solve") {
    const Pks p = noisefree_instance(12, 20, 3, 2);
    const SolverResult lscs = solve_lscs({p.a, p.y, 0.0, 0.0}, SupportSet{});
    const SolverResult bp = solve_weighted_l1({p.a, p.y, 0.0, 0.0}, Vec::Ones(20), Constraint::Equality);
    CHECK((lscs.xhat - bp.xhat).norm() <= 1e-8 * (1.0 + bp.xhat.norm()));
}

TEST_CASE("lscs beats the no-prior solve on average at low n with u = e = 2") {
    double err_lscs = 0.0, err_bp = 0.0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(300 + static_cast<std::uint64_t>(trial));
        MeasurementOperator a =
            normalize_columns(make_gaussian_operator(18, 60, 700 + static_cast<std::uint64_t>(trial))).first;
        SupportSet supp;
        const Vec x = instances::sparse_signal(60, 8, 1.0, 2.0, rng, &supp);
        const double eps = 0.05;
        const Vec y = a.apply(x) + instances::bounded_noise(18, 0.9 * eps, rng);
        std::vector<Index> nidx(supp.indices());
        SupportSet delta_u{nidx[0], nidx[1]};
        SupportSet t = supp.set_difference(delta_u);
        int added = 0;
        for (Index i = 0; i < 60 && added < 2; ++i)
            if (!supp.contains(i)) {
                t.insert(i);
                ++added;
            }
        err_lscs += (solve_lscs({a, y, eps, 0.0}, t).xhat - x).norm();
        err_bp += (solve_weighted_l1({a, y, eps, 0.0}, Vec::Ones(60), Constraint::Ball).xhat - x).norm();
    }
    CHECK(err_lscs <= err_bp);
}

TEST_CASE("modified-cs: covering support with full rank recovers exactly") {
    const Pks p = noisefree_instance(10, 18, 3, 3);
    SupportSet t = p.supp;
    t.insert((p.supp[0] + 1) % 18 == p.supp[1] ? (p.supp[0] + 2) % 18 : (p.supp[0] + 1) % 18);
    const SolverResult r = solve_modified_cs({p.a, p.y, 0.0, 0.0}, t, false);
    CHECK((r.xhat - p.x).norm() <= 1e-7 * p.x.norm());
}

TEST_CASE("modified-cs with empty support equals basis pursuit") {
    const Pks p = noisefree_instance(9, 16, 3, 4);
    const SolverResult mc = solve_modified_cs({p.a, p.y, 0.0, 0.0}, SupportSet{}, false);
    const SolverResult bp = solve_weighted_l1({p.a, p.y, 0.0, 0.0}, Vec::Ones(16), Constraint::Equality);
    CHECK((mc.xhat - bp.xhat).norm() <= 1e-8);
}

TEST_CASE("modified-cs recovers under the enumerated rank condition") {
    // k + 2u column independence checked exhaustively, then recovery
    Rng rng(31);
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(10, 12, 32)).first;
    SupportSet supp;
    const Vec x = instances::sparse_signal(12, 3, 1.0, 2.0, rng, &supp);
    // T misses one entry (u = 1, e = 0) so k = 2, k + 2u = 4
    SupportSet t(std::vector<Index>(supp.indices().begin(), supp.indices().begin() + 2));
    CheckerSizes z;
    z.k = 2;
    z.u = 1;
    const CheckReport rank = check_exact_recovery_conditions(RecoveryChecker::ModL0Rank, a, z);
    REQUIRE(rank.all_pass);
    const SolverResult r = solve_modified_cs({a, a.apply(x), 0.0, 0.0}, t, false);
    CHECK((r.xhat - x).norm() <= 1e-6 * x.norm());
}

TEST_CASE("degenerate full-index support returns the min-norm point and flags it") {
    const Pks p = noisefree_instance(6, 10, 2, 5);
    const SolverResult r = solve_modified_cs({p.a, p.y, 0.0, 0.0}, SupportSet::full(10), false);
    CHECK(r.degenerate);
    CHECK((p.a.apply(r.xhat) - p.y).norm() <= 1e-8 * (1.0 + p.y.norm()));
}

TEST_CASE("weighted l1 reduction web: tau endpoints") {
    const Pks p = noisefree_instance(10, 20, 3, 6);
    SupportSet t(std::vector<Index>(p.supp.indices().begin(), p.supp.indices().begin() + 2));
    PriorKnowledge prior;
    prior.t = t;

    prior.tau = 0.0;
    const SolverResult w0 = solve_weighted_l1_pks({p.a, p.y, 0.0, 0.0}, prior, false);
    const SolverResult mc = solve_modified_cs({p.a, p.y, 0.0, 0.0}, t, false);
    CHECK((w0.xhat - mc.xhat).norm() <= 1e-8);

    prior.tau = 1.0;
    const SolverResult w1 = solve_weighted_l1_pks({p.a, p.y, 0.0, 0.0}, prior, false);
    const SolverResult bp = solve_weighted_l1({p.a, p.y, 0.0, 0.0}, Vec::Ones(20), Constraint::Equality);
    CHECK((w1.xhat - bp.xhat).norm() <= 1e-8);
}

TEST_CASE("soft support weight beats the hard one when the prior has many extras") {
    double err_wl1 = 0.0, err_mc = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(100 + static_cast<std::uint64_t>(trial));
        const MeasurementOperator a =
            normalize_columns(make_gaussian_operator(24, 60, 500 + static_cast<std::uint64_t>(trial))).first;
        SupportSet supp;
        const Vec x = instances::sparse_signal(60, 8, 1.0, 2.0, rng, &supp);
        const double eps = 0.1;
        const Vec y = a.apply(x) + instances::bounded_noise(24, 0.9 * eps, rng);
        // u = 4 misses and e = 8 extras: half the support knowledge is junk
        SupportSet du(std::vector<Index>(supp.indices().begin(), supp.indices().begin() + 4));
        SupportSet t = supp.set_difference(du);
        Index added = 0;
        for (Index i = 0; i < 60 && added < 8; ++i)
            if (!supp.contains(i)) {
                t.insert(i);
                ++added;
            }
        PriorKnowledge prior;
        prior.t = t;
        prior.tau = std::min(1.0, static_cast<double>(added) / static_cast<double>(supp.size()));
        err_wl1 += (solve_weighted_l1_pks({a, y, eps, 0.0}, prior, true).xhat - x).norm();
        err_mc += (solve_modified_cs({a, y, eps, 0.0}, t, true).xhat - x).norm();
    }
    CHECK(err_wl1 < err_mc);
}

TEST_CASE("reg-mod-bpdn: a dominant prior pins the solution to mu_hat") {
    const Pks p = noisefree_instance(12, 20, 3, 7);
    PriorKnowledge prior;
    prior.t = p.supp;
    prior.gamma = 1e6;
    prior.lambda = 1e6;
    prior.mu_hat = p.x; // unit-scale data
    const SolverResult r = solve_reg_mod_bpdn({p.a, p.y, 0.0, 0.0}, prior);
    CHECK((r.xhat - prior.mu_hat).norm() <= 1e-3);
}

TEST_CASE("reg-mod-bpdn with lambda = 0 is mod-bpdn") {
    const Pks p = noisefree_instance(12, 20, 3, 8);
    SupportSet t(std::vector<Index>(p.supp.indices().begin(), p.supp.indices().begin() + 2));
    PriorKnowledge prior;
    prior.t = t;
    prior.gamma = 0.05;
    prior.lambda = 0.0;
    const SolverResult reg = solve_reg_mod_bpdn({p.a, p.y, 0.0, 0.0}, prior);
    const SolverResult mod = solve_mod_bpdn({p.a, p.y, 0.0, 0.0}, t, 0.05);
    CHECK((reg.xhat - mod.xhat).norm() == doctest::Approx(0.0));
}

TEST_CASE("mod-bpdn with empty support is bpdn") {
    const Pks p = noisefree_instance(10, 18, 3, 9);
    const SolverResult mod = solve_mod_bpdn({p.a, p.y, 0.0, 0.0}, SupportSet{}, 0.07);
    const SolverResult bpdn = solve_bpdn({p.a, p.y, 0.0, 0.07});
    CHECK((mod.xhat - bpdn.xhat).norm() <= 1e-8);
}

TEST_CASE("mod-bpdn-residual reductions") {
    const Pks p = noisefree_instance(12, 20, 3, 10);
    SupportSet t = p.supp;
    PriorKnowledge prior;
    prior.t = t;
    prior.gamma = 0.05;

    SUBCASE("zero prior equals mod-bpdn") {
        prior.mu_hat = Vec::Zero(20);
        const SolverResult res = solve_mod_bpdn_residual({p.a, p.y, 0.0, 0.0}, prior);
        const SolverResult mod = solve_mod_bpdn({p.a, p.y, 0.0, 0.0}, t, 0.05);
        CHECK((res.xhat - mod.xhat).norm() <= 1e-10);
    }
    SUBCASE("exact prior leaves nothing to correct") {
        prior.mu_hat = p.x;
        const SolverResult res = solve_mod_bpdn_residual({p.a, p.y, 0.0, 0.0}, prior);
        CHECK((res.xhat - p.x).norm() <= 1e-9 * p.x.norm());
    }
}

TEST_CASE("iht-pks: exact support and orthonormal operator converge in one step") {
    const MeasurementOperator a = instances::orthonormal_operator(8, 33);
    Rng rng(34);
    SupportSet supp;
    const Vec x = instances::sparse_signal(8, 2, 1.0, 2.0, rng, &supp);
    const Vec x1 = iht_pks_iterate(a, a.apply(x), supp, 2, Vec::Zero(8), 1.0);
    CHECK((x1 - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("iht-pks with empty support is plain iht") {
    const Pks p = noisefree_instance(10, 16, 3, 11);
    const SolverResult pks = solve_iht_pks({p.a, p.y, 0.0, 0.0}, SupportSet{}, 3);
    const SolverResult iht = solve_iht({p.a, p.y, 0.0, 0.0}, 3);
    CHECK((pks.xhat - iht.xhat).norm() == doctest::Approx(0.0));
}

TEST_CASE("iht-pks contracts geometrically under the certified isometry bound") {
    // scaled flat frame: ||A|| < 1 with delta_{3s-2k} just under 1/sqrt(32)
    const Index n = 22, m = 23, s = 2, k = 1;
    MeasurementOperator base = instances::simplex_frame(n, 35);
    Mat scaled = base.dense_matrix() * std::sqrt(0.999 * static_cast<double>(n) / static_cast<double>(m));
    const MeasurementOperator a = MeasurementOperator::dense(std::move(scaled));
    const double delta = ric_bruteforce(a, 3 * s - 2 * k).delta;
    REQUIRE(a.op_norm() < 1.0);
    REQUIRE(delta < 1.0 / std::sqrt(32.0));

    Rng rng(36);
    SupportSet supp;
    const Vec x = instances::sparse_signal(m, s, 1.0, 2.0, rng, &supp);
    const SupportSet t(std::vector<Index>(supp.indices().begin(), supp.indices().begin() + k));
    const Vec y = a.apply(x);
    const double rate = std::sqrt(8.0) * delta * 1.10; // stated slack
    Vec it = Vec::Zero(m);
    double err = x.norm();
    for (int i = 0; i < 60 && err > 1e-10; ++i) {
        it = iht_pks_iterate(a, y, t, s, it, 1.0);
        const double next = (x - it).norm();
        CHECK(next <= rate * err + 1e-12);
        err = next;
    }
    CHECK(err <= 1e-10);
}

TEST_CASE("projected and direct modified-cs agree") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Pks p = noisefree_instance(12, 20, 4, 200 + seed);
        SupportSet t(std::vector<Index>(p.supp.indices().begin(), p.supp.indices().begin() + 3));
        t.insert((t[2] + 5) % 20); // one extra
        const SolverResult proj = solve_modcs_projected({p.a, p.y, 0.0, 0.0}, t);
        const SolverResult direct = solve_modified_cs({p.a, p.y, 0.0, 0.0}, t, false);
        CHECK((proj.xhat - direct.xhat).norm() <= 1e-5 * (1.0 + direct.xhat.norm()));
    }
}

TEST_CASE("projected modified-cs with empty support is plain bp") {
    const Pks p = noisefree_instance(10, 16, 3, 12);
    const SolverResult proj = solve_modcs_projected({p.a, p.y, 0.0, 0.0}, SupportSet{});
    const SolverResult bp = solve_weighted_l1({p.a, p.y, 0.0, 0.0}, Vec::Ones(16), Constraint::Equality);
    CHECK((proj.xhat - bp.xhat).norm() <= 1e-8);
}

TEST_CASE("projected modified-cs with a covering support reduces to the LS fit") {
    const Pks p = noisefree_instance(10, 16, 3, 13);
    const SolverResult proj = solve_modcs_projected({p.a, p.y, 0.0, 0.0}, p.supp);
    CHECK((proj.xhat - p.x).norm() <= 1e-8 * p.x.norm());
    for (Index i = 0; i < 16; ++i)
        if (!p.supp.contains(i)) CHECK(std::abs(proj.xhat[i]) <= 1e-9);
}

TEST_CASE("recovered support equals the true support on exact-recovery instances") {
    const Pks p = noisefree_instance(12, 20, 3, 14);
    SupportSet t(std::vector<Index>(p.supp.indices().begin(), p.supp.indices().begin() + 2));
    const SolverResult r = solve_modified_cs({p.a, p.y, 0.0, 0.0}, t, false);
    REQUIRE((r.xhat - p.x).norm() <= 1e-7 * p.x.norm());
    CHECK(SupportSet::from_nonzeros(r.xhat, 1e-6) == p.supp);
}

TEST_SUITE_END();
