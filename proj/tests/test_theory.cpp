#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "calql/env/generators.hpp"
#include "calql/theory/transfer.hpp"

using namespace calql;
using env::DiscretePolicy;
using env::TabularMdp;
using theory::StepTables;

namespace {

// Two-arm bandit (H=1): deterministic rewards 0.3 / 0.7.
TabularMdp two_arm_bandit() {
    TabularMdp m;
    m.n_states = 1;
    m.n_actions = 2;
    m.gamma = 1.0;
    m.horizon = 1;
    m.transition = {1.0, 1.0};
    m.reward = {0.3, 0.7};
    m.initial_dist = {1.0};
    return m;
}

std::vector<DiscretePolicy> stationary(const DiscretePolicy& pi, int H) {
    return std::vector<DiscretePolicy>(static_cast<std::size_t>(H), pi);
}

}  // namespace

TEST_CASE("H=1 bandit: one iteration fits empirical mean rewards, greedy picks the best arm") {
    TabularMdp m = two_arm_bandit();
    theory::StepDataset offline(1);
    // Both arms pulled twice; deterministic rewards make the means exact.
    for (int arm : {0, 1, 0, 1}) {
        offline[0].s.push_back(0);
        offline[0].a.push_back(arm);
        offline[0].r.push_back(m.reward[static_cast<std::size_t>(arm)]);
        offline[0].s_next.push_back(0);
    }
    theory::FqiOptions opts;
    opts.iterations = 1;
    opts.m_on = 1;
    opts.seed = 3;
    theory::FqiRun run = theory::run_calibrated_fqi(m, offline, {}, opts);
    REQUIRE(run.final_f.size() == 1);
    CHECK(run.final_f[0][0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(run.final_f[0][1] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(run.final_policy[0].mode(0) == 1);
}

TEST_CASE("calibration clipping holds at every iteration, step and pair") {
    TabularMdp m = env::make_random_finite_mdp(4, 2, 3, 17);
    DiscretePolicy ref_pi = DiscretePolicy::uniform(4, 2);
    StepTables q_ref = theory::reference_q_tables(m, ref_pi);
    theory::StepDataset offline = theory::collect_offline_step_data(m, ref_pi, 6, 5);

    theory::FqiOptions opts;
    opts.iterations = 12;
    opts.m_on = 1;
    opts.calibrate = true;
    opts.seed = 9;
    theory::FqiRun run = theory::run_calibrated_fqi(m, offline, q_ref, opts);

    auto check_tables = [&](const StepTables& f) {
        for (std::size_t h = 0; h < f.size(); ++h)
            for (std::size_t key = 0; key < f[h].size(); ++key) CHECK(f[h][key] >= q_ref[h][key] - 1e-12);
    };
    // Iterate 0 is the zero initialization (pre-fit); every refit result must
    // dominate the reference.
    for (std::size_t k = 1; k < run.iterates.size(); ++k) check_tables(run.iterates[k].f);
    check_tables(run.final_f);
}

TEST_CASE("zero reference clipping is a no-op for nonnegative-reward MDPs") {
    TabularMdp m = env::make_random_finite_mdp(4, 2, 3, 23);
    DiscretePolicy beta = DiscretePolicy::uniform(4, 2);
    theory::StepDataset offline = theory::collect_offline_step_data(m, beta, 5, 11);
    StepTables zero_ref(3, std::vector<double>(8, 0.0));

    theory::FqiOptions with;
    with.iterations = 8;
    with.calibrate = true;
    with.seed = 31;
    theory::FqiOptions without = with;
    without.calibrate = false;

    theory::FqiRun a = theory::run_calibrated_fqi(m, offline, zero_ref, with);
    theory::FqiRun b = theory::run_calibrated_fqi(m, offline, zero_ref, without);
    REQUIRE(a.iterates.size() == b.iterates.size());
    for (std::size_t k = 0; k < a.iterates.size(); ++k)
        for (std::size_t h = 0; h < a.iterates[k].f.size(); ++h)
            CHECK(a.iterates[k].f[h] == b.iterates[k].f[h]);
    CHECK(a.final_f == b.final_f);
}

TEST_CASE("regret decomposition: optimal plug-in gives zero terms") {
    TabularMdp m = env::make_random_finite_mdp(4, 2, 3, 41);
    env::FiniteValues opt = env::finite_optimal_values(m);
    theory::FqiRun run;
    theory::FqiIterate it;
    it.f = opt.q;
    for (std::size_t h = 0; h < 3; ++h) {
        std::vector<int> best(4, 0);
        for (std::size_t s = 0; s < 4; ++s)
            for (std::size_t a = 1; a < 2; ++a)
                if (opt.q[h][s * 2 + a] > opt.q[h][s * 2 + best[s]]) best[s] = static_cast<int>(a);
        it.policy.push_back(DiscretePolicy::deterministic(best, 2));
    }
    run.iterates.push_back(it);
    std::vector<theory::RegretRow> rows = theory::regret_decomposition(m, run);
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0].term_i) < 1e-12);
    CHECK(std::abs(rows[0].term_ii) < 1e-12);
    CHECK(std::abs(rows[0].regret) < 1e-12);
}

TEST_CASE("regret decomposition: zero tables give term_i = E[V*], term_ii = -E[V^pi]") {
    TabularMdp m = env::make_random_finite_mdp(4, 2, 3, 47);
    theory::FqiRun run;
    theory::FqiIterate it;
    it.f.assign(3, std::vector<double>(8, 0.0));
    it.policy = stationary(DiscretePolicy::deterministic({0, 0, 0, 0}, 2), 3);
    run.iterates.push_back(it);
    std::vector<theory::RegretRow> rows = theory::regret_decomposition(m, run);

    env::FiniteValues opt = env::finite_optimal_values(m);
    env::FiniteValues vpi = env::finite_policy_values(m, it.policy);
    double ev_star = 0.0, ev_pi = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
        ev_star += m.initial_dist[s] * opt.v[0][s];
        ev_pi += m.initial_dist[s] * vpi.v[0][s];
    }
    CHECK(rows[0].term_i == doctest::Approx(ev_star).epsilon(1e-12));
    CHECK(rows[0].term_ii == doctest::Approx(-ev_pi).epsilon(1e-12));
}

TEST_CASE("decomposition identity term_i + term_ii = E[V*] - E[V^pi] on random instances") {
    Rng rng(61);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        TabularMdp m = env::make_random_finite_mdp(4, 2, 3, seed + 100);
        theory::FqiRun run;
        theory::FqiIterate it;
        it.f.assign(3, std::vector<double>(8, 0.0));
        for (auto& fh : it.f)
            for (double& v : fh) v = rng.uniform(-1.0, 3.0);
        // Greedy policy of the random tables (what the algorithm would deploy).
        for (std::size_t h = 0; h < 3; ++h) {
            std::vector<int> best(4, 0);
            for (std::size_t s = 0; s < 4; ++s)
                if (it.f[h][s * 2 + 1] > it.f[h][s * 2]) best[s] = 1;
            it.policy.push_back(DiscretePolicy::deterministic(best, 2));
        }
        run.iterates.push_back(it);
        std::vector<theory::RegretRow> rows = theory::regret_decomposition(m, run);

        env::FiniteValues opt = env::finite_optimal_values(m);
        env::FiniteValues vpi = env::finite_policy_values(m, it.policy);
        double expected = 0.0;
        for (std::size_t s = 0; s < 4; ++s)
            expected += m.initial_dist[s] * (opt.v[0][s] - vpi.v[0][s]);
        CHECK(rows[0].term_i + rows[0].term_ii == doctest::Approx(expected).epsilon(1e-9));
        CHECK(rows[0].regret == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("state-action occupancies are distributions at every step") {
    TabularMdp m = env::make_random_finite_mdp(5, 3, 4, 71);
    DiscretePolicy pi = DiscretePolicy::uniform(5, 3);
    StepTables occ = theory::state_action_occupancy(m, stationary(pi, 4));
    REQUIRE(occ.size() == 4);
    for (const auto& oh : occ) {
        double total = 0.0;
        for (double v : oh) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("transfer coefficient: zero-Bellman-error candidate is skipped; singleton grid gives 0") {
    TabularMdp m = env::make_random_finite_mdp(3, 2, 2, 83);
    env::FiniteValues opt = env::finite_optimal_values(m);
    std::vector<int> best(3, 0);
    for (std::size_t s = 0; s < 3; ++s)
        if (opt.q[0][s * 2 + 1] > opt.q[0][s * 2]) best[s] = 1;
    std::vector<DiscretePolicy> pi = stationary(DiscretePolicy::deterministic(best, 2), 2);

    StepTables nu = theory::state_action_occupancy(m, stationary(DiscretePolicy::uniform(3, 2), 2));
    theory::TransferOptions opts;
    const double c = theory::transfer_coefficient_over(m, pi, nu, {opt.q}, opts);
    CHECK(c == 0.0);
    CHECK_THROWS_AS(theory::transfer_coefficient_over(m, pi, nu, {}, opts), Error);
}

TEST_CASE("on-distribution single candidate obeys the sqrt(H) Cauchy-Schwarz bound") {
    TabularMdp m = env::make_random_finite_mdp(3, 2, 3, 89);
    DiscretePolicy pi = DiscretePolicy::uniform(3, 2);
    StepTables d_pi = theory::state_action_occupancy(m, stationary(pi, 3));

    env::FiniteValues opt = env::finite_optimal_values(m);
    StepTables shifted = opt.q;
    for (auto& fh : shifted)
        for (double& v : fh) v -= 0.1;  // constant pessimistic offset

    theory::TransferOptions opts;
    const double c = theory::transfer_coefficient_over(m, stationary(pi, 3), d_pi, {shifted}, opts);
    CHECK(c <= std::sqrt(3.0) + 1e-9);
    CHECK(c >= 0.0);
}

TEST_CASE("restricting the candidate list never increases the coefficient") {
    TabularMdp m = env::make_random_finite_mdp(3, 2, 2, 97);
    DiscretePolicy pi = DiscretePolicy::uniform(3, 2);
    StepTables nu = theory::state_action_occupancy(m, stationary(pi, 2));

    Rng rng(8);
    std::vector<StepTables> candidates;
    for (int i = 0; i < 40; ++i) {
        StepTables f(2, std::vector<double>(6, 0.0));
        for (auto& fh : f)
            for (double& v : fh) v = rng.uniform(0.0, 2.0);
        candidates.push_back(std::move(f));
    }
    theory::TransferOptions opts;
    const double full = theory::transfer_coefficient_over(m, stationary(pi, 2), nu, candidates, opts);
    std::vector<StepTables> subset(candidates.begin(), candidates.begin() + 10);
    const double restricted =
        theory::transfer_coefficient_over(m, stationary(pi, 2), nu, subset, opts);
    CHECK(restricted <= full + 1e-9);
}

TEST_CASE("calibrated lattice coefficient never exceeds the unrestricted one") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        TabularMdp m = env::make_random_finite_mdp(3, 2, 2, 200 + seed);
        DiscretePolicy target = DiscretePolicy::uniform(3, 2);
        DiscretePolicy ref_pi = DiscretePolicy::uniform(3, 2);
        StepTables q_ref = theory::reference_q_tables(m, ref_pi);
        StepTables nu =
            theory::state_action_occupancy(m, stationary(DiscretePolicy::uniform(3, 2), 2));

        theory::LatticeGrid grid;
        grid.v_max = 2.0;
        grid.levels = 3;

        theory::TransferOptions plain;
        const double c_pi = theory::transfer_coefficient(m, stationary(target, 2), nu, grid, plain);
        theory::TransferOptions cal;
        cal.calibrated = true;
        cal.q_ref = &q_ref;
        const double c_mu = theory::transfer_coefficient(m, stationary(target, 2), nu, grid, cal);
        CHECK(c_mu <= c_pi + 1e-9);
    }
}

TEST_CASE("narrow-path family: the sink is strictly worse than the path") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TabularMdp m = env::make_narrow_path_mdp(seed);
        env::FiniteValues opt = env::finite_optimal_values(m);
        // Optimal value from the start exceeds what the sink alone can give.
        CHECK(opt.v[0][0] > 0.6);
    }
}

TEST_CASE("calibration with a near-optimal reference speeds up the narrow-path family") {
    // Directional check over a handful of seeds (the acceptance suite runs
    // the full 20-seed version).
    double cum_with = 0.0, cum_without = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        TabularMdp m = env::make_narrow_path_mdp(seed);
        env::FiniteValues opt = env::finite_optimal_values(m);
        std::vector<int> best(m.n_states, 0);
        for (std::size_t s = 0; s < m.n_states; ++s)
            if (opt.q[0][s * 2 + 1] > opt.q[0][s * 2]) best[s] = 1;
        DiscretePolicy ref_pi = DiscretePolicy::deterministic(best, 2);
        for (double& p : ref_pi.probs) p = 0.95 * p + 0.025;  // near-optimal softening

        StepTables q_ref = theory::reference_q_tables(m, ref_pi);
        theory::StepDataset offline = theory::collect_offline_step_data(m, ref_pi, 4, seed + 900);

        theory::FqiOptions opts;
        opts.iterations = 50;
        opts.m_on = 1;
        opts.seed = seed + 1000;
        opts.calibrate = true;
        theory::FqiRun with = theory::run_calibrated_fqi(m, offline, q_ref, opts);
        opts.calibrate = false;
        theory::FqiRun without = theory::run_calibrated_fqi(m, offline, q_ref, opts);

        cum_with += theory::regret_decomposition(m, with).back().cum_regret;
        cum_without += theory::regret_decomposition(m, without).back().cum_regret;
    }
    CHECK(cum_with <= cum_without);
}
