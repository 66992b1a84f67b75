// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
// The experiment-backed checks (3, 4, 5, 10) run the shipped config files
// under configs/ through the regular harness; everything else drives the
// library directly against independent oracles.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "calql/agents/continuous_sac.hpp"
#include "calql/agents/discrete_sac.hpp"
#include "calql/agents/exact_agent.hpp"
#include "calql/env/generators.hpp"
#include "calql/harness/runner.hpp"
#include "calql/metrics/metrics.hpp"
#include "calql/theory/transfer.hpp"

using namespace calql;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %s: %s\n", pass ? "PASS" : "FAIL", index, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string config_path(const std::string& name) {
    return std::string(CALQL_SOURCE_DIR) + "/configs/" + name;
}

double now_seconds() {
    return static_cast<double>(std::clock()) / CLOCKS_PER_SEC;
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence: alpha=0 tabular critic updates converge to the
//    exact policy-evaluation values on 20 random 6-state MDPs.
void criterion_oracle_equivalence() {
    const double t0 = now_seconds();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        env::TabularMdp mdp = env::make_random_mdp(6, 3, 0.9, 1000 + seed);
        Rng rng(seed);
        std::vector<int> acts(6);
        for (int& a : acts) a = rng.uniform_int(3);
        env::DiscretePolicy pi = env::DiscretePolicy::deterministic(acts, 3);

        agents::ExactCritic critic = agents::ExactCritic::zeros(6, 3);
        agents::ExactDistribution dist;
        dist.n_states = 6;
        dist.n_actions = 3;
        dist.state_weight.assign(6, 0.0);
        dist.pair_weight.assign(18, 0.0);
        dist.behavior_prob.assign(18, 0.0);
        dist.in_dataset.assign(6, 0);
        agents::ExactUpdateOptions opts;  // alpha=0, eta=1, tau=1
        for (int it = 0; it < 400; ++it) agents::exact_critic_update(critic, mdp, dist, pi, {}, opts);

        env::PolicyValues oracle = env::exact_policy_values(mdp, pi);
        for (std::size_t k = 0; k < critic.q.size(); ++k)
            worst = std::max(worst, std::abs(critic.q[k] - oracle.q[k]));
    }
    const double elapsed = now_seconds() - t0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max |Q - Q^pi| = %.2e over 20 MDPs (%.1f s)", worst, elapsed);
    report(1, "oracle equivalence (alpha=0 tabular TD)", worst < 1e-4 && elapsed < 10.0, buf);
}

// ---------------------------------------------------------------------------
// 2. Reference-disabled calibrated regularizer equals the plain one to 1e-12
//    on 1000 random batches (500 sampled-estimator, 500 exact-tabular).
void criterion_identity() {
    double worst = 0.0;

    for (int trial = 0; trial < 500; ++trial) {
        Rng data_rng(5000 + trial);
        const std::size_t B = 4 + data_rng.uniform_index(5);
        agents::ContinuousBatch batch;
        batch.obs = nn::Tensor(B, 3);
        batch.actions = nn::Tensor(B, 2);
        batch.next_obs = nn::Tensor(B, 3);
        for (double& v : batch.obs.data) v = data_rng.uniform(-1, 1);
        for (double& v : batch.actions.data) v = data_rng.uniform(-1, 1);
        for (double& v : batch.next_obs.data) v = data_rng.uniform(-1, 1);
        batch.rewards.assign(B, 0.0);
        batch.done.assign(B, 0);
        batch.mc_return.assign(B, 0.0);
        batch.mc_unreliable.assign(B, 0);
        for (std::size_t i = 0; i < B; ++i) {
            batch.rewards[i] = data_rng.uniform();
            batch.mc_return[i] = data_rng.uniform(-2, 2);
        }

        agents::ContinuousSacConfig cfg;
        cfg.obs_dim = 3;
        cfg.action_dim = 2;
        cfg.q_hidden = {12};
        cfg.pi_hidden = {12};
        cfg.alpha = agents::AlphaConfig::single(1.0);
        cfg.k = 4;
        agents::ContinuousSacAgent a(cfg, 100 + trial);
        agents::ContinuousSacAgent b(cfg, 100 + trial);
        agents::ContinuousBatch flagged = batch;
        std::fill(flagged.mc_unreliable.begin(), flagged.mc_unreliable.end(), 1);
        Rng ra(trial), rb(trial);
        auto da = a.critic_update(batch, data::ReferenceValues::disabled(), agents::Phase::Offline, ra);
        auto db =
            b.critic_update(flagged, data::ReferenceValues::mc_return(), agents::Phase::Offline, rb);
        worst = std::max(worst, std::abs(da.reg_value - db.reg_value));
    }

    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t S = 3, A = 4;
        std::vector<double> q(S * A);
        for (double& v : q) v = rng.uniform(-3, 3);
        agents::ExactDistribution dist;
        dist.n_states = S;
        dist.n_actions = A;
        dist.state_weight.assign(S, 1.0 / S);
        dist.pair_weight.assign(S * A, 0.0);
        dist.behavior_prob.assign(S * A, 0.0);
        dist.in_dataset.assign(S, 1);
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t a = rng.uniform_index(A);
            dist.pair_weight[s * A + a] = 1.0 / S;
            dist.behavior_prob[s * A + a] = 1.0;
        }
        env::DiscretePolicy pi = env::DiscretePolicy::uniform(S, A);
        std::vector<double> off(S * A, -std::numeric_limits<double>::infinity());
        const double plain = agents::exact_cql_regularizer(q, dist, pi).value;
        const double cal = agents::exact_calibrated_regularizer(q, dist, pi, off).value;
        worst = std::max(worst, std::abs(plain - cal));
    }

    char buf[120];
    std::snprintf(buf, sizeof(buf), "max |R_cal - R_cql| = %.2e over 1000 batches", worst);
    report(2, "reference-disabled identity (calibrated == plain regularizer)", worst <= 1e-12, buf);
}

// ---------------------------------------------------------------------------
// 3. Calibration in dataset-state expectation after offline training.
void criterion_calibration() {
    const double t0 = now_seconds();
    harness::ExperimentConfig cfg = harness::parse_config_file(config_path("calibration_calql.cfg"));
    double worst_margin = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        harness::ExperimentRunner runner(cfg, seed);
        runner.run_offline_phase();
        auto* exact = dynamic_cast<agents::ExactMazeAgent*>(&runner.agent());
        const double epiq = exact->mean_policy_value_over_dataset();
        const double vmu =
            data::mean_reference_value(runner.dataset(), data::ReferenceValues::mc_return());
        worst_margin = std::min(worst_margin, epiq - vmu);
    }
    const double per_seed = (now_seconds() - t0) / 5.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "min margin E_pi[Q] - mean V^mu = %+.4f over 5 seeds (%.2f s/seed)",
                  worst_margin, per_seed);
    report(3, "calibration property (Definition 4.1 in expectation)",
           worst_margin >= -1e-3 && per_seed < 120.0, buf);
}

// ---------------------------------------------------------------------------
// 4 & 5. Unlearning-dip reproduction and Q-scale correction, from the four
//        shipped maze experiment configs (5 seeds each).
struct RunSummary {
    double offline_final_score = 0.0;
    double offline_final_q = 0.0;
    double dip_depth = 0.0;
    bool q_reaches_band = false;
    double bounding_mean = 0.0;
    double mean_mc = 0.0;
    std::uint64_t log_hash = 0;
};

RunSummary summarize_run(const harness::ExperimentConfig& cfg, std::uint64_t seed) {
    harness::ExperimentRunner runner(cfg, seed);
    runner.run_offline_phase();
    runner.run_online_phase();
    const auto& records = runner.log().records();

    RunSummary s;
    s.mean_mc = runner.dataset().mean_mc_return();
    s.log_hash = runner.log().content_hash();
    std::vector<double> online_scores;
    std::vector<double> online_bounds;
    for (const auto& r : records) {
        if (r.phase == agents::Phase::Offline) {
            s.offline_final_score = r.normalized_score;
            s.offline_final_q = r.avg_dataset_q;
        } else {
            online_scores.push_back(r.normalized_score);
            online_bounds.push_back(r.bounding_rate);
            if (std::abs(r.avg_dataset_q - s.mean_mc) <= 0.1 * s.mean_mc) s.q_reaches_band = true;
        }
    }
    const std::size_t window = std::max<std::size_t>(1, online_scores.size() / 2);
    metrics::DipReport dip =
        metrics::detect_unlearning_dip(online_scores, s.offline_final_score, window, 0.1);
    s.dip_depth = dip.depth;
    for (double b : online_bounds) s.bounding_mean += b / static_cast<double>(online_bounds.size());
    return s;
}

std::map<std::string, std::vector<RunSummary>> g_runs;

void run_maze_experiments() {
    struct Job {
        std::string name;
        std::uint64_t seed;
        std::future<RunSummary> fut;
    };
    std::vector<Job> jobs;
    for (const char* name : {"narrow_cql", "narrow_calql", "diverse_cql", "diverse_calql"}) {
        harness::ExperimentConfig cfg =
            harness::parse_config_file(config_path(std::string(name) + ".cfg"));
        for (std::uint64_t seed = 0; seed < 5; ++seed)
            jobs.push_back({name, seed,
                            std::async(std::launch::async,
                                       [cfg, seed] { return summarize_run(cfg, seed); })});
    }
    for (Job& j : jobs) g_runs[j.name].push_back(j.fut.get());
}

void criterion_unlearning_dip() {
    int cql_dips = 0, calql_stable = 0;
    for (const RunSummary& s : g_runs["narrow_cql"])
        if (s.dip_depth >= 0.2 * s.offline_final_score && s.offline_final_score > 0) ++cql_dips;
    for (const RunSummary& s : g_runs["narrow_calql"])
        if (s.dip_depth <= 0.05) ++calql_stable;

    bool diverse_ok = true;
    double worst_bound = 0.0, worst_depth = 0.0;
    for (const char* name : {"diverse_cql", "diverse_calql"})
        for (const RunSummary& s : g_runs[name]) {
            worst_depth = std::max(worst_depth, s.dip_depth);
            worst_bound = std::max(worst_bound, s.bounding_mean);
            diverse_ok = diverse_ok && s.dip_depth <= 0.05 && s.bounding_mean < 0.05;
        }

    char buf[220];
    std::snprintf(buf, sizeof(buf),
                  "narrow: cql dips %d/5, calql stable %d/5; diverse: max depth %.2f, max "
                  "bounding %.3f",
                  cql_dips, calql_stable, worst_depth, worst_bound);
    report(4, "unlearning-dip reproduction", cql_dips >= 4 && calql_stable >= 4 && diverse_ok, buf);
}

void criterion_q_scale() {
    int cql_under = 0, cql_band = 0, calql_band = 0;
    for (const RunSummary& s : g_runs["narrow_cql"]) {
        if (s.offline_final_q <= 0.75 * s.mean_mc) ++cql_under;
        if (s.q_reaches_band) ++cql_band;
    }
    for (const RunSummary& s : g_runs["narrow_calql"])
        if (std::abs(s.offline_final_q - s.mean_mc) <= 0.1 * s.mean_mc) ++calql_band;
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "cql: offline >=25%% under %d/5, online reaches +-10%% band %d/5; calql offline in "
                  "band %d/5",
                  cql_under, cql_band, calql_band);
    report(5, "Q-scale correction", cql_under == 5 && cql_band == 5 && calql_band == 5, buf);
}

// ---------------------------------------------------------------------------
// 6. Mixing-ratio exactness and pooled-uniformity chi-square.
void criterion_mixing() {
    data::Trajectory t;
    for (int i = 0; i < 60; ++i) {
        env::EpisodeStep st;
        st.state = i;
        st.action = 0;
        st.next_state = i + 1;
        st.done = i == 59;
        t.steps.push_back(st);
    }
    data::OfflineDataset off = data::OfflineDataset::from_trajectories({t}, 0.99, "narrow");

    bool counts_ok = true;
    for (double m : {0.0, 0.25, 0.5, 1.0}) {
        replay::MixedReplayBuffer buf(&off, 64, m);
        env::EpisodeStep st;
        st.state = 1000;
        buf.push_online(st);
        for (std::size_t B = 1; B <= 64; ++B) {
            Rng rng(B);
            replay::Batch batch = buf.sample(B, rng, m);
            const std::size_t expected = static_cast<std::size_t>(std::floor(m * B + 0.5));
            counts_ok = counts_ok && batch.offline_rows() == expected && batch.size() == B;
        }
    }

    replay::MixedReplayBuffer pooled(&off, 64, -1.0);
    for (int i = 0; i < 40; ++i) {
        env::EpisodeStep st;
        st.state = 1000 + i;
        pooled.push_online(st);
    }
    Rng rng(9);
    replay::Batch batch = pooled.sample(100000, rng);
    std::vector<long> counts(100, 0);
    for (const auto& tr : batch.transitions)
        counts[static_cast<std::size_t>(tr.state < 1000 ? tr.state : 60 + tr.state - 1000)]++;
    const double expected = 1000.0;
    double chi2 = 0.0;
    for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const double dof = 99.0, z99 = 2.3263478740408408;
    const double bound = dof * std::pow(1.0 - 2.0 / (9.0 * dof) + z99 * std::sqrt(2.0 / (9.0 * dof)), 3.0);

    char buf[140];
    std::snprintf(buf, sizeof(buf), "count rule exact; chi2 = %.1f < %.1f (99%%, 99 dof)", chi2, bound);
    report(6, "mixing-ratio exactness", counts_ok && chi2 < bound, buf);
}

// ---------------------------------------------------------------------------
// 7. Autodiff gradients vs central finite differences, 20 random nets/losses.
void criterion_gradients() {
    double worst = 0.0;
    Rng rng(31337);
    for (int trial = 0; trial < 20; ++trial) {
        // Smooth activations keep central differences a valid oracle
        // (ReLU kinks would make the oracle itself wrong near zero).
        nn::Mlp net = nn::Mlp::create({3, 6, 5, 2}, nn::Activation::Tanh, rng);
        nn::Tensor x(4, 3);
        for (double& v : x.data) v = rng.uniform(-1.5, 1.5);
        const int kind = trial % 4;

        auto loss_value = [&](const nn::Mlp& n) {
            nn::Tensor out = n.forward(x);
            switch (kind) {
                case 0: {
                    double s = 0;
                    for (double v : out.data) s += v * v;
                    return s / out.size();
                }
                case 1: {
                    nn::Tensor l = nn::logsumexp_rows(out);
                    double s = 0;
                    for (double v : l.data) s += v;
                    return s / l.size();
                }
                case 2: {
                    double s = 0;
                    for (double v : out.data) s += std::exp(0.4 * v);
                    return s / out.size();
                }
                default: {
                    double s = 0;
                    for (double v : out.data) s += std::tanh(v) * v;
                    return s / out.size();
                }
            }
        };

        nn::GradTape tape;
        auto rec = net.forward(tape, tape.input(x));
        nn::GradTape::ValueRef loss;
        switch (kind) {
            case 0: loss = tape.mean_all(tape.square(rec.output)); break;
            case 1: loss = tape.mean_all(tape.logsumexp_rows(rec.output)); break;
            case 2: loss = tape.mean_all(tape.exp(tape.scale(rec.output, 0.4))); break;
            default: loss = tape.mean_all(tape.mul(tape.tanh(rec.output), rec.output)); break;
        }
        tape.backward(loss);
        std::vector<nn::Tensor> grads = nn::zero_grads(net);
        nn::accumulate_grads(tape, rec, grads);

        const double h = 1e-5;
        auto params = net.parameters();
        for (std::size_t p = 0; p < params.size(); ++p)
            for (std::size_t i = 0; i < params[p]->size(); ++i) {
                const double saved = params[p]->data[i];
                params[p]->data[i] = saved + h;
                const double up = loss_value(net);
                params[p]->data[i] = saved - h;
                const double down = loss_value(net);
                params[p]->data[i] = saved;
                const double fd = (up - down) / (2 * h);
                const double ad = grads[p].data[i];
                worst = std::max(worst, std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-6}));
            }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "max relative error %.2e over 20 nets", worst);
    report(7, "gradient correctness vs finite differences", worst < 1e-4, buf);
}

// ---------------------------------------------------------------------------
// 8. Theory suite.
void criterion_theory() {
    const double t0 = now_seconds();

    // (a) decomposition identity on 50 random instances
    double worst_identity = 0.0;
    Rng rng(4242);
    for (std::uint64_t i = 0; i < 50; ++i) {
        env::TabularMdp m = env::make_random_finite_mdp(4, 2, 3, 3000 + i);
        theory::FqiIterate it;
        it.f.assign(3, std::vector<double>(8, 0.0));
        for (auto& fh : it.f)
            for (double& v : fh) v = rng.uniform(-1, 3);
        for (std::size_t h = 0; h < 3; ++h) {
            std::vector<int> best(4, 0);
            for (std::size_t s = 0; s < 4; ++s)
                if (it.f[h][s * 2 + 1] > it.f[h][s * 2]) best[s] = 1;
            it.policy.push_back(env::DiscretePolicy::deterministic(best, 2));
        }
        theory::FqiRun run;
        run.iterates.push_back(it);
        const auto rows = theory::regret_decomposition(m, run);
        env::FiniteValues opt = env::finite_optimal_values(m);
        env::FiniteValues vpi = env::finite_policy_values(m, it.policy);
        double expected = 0.0;
        for (std::size_t s = 0; s < 4; ++s)
            expected += m.initial_dist[s] * (opt.v[0][s] - vpi.v[0][s]);
        worst_identity = std::max(worst_identity, std::abs(rows[0].term_i + rows[0].term_ii - expected));
    }

    // (b) calibration clipping invariant at every iterate
    bool clipping_ok = true;
    {
        env::TabularMdp m = env::make_random_finite_mdp(4, 2, 3, 99);
        env::DiscretePolicy ref_pi = env::DiscretePolicy::uniform(4, 2);
        theory::StepTables q_ref = theory::reference_q_tables(m, ref_pi);
        theory::StepDataset offline = theory::collect_offline_step_data(m, ref_pi, 6, 5);
        theory::FqiOptions opts;
        opts.iterations = 15;
        opts.calibrate = true;
        opts.seed = 5;
        theory::FqiRun run = theory::run_calibrated_fqi(m, offline, q_ref, opts);
        for (std::size_t k = 1; k < run.iterates.size(); ++k)
            for (std::size_t h = 0; h < 3; ++h)
                for (std::size_t key = 0; key < 8; ++key)
                    clipping_ok =
                        clipping_ok && run.iterates[k].f[h][key] >= q_ref[h][key] - 1e-12;
        for (std::size_t h = 0; h < 3; ++h)
            for (std::size_t key = 0; key < 8; ++key)
                clipping_ok = clipping_ok && run.final_f[h][key] >= q_ref[h][key] - 1e-12;
    }

    // (c) calibrated <= uncalibrated transfer coefficient, lattice grids
    bool transfer_ok = true;
    for (std::uint64_t i = 0; i < 20; ++i) {
        env::TabularMdp m = env::make_random_finite_mdp(3, 2, 2, 7000 + i);
        env::DiscretePolicy pi = env::DiscretePolicy::uniform(3, 2);
        std::vector<env::DiscretePolicy> pol(2, pi);
        theory::StepTables q_ref = theory::reference_q_tables(m, pi);
        theory::StepTables nu = theory::state_action_occupancy(m, pol);
        theory::LatticeGrid grid;
        grid.v_max = 2.0;
        grid.levels = 3;
        theory::TransferOptions plain;
        const double c_pi = theory::transfer_coefficient(m, pol, nu, grid, plain);
        theory::TransferOptions cal;
        cal.calibrated = true;
        cal.q_ref = &q_ref;
        const double c_mu = theory::transfer_coefficient(m, pol, nu, grid, cal);
        transfer_ok = transfer_ok && c_mu <= c_pi + 1e-9;
    }

    // (d) directional regret on the narrow-path family, 20 seeds, K=50
    double mean_with = 0.0, mean_without = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        env::TabularMdp m = env::make_narrow_path_mdp(seed);
        env::FiniteValues opt = env::finite_optimal_values(m);
        std::vector<int> best(m.n_states, 0);
        for (std::size_t s = 0; s < m.n_states; ++s)
            if (opt.q[0][s * 2 + 1] > opt.q[0][s * 2]) best[s] = 1;
        env::DiscretePolicy ref_pi = env::DiscretePolicy::deterministic(best, 2);
        for (double& p : ref_pi.probs) p = 0.95 * p + 0.025;  // near-optimal reference

        theory::StepTables q_ref = theory::reference_q_tables(m, ref_pi);
        theory::StepDataset offline = theory::collect_offline_step_data(m, ref_pi, 4, 900 + seed);
        theory::FqiOptions opts;
        opts.iterations = 50;
        opts.m_on = 1;
        opts.seed = 1000 + seed;
        opts.calibrate = true;
        mean_with += theory::regret_decomposition(m, theory::run_calibrated_fqi(m, offline, q_ref, opts))
                         .back()
                         .cum_regret /
                     20.0;
        opts.calibrate = false;
        mean_without +=
            theory::regret_decomposition(m, theory::run_calibrated_fqi(m, offline, q_ref, opts))
                .back()
                .cum_regret /
            20.0;
    }

    const double elapsed = now_seconds() - t0;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "identity %.1e; clipping %s; C^mu<=C 20/20 %s; Reg(50): %.2f (cal) vs %.2f "
                  "(uncal) over 20 seeds (%.1f s)",
                  worst_identity, clipping_ok ? "ok" : "VIOLATED", transfer_ok ? "ok" : "VIOLATED",
                  mean_with, mean_without, elapsed);
    report(8, "theory suite (decomposition, clipping, transfer, regret)",
           worst_identity <= 1e-9 && clipping_ok && transfer_ok && mean_with <= mean_without &&
               elapsed < 300.0,
           buf);
}

// ---------------------------------------------------------------------------
// 9. Metric definitions: boundary cases.
void criterion_metrics() {
    const bool ok = metrics::cumulative_regret_metric({0.0, 0.0}) == 1.0 &&
                    metrics::cumulative_regret_metric({1.0, 1.0, 1.0}) == 0.0 &&
                    metrics::normalized_score_subtasks(3, 4) == 0.75 &&
                    metrics::normalized_score(7, 10) == 0.7;
    report(9, "metric definitions (regret bounds, subtask fraction)", ok,
           "all-zero -> 1.00, all-one -> 0.00, 3/4 -> 0.75, 7/10 -> 0.7");
}

// ---------------------------------------------------------------------------
// 10. Determinism: a repeated acceptance run hashes identically.
void criterion_determinism() {
    harness::ExperimentConfig cfg = harness::parse_config_file(config_path("narrow_cql.cfg"));
    const RunSummary repeat = summarize_run(cfg, 0);
    const std::uint64_t first = g_runs["narrow_cql"][0].log_hash;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "run-log hash %016llx reproduced",
                  static_cast<unsigned long long>(repeat.log_hash));
    report(10, "determinism (identical config+seed -> identical RunLog)", repeat.log_hash == first,
           buf);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_oracle_equivalence();
    criterion_identity();
    criterion_calibration();
    run_maze_experiments();
    criterion_unlearning_dip();
    criterion_q_scale();
    criterion_mixing();
    criterion_gradients();
    criterion_theory();
    criterion_metrics();
    criterion_determinism();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
}
