#include "calql/theory/fqi.hpp"

#include <algorithm>
#include <cmath>

namespace calql::theory {

namespace {

std::vector<env::DiscretePolicy> greedy_policy(const StepTables& f, std::size_t S, std::size_t A) {
    std::vector<env::DiscretePolicy> pi;
    pi.reserve(f.size());
    for (const std::vector<double>& fh : f) {
        std::vector<int> best(S, 0);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 1; a < A; ++a)
                if (fh[s * A + a] > fh[s * A + best[s]]) best[s] = static_cast<int>(a);
        pi.push_back(env::DiscretePolicy::deterministic(best, A));
    }
    return pi;
}

}  // namespace

StepDataset collect_step_data(const env::TabularMdp& mdp, const std::vector<env::DiscretePolicy>& policy,
                              int n_rollouts, Rng& rng) {
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "step data needs a finite-horizon MDP");
    const std::size_t H = static_cast<std::size_t>(*mdp.horizon);
    require(policy.size() == H, ErrorKind::ShapeMismatch, "need one policy per time step");
    StepDataset data(H);
    for (int n = 0; n < n_rollouts; ++n) {
        int s = mdp.sample_initial(rng);
        for (std::size_t h = 0; h < H; ++h) {
            const int a = policy[h].sample(static_cast<std::size_t>(s), rng);
            const double r = mdp.r(static_cast<std::size_t>(s), static_cast<std::size_t>(a));
            const int s2 = mdp.is_terminal(static_cast<std::size_t>(s))
                               ? s
                               : mdp.sample_next(static_cast<std::size_t>(s),
                                                 static_cast<std::size_t>(a), rng);
            data[h].s.push_back(s);
            data[h].a.push_back(a);
            data[h].r.push_back(r);
            data[h].s_next.push_back(s2);
            s = s2;
        }
    }
    return data;
}

StepDataset collect_offline_step_data(const env::TabularMdp& mdp, const env::DiscretePolicy& behavior,
                                      int n_rollouts, std::uint64_t seed) {
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "step data needs a finite-horizon MDP");
    Rng rng = named_stream(seed, "offline-step-data");
    std::vector<env::DiscretePolicy> stationary(static_cast<std::size_t>(*mdp.horizon), behavior);
    return collect_step_data(mdp, stationary, n_rollouts, rng);
}

StepTables reference_q_tables(const env::TabularMdp& mdp, const env::DiscretePolicy& reference) {
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "reference tables need horizon mode");
    std::vector<env::DiscretePolicy> stationary(static_cast<std::size_t>(*mdp.horizon), reference);
    return env::finite_policy_values(mdp, stationary).q;
}

FqiRun run_calibrated_fqi(const env::TabularMdp& mdp, const StepDataset& offline, const StepTables& q_ref,
                          const FqiOptions& opts) {
    mdp.validate();
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "calibrated FQI needs horizon mode");
    const std::size_t H = static_cast<std::size_t>(*mdp.horizon);
    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    require(offline.size() == H, ErrorKind::ShapeMismatch, "offline data must cover every time step");
    bool any_offline = false;
    for (const StepTuples& t : offline) any_offline = any_offline || t.size() > 0;
    require(any_offline, ErrorKind::EmptyDataset, "offline step data is empty");
    require(opts.iterations >= 1, ErrorKind::InvalidArgument, "need at least one iteration");
    if (opts.calibrate)
        require(q_ref.size() == H, ErrorKind::ShapeMismatch, "reference tables must cover every step");

    Rng rng = named_stream(opts.seed, "fqi-online");
    StepTables f(H, std::vector<double>(S * A, 0.0));
    StepDataset online(H);

    FqiRun run;
    std::vector<double> target_sum(S * A);
    std::vector<std::size_t> target_count(S * A);
    for (int k = 1; k <= opts.iterations; ++k) {
        FqiIterate it;
        it.f = f;
        it.policy = greedy_policy(f, S, A);
        // Deploy pi^k: one tuple per step per rollout.
        StepDataset fresh = collect_step_data(mdp, it.policy, opts.m_on, rng);
        for (std::size_t h = 0; h < H; ++h) {
            online[h].s.insert(online[h].s.end(), fresh[h].s.begin(), fresh[h].s.end());
            online[h].a.insert(online[h].a.end(), fresh[h].a.begin(), fresh[h].a.end());
            online[h].r.insert(online[h].r.end(), fresh[h].r.begin(), fresh[h].r.end());
            online[h].s_next.insert(online[h].s_next.end(), fresh[h].s_next.begin(),
                                    fresh[h].s_next.end());
        }
        run.iterates.push_back(std::move(it));

        // Backward refit over aggregated data against the tables being built.
        StepTables next(H, std::vector<double>(S * A, 0.0));
        for (std::size_t h = H; h-- > 0;) {
            std::fill(target_sum.begin(), target_sum.end(), 0.0);
            std::fill(target_count.begin(), target_count.end(), 0);
            auto accumulate = [&](const StepTuples& tuples) {
                for (std::size_t i = 0; i < tuples.size(); ++i) {
                    const std::size_t key = static_cast<std::size_t>(tuples.s[i]) * A +
                                            static_cast<std::size_t>(tuples.a[i]);
                    double target = tuples.r[i];
                    if (h + 1 < H) {
                        const std::size_t s2 = static_cast<std::size_t>(tuples.s_next[i]);
                        double best = next[h + 1][s2 * A];
                        for (std::size_t a = 1; a < A; ++a)
                            best = std::max(best, next[h + 1][s2 * A + a]);
                        target += best;
                    }
                    target_sum[key] += target;
                    target_count[key] += 1;
                }
            };
            accumulate(offline[h]);
            accumulate(online[h]);
            for (std::size_t key = 0; key < S * A; ++key) {
                double v = target_count[key] ? target_sum[key] / static_cast<double>(target_count[key])
                                             : 0.0;
                if (opts.pessimism_clamp) v = std::min(v, (*opts.pessimism_clamp)[h][key]);
                if (opts.calibrate) v = std::max(v, q_ref[h][key]);
                next[h][key] = v;
            }
        }
        f = std::move(next);
    }
    run.final_f = f;
    run.final_policy = greedy_policy(f, S, A);
    return run;
}

std::vector<RegretRow> regret_decomposition(const env::TabularMdp& mdp, const FqiRun& run) {
    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    const env::FiniteValues optimal = env::finite_optimal_values(mdp);

    std::vector<RegretRow> rows;
    double cum = 0.0;
    int k = 0;
    for (const FqiIterate& it : run.iterates) {
        ++k;
        const env::FiniteValues vpi = env::finite_policy_values(mdp, it.policy);
        RegretRow row;
        row.k = k;
        for (std::size_t s = 0; s < S; ++s) {
            const double w = mdp.initial_dist[s];
            if (w <= 0.0) continue;
            double best_f = it.f[0][s * A];
            for (std::size_t a = 1; a < A; ++a) best_f = std::max(best_f, it.f[0][s * A + a]);
            row.term_i += w * (optimal.v[0][s] - best_f);
            row.term_ii += w * (best_f - vpi.v[0][s]);
        }
        row.regret = row.term_i + row.term_ii;
        cum += row.regret;
        row.cum_regret = cum;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace calql::theory
