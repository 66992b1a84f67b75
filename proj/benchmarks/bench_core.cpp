#include <benchmark/benchmark.h>

#include "calql/agents/discrete_sac.hpp"
#include "calql/agents/exact_tabular.hpp"
#include "calql/env/generators.hpp"
#include "calql/env/grid_maze.hpp"
#include "calql/theory/fqi.hpp"

using namespace calql;

namespace {

env::GridMaze comb_maze() {
    return env::GridMaze::from_text(".#.#.#.\n.#.#.#.\n.#.#.#.\n.#.#.#.\nS.....G\n");
}

data::OfflineDataset maze_dataset(const env::GridMaze& maze, int n) {
    env::GridMazeEnv e{maze};
    return data::generate_dataset(e, env::scripted_controller(maze), n, 7, 0.9, "narrow");
}

}  // namespace

static void BM_MazeStep(benchmark::State& state) {
    env::GridMazeEnv e{comb_maze()};
    e.reset(1);
    Rng rng(2);
    for (auto _ : state) {
        if (e.episode_over()) e.reset(rng.next_u64());
        benchmark::DoNotOptimize(e.step(rng.uniform_int(5)));
    }
}
BENCHMARK(BM_MazeStep);

static void BM_ExactPolicyValues(benchmark::State& state) {
    env::TabularMdp mdp = env::make_random_mdp(static_cast<std::size_t>(state.range(0)), 4, 0.95, 3);
    env::DiscretePolicy pi = env::DiscretePolicy::uniform(mdp.n_states, 4);
    for (auto _ : state) benchmark::DoNotOptimize(env::exact_policy_values(mdp, pi));
}
BENCHMARK(BM_ExactPolicyValues)->Arg(8)->Arg(32)->Arg(128);

static void BM_Logsumexp(benchmark::State& state) {
    Rng rng(5);
    nn::Tensor t(64, static_cast<std::size_t>(state.range(0)));
    for (double& v : t.data) v = rng.uniform(-5, 5);
    for (auto _ : state) benchmark::DoNotOptimize(nn::logsumexp_rows(t));
}
BENCHMARK(BM_Logsumexp)->Arg(8)->Arg(64);

static void BM_CriticUpdateTable(benchmark::State& state) {
    env::GridMaze maze = comb_maze();
    data::OfflineDataset ds = maze_dataset(maze, 25);
    replay::MixedReplayBuffer buf(&ds, 1024, 1.0);
    agents::DiscreteSacConfig cfg;
    cfg.n_states = maze.n_cells();
    cfg.n_actions = env::GridMaze::kNumActions;
    cfg.alpha = agents::AlphaConfig::single(5.0);
    agents::DiscreteSacAgent agent(cfg, 1);
    Rng rng(2);
    data::ReferenceValues ref = data::ReferenceValues::mc_return();
    for (auto _ : state) {
        replay::Batch batch = buf.sample(64, rng);
        benchmark::DoNotOptimize(agent.critic_update(batch, ref, agents::Phase::Offline, rng));
    }
}
BENCHMARK(BM_CriticUpdateTable);

static void BM_CriticUpdateMlp(benchmark::State& state) {
    env::GridMaze maze = comb_maze();
    data::OfflineDataset ds = maze_dataset(maze, 25);
    replay::MixedReplayBuffer buf(&ds, 1024, 1.0);
    agents::DiscreteSacConfig cfg;
    cfg.n_states = maze.n_cells();
    cfg.n_actions = env::GridMaze::kNumActions;
    cfg.q_hidden = {32};
    cfg.pi_hidden = {32};
    cfg.n_critics = 2;
    cfg.alpha = agents::AlphaConfig::single(5.0);
    agents::DiscreteSacAgent agent(cfg, 1);
    Rng rng(2);
    data::ReferenceValues ref = data::ReferenceValues::mc_return();
    for (auto _ : state) {
        replay::Batch batch = buf.sample(64, rng);
        benchmark::DoNotOptimize(agent.critic_update(batch, ref, agents::Phase::Offline, rng));
    }
}
BENCHMARK(BM_CriticUpdateMlp);

static void BM_ExactCriticUpdate(benchmark::State& state) {
    env::GridMaze maze = comb_maze();
    env::TabularMdp mdp = maze.to_mdp(0.9);
    data::OfflineDataset ds = maze_dataset(maze, 25);
    agents::ExactDistribution dist =
        agents::ExactDistribution::from_dataset(ds, mdp.n_states, mdp.n_actions);
    agents::ExactCritic critic = agents::ExactCritic::zeros(mdp.n_states, mdp.n_actions);
    env::DiscretePolicy pi = env::DiscretePolicy::uniform(mdp.n_states, mdp.n_actions);
    agents::ExactUpdateOptions opts;
    opts.alpha = 5.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(agents::exact_critic_update(critic, mdp, dist, pi, {}, opts));
}
BENCHMARK(BM_ExactCriticUpdate);

static void BM_FqiIteration(benchmark::State& state) {
    env::TabularMdp mdp = env::make_narrow_path_mdp(3);
    env::DiscretePolicy beta = env::DiscretePolicy::uniform(mdp.n_states, mdp.n_actions);
    theory::StepDataset offline = theory::collect_offline_step_data(mdp, beta, 8, 4);
    theory::StepTables q_ref = theory::reference_q_tables(mdp, beta);
    for (auto _ : state) {
        theory::FqiOptions opts;
        opts.iterations = static_cast<int>(state.range(0));
        opts.calibrate = true;
        opts.seed = 11;
        benchmark::DoNotOptimize(theory::run_calibrated_fqi(mdp, offline, q_ref, opts));
    }
}
BENCHMARK(BM_FqiIteration)->Arg(10)->Arg(50);

BENCHMARK_MAIN();
