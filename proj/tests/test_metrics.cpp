#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "calql/metrics/metrics.hpp"

using namespace calql;

namespace {

data::OfflineDataset small_dataset() {
    // Unique (s,a) per transition so a per-pair table is well defined.
    data::Trajectory t;
    for (int i = 0; i < 8; ++i) {
        env::EpisodeStep st;
        st.state = i;
        st.action = i % 2;
        st.reward = i == 7 ? 1.0 : 0.0;
        st.next_state = i + 1;
        st.done = i == 7;
        t.steps.push_back(st);
    }
    return data::OfflineDataset::from_trajectories({t}, 0.9, "narrow");
}

}  // namespace

TEST_CASE("normalized score: goal rate and subtask fraction") {
    CHECK(metrics::normalized_score(7, 10) == doctest::Approx(0.7));
    CHECK(metrics::normalized_score(0, 10) == 0.0);
    CHECK(metrics::normalized_score_subtasks(3, 4) == doctest::Approx(0.75));
    CHECK_THROWS_AS(metrics::normalized_score(5, 0), Error);
    CHECK_THROWS_AS(metrics::normalized_score(11, 10), Error);
}

TEST_CASE("cumulative regret metric: boundary and worked cases") {
    CHECK(metrics::cumulative_regret_metric({0.0, 0.5, 1.0}) == doctest::Approx(0.5));
    CHECK(metrics::cumulative_regret_metric({0.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(metrics::cumulative_regret_metric({1.0, 1.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(metrics::cumulative_regret_metric({}), Error);
    CHECK_THROWS_AS(metrics::cumulative_regret_metric({1.5}), Error);
}

TEST_CASE("cumulative regret metric is invariant to uniform re-indexing and stays in [0,1]") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + rng.uniform_int(30);
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (double& s : scores) s = rng.uniform();
        const double base = metrics::cumulative_regret_metric(scores);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
        // Duplicating every point (denser uniform cadence) leaves it unchanged.
        std::vector<double> doubled;
        for (double s : scores) {
            doubled.push_back(s);
            doubled.push_back(s);
        }
        CHECK(metrics::cumulative_regret_metric(doubled) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("avg_dataset_q: constant table, exact mc average, full-dataset mean") {
    data::OfflineDataset ds = small_dataset();
    auto const_q = [](const std::vector<int>& s, const std::vector<int>&) {
        return std::vector<double>(s.size(), 2.5);
    };
    CHECK(metrics::avg_dataset_q(const_q, ds, 4, 1) == doctest::Approx(2.5));

    // Q equal to the dataset's own mc_return: sampling the full dataset must
    // return the exact mean mc_return.
    auto mc_q = [&](const std::vector<int>& s, const std::vector<int>& a) {
        std::vector<double> out;
        for (std::size_t i = 0; i < s.size(); ++i) {
            // look up the first matching transition
            for (std::size_t j = 0; j < ds.size(); ++j)
                if (ds.transitions[j].state == s[i] && ds.transitions[j].action == a[i]) {
                    out.push_back(ds.mc_return[j]);
                    break;
                }
        }
        return out;
    };
    CHECK(metrics::avg_dataset_q(mc_q, ds, ds.size() + 10, 1) ==
          doctest::Approx(ds.mean_mc_return()).epsilon(1e-12));
}

TEST_CASE("avg_dataset_q with a fixed seed is deterministic") {
    data::OfflineDataset ds = small_dataset();
    int calls = 0;
    auto probe = [&](const std::vector<int>& s, const std::vector<int>&) {
        ++calls;
        std::vector<double> out;
        for (int v : s) out.push_back(static_cast<double>(v));
        return out;
    };
    const double a = metrics::avg_dataset_q(probe, ds, 3, 42);
    const double b = metrics::avg_dataset_q(probe, ds, 3, 42);
    CHECK(a == b);
    CHECK(calls == 2);
}

TEST_CASE("unlearning dip: worked example") {
    metrics::DipReport r =
        metrics::detect_unlearning_dip({0.1, 0.2, 0.5, 0.6}, 0.5, /*window=*/4, /*tolerance=*/0.1);
    CHECK(r.dip);
    CHECK(r.depth == doctest::Approx(0.4));
    REQUIRE(r.recovery_index.has_value());
    CHECK(*r.recovery_index == 2);  // the third evaluation
}

TEST_CASE("unlearning dip: flat and improving series do not fire") {
    metrics::DipReport flat = metrics::detect_unlearning_dip({0.5, 0.5, 0.5}, 0.5, 3, 0.05);
    CHECK_FALSE(flat.dip);
    CHECK(flat.depth == 0.0);

    metrics::DipReport up = metrics::detect_unlearning_dip({0.5, 0.6, 0.8}, 0.5, 3, 0.05);
    CHECK_FALSE(up.dip);
}

TEST_CASE("unlearning dip never fires on monotone nondecreasing continuations") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + rng.uniform_int(20);
        std::vector<double> series(static_cast<std::size_t>(n));
        double level = rng.uniform();
        for (double& s : series) {
            level = std::min(1.0, level + rng.uniform() * 0.1);
            s = level;
        }
        // The offline score is where the series starts (a monotone
        // continuation of the offline performance).
        const std::size_t window = 1 + static_cast<std::size_t>(rng.uniform_int(n));
        metrics::DipReport r = metrics::detect_unlearning_dip(series, series.front(), window, 1e-9);
        CHECK_FALSE(r.dip);
    }
}

TEST_CASE("unlearning dip requires a full window") {
    CHECK_THROWS_AS(metrics::detect_unlearning_dip({0.5}, 0.5, 2, 0.1), Error);
}
