#include "calql/data/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace calql::data {

void Trajectory::validate() const {
    require(!steps.empty(), ErrorKind::EmptyDataset, "trajectory is empty");
    for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
        require(steps[t].next_state == steps[t + 1].state, ErrorKind::InvalidArgument,
                "trajectory chain broken at step " + std::to_string(t));
        require(!steps[t].done, ErrorKind::InvalidArgument, "done before the final step");
    }
}

std::vector<double> compute_mc_returns(const Trajectory& traj, double gamma) {
    require(!traj.steps.empty(), ErrorKind::EmptyDataset, "trajectory is empty");
    std::vector<double> g(traj.steps.size());
    double tail = 0.0;  // bootstrap value past the end (0 for done and truncated alike)
    for (std::size_t t = traj.steps.size(); t-- > 0;) {
        tail = traj.steps[t].reward + gamma * tail;
        g[t] = tail;
    }
    return g;
}

Trajectory truncate_positive_segments(const Trajectory& traj) {
    Trajectory out;
    out.behavior_tag = traj.behavior_tag;
    for (const EpisodeStep& st : traj.steps) {
        out.steps.push_back(st);
        if (st.reward > 0.0) {
            out.steps.back().done = true;
            out.steps.back().truncated = false;
            break;
        }
    }
    return out;
}

OfflineDataset OfflineDataset::from_trajectories(const std::vector<Trajectory>& trajectories, double gamma,
                                                 std::string composition_tag) {
    OfflineDataset ds;
    ds.gamma_used = gamma;
    ds.composition_tag = std::move(composition_tag);
    int id = 0;
    for (const Trajectory& traj : trajectories) {
        traj.validate();
        const std::vector<double> g = compute_mc_returns(traj, gamma);
        const char unreliable = traj.ends_done() ? 0 : 1;
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            ds.transitions.push_back(traj.steps[t]);
            ds.mc_return.push_back(g[t]);
            ds.mc_unreliable.push_back(unreliable);
            ds.traj_id.push_back(id);
            ds.step_idx.push_back(static_cast<int>(t));
        }
        ++id;
    }
    return ds;
}

double OfflineDataset::mean_mc_return() const {
    require(!empty(), ErrorKind::EmptyDataset, "dataset is empty");
    double s = 0.0;
    for (double v : mc_return) s += v;
    return s / static_cast<double>(size());
}

OfflineDataset generate_dataset(env::EpisodicEnv& env, const env::DiscretePolicy& policy,
                                int n_trajectories, std::uint64_t seed, double gamma,
                                std::string composition_tag) {
    require(n_trajectories >= 1, ErrorKind::InvalidArgument, "need at least one trajectory");
    require(policy.n_states == env.n_states() && policy.n_actions == env.n_actions(),
            ErrorKind::ShapeMismatch, "policy does not match environment dimensions");
    Rng action_rng = named_stream(seed, "dataset-actions");
    std::vector<Trajectory> trajectories;
    trajectories.reserve(static_cast<std::size_t>(n_trajectories));
    for (int i = 0; i < n_trajectories; ++i) {
        Trajectory traj;
        traj.behavior_tag = composition_tag;
        EpisodeStep st = env.reset(derive_seed(seed, "dataset-episode", static_cast<std::uint64_t>(i)));
        while (!env.episode_over()) {
            const int a = policy.sample(static_cast<std::size_t>(env.current_state()), action_rng);
            st = env.step(a);
            traj.steps.push_back(st);
        }
        trajectories.push_back(std::move(traj));
    }
    return OfflineDataset::from_trajectories(trajectories, gamma, std::move(composition_tag));
}

void write_csv(const OfflineDataset& ds, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), ErrorKind::IoError, "cannot open for writing: " + path);
    os << "s,a,r,s_next,done,truncated,mc_return,traj_id,step_idx\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const EpisodeStep& t = ds.transitions[i];
        os << t.state << ',' << t.action << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", t.reward);
        os << buf << ',' << t.next_state << ',' << (t.done ? 1 : 0) << ',' << (t.truncated ? 1 : 0) << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", ds.mc_return[i]);
        os << buf << ',' << ds.traj_id[i] << ',' << ds.step_idx[i] << '\n';
    }
    require(os.good(), ErrorKind::IoError, "write failed: " + path);
}

OfflineDataset load_csv(const std::string& path, double expected_gamma, std::string composition_tag) {
    std::ifstream is(path);
    require(is.good(), ErrorKind::IoError, "cannot open for reading: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::ParseError, "empty dataset file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == "s,a,r,s_next,done,truncated,mc_return,traj_id,step_idx", ErrorKind::ParseError,
            "unexpected dataset header: " + line);

    // Rebuild trajectories keyed by traj_id so the chain and mc_return
    // invariants can be revalidated.
    std::map<int, Trajectory> by_id;
    std::map<int, std::vector<double>> mc_by_id;
    std::map<int, int> last_idx;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        require(fields.size() == 9, ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": expected 9 fields");
        EpisodeStep t;
        try {
            t.state = std::stoi(fields[0]);
            t.action = std::stoi(fields[1]);
            t.reward = std::stod(fields[2]);
            t.next_state = std::stoi(fields[3]);
            t.done = std::stoi(fields[4]) != 0;
            t.truncated = std::stoi(fields[5]) != 0;
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad numeric field");
        }
        const double mc = std::stod(fields[6]);
        const int id = std::stoi(fields[7]);
        const int idx = std::stoi(fields[8]);
        auto it = last_idx.find(id);
        const int expected_idx = it == last_idx.end() ? 0 : it->second + 1;
        require(idx == expected_idx, ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": step_idx out of order for traj " + std::to_string(id));
        last_idx[id] = idx;
        by_id[id].steps.push_back(t);
        mc_by_id[id].push_back(mc);
    }
    require(!by_id.empty(), ErrorKind::EmptyDataset, "dataset file has no transitions");

    std::vector<Trajectory> trajectories;
    trajectories.reserve(by_id.size());
    for (auto& [id, traj] : by_id) {
        traj.validate();
        const std::vector<double> g = compute_mc_returns(traj, expected_gamma);
        const std::vector<double>& stored = mc_by_id[id];
        for (std::size_t t = 0; t < g.size(); ++t)
            require(std::abs(g[t] - stored[t]) <= 1e-6, ErrorKind::ParseError,
                    "stored mc_return disagrees with recomputation (gamma mismatch?) in traj " +
                        std::to_string(id));
        trajectories.push_back(std::move(traj));
    }
    return OfflineDataset::from_trajectories(trajectories, expected_gamma, std::move(composition_tag));
}

}  // namespace calql::data
