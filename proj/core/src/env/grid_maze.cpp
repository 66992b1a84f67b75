#include "calql/env/grid_maze.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

namespace calql::env {

GridMaze GridMaze::from_text(const std::string& text) {
    GridMaze m;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(line);
    }
    require(!rows.empty(), ErrorKind::ParseError, "maze layout is empty");
    m.height = static_cast<int>(rows.size());
    m.width = static_cast<int>(rows[0].size());
    m.walls.assign(m.n_cells(), 0);
    bool have_goal = false;
    for (int y = 0; y < m.height; ++y) {
        require(static_cast<int>(rows[y].size()) == m.width, ErrorKind::ParseError,
                "ragged maze row at line " + std::to_string(y + 1));
        for (int x = 0; x < m.width; ++x) {
            const char c = rows[y][static_cast<std::size_t>(x)];
            const Cell cell{x, y};
            switch (c) {
                case '#': m.walls[static_cast<std::size_t>(m.cell_index(cell))] = 1; break;
                case '.': break;
                case 'S': m.start_cells.push_back(cell); break;
                case 'G':
                    require(!have_goal, ErrorKind::ParseError, "multiple goal cells");
                    m.goal = cell;
                    have_goal = true;
                    break;
                default:
                    fail(ErrorKind::ParseError, std::string("unknown maze character '") + c + "'");
            }
        }
    }
    require(have_goal, ErrorKind::ParseError, "maze has no goal cell");
    require(!m.start_cells.empty(), ErrorKind::ParseError, "maze has no start cell");
    m.validate();
    return m;
}

GridMaze GridMaze::from_file(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), ErrorKind::IoError, "cannot open maze file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_text(ss.str());
}

Cell GridMaze::move(Cell c, int action) const {
    Cell t = c;
    switch (action) {
        case kUp: t.y -= 1; break;
        case kDown: t.y += 1; break;
        case kLeft: t.x -= 1; break;
        case kRight: t.x += 1; break;
        case kStay: break;
        default: fail(ErrorKind::InvalidArgument, "maze action out of range");
    }
    return is_free(t) ? t : c;
}

std::vector<int> GridMaze::distances_to_goal() const {
    std::vector<int> dist(n_cells(), -1);
    std::deque<Cell> queue;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const Cell c{x, y};
            if (is_free(c) && in_goal_region(c)) {
                dist[static_cast<std::size_t>(cell_index(c))] = 0;
                queue.push_back(c);
            }
        }
    const int moves[4] = {kUp, kDown, kLeft, kRight};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        const int d = dist[static_cast<std::size_t>(cell_index(c))];
        for (int a : moves) {
            Cell raw = c;
            switch (a) {
                case kUp: raw.y -= 1; break;
                case kDown: raw.y += 1; break;
                case kLeft: raw.x -= 1; break;
                case kRight: raw.x += 1; break;
            }
            if (!is_free(raw)) continue;
            int& dn = dist[static_cast<std::size_t>(cell_index(raw))];
            if (dn < 0) {
                dn = d + 1;
                queue.push_back(raw);
            }
        }
    }
    return dist;
}

bool GridMaze::solvable() const {
    const std::vector<int> dist = distances_to_goal();
    for (const Cell& s : start_cells)
        if (dist[static_cast<std::size_t>(cell_index(s))] < 0) return false;
    return true;
}

void GridMaze::validate() const {
    require(width > 0 && height > 0, ErrorKind::InvalidArgument, "maze dimensions must be positive");
    require(walls.size() == n_cells(), ErrorKind::ShapeMismatch, "wall mask has wrong size");
    require(!start_cells.empty(), ErrorKind::InvalidArgument, "maze needs a start cell");
    require(is_free(goal), ErrorKind::InvalidArgument, "goal must be a free in-bounds cell");
    for (const Cell& s : start_cells)
        require(is_free(s), ErrorKind::InvalidArgument, "start must be a free in-bounds cell");
    require(goal_radius >= 0, ErrorKind::InvalidArgument, "goal radius must be nonnegative");
    require(slip_prob >= 0.0 && slip_prob <= 1.0, ErrorKind::InvalidArgument, "slip_prob outside [0,1]");
    require(solvable(), ErrorKind::Unsolvable, "no path from some start cell to the goal region");
}

TabularMdp GridMaze::to_mdp(double gamma) const {
    const std::size_t S = n_cells();
    const std::size_t A = kNumActions;
    TabularMdp mdp;
    mdp.n_states = S;
    mdp.n_actions = A;
    mdp.gamma = gamma;
    mdp.transition.assign(S * A * S, 0.0);
    mdp.reward.assign(S * A, 0.0);
    mdp.initial_dist.assign(S, 0.0);
    mdp.terminal.assign(S, 0);

    for (const Cell& s : start_cells)
        mdp.initial_dist[static_cast<std::size_t>(cell_index(s))] += 1.0 / start_cells.size();

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Cell c{x, y};
            const std::size_t s = static_cast<std::size_t>(cell_index(c));
            const bool absorbing = !is_free(c) || in_goal_region(c);
            if (absorbing) mdp.terminal[s] = 1;
            for (std::size_t a = 0; a < A; ++a) {
                if (absorbing) {
                    // Wall cells are unreachable; goal-region cells are never
                    // acted in before termination. Self-loop, zero reward.
                    mdp.transition[(s * A + a) * S + s] = 1.0;
                    continue;
                }
                // Executed-action mixture under slip.
                for (std::size_t e = 0; e < A; ++e) {
                    double pe = (e == a ? 1.0 - slip_prob : 0.0) + slip_prob / static_cast<double>(A);
                    if (pe <= 0.0) continue;
                    const Cell arrival = move(c, static_cast<int>(e));
                    const std::size_t s2 = static_cast<std::size_t>(cell_index(arrival));
                    mdp.transition[(s * A + a) * S + s2] += pe;
                    if (in_goal_region(arrival)) mdp.reward[s * A + a] += pe;
                }
            }
        }
    }
    mdp.validate();
    return mdp;
}

GridMazeEnv::GridMazeEnv(GridMaze maze) : maze_(std::move(maze)) { maze_.validate(); }

EpisodeStep GridMazeEnv::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    pos_ = maze_.start_cells[static_cast<std::size_t>(
        rng_.uniform_int(static_cast<int>(maze_.start_cells.size())))];
    steps_ = 0;
    over_ = false;
    EpisodeStep st;
    st.state = maze_.cell_index(pos_);
    st.next_state = st.state;
    return st;
}

EpisodeStep GridMazeEnv::step(int action) {
    require(!over_, ErrorKind::StepAfterDone, "step called on a finished episode");
    require(action >= 0 && static_cast<std::size_t>(action) < GridMaze::kNumActions,
            ErrorKind::InvalidArgument, "maze action out of range");

    int executed = action;
    if (maze_.slip_prob > 0.0 && rng_.bernoulli(maze_.slip_prob))
        executed = rng_.uniform_int(static_cast<int>(GridMaze::kNumActions));

    EpisodeStep st;
    st.state = maze_.cell_index(pos_);
    st.action = action;
    pos_ = maze_.move(pos_, executed);
    st.next_state = maze_.cell_index(pos_);
    if (maze_.in_goal_region(pos_)) {
        st.reward = 1.0;
        st.done = true;
    }
    ++steps_;
    if (!st.done && steps_ >= maze_.effective_max_episode_len()) st.truncated = true;
    over_ = st.done || st.truncated;
    return st;
}

DiscretePolicy scripted_controller(const GridMaze& maze) {
    const std::vector<int> dist = maze.distances_to_goal();
    for (const Cell& s : maze.start_cells)
        require(dist[static_cast<std::size_t>(maze.cell_index(s))] >= 0, ErrorKind::Unsolvable,
                "no path from start to goal");

    std::vector<int> action_per_state(maze.n_cells(), GridMaze::kStay);
    const int moves[4] = {GridMaze::kUp, GridMaze::kDown, GridMaze::kLeft, GridMaze::kRight};
    for (int y = 0; y < maze.height; ++y) {
        for (int x = 0; x < maze.width; ++x) {
            const Cell c{x, y};
            const std::size_t s = static_cast<std::size_t>(maze.cell_index(c));
            if (!maze.is_free(c) || maze.in_goal_region(c) || dist[s] < 0) continue;
            for (int a : moves) {
                const Cell n = maze.move(c, a);
                if (n == c) continue;
                const int dn = dist[static_cast<std::size_t>(maze.cell_index(n))];
                if (dn >= 0 && dn < dist[s]) {
                    action_per_state[s] = a;
                    break;
                }
            }
        }
    }
    return DiscretePolicy::deterministic(std::move(action_per_state), GridMaze::kNumActions);
}

}  // namespace calql::env
