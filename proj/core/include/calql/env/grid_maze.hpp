#pragma once

#include <string>
#include <vector>

#include "calql/env/episodic.hpp"

namespace calql::env {

struct Cell {
    int x = 0;  // column
    int y = 0;  // row
    bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
};

/// Sparse-reward gridworld maze. Actions are {up, down, left, right, stay};
/// a move into a wall or off the grid leaves the position unchanged. The
/// reward is +1 whenever the arrival cell lies within goal_radius (Manhattan)
/// of the goal, and the episode terminates on first entry into that region.
/// With slip_prob > 0 the executed action is replaced by a uniformly random
/// one with that probability.
struct GridMaze {
    static constexpr int kUp = 0;
    static constexpr int kDown = 1;
    static constexpr int kLeft = 2;
    static constexpr int kRight = 3;
    static constexpr int kStay = 4;
    static constexpr std::size_t kNumActions = 5;

    int width = 0;
    int height = 0;
    std::vector<char> walls;        // height*width, row-major
    std::vector<Cell> start_cells;  // uniform start distribution
    Cell goal;
    int goal_radius = 0;
    int max_episode_len = 0;  // 0 -> default 4*(width+height)
    double slip_prob = 0.0;

    /// Parse the plain-text layout: '#' wall, '.' free, 'S' start, 'G' goal,
    /// one row per line. Ragged rows are rejected. Multiple 'S' cells give a
    /// uniform start distribution; exactly one 'G' is required.
    static GridMaze from_text(const std::string& text);
    static GridMaze from_file(const std::string& path);

    bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; }
    bool is_wall(Cell c) const { return walls[static_cast<std::size_t>(c.y) * width + c.x] != 0; }
    bool is_free(Cell c) const { return in_bounds(c) && !is_wall(c); }
    bool in_goal_region(Cell c) const {
        return std::abs(c.x - goal.x) + std::abs(c.y - goal.y) <= goal_radius;
    }

    int cell_index(Cell c) const { return c.y * width + c.x; }
    Cell cell_of(int index) const { return Cell{index % width, index / width}; }
    std::size_t n_cells() const { return static_cast<std::size_t>(width) * height; }
    int effective_max_episode_len() const {
        return max_episode_len > 0 ? max_episode_len : 4 * (width + height);
    }

    Cell move(Cell c, int action) const;

    /// BFS distance (in steps) from every free cell to the goal region;
    /// -1 where unreachable. Region cells have distance 0.
    std::vector<int> distances_to_goal() const;

    /// Every start cell can reach the goal region (flood fill).
    bool solvable() const;

    /// Start/goal placement, wall consistency, solvability.
    void validate() const;

    /// Exact MDP over cell indices, matching the episodic dynamics: arrival
    /// rewards are folded into r(s,a) and goal-region cells are terminal with
    /// zero reward (they are never acted in before the episode ends).
    TabularMdp to_mdp(double gamma) const;
};

/// Simulates a GridMaze; states are cell indices (cell_index()).
class GridMazeEnv final : public EpisodicEnv {
public:
    explicit GridMazeEnv(GridMaze maze);

    std::size_t n_states() const override { return maze_.n_cells(); }
    std::size_t n_actions() const override { return GridMaze::kNumActions; }
    EpisodeStep reset(std::uint64_t seed) override;
    EpisodeStep step(int action) override;
    bool episode_over() const override { return over_; }
    int current_state() const override { return maze_.cell_index(pos_); }

    const GridMaze& maze() const { return maze_; }

private:
    GridMaze maze_;
    Rng rng_{0};
    Cell pos_;
    int steps_ = 0;
    bool over_ = true;
};

/// Deterministic BFS shortest-path policy from every reachable cell toward
/// the goal region (ties broken in action order up/down/left/right). Cells in
/// the region or cut off from it map to `stay`. Throws Unsolvable when some
/// start cell cannot reach the goal.
DiscretePolicy scripted_controller(const GridMaze& maze);

}  // namespace calql::env
