#pragma once

#include "cmdp/cmdp.hpp"

#include <optional>
#include <vector>

namespace cmdp {

struct Cell {
    int row = 0;
    int col = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

enum class Move : int { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr int kGridActions = 4;

/**
 * Two-bridge river crossing.
 *
 * River cells are impassable except those listed as bridges. Reaching the
 * goal pays `goal_reward` once and moves the agent to an absorbing sink;
 * every other step pays `step_reward`. The single constraint penalises
 * standing on an unsafe-bridge cell with reward -1, so the threshold is a
 * bound on discounted unsafe visitation.
 */
struct GridworldConfig {
    int width = 8;
    int height = 8;
    Cell start{3, 0};
    Cell goal{3, 7};
    std::vector<Cell> river;
    std::vector<Cell> safe_bridge{{7, 4}};
    std::vector<Cell> unsafe_bridge{{3, 4}};
    double goal_reward = 10.0;
    double step_reward = -1.0;
    // Unset means -0.01 / (1 - gamma).
    std::optional<double> unsafe_visit_threshold;
    double gamma = 0.95;
    double slip_prob = 0.0;

    /// Default 8x8 map: river down column 4, unsafe bridge on the start/goal row.
    static GridworldConfig default_map();

    double resolved_threshold() const;
    int n_cells() const { return width * height; }
    int state_of(Cell c) const { return c.row * width + c.col; }
    Cell cell_of(int state) const { return {state / width, state % width}; }
    int sink_state() const { return n_cells(); }
    bool in_river(Cell c) const;
    bool is_bridge(Cell c) const;
    bool passable(Cell c) const;
};

/// Empty when the config is usable.
std::vector<std::string> validate_config(const GridworldConfig& cfg);

/// State layout: cell (r, c) is state r*width + c, the sink is state width*height.
Cmdp build_gridworld(const GridworldConfig& cfg);

/// Follows the most likely action (lowest index on ties) from the start cell
/// under deterministic moves until the goal, a revisit, or `max_steps`.
std::vector<Cell> greedy_path(const GridworldConfig& cfg, const Policy& policy, int max_steps = 1000);

bool path_visits(const std::vector<Cell>& path, const std::vector<Cell>& cells);

}  // namespace cmdp
