#include "cmdp/gridworld.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace cmdp {

namespace {

bool contains(const std::vector<Cell>& cells, Cell c) {
    return std::find(cells.begin(), cells.end(), c) != cells.end();
}

Cell step(const GridworldConfig& cfg, Cell from, int action) {
    Cell to = from;
    switch (static_cast<Move>(action)) {
        case Move::Up: to.row -= 1; break;
        case Move::Down: to.row += 1; break;
        case Move::Left: to.col -= 1; break;
        case Move::Right: to.col += 1; break;
    }
    if (to.row < 0 || to.row >= cfg.height || to.col < 0 || to.col >= cfg.width) return from;
    if (!cfg.passable(to)) return from;
    return to;
}

bool inside(const GridworldConfig& cfg, Cell c) {
    return c.row >= 0 && c.row < cfg.height && c.col >= 0 && c.col < cfg.width;
}

// BFS over passable cells; bridges optionally closed.
bool reachable(const GridworldConfig& cfg, bool bridges_open) {
    std::vector<char> seen(cfg.n_cells(), 0);
    std::queue<Cell> frontier;
    frontier.push(cfg.start);
    seen[cfg.state_of(cfg.start)] = 1;
    while (!frontier.empty()) {
        const Cell c = frontier.front();
        frontier.pop();
        if (c == cfg.goal) return true;
        for (int a = 0; a < kGridActions; ++a) {
            const Cell n = step(cfg, c, a);
            if (n == c || seen[cfg.state_of(n)]) continue;
            if (!bridges_open && cfg.in_river(n)) continue;
            seen[cfg.state_of(n)] = 1;
            frontier.push(n);
        }
    }
    return false;
}

}  // namespace

GridworldConfig GridworldConfig::default_map() {
    GridworldConfig cfg;
    for (int r = 0; r < cfg.height; ++r) cfg.river.push_back({r, 4});
    return cfg;
}

double GridworldConfig::resolved_threshold() const {
    return unsafe_visit_threshold.value_or(-0.01 / (1.0 - gamma));
}

bool GridworldConfig::in_river(Cell c) const { return contains(river, c); }

bool GridworldConfig::is_bridge(Cell c) const {
    return contains(safe_bridge, c) || contains(unsafe_bridge, c);
}

bool GridworldConfig::passable(Cell c) const { return !in_river(c) || is_bridge(c); }

std::vector<std::string> validate_config(const GridworldConfig& cfg) {
    std::vector<std::string> errors;
    if (cfg.width <= 0 || cfg.height <= 0) {
        errors.emplace_back("grid dimensions must be positive");
        return errors;
    }
    auto check_cell = [&](Cell c, const std::string& name) {
        if (!inside(cfg, c)) errors.push_back(name + " lies outside the grid");
    };
    check_cell(cfg.start, "start");
    check_cell(cfg.goal, "goal");
    for (const auto& c : cfg.river) check_cell(c, "river cell");
    for (const auto& c : cfg.safe_bridge) {
        check_cell(c, "safe bridge cell");
        if (!cfg.in_river(c)) errors.emplace_back("safe bridge cell is not on the river");
        if (contains(cfg.unsafe_bridge, c)) errors.emplace_back("bridges must be disjoint");
    }
    for (const auto& c : cfg.unsafe_bridge) {
        check_cell(c, "unsafe bridge cell");
        if (!cfg.in_river(c)) errors.emplace_back("unsafe bridge cell is not on the river");
    }
    if (!(cfg.slip_prob >= 0.0 && cfg.slip_prob < 1.0)) errors.emplace_back("slip_prob must lie in [0,1)");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) errors.emplace_back("gamma must lie in (0,1)");
    if (!errors.empty()) return errors;

    if (cfg.start == cfg.goal) errors.emplace_back("start and goal coincide");
    if (cfg.in_river(cfg.start) || cfg.in_river(cfg.goal)) {
        errors.emplace_back("start and goal must not lie on the river");
    }
    if (!errors.empty()) return errors;
    if (reachable(cfg, false)) errors.emplace_back("start and goal are not separated by the river");
    if (!reachable(cfg, true)) errors.emplace_back("goal is unreachable from start");
    return errors;
}

Cmdp build_gridworld(const GridworldConfig& cfg) {
    const auto errors = validate_config(cfg);
    if (!errors.empty()) {
        std::string msg = "invalid gridworld config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }

    Cmdp m;
    m.n_states = cfg.n_cells() + 1;
    m.n_actions = kGridActions;
    m.gamma = cfg.gamma;
    m.transition = Matrix::Zero(m.n_pairs(), m.n_states);
    m.initial_dist = Vector::Zero(m.n_states);
    m.initial_dist(cfg.state_of(cfg.start)) = 1.0;
    m.rewards.assign(2, Matrix::Zero(m.n_states, m.n_actions));
    m.thresholds = Vector::Constant(1, cfg.resolved_threshold());

    const int sink = cfg.sink_state();
    const double intended = 1.0 - cfg.slip_prob;
    const double slip_each = cfg.slip_prob / kGridActions;

    for (int s = 0; s < cfg.n_cells(); ++s) {
        const Cell c = cfg.cell_of(s);
        const bool at_goal = c == cfg.goal;
        const bool unsafe = contains(cfg.unsafe_bridge, c);
        for (int a = 0; a < kGridActions; ++a) {
            const int row = m.pair(s, a);
            m.rewards[0](s, a) = at_goal ? cfg.goal_reward : cfg.step_reward;
            m.rewards[1](s, a) = unsafe ? -1.0 : 0.0;
            if (at_goal) {
                m.transition(row, sink) = 1.0;
                continue;
            }
            m.transition(row, cfg.state_of(step(cfg, c, a))) += intended;
            if (slip_each > 0.0) {
                for (int b = 0; b < kGridActions; ++b) {
                    m.transition(row, cfg.state_of(step(cfg, c, b))) += slip_each;
                }
            }
        }
    }
    for (int a = 0; a < kGridActions; ++a) m.transition(m.pair(sink, a), sink) = 1.0;
    return m;
}

std::vector<Cell> greedy_path(const GridworldConfig& cfg, const Policy& policy, int max_steps) {
    std::vector<Cell> path{cfg.start};
    std::vector<char> seen(cfg.n_cells(), 0);
    Cell c = cfg.start;
    seen[cfg.state_of(c)] = 1;
    for (int t = 0; t < max_steps && !(c == cfg.goal); ++t) {
        Eigen::Index best = 0;
        policy.table.row(cfg.state_of(c)).maxCoeff(&best);
        c = step(cfg, c, static_cast<int>(best));
        path.push_back(c);
        if (seen[cfg.state_of(c)]) break;
        seen[cfg.state_of(c)] = 1;
    }
    return path;
}

bool path_visits(const std::vector<Cell>& path, const std::vector<Cell>& cells) {
    return std::any_of(path.begin(), path.end(), [&](Cell c) { return contains(cells, c); });
}

}  // namespace cmdp
