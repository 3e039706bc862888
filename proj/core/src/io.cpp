#include "cmdp/io.hpp"

#include <fstream>
#include <sstream>

namespace cmdp {

using nlohmann::json;

namespace {

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    }
}

Cell cell_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw FormatError("cells must be [row, col] pairs");
    return {j.at(0).get<int>(), j.at(1).get<int>()};
}

std::vector<Cell> cells_from_json(const json& j) {
    std::vector<Cell> out;
    for (const auto& c : j) out.push_back(cell_from_json(c));
    return out;
}

json cells_to_json(const std::vector<Cell>& cells) {
    json out = json::array();
    for (const auto& c : cells) out.push_back({c.row, c.col});
    return out;
}

}  // namespace

Cmdp cmdp_from_json(const json& doc) {
    return guarded("model document", [&] {
        Cmdp m;
        m.n_states = doc.at("n_states").get<int>();
        m.n_actions = doc.at("n_actions").get<int>();
        m.gamma = doc.at("gamma").get<double>();
        if (m.n_states <= 0 || m.n_actions <= 0) throw FormatError("n_states and n_actions must be positive");

        const auto p0 = doc.at("p0").get<std::vector<double>>();
        if (static_cast<int>(p0.size()) != m.n_states) throw FormatError("p0 must have n_states entries");
        m.initial_dist = Eigen::Map<const Vector>(p0.data(), m.n_states);

        const auto& tr = doc.at("transition");
        if (static_cast<int>(tr.size()) != m.n_states) throw FormatError("transition must have n_states rows");
        m.transition = Matrix::Zero(m.n_pairs(), m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            if (static_cast<int>(tr[s].size()) != m.n_actions) throw FormatError("transition[s] must have n_actions rows");
            for (int a = 0; a < m.n_actions; ++a) {
                const auto row = tr[s][a].get<std::vector<double>>();
                if (static_cast<int>(row.size()) != m.n_states) throw FormatError("transition[s][a] must have n_states entries");
                for (int t = 0; t < m.n_states; ++t) m.transition(m.pair(s, a), t) = row[t];
            }
        }

        for (const auto& table : doc.at("rewards")) {
            Matrix r(m.n_states, m.n_actions);
            if (static_cast<int>(table.size()) != m.n_states) throw FormatError("reward tables must have n_states rows");
            for (int s = 0; s < m.n_states; ++s) {
                const auto row = table[s].get<std::vector<double>>();
                if (static_cast<int>(row.size()) != m.n_actions) throw FormatError("reward rows must have n_actions entries");
                for (int a = 0; a < m.n_actions; ++a) r(s, a) = row[a];
            }
            m.rewards.push_back(std::move(r));
        }
        const auto c = doc.value("thresholds", std::vector<double>{});
        m.thresholds = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
        return m;
    });
}

json cmdp_to_json(const Cmdp& m) {
    json doc;
    doc["n_states"] = m.n_states;
    doc["n_actions"] = m.n_actions;
    doc["gamma"] = m.gamma;
    doc["p0"] = vector_to_json(m.initial_dist);
    json tr = json::array();
    for (int s = 0; s < m.n_states; ++s) {
        json per_action = json::array();
        for (int a = 0; a < m.n_actions; ++a) per_action.push_back(vector_to_json(m.transition.row(m.pair(s, a)).transpose()));
        tr.push_back(std::move(per_action));
    }
    doc["transition"] = std::move(tr);
    json rewards = json::array();
    for (const auto& r : m.rewards) rewards.push_back(matrix_to_json(r));
    doc["rewards"] = std::move(rewards);
    doc["thresholds"] = vector_to_json(m.thresholds);
    return doc;
}

GridworldConfig gridworld_from_json(const json& doc) {
    return guarded("gridworld document", [&] {
        GridworldConfig cfg;
        cfg.width = doc.value("width", cfg.width);
        cfg.height = doc.value("height", cfg.height);
        if (doc.contains("start")) cfg.start = cell_from_json(doc["start"]);
        if (doc.contains("goal")) cfg.goal = cell_from_json(doc["goal"]);
        if (doc.contains("river")) {
            cfg.river = cells_from_json(doc["river"]);
        } else {
            const int col = cfg.width / 2;
            for (int r = 0; r < cfg.height; ++r) cfg.river.push_back({r, col});
        }
        if (doc.contains("safe_bridge")) cfg.safe_bridge = cells_from_json(doc["safe_bridge"]);
        if (doc.contains("unsafe_bridge")) cfg.unsafe_bridge = cells_from_json(doc["unsafe_bridge"]);
        cfg.goal_reward = doc.value("goal_reward", cfg.goal_reward);
        cfg.step_reward = doc.value("step_reward", cfg.step_reward);
        if (doc.contains("unsafe_visit_threshold") && !doc["unsafe_visit_threshold"].is_null()) {
            cfg.unsafe_visit_threshold = doc["unsafe_visit_threshold"].get<double>();
        }
        cfg.gamma = doc.value("gamma", cfg.gamma);
        cfg.slip_prob = doc.value("slip_prob", cfg.slip_prob);
        return cfg;
    });
}

json gridworld_to_json(const GridworldConfig& cfg) {
    json doc;
    doc["width"] = cfg.width;
    doc["height"] = cfg.height;
    doc["start"] = {cfg.start.row, cfg.start.col};
    doc["goal"] = {cfg.goal.row, cfg.goal.col};
    doc["river"] = cells_to_json(cfg.river);
    doc["safe_bridge"] = cells_to_json(cfg.safe_bridge);
    doc["unsafe_bridge"] = cells_to_json(cfg.unsafe_bridge);
    doc["goal_reward"] = cfg.goal_reward;
    doc["step_reward"] = cfg.step_reward;
    doc["unsafe_visit_threshold"] = cfg.resolved_threshold();
    doc["gamma"] = cfg.gamma;
    doc["slip_prob"] = cfg.slip_prob;
    return doc;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
    return out;
}

json policy_to_json(const Policy& policy) { return matrix_to_json(policy.table); }

StateAggregation aggregation_from_json(const json& doc) {
    return guarded("aggregation document", [&] {
        const json& labels = doc.is_object() ? doc.at("cluster_of") : doc;
        return StateAggregation::from_labels(labels.get<std::vector<int>>());
    });
}

StateAggregation gridworld_block_aggregation(const GridworldConfig& cfg, int block) {
    if (block < 1) throw std::invalid_argument("block size must be at least 1");
    const int blocks_per_row = (cfg.width + block - 1) / block;
    std::vector<int> labels(cfg.n_cells() + 1);
    for (int s = 0; s < cfg.n_cells(); ++s) {
        const Cell c = cfg.cell_of(s);
        labels[s] = (c.row / block) * blocks_per_row + c.col / block;
    }
    labels[cfg.sink_state()] = -1;
    return StateAggregation::from_labels(labels);
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw FormatError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace cmdp
