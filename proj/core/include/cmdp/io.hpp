#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/gridworld.hpp"
#include "cmdp/primal.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace cmdp {

/// Unreadable file or a document that does not match the expected schema.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model document: n_states, n_actions, gamma, p0, transition[s][a][s'],
/// rewards[i][s][a], thresholds. No validation beyond shape.
Cmdp cmdp_from_json(const nlohmann::json& doc);
nlohmann::json cmdp_to_json(const Cmdp& cmdp);

/// Gridworld document; cells are [row, col] pairs. Missing fields keep defaults,
/// and a missing "river" means the default river column.
GridworldConfig gridworld_from_json(const nlohmann::json& doc);
nlohmann::json gridworld_to_json(const GridworldConfig& cfg);

nlohmann::json policy_to_json(const Policy& policy);
nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);

/// {"cluster_of": [...]} or a bare array of labels.
StateAggregation aggregation_from_json(const nlohmann::json& doc);

/// B x B blocks of grid cells; the sink gets its own cluster.
StateAggregation gridworld_block_aggregation(const GridworldConfig& cfg, int block);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace cmdp
