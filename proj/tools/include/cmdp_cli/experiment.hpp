#pragma once

#include "cmdp/certificates.hpp"
#include "cmdp/dual_descent.hpp"
#include "cmdp/gridworld.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cmdp::cli {

struct RandomSpec {
    std::uint64_t seed = 0;
    int n_states = 5;
    int n_actions = 3;
    int n_constraints = 2;
    double slater_margin = 0.05;
    double gamma = 0.9;
};

/// One of a gridworld, an explicit model or a random instance.
struct ProblemSource {
    std::optional<GridworldConfig> gridworld;
    std::optional<Cmdp> model;
    std::optional<RandomSpec> random;

    Cmdp build() const;
    std::string kind() const;
};

struct AggregationSpec {
    int block = 1;                                // gridworld blocks; 1 is the identity
    std::optional<StateAggregation> explicit_map;  // overrides block
};

struct ExperimentConfig {
    ProblemSource problem;
    DualConfig solver;
    AggregationSpec aggregation;
    std::filesystem::path out_dir = "out";
    bool emit_svg = false;
    std::vector<int> blocks{1, 2, 4};
    std::vector<std::string> certificates;
    SuiteOptions suite;
};

/// Accepts an experiment document ({"problem": ...}), a bare model or a bare
/// gridworld. Relative paths resolve against `base_dir`.
ExperimentConfig experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Snapshot that reloads to the same experiment; problems are inlined.
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

/// Explicit map if given, else gridworld blocks, else the identity.
StateAggregation resolve_aggregation(const ExperimentConfig& cfg, const Cmdp& cmdp);

/// Gap against k on a log axis, one polyline; nonpositive gaps are clamped.
std::string gap_svg(const DualTrace& trace, double p_star);

/// Runs a certificate on one instance instead of the random suite.
CertificateReport certify_instance(const std::string& name, const Cmdp& cmdp, const ExperimentConfig& cfg);

}  // namespace cmdp::cli
