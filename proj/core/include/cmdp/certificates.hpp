#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/dual_descent.hpp"
#include "cmdp/occupancy_lp.hpp"
#include "cmdp/primal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace cmdp {

struct InstanceRecord {
    int index = 0;
    double margin = 0.0;
    nlohmann::json data;
};

/// Pass iff worst_margin >= -tolerance. Positive margins are slack.
struct CertificateReport {
    std::string name;
    int instances = 0;
    double worst_margin = 0.0;
    double tolerance = 0.0;
    std::vector<InstanceRecord> details;

    bool passed() const { return worst_margin >= -tolerance; }
    void add(InstanceRecord rec);
    /// Concatenates per-instance records, re-indexing by position.
    static CertificateReport merge(const std::string& name, double tolerance, std::vector<CertificateReport> parts);
};

nlohmann::json to_json(const CertificateReport& report);

/// Dirichlet-style random instance with thresholds c_i = V_i(pi_rand) - slater_margin
/// for a sampled policy pi_rand, so pi_rand is strictly feasible.
Cmdp random_cmdp(std::uint64_t seed, int n_states, int n_actions, int m, double slater_margin = 0.05,
                 double gamma = 0.9);

/// The strictly feasible policy used to set the thresholds of random_cmdp.
Policy random_cmdp_witness(std::uint64_t seed, int n_states, int n_actions);

Policy random_policy(std::uint64_t seed, int n_states, int n_actions);

/// Random labels in [0, n_clusters), every cluster non-empty.
StateAggregation random_aggregation(std::uint64_t seed, int n_states, int n_clusters);

struct ZeroGapOptions {
    double eta = 0.05;
    int k_max = 5000;
    double abs_tol = 1e-4;
    double rel_tol = 0.0;  // allowed |D* - P*| = abs_tol + rel_tol |P*|
};

/// D* from exact-mode dual descent (best iterate) against the LP optimum P*.
CertificateReport check_zero_gap(const Cmdp& cmdp, const ZeroGapOptions& options = {});

/// Fits pi on the aggregation and checks TV(rho, rho_theta) <= eps / (1 - gamma).
CertificateReport check_lemma1(const Cmdp& cmdp, const Policy& pi, const StateAggregation& agg);

struct ParametricGapOptions {
    DualConfig dual;        // multistart policy-gradient dual descent in the class
    double upper_tol = 1e-4;
    double tolerance = 1e-6;
};

struct ParametricGapResult {
    double p_star = 0.0;
    double epsilon = 0.0;
    bool vacuous = false;  // perturbed problem infeasible: lambda_eps has infinite norm
    double lambda_eps_norm = 0.0;
    bool lambda_eps_degenerate = false;
    double d_theta_star = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    Vector lambda_theta;
    DualTrace trace;
};

ParametricGapResult parametric_gap(const Cmdp& cmdp, const StateAggregation& agg,
                                   const ParametricGapOptions& options = {});
CertificateReport check_parametric_gap(const Cmdp& cmdp, const StateAggregation& agg,
                                       const ParametricGapOptions& options = {});

/// n_probes concavity probes with xi uniform in [-B_r/(1-gamma), B_r/(1-gamma)]^m
/// and mu cycling through {0.25, 0.5, 0.75}.
CertificateReport check_concavity(const Cmdp& cmdp, int n_probes, std::uint64_t seed);

struct ConvergenceOptions {
    int reference_factor = 10;  // reference run: k_max * factor iterations at eta / factor
    double tolerance = 1e-6;
};

struct ConvergenceResult {
    double p_star = 0.0;
    Vector lambda_star;
    double reference_dual = 0.0;
    int k_observed = -1;  // -1: never entered the neighbourhood
    double k_bound = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;
    double lambda_eps_norm = 0.0;
    Neighborhood bounds;
    double terminal_dual = 0.0;  // dual value plus measured delta at the last iterate
    DualTrace trace;
};

ConvergenceResult convergence_analysis(const Cmdp& cmdp, const DualConfig& cfg, const ConvergenceOptions& options = {});
CertificateReport check_convergence(const Cmdp& cmdp, const DualConfig& cfg, const ConvergenceOptions& options = {});

/// Largest fit error of the reference policies (LP optimum and the exact
/// Lagrangian maximiser at the LP multipliers) on the aggregation.
double measured_epsilon(const Cmdp& cmdp, const StateAggregation& agg, const PrimalOptimum& lp_opt);

/// ||lambda_eps||_1 from the occupancy LP perturbed by xi_i = B_r eps / (1-gamma);
/// infinity when that problem is infeasible.
double perturbed_multiplier_norm(const Cmdp& cmdp, double epsilon, bool* degenerate = nullptr);

/// Names accepted by run_certificate.
const std::vector<std::string>& certificate_names();

struct SuiteOptions {
    std::uint64_t first_seed = 0;
    int n_seeds = 20;
};

/// Default random-instance suite for a named certificate; throws std::invalid_argument
/// on unknown names.
CertificateReport run_certificate(const std::string& name, const SuiteOptions& options = {});

}  // namespace cmdp
