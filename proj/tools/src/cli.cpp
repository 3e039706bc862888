#include "cmdp_cli/cli.hpp"
#include "cmdp_cli/experiment.hpp"

#include "cmdp/io.hpp"
#include "cmdp/occupancy_lp.hpp"
#include "cmdp/parallel.hpp"
#include "cmdp/policy_eval.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cmdp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

struct Flags {
    std::string config;
    std::string out;
    std::optional<double> eta;
    std::optional<int> k_max;
    std::optional<std::string> mode;
    std::vector<int> blocks;
    std::optional<std::uint64_t> seed;
    bool svg = false;
    std::vector<std::string> names;
};

/// Usage or IO problems; mapped to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "experiment, model or gridworld JSON");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--eta", f.eta, "dual step size");
    cmd->add_option("--kmax", f.k_max, "dual iteration cap");
    cmd->add_option("--mode", f.mode, "primal mode")->check(CLI::IsMember({"exact", "pg"}));
    cmd->add_option("--block", f.blocks, "aggregation block size (repeatable for sweeps)");
    cmd->add_option("--seed", f.seed, "generator and sampling seed");
    cmd->add_flag("--svg", f.svg, "also write gap.svg");
}

ExperimentConfig resolve_config(const Flags& f, bool need_problem) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        try {
            cfg = load_experiment(f.config);
        } catch (const FormatError& e) {
            throw UsageError(e.what());
        }
    } else if (need_problem) {
        throw UsageError("--config is required");
    }
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.eta) cfg.solver.eta = *f.eta;
    if (f.k_max) cfg.solver.k_max = *f.k_max;
    if (f.mode) cfg.solver.primal_mode = *f.mode == "pg" ? PrimalMode::PolicyGradient : PrimalMode::Exact;
    if (!f.blocks.empty()) {
        cfg.aggregation.block = f.blocks.front();
        cfg.aggregation.explicit_map.reset();
        cfg.blocks = f.blocks;
    }
    if (f.seed) {
        if (cfg.problem.random) cfg.problem.random->seed = *f.seed;
        cfg.solver.pg.rng_seed = *f.seed;
        cfg.suite.first_seed = *f.seed;
    }
    if (f.svg) cfg.emit_svg = true;
    const auto errors = validate(cfg.solver);
    if (!errors.empty()) throw UsageError("invalid solver settings: " + errors.front());
    return cfg;
}

void write_json(const fs::path& path, const json& doc) {
    write_file_atomic(path, doc.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json cell_list(const std::vector<Cell>& cells) {
    json out = json::array();
    for (const auto& c : cells) out.push_back({c.row, c.col});
    return out;
}

json gridworld_summary(const GridworldConfig& g, const Policy& policy) {
    const auto path = greedy_path(g, policy);
    return {{"greedy_path", cell_list(path)},
            {"reaches_goal", !path.empty() && path.back() == g.goal},
            {"uses_safe_bridge", path_visits(path, g.safe_bridge)},
            {"uses_unsafe_bridge", path_visits(path, g.unsafe_bridge)}};
}

int cmd_validate(const Flags& f, std::ostream& out) {
    if (f.config.empty()) throw UsageError("validate needs --config PATH");
    const ExperimentConfig cfg = resolve_config(f, true);
    if (cfg.problem.gridworld) {
        const auto errors = validate_config(*cfg.problem.gridworld);
        if (!errors.empty()) {
            for (const auto& e : errors) out << e << "\n";
            return kExitFailure;
        }
    }
    const ValidationReport report = validate(cfg.problem.build());
    if (!report.ok()) {
        out << report.to_string();
        return kExitFailure;
    }
    out << "ok\n";
    return kExitOk;
}

int cmd_oracle(const Flags& f, std::ostream& out) {
    const ExperimentConfig cfg = resolve_config(f, true);
    const Cmdp cmdp = cfg.problem.build();
    require_valid(cmdp);
    const auto t0 = std::chrono::steady_clock::now();
    const PrimalOptimum opt = primal_optimum(cmdp);

    json doc = {{"schema_version", kSchemaVersion}, {"config", experiment_to_json(cfg)}};
    if (opt.status == LpStatus::Optimal) {
        doc["status"] = "optimal";
        doc["p_star"] = opt.p_star;
        doc["occupation_measure"] = matrix_to_json(opt.rho.rho);
        doc["policy"] = policy_to_json(opt.policy);
        doc["lp_duals"] = vector_to_json(opt.lambda);
        doc["degenerate"] = opt.degenerate;
        doc["values"] = vector_to_json(policy_values(cmdp, opt.policy).values);
        if (cfg.problem.gridworld) doc["gridworld"] = gridworld_summary(*cfg.problem.gridworld, opt.policy);
    } else {
        doc["status"] = "infeasible";
        doc["p_star"] = nullptr;
    }
    doc["lp_iterations"] = opt.iterations;
    doc["seconds"] = seconds_since(t0);
    fs::create_directories(cfg.out_dir);
    write_json(cfg.out_dir / "oracle.json", doc);
    out << "status " << doc["status"].get<std::string>();
    if (opt.status == LpStatus::Optimal) out << " p_star " << std::setprecision(12) << opt.p_star;
    out << "\n";
    return kExitOk;
}

int cmd_solve(const Flags& f, std::ostream& out) {
    const ExperimentConfig cfg = resolve_config(f, true);
    Cmdp cmdp = cfg.problem.build();
    require_valid(cmdp);
    fs::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    json doc = {{"schema_version", kSchemaVersion}, {"config", experiment_to_json(cfg)}};
    const PrimalOptimum opt = primal_optimum(cmdp);
    const double oracle_seconds = seconds_since(t0);
    if (opt.status != LpStatus::Optimal) {
        doc["status"] = "infeasible";
        doc["p_star"] = nullptr;
        doc["trace_path"] = nullptr;
        doc["certificates"] = json::array();
        write_json(cfg.out_dir / "result.json", doc);
        out << "status infeasible\n";
        return kExitOk;
    }

    DualConfig solver = cfg.solver;
    if (solver.primal_mode == PrimalMode::PolicyGradient) solver.aggregation = resolve_aggregation(cfg, cmdp);
    const auto t1 = std::chrono::steady_clock::now();
    const DualTrace trace = dual_descent(cmdp, solver, opt.p_star);
    const double dual_seconds = seconds_since(t1);

    std::ostringstream csv;
    write_trace_csv(csv, trace, cmdp.n_constraints());
    write_file_atomic(cfg.out_dir / "trace.csv", csv.str());
    if (cfg.emit_svg) write_file_atomic(cfg.out_dir / "gap.svg", gap_svg(trace, opt.p_star));

    const DualRecord& last = trace.records.back();
    const double terminal = last.dual_value + last.delta_estimate;
    const Policy& policy = trace.primal_policy();
    const ValueVector values = policy_values(cmdp, policy);

    json dual = {{"status", to_string(trace.status)},
                 {"iterations", trace.iterations},
                 {"terminal_lambda", vector_to_json(last.lambda)},
                 {"terminal_dual_value", terminal},
                 {"terminal_normalized_gap", normalized_gap(terminal, opt.p_star)},
                 {"best_index", trace.best_index},
                 {"best_dual_value", trace.best_dual_value},
                 {"dual_estimate", trace.dual_estimate()},
                 {"normalized_gap", normalized_gap(trace.dual_estimate(), opt.p_star)},
                 {"neighborhood_entry", trace.neighborhood_entry ? json(*trace.neighborhood_entry) : json(nullptr)}};
    if (trace.master) {
        dual["master"] = {{"lambda", vector_to_json(trace.master->lambda)},
                          {"model_value", trace.master->model_value},
                          {"dual_value", trace.master->dual_value},
                          {"columns", trace.master->n_columns}};
    }

    doc["status"] = "ok";
    doc["p_star"] = opt.p_star;
    doc["lp_policy"] = policy_to_json(opt.policy);
    doc["lp_duals"] = vector_to_json(opt.lambda);
    doc["trace_path"] = "trace.csv";
    doc["dual"] = dual;
    doc["policy"] = policy_to_json(policy);
    doc["policy_values"] = vector_to_json(values.values);
    doc["policy_slacks"] = vector_to_json(constraint_slacks(cmdp, values));
    if (cfg.problem.gridworld) doc["gridworld"] = gridworld_summary(*cfg.problem.gridworld, policy);

    json certs = json::array();
    bool all_pass = true;
    for (const auto& name : cfg.certificates) {
        const CertificateReport rep = certify_instance(name, cmdp, cfg);
        all_pass = all_pass && rep.passed();
        certs.push_back(to_json(rep));
    }
    doc["certificates"] = certs;
    doc["timings"] = {{"oracle_seconds", oracle_seconds}, {"dual_seconds", dual_seconds}, {"total_seconds", seconds_since(t0)}};
    write_json(cfg.out_dir / "result.json", doc);

    // Policy-gradient dual values are attained Lagrangians, so the terminal iterate is the meaningful summary.
    const double reported = solver.primal_mode == PrimalMode::Exact ? trace.dual_estimate() : terminal;
    out << std::setprecision(10) << "p_star " << opt.p_star << " dual " << reported << " normalized_gap "
        << normalized_gap(reported, opt.p_star) << " iterations " << trace.iterations << "\n";
    return all_pass ? kExitOk : kExitFailure;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
    ExperimentConfig cfg = resolve_config(f, true);
    if (!cfg.problem.gridworld) throw UsageError("sweep-aggregation needs a gridworld problem");
    const Cmdp cmdp = cfg.problem.build();
    require_valid(cmdp);
    fs::create_directories(cfg.out_dir);

    std::vector<ParametricGapResult> results(cfg.blocks.size());
    ParametricGapOptions opts;
    opts.dual = cfg.solver;
    parallel_for(cfg.blocks.size(), [&](std::size_t i) {
        results[i] = parametric_gap(cmdp, gridworld_block_aggregation(*cfg.problem.gridworld, cfg.blocks[i]), opts);
    });

    std::ostringstream csv;
    csv << "block,epsilon_measured,D_theta_star,gap,bound_lower\n" << std::setprecision(12);
    json rows = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const double gap = r.p_star - r.d_theta_star;
        csv << cfg.blocks[i] << "," << r.epsilon << "," << r.d_theta_star << "," << gap << ",";
        if (std::isfinite(r.lower)) csv << r.lower; else csv << "-inf";
        csv << "\n";
        rows.push_back({{"block", cfg.blocks[i]},
                        {"epsilon_measured", r.epsilon},
                        {"D_theta_star", r.d_theta_star},
                        {"gap", gap},
                        {"bound_lower", nullable(r.lower)},
                        {"bound_upper", r.upper},
                        {"lambda_eps_norm", nullable(r.lambda_eps_norm)},
                        {"vacuous", r.vacuous},
                        {"within_bounds", r.d_theta_star >= r.lower - opts.tolerance &&
                                              r.d_theta_star <= r.upper + opts.tolerance}});
    }
    // Gaps should not shrink as the class gets coarser.
    std::vector<std::size_t> order(results.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return results[a].epsilon < results[b].epsilon; });
    bool monotone = true;
    for (std::size_t j = 1; j < order.size(); ++j) {
        const auto& prev = results[order[j - 1]];
        const auto& cur = results[order[j]];
        monotone = monotone && (cur.p_star - cur.d_theta_star) >= (prev.p_star - prev.d_theta_star) - opts.tolerance;
    }
    write_file_atomic(cfg.out_dir / "sweep.csv", csv.str());
    write_json(cfg.out_dir / "sweep.json", {{"schema_version", kSchemaVersion},
                                            {"config", experiment_to_json(cfg)},
                                            {"p_star", results.empty() ? json(nullptr) : json(results[0].p_star)},
                                            {"gaps_nondecreasing", monotone},
                                            {"rows", rows}});
    out << csv.str() << "gaps_nondecreasing " << (monotone ? "yes" : "no") << "\n";
    return kExitOk;
}

int cmd_certify(const Flags& f, std::ostream& out) {
    const ExperimentConfig cfg = resolve_config(f, false);
    std::vector<std::string> names = f.names.empty() ? cfg.certificates : f.names;
    if (names.empty()) names = certificate_names();
    const auto& known = certificate_names();
    for (const auto& n : names) {
        if (std::find(known.begin(), known.end(), n) == known.end()) throw UsageError("unknown certificate: " + n);
    }
    // With a problem in the config the certificates run on it; otherwise on the random suite.
    const bool on_instance = !f.config.empty();
    std::optional<Cmdp> cmdp;
    if (on_instance) {
        cmdp = cfg.problem.build();
        require_valid(*cmdp);
    }
    json reports = json::array();
    bool all_pass = true;
    for (const auto& name : names) {
        const CertificateReport rep = on_instance ? certify_instance(name, *cmdp, cfg) : run_certificate(name, cfg.suite);
        all_pass = all_pass && rep.passed();
        reports.push_back(to_json(rep));
        out << (rep.passed() ? "PASS " : "FAIL ") << name << " instances " << rep.instances << " worst_margin "
            << std::setprecision(6) << rep.worst_margin << "\n";
    }
    fs::create_directories(cfg.out_dir);
    write_json(cfg.out_dir / "certificates.json",
               {{"schema_version", kSchemaVersion}, {"passed", all_pass}, {"certificates", reports}});
    return all_pass ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Primal-dual solver for constrained MDPs", "cmdp_dual"};
    app.require_subcommand(1);
    Flags flags;
    CLI::App* validate_cmd = app.add_subcommand("validate", "check a model or gridworld file");
    validate_cmd->add_option("path", flags.config, "file to check");
    add_common(validate_cmd, flags);
    CLI::App* solve_cmd = app.add_subcommand("solve", "run dual descent and write trace.csv and result.json");
    add_common(solve_cmd, flags);
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "solve the occupancy LP and write oracle.json");
    add_common(oracle_cmd, flags);
    CLI::App* sweep_cmd = app.add_subcommand("sweep-aggregation", "parametric gap for several gridworld block sizes");
    add_common(sweep_cmd, flags);
    CLI::App* certify_cmd = app.add_subcommand("certify", "run numerical certificates");
    certify_cmd->add_option("names", flags.names, "certificate names (default: all)");
    add_common(certify_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*validate_cmd) return cmd_validate(flags, out);
        if (*solve_cmd) return cmd_solve(flags, out);
        if (*oracle_cmd) return cmd_oracle(flags, out);
        if (*sweep_cmd) return cmd_sweep(flags, out);
        return cmd_certify(flags, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace cmdp::cli
