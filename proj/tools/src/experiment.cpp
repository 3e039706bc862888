#include "cmdp_cli/experiment.hpp"

#include "cmdp/io.hpp"
#include "cmdp/occupancy_lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cmdp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool looks_like_model(const json& doc) { return doc.is_object() && doc.contains("transition"); }

bool looks_like_gridworld(const json& doc) {
    if (!doc.is_object()) return false;
    for (const char* key : {"width", "height", "river", "safe_bridge", "unsafe_bridge", "goal"}) {
        if (doc.contains(key)) return true;
    }
    return false;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

RandomSpec random_from_json(const json& doc) {
    RandomSpec r;
    r.seed = doc.value("seed", r.seed);
    r.n_states = doc.value("n_states", r.n_states);
    r.n_actions = doc.value("n_actions", r.n_actions);
    r.n_constraints = doc.value("n_constraints", r.n_constraints);
    r.slater_margin = doc.value("slater_margin", r.slater_margin);
    r.gamma = doc.value("gamma", r.gamma);
    return r;
}

json random_to_json(const RandomSpec& r) {
    return {{"seed", r.seed},
            {"n_states", r.n_states},
            {"n_actions", r.n_actions},
            {"n_constraints", r.n_constraints},
            {"slater_margin", r.slater_margin},
            {"gamma", r.gamma}};
}

ProblemSource problem_from_json(const json& doc, const fs::path& base) {
    ProblemSource src;
    int count = 0;
    if (doc.contains("gridworld")) {
        src.gridworld = gridworld_from_json(doc.at("gridworld"));
        ++count;
    }
    if (doc.contains("gridworld_path")) {
        src.gridworld = gridworld_from_json(read_json_file(resolve(base, doc.at("gridworld_path"))));
        ++count;
    }
    if (doc.contains("model")) {
        src.model = cmdp_from_json(doc.at("model"));
        ++count;
    }
    if (doc.contains("model_path")) {
        src.model = cmdp_from_json(read_json_file(resolve(base, doc.at("model_path"))));
        ++count;
    }
    if (doc.contains("random")) {
        src.random = random_from_json(doc.at("random"));
        ++count;
    }
    if (count != 1) throw FormatError("problem must name exactly one source");
    return src;
}

DualConfig solver_from_json(const json& doc) {
    DualConfig cfg;
    cfg.eta = doc.value("eta", cfg.eta);
    cfg.k_max = doc.value("k_max", cfg.k_max);
    cfg.epsilon_stop = doc.value("epsilon_stop", cfg.epsilon_stop);
    cfg.multistart = doc.value("multistart", cfg.multistart);
    cfg.stop_at_neighborhood = doc.value("stop_at_neighborhood", cfg.stop_at_neighborhood);
    const std::string mode = doc.value("mode", std::string("exact"));
    if (mode == "exact") {
        cfg.primal_mode = PrimalMode::Exact;
    } else if (mode == "pg") {
        cfg.primal_mode = PrimalMode::PolicyGradient;
    } else {
        throw FormatError("solver.mode must be \"exact\" or \"pg\"");
    }
    if (doc.contains("lambda0")) {
        const auto values = doc.at("lambda0").get<std::vector<double>>();
        cfg.lambda0 = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
    if (doc.contains("pg")) {
        const json& pg = doc.at("pg");
        cfg.pg.step_size = pg.value("step_size", cfg.pg.step_size);
        cfg.pg.max_iters = pg.value("max_iters", cfg.pg.max_iters);
        cfg.pg.grad_tol = pg.value("grad_tol", cfg.pg.grad_tol);
        cfg.pg.mc_episodes = pg.value("mc_episodes", cfg.pg.mc_episodes);
        cfg.pg.mc_horizon = pg.value("mc_horizon", cfg.pg.mc_horizon);
        cfg.pg.rng_seed = pg.value("seed", cfg.pg.rng_seed);
        const std::string pg_mode = pg.value("mode", std::string("exact"));
        if (pg_mode == "exact") {
            cfg.pg.mode = PgMode::Exact;
        } else if (pg_mode == "monte_carlo") {
            cfg.pg.mode = PgMode::MonteCarlo;
        } else {
            throw FormatError("solver.pg.mode must be \"exact\" or \"monte_carlo\"");
        }
    }
    return cfg;
}

json solver_to_json(const DualConfig& cfg) {
    json pg = {{"step_size", cfg.pg.step_size},
               {"max_iters", cfg.pg.max_iters},
               {"grad_tol", cfg.pg.grad_tol},
               {"mode", cfg.pg.mode == PgMode::Exact ? "exact" : "monte_carlo"},
               {"mc_episodes", cfg.pg.mc_episodes},
               {"mc_horizon", cfg.pg.mc_horizon},
               {"seed", cfg.pg.rng_seed}};
    json doc = {{"eta", cfg.eta},
                {"k_max", cfg.k_max},
                {"epsilon_stop", cfg.epsilon_stop},
                {"mode", cfg.primal_mode == PrimalMode::Exact ? "exact" : "pg"},
                {"multistart", cfg.multistart},
                {"stop_at_neighborhood", cfg.stop_at_neighborhood},
                {"pg", pg}};
    if (cfg.lambda0.size() > 0) doc["lambda0"] = vector_to_json(cfg.lambda0);
    return doc;
}

AggregationSpec aggregation_from_json_spec(const json& doc, const fs::path& base) {
    AggregationSpec spec;
    if (doc.is_string()) {
        if (doc.get<std::string>() != "identity") throw FormatError("aggregation string must be \"identity\"");
        return spec;
    }
    if (doc.is_object() && doc.contains("block")) {
        spec.block = doc.at("block").get<int>();
        return spec;
    }
    if (doc.is_object() && doc.contains("path")) {
        spec.explicit_map = aggregation_from_json(read_json_file(resolve(base, doc.at("path"))));
        return spec;
    }
    spec.explicit_map = aggregation_from_json(doc);
    return spec;
}

}  // namespace

Cmdp ProblemSource::build() const {
    if (gridworld) return build_gridworld(*gridworld);
    if (model) return *model;
    if (random) {
        return random_cmdp(random->seed, random->n_states, random->n_actions, random->n_constraints,
                           random->slater_margin, random->gamma);
    }
    throw std::logic_error("empty problem source");
}

std::string ProblemSource::kind() const {
    if (gridworld) return "gridworld";
    if (model) return "model";
    return "random";
}

ExperimentConfig experiment_from_json(const json& doc, const fs::path& base_dir) {
    ExperimentConfig cfg;
    try {
        if (looks_like_model(doc)) {
            cfg.problem.model = cmdp_from_json(doc);
            return cfg;
        }
        if (looks_like_gridworld(doc)) {
            cfg.problem.gridworld = gridworld_from_json(doc);
            return cfg;
        }
        if (!doc.is_object() || !doc.contains("problem")) {
            throw FormatError("expected an experiment, model or gridworld document");
        }
        cfg.problem = problem_from_json(doc.at("problem"), base_dir);
        if (doc.contains("solver")) cfg.solver = solver_from_json(doc.at("solver"));
        if (doc.contains("aggregation")) cfg.aggregation = aggregation_from_json_spec(doc.at("aggregation"), base_dir);
        if (doc.contains("out")) cfg.out_dir = resolve(base_dir, doc.at("out").get<std::string>());
        cfg.emit_svg = doc.value("svg", cfg.emit_svg);
        if (doc.contains("blocks")) cfg.blocks = doc.at("blocks").get<std::vector<int>>();
        if (doc.contains("certificates")) cfg.certificates = doc.at("certificates").get<std::vector<std::string>>();
        if (doc.contains("suite")) {
            cfg.suite.first_seed = doc.at("suite").value("first_seed", cfg.suite.first_seed);
            cfg.suite.n_seeds = doc.at("suite").value("n_seeds", cfg.suite.n_seeds);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad experiment document: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment(const fs::path& path) {
    return experiment_from_json(read_json_file(path), path.parent_path());
}

json experiment_to_json(const ExperimentConfig& cfg) {
    json problem;
    if (cfg.problem.gridworld) problem["gridworld"] = gridworld_to_json(*cfg.problem.gridworld);
    if (cfg.problem.model) problem["model"] = cmdp_to_json(*cfg.problem.model);
    if (cfg.problem.random) problem["random"] = random_to_json(*cfg.problem.random);
    json aggregation = cfg.aggregation.explicit_map
                           ? json{{"cluster_of", cfg.aggregation.explicit_map->cluster_of}}
                           : json{{"block", cfg.aggregation.block}};
    return {{"problem", problem},
            {"solver", solver_to_json(cfg.solver)},
            {"aggregation", aggregation},
            {"out", cfg.out_dir.string()},
            {"svg", cfg.emit_svg},
            {"blocks", cfg.blocks},
            {"certificates", cfg.certificates},
            {"suite", {{"first_seed", cfg.suite.first_seed}, {"n_seeds", cfg.suite.n_seeds}}}};
}

StateAggregation resolve_aggregation(const ExperimentConfig& cfg, const Cmdp& cmdp) {
    if (cfg.aggregation.explicit_map) {
        if (cfg.aggregation.explicit_map->n_states() != cmdp.n_states) {
            throw DimensionError("aggregation map does not match the number of states");
        }
        return *cfg.aggregation.explicit_map;
    }
    if (cfg.aggregation.block > 1) {
        if (!cfg.problem.gridworld) throw std::invalid_argument("block aggregation needs a gridworld problem");
        return gridworld_block_aggregation(*cfg.problem.gridworld, cfg.aggregation.block);
    }
    return StateAggregation::identity(cmdp.n_states);
}

std::string gap_svg(const DualTrace& trace, double p_star) {
    constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;
    constexpr double kFloor = 1e-16;
    std::vector<double> logs;
    for (const auto& r : trace.records) {
        const double d = r.dual_value + r.delta_estimate;
        logs.push_back(std::log10(std::max(kFloor, std::abs(normalized_gap(d, p_star)))));
    }
    double lo = logs.empty() ? -1.0 : *std::min_element(logs.begin(), logs.end());
    double hi = logs.empty() ? 0.0 : *std::max_element(logs.begin(), logs.end());
    lo = std::floor(lo);
    hi = std::max(std::ceil(hi), lo + 1.0);
    const double n = std::max<double>(1.0, static_cast<double>(logs.size()) - 1.0);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); ++e) {
        const double y = kTop + plot_h * (hi - e) / (hi - lo);
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" font-size=\"11\" text-anchor=\"end\">1e"
            << e << "</text>\n";
    }
    svg << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 25 << "\" font-size=\"11\">0</text>\n";
    svg << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kHeight - 25 << "\" font-size=\"11\" text-anchor=\"end\">"
        << logs.size() - (logs.empty() ? 0 : 1) << "</text>\n";
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 8
        << "\" font-size=\"13\" text-anchor=\"middle\">iteration k</text>\n";
    svg << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << kTop + plot_h / 2 << ")\">normalized duality gap</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (std::size_t k = 0; k < logs.size(); ++k) {
        const double x = kLeft + plot_w * static_cast<double>(k) / n;
        const double y = kTop + plot_h * (hi - logs[k]) / (hi - lo);
        svg << (k ? " " : "") << x << "," << y;
    }
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

CertificateReport certify_instance(const std::string& name, const Cmdp& cmdp, const ExperimentConfig& cfg) {
    const auto& names = certificate_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw std::invalid_argument("unknown certificate: " + name);
    }
    if (name == "zero-gap") {
        ZeroGapOptions opts;
        opts.eta = cfg.solver.eta;
        opts.k_max = cfg.solver.k_max;
        return check_zero_gap(cmdp, opts);
    }
    if (name == "lemma1") {
        const Policy pi = random_policy(cfg.suite.first_seed, cmdp.n_states, cmdp.n_actions);
        return check_lemma1(cmdp, pi, resolve_aggregation(cfg, cmdp));
    }
    if (name == "concavity") return check_concavity(cmdp, 200, cfg.suite.first_seed);
    if (name == "convergence") return check_convergence(cmdp, cfg.solver);
    ParametricGapOptions opts;
    opts.dual = cfg.solver;
    return check_parametric_gap(cmdp, resolve_aggregation(cfg, cmdp), opts);
}

}  // namespace cmdp::cli
