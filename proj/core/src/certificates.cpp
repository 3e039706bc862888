#include "cmdp/certificates.hpp"
#include "cmdp/parallel.hpp"
#include "cmdp/policy_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cmdp {

using nlohmann::json;

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

// Normalised uniform draws on the simplex.
Vector simplex_draw(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = unif(rng);
    const double sum = v.sum();
    if (sum <= 0.0) return Vector::Constant(n, 1.0 / n);
    return v / sum;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void CertificateReport::add(InstanceRecord rec) {
    worst_margin = instances == 0 ? rec.margin : std::min(worst_margin, rec.margin);
    ++instances;
    details.push_back(std::move(rec));
}

CertificateReport CertificateReport::merge(const std::string& name, double tolerance,
                                           std::vector<CertificateReport> parts) {
    CertificateReport out;
    out.name = name;
    out.tolerance = tolerance;
    for (auto& part : parts) {
        for (auto& rec : part.details) {
            rec.index = out.instances;
            out.add(std::move(rec));
        }
    }
    return out;
}

json to_json(const CertificateReport& report) {
    json doc;
    doc["name"] = report.name;
    doc["instances"] = report.instances;
    doc["worst_margin"] = finite_or_null(report.worst_margin);
    doc["tolerance"] = report.tolerance;
    doc["passed"] = report.passed();
    json details = json::array();
    for (const auto& rec : report.details) {
        json d = rec.data;
        d["index"] = rec.index;
        d["margin"] = finite_or_null(rec.margin);
        details.push_back(std::move(d));
    }
    doc["details"] = std::move(details);
    return doc;
}

Policy random_policy(std::uint64_t seed, int n_states, int n_actions) {
    auto rng = make_engine(seed, 7);
    Policy p{Matrix(n_states, n_actions)};
    for (int s = 0; s < n_states; ++s) p.table.row(s) = simplex_draw(rng, n_actions).transpose();
    return p;
}

Policy random_cmdp_witness(std::uint64_t seed, int n_states, int n_actions) {
    auto rng = make_engine(seed, 2);
    Policy p{Matrix(n_states, n_actions)};
    for (int s = 0; s < n_states; ++s) p.table.row(s) = simplex_draw(rng, n_actions).transpose();
    return p;
}

Cmdp random_cmdp(std::uint64_t seed, int n_states, int n_actions, int m, double slater_margin, double gamma) {
    if (n_states < 1 || n_actions < 1 || m < 0) throw std::invalid_argument("random_cmdp: sizes must be positive");
    if (!(slater_margin > 0.0)) throw std::invalid_argument("random_cmdp: slater margin must be positive");
    auto rng = make_engine(seed, 1);
    std::uniform_real_distribution<double> reward(-1.0, 1.0);

    Cmdp c;
    c.n_states = n_states;
    c.n_actions = n_actions;
    c.gamma = gamma;
    c.transition = Matrix(c.n_pairs(), n_states);
    for (int row = 0; row < c.n_pairs(); ++row) c.transition.row(row) = simplex_draw(rng, n_states).transpose();
    c.initial_dist = simplex_draw(rng, n_states);
    for (int i = 0; i <= m; ++i) {
        Matrix r(n_states, n_actions);
        for (int s = 0; s < n_states; ++s) {
            for (int a = 0; a < n_actions; ++a) r(s, a) = reward(rng);
        }
        c.rewards.push_back(std::move(r));
    }
    c.thresholds = Vector::Zero(m);
    const ValueVector v = policy_values(c, random_cmdp_witness(seed, n_states, n_actions));
    for (int i = 0; i < m; ++i) c.thresholds(i) = v[i + 1] - slater_margin;
    return c;
}

StateAggregation random_aggregation(std::uint64_t seed, int n_states, int n_clusters) {
    if (n_clusters < 1 || n_clusters > n_states) throw std::invalid_argument("random_aggregation: bad cluster count");
    auto rng = make_engine(seed, 11);
    std::vector<int> order(n_states);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> labels(n_states, 0);
    std::uniform_int_distribution<int> pick(0, n_clusters - 1);
    for (int i = 0; i < n_states; ++i) labels[order[i]] = i < n_clusters ? i : pick(rng);
    StateAggregation agg;
    agg.cluster_of = labels;
    agg.n_clusters = n_clusters;
    return agg;
}

CertificateReport check_zero_gap(const Cmdp& cmdp, const ZeroGapOptions& options) {
    const PrimalOptimum lp = primal_optimum(cmdp);
    if (lp.status != LpStatus::Optimal) throw std::invalid_argument("zero-gap certificate needs a feasible instance");
    DualConfig cfg;
    cfg.eta = options.eta;
    cfg.k_max = options.k_max;
    const DualTrace trace = dual_descent(cmdp, cfg, lp.p_star);
    const double gap = trace.dual_estimate() - lp.p_star;
    const double allowed = options.abs_tol + options.rel_tol * std::abs(lp.p_star);

    CertificateReport report;
    report.name = "zero-gap";
    report.tolerance = 0.0;
    InstanceRecord rec;
    rec.margin = allowed - std::abs(gap);
    rec.data = {{"p_star", lp.p_star},
                {"d_star", trace.dual_estimate()},
                {"best_iterate", trace.best_dual_value},
                {"gap", gap},
                {"allowed", allowed},
                {"iterations", trace.iterations},
                {"best_iteration", trace.best_index}};
    report.add(std::move(rec));
    return report;
}

CertificateReport check_lemma1(const Cmdp& cmdp, const Policy& pi, const StateAggregation& agg) {
    const auto [sp, epsilon] = fit_aggregated_policy(pi, agg);
    const OccupationMeasure rho = occupation_measure(cmdp, pi);
    const OccupationMeasure rho_theta = occupation_measure(cmdp, induce_policy(sp));
    const double tv = tv_distance(rho, rho_theta);
    const double bound = epsilon / (1.0 - cmdp.gamma);

    CertificateReport report;
    report.name = "lemma1";
    report.tolerance = 1e-9;
    InstanceRecord rec;
    rec.margin = bound - tv;
    rec.data = {{"epsilon", epsilon}, {"tv", tv}, {"bound", bound}, {"gamma", cmdp.gamma}};
    report.add(std::move(rec));
    return report;
}

double measured_epsilon(const Cmdp& cmdp, const StateAggregation& agg, const PrimalOptimum& lp_opt) {
    double eps = fit_aggregated_policy(lp_opt.policy, agg).second;
    const Vector lambda = lp_opt.lambda.cwiseMax(0.0);
    const PrimalResult maximiser = exact_lagrangian_max(cmdp, lambda);
    eps = std::max(eps, fit_aggregated_policy(maximiser.policy, agg).second);
    return eps;
}

double perturbed_multiplier_norm(const Cmdp& cmdp, double epsilon, bool* degenerate) {
    const RewardBounds rb = reward_bounds(cmdp);
    const int m = cmdp.n_constraints();
    const Perturbation xi{Vector::Constant(m, rb.b_r * epsilon / (1.0 - cmdp.gamma))};
    const PrimalOptimum opt = solve_occupancy(cmdp, xi);
    if (degenerate) *degenerate = opt.degenerate;
    if (opt.status != LpStatus::Optimal) return std::numeric_limits<double>::infinity();
    return opt.lambda.cwiseMax(0.0).sum();
}

ParametricGapResult parametric_gap(const Cmdp& cmdp, const StateAggregation& agg, const ParametricGapOptions& options) {
    const PrimalOptimum lp = primal_optimum(cmdp);
    if (lp.status != LpStatus::Optimal) throw std::invalid_argument("parametric-gap certificate needs a feasible instance");
    ParametricGapResult out;
    out.p_star = lp.p_star;
    out.epsilon = measured_epsilon(cmdp, agg, lp);
    out.lambda_eps_norm = perturbed_multiplier_norm(cmdp, out.epsilon, &out.lambda_eps_degenerate);
    out.vacuous = !std::isfinite(out.lambda_eps_norm);

    DualConfig cfg = options.dual;
    cfg.primal_mode = PrimalMode::PolicyGradient;
    cfg.multistart = true;
    cfg.aggregation = agg;
    out.trace = dual_descent(cmdp, cfg, lp.p_star);
    out.d_theta_star = out.trace.dual_estimate();
    out.lambda_theta = out.trace.best_lambda;

    const RewardBounds rb = reward_bounds(cmdp);
    out.lower = neighborhood_bounds(rb, cmdp.gamma, 0.0, 0.0, 0.0, out.epsilon, out.lambda_eps_norm, lp.p_star).lower;
    out.upper = lp.p_star + options.upper_tol;
    return out;
}

CertificateReport check_parametric_gap(const Cmdp& cmdp, const StateAggregation& agg,
                                       const ParametricGapOptions& options) {
    const ParametricGapResult r = parametric_gap(cmdp, agg, options);
    CertificateReport report;
    report.name = "parametric-gap";
    report.tolerance = options.tolerance;
    InstanceRecord rec;
    rec.margin = std::min(r.upper - r.d_theta_star, r.d_theta_star - r.lower);
    rec.data = {{"p_star", r.p_star},
                {"epsilon", r.epsilon},
                {"d_theta_star", r.d_theta_star},
                {"gap", r.p_star - r.d_theta_star},
                {"lower", finite_or_null(r.lower)},
                {"upper", r.upper},
                {"lambda_eps_norm", finite_or_null(r.lambda_eps_norm)},
                {"vacuous", r.vacuous},
                {"lambda_eps_degenerate", r.lambda_eps_degenerate}};
    report.add(std::move(rec));
    return report;
}

CertificateReport check_concavity(const Cmdp& cmdp, int n_probes, std::uint64_t seed) {
    const int m = cmdp.n_constraints();
    const double radius = reward_bounds(cmdp).b_r / (1.0 - cmdp.gamma);
    auto rng = make_engine(seed, 5);
    std::uniform_real_distribution<double> unif(-radius, radius);
    constexpr double kMus[] = {0.25, 0.5, 0.75};

    CertificateReport report;
    report.name = "concavity";
    report.tolerance = 1e-7;
    double worst = std::numeric_limits<double>::infinity();
    int infeasible = 0;
    for (int p = 0; p < n_probes; ++p) {
        Perturbation a{Vector(m)}, b{Vector(m)};
        for (int i = 0; i < m; ++i) a.xi(i) = unif(rng);
        for (int i = 0; i < m; ++i) b.xi(i) = unif(rng);
        const double margin = concavity_probe(cmdp, a, b, kMus[p % 3]);
        if (std::isinf(margin) && margin > 0) ++infeasible;
        worst = std::min(worst, margin);
    }
    InstanceRecord rec;
    rec.margin = n_probes > 0 ? worst : 0.0;
    rec.data = {{"probes", n_probes}, {"infeasible_endpoints", infeasible}};
    report.add(std::move(rec));
    return report;
}

ConvergenceResult convergence_analysis(const Cmdp& cmdp, const DualConfig& cfg, const ConvergenceOptions& options) {
    const PrimalOptimum lp = primal_optimum(cmdp);
    if (lp.status != LpStatus::Optimal) throw std::invalid_argument("convergence certificate needs a feasible instance");
    const RewardBounds rb = reward_bounds(cmdp);

    DualConfig ref_cfg = cfg;
    ref_cfg.primal_mode = PrimalMode::Exact;
    ref_cfg.multistart = false;
    ref_cfg.k_max = cfg.k_max * options.reference_factor;
    ref_cfg.eta = cfg.eta / options.reference_factor;
    ref_cfg.stop_at_neighborhood = false;
    ref_cfg.reference_dual.reset();
    const DualTrace ref = dual_descent(cmdp, ref_cfg, lp.p_star);

    ConvergenceResult out;
    out.p_star = lp.p_star;
    out.trace = dual_descent(cmdp, cfg, lp.p_star);
    out.lambda_star = ref.best_lambda;

    std::vector<double> dual_values;
    double d_ref = ref.best_dual_value;
    for (const auto& r : out.trace.records) {
        dual_values.push_back(r.dual_value + r.delta_estimate);
        d_ref = std::min(d_ref, dual_values.back());
        out.delta = std::max(out.delta, r.delta_estimate);
    }
    out.reference_dual = d_ref;
    for (std::size_t k = 0; k < dual_values.size(); ++k) {
        const double alpha = neighborhood_alpha(out.trace.records[k].delta_estimate, d_ref, dual_values[k], cfg.eta, rb.b);
        if (alpha > -2.0 * cfg.epsilon_stop) {
            out.k_observed = static_cast<int>(k);
            break;
        }
    }
    const Vector lambda0 = cfg.lambda0.size() > 0 ? cfg.lambda0 : Vector::Zero(cmdp.n_constraints());
    out.k_bound = iteration_bound(lambda0, out.lambda_star, cfg.eta, cfg.epsilon_stop);

    if (cfg.primal_mode == PrimalMode::PolicyGradient) {
        const StateAggregation agg = cfg.aggregation.value_or(StateAggregation::identity(cmdp.n_states));
        out.epsilon = measured_epsilon(cmdp, agg, lp);
        out.lambda_eps_norm = perturbed_multiplier_norm(cmdp, out.epsilon);
    } else {
        out.lambda_eps_norm = lp.lambda.cwiseMax(0.0).sum();
    }
    out.bounds = neighborhood_bounds(rb, cmdp.gamma, cfg.eta, out.delta, cfg.epsilon_stop, out.epsilon,
                                     out.lambda_eps_norm, lp.p_star);
    out.terminal_dual = dual_values.back();
    return out;
}

CertificateReport check_convergence(const Cmdp& cmdp, const DualConfig& cfg, const ConvergenceOptions& options) {
    const ConvergenceResult r = convergence_analysis(cmdp, cfg, options);
    const double k_margin = r.k_observed < 0 ? -std::numeric_limits<double>::infinity()
                                             : r.k_bound + 1.0 - r.k_observed;
    const double lower_margin = r.terminal_dual - r.bounds.lower;
    const double upper_margin = r.bounds.upper - r.terminal_dual;

    CertificateReport report;
    report.name = "convergence";
    report.tolerance = options.tolerance;
    InstanceRecord rec;
    rec.margin = std::min({k_margin, lower_margin, upper_margin});
    rec.data = {{"p_star", r.p_star},
                {"k_observed", r.k_observed},
                {"k_bound", r.k_bound},
                {"terminal_dual", r.terminal_dual},
                {"lower", finite_or_null(r.bounds.lower)},
                {"upper", r.bounds.upper},
                {"delta", r.delta},
                {"epsilon", r.epsilon},
                {"reference_dual", r.reference_dual}};
    report.add(std::move(rec));
    return report;
}

const std::vector<std::string>& certificate_names() {
    static const std::vector<std::string> names{"zero-gap", "lemma1", "parametric-gap", "concavity", "convergence"};
    return names;
}

CertificateReport run_certificate(const std::string& name, const SuiteOptions& options) {
    const auto& names = certificate_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw std::invalid_argument("unknown certificate: " + name);
    }
    const std::uint64_t first = options.first_seed;
    const int n = options.n_seeds;
    std::vector<CertificateReport> parts(n);
    double tolerance = 0.0;

    if (name == "zero-gap") {
        parallel_for(n, [&](std::size_t i) { parts[i] = check_zero_gap(random_cmdp(first + i, 5, 3, 2)); });
    } else if (name == "lemma1") {
        tolerance = 1e-9;
        parallel_for(n, [&](std::size_t i) {
            const std::uint64_t seed = first + i;
            const Cmdp c = random_cmdp(seed, 6, 3, 1);
            const int clusters = 1 + static_cast<int>(seed % 6);
            parts[i] = check_lemma1(c, random_policy(seed, 6, 3), random_aggregation(seed, 6, clusters));
        });
    } else if (name == "concavity") {
        tolerance = 1e-7;
        parallel_for(n, [&](std::size_t i) { parts[i] = check_concavity(random_cmdp(first + i, 5, 3, 2), 200, first + i); });
    } else if (name == "convergence") {
        tolerance = 1e-6;
        DualConfig cfg;
        cfg.eta = 0.001;
        cfg.k_max = 2000;
        cfg.epsilon_stop = 1e-3;
        parallel_for(n, [&](std::size_t i) { parts[i] = check_convergence(random_cmdp(first + i, 5, 3, 2), cfg); });
    } else {
        tolerance = 1e-6;
        ParametricGapOptions opts;
        opts.dual.eta = 0.05;
        opts.dual.k_max = 300;
        opts.dual.pg.max_iters = 200;
        parallel_for(n, [&](std::size_t i) {
            const std::uint64_t seed = first + i;
            parts[i] = check_parametric_gap(random_cmdp(seed, 6, 3, 1), random_aggregation(seed, 6, 3), opts);
        });
    }
    return CertificateReport::merge(name, tolerance, std::move(parts));
}

}  // namespace cmdp
