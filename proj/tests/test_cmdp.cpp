#include "fixtures.hpp"
#include "oracles.hpp"

#include "cmdp/cmdp.hpp"
#include "cmdp/gridworld.hpp"
#include "cmdp/policy_eval.hpp"

#include <doctest.h>

using namespace cmdp;

namespace {

Cmdp two_by_two() {
    Cmdp m;
    m.n_states = 2;
    m.n_actions = 2;
    m.gamma = 0.9;
    m.transition = Matrix(4, 2);
    m.transition << 0.9, 0.1, 0.2, 0.8, 0.5, 0.5, 0.1, 0.9;
    m.initial_dist = Vector::Constant(2, 0.5);
    m.rewards = {Matrix::Ones(2, 2), Matrix::Zero(2, 2)};
    m.thresholds = Vector::Zero(1);
    return m;
}

}  // namespace

TEST_SUITE("cmdp-core") {

TEST_CASE("valid model has an empty report") { CHECK(validate(two_by_two()).ok()); }

TEST_CASE("row summing to 0.9 is reported at its pair") {
    Cmdp m = two_by_two();
    m.transition(0, 0) = 0.8;
    const ValidationReport r = validate(m);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].s == 0);
    CHECK(r.violations[0].a == 0);
    CHECK(r.to_string().find("(s=0,a=0)") != std::string::npos);
}

TEST_CASE("discount outside (0,1) is reported") {
    Cmdp m = two_by_two();
    m.gamma = 1.0;
    CHECK_FALSE(validate(m).ok());
    m.gamma = 0.0;
    CHECK_FALSE(validate(m).ok());
}

TEST_CASE("negative probabilities, bad p0 and non-finite rewards are reported") {
    Cmdp m = two_by_two();
    m.transition(1, 0) = -0.2;
    m.transition(1, 1) = 1.2;
    CHECK_FALSE(validate(m).ok());
    m = two_by_two();
    m.initial_dist(0) = 0.7;
    CHECK_FALSE(validate(m).ok());
    m = two_by_two();
    m.rewards[1](1, 1) = std::nan("");
    CHECK_FALSE(validate(m).ok());
    CHECK_THROWS_AS(require_valid(m), std::invalid_argument);
}

TEST_CASE("scalarized reward") {
    Cmdp m = two_by_two();
    m.rewards[1] << 1, 2, 3, 4;
    CHECK(scalarized_reward(m, Vector::Zero(1)).isApprox(m.rewards[0]));

    Cmdp same = two_by_two();
    same.rewards[1] = same.rewards[0];
    CHECK(scalarized_reward(same, Vector::Ones(1)).isApprox(2.0 * same.rewards[0]));

    CHECK_THROWS_AS(scalarized_reward(m, Vector::Zero(2)), DimensionError);

    SUBCASE("linear in lambda") {
        Cmdp g = build_gridworld(GridworldConfig::default_map());
        Vector l1(1), l2(1);
        l1 << 0.7;
        l2 << 3.1;
        const double alpha = 0.4, beta = 2.5;
        const Matrix r0 = g.rewards[0];
        const Matrix lhs = scalarized_reward(g, alpha * l1 + beta * l2);
        const Matrix rhs = alpha * (scalarized_reward(g, l1) - r0) + beta * (scalarized_reward(g, l2) - r0) + r0;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("reward bounds") {
    Cmdp m = two_by_two();
    m.rewards[0] << 1, -1, 0.5, 0;
    m.rewards[1] << -1, 1, 0, 0.25;
    const RewardBounds b = reward_bounds(m);
    CHECK(b.b_r0 == doctest::Approx(1.0));
    CHECK(b.b_r == doctest::Approx(1.0));
    CHECK(b.b == doctest::Approx(100.0));

    Cmdp z = two_by_two();
    z.rewards = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    CHECK(reward_bounds(z).b == 0.0);

    CHECK(reward_bounds(build_gridworld(GridworldConfig::default_map())).b_r0 == doctest::Approx(10.0));
}

}  // TEST_SUITE

TEST_SUITE("gridworld") {

TEST_CASE("default map rewards and dynamics") {
    const GridworldConfig cfg = GridworldConfig::default_map();
    REQUIRE(validate_config(cfg).empty());
    const Cmdp g = build_gridworld(cfg);
    CHECK(validate(g).ok());
    CHECK(g.n_states == 65);
    CHECK(g.n_constraints() == 1);
    for (int a = 0; a < kGridActions; ++a) CHECK(g.rewards[0](cfg.state_of(cfg.goal), a) == 10.0);
    CHECK(g.rewards[0](cfg.state_of(cfg.start), 0) == -1.0);
    CHECK(g.rewards[1](cfg.state_of({3, 4}), 2) == -1.0);
    CHECK(g.rewards[1](cfg.state_of({7, 4}), 2) == 0.0);
    CHECK(g.thresholds(0) == doctest::Approx(-0.01 / (1.0 - cfg.gamma)));

    SUBCASE("unsafe cell with lambda 2 scalarizes to -3") {
        Vector lambda = Vector::Constant(1, 2.0);
        CHECK(scalarized_reward(g, lambda)(cfg.state_of({3, 4}), 0) == doctest::Approx(-3.0));
    }

    SUBCASE("deterministic rows are one-hot") {
        for (int row = 0; row < g.n_pairs(); ++row) {
            CHECK(g.transition.row(row).maxCoeff() == 1.0);
            CHECK(g.transition.row(row).sum() == 1.0);
        }
    }

    SUBCASE("walls and river keep the agent in place") {
        const int s = cfg.state_of({0, 0});
        CHECK(g.transition(g.pair(s, static_cast<int>(Move::Up)), s) == 1.0);
        const int by_river = cfg.state_of({2, 3});
        CHECK(g.transition(g.pair(by_river, static_cast<int>(Move::Right)), by_river) == 1.0);
        const int by_bridge = cfg.state_of({3, 3});
        CHECK(g.transition(g.pair(by_bridge, static_cast<int>(Move::Right)), cfg.state_of({3, 4})) == 1.0);
    }

    SUBCASE("goal is absorbing through the sink") {
        const int goal = cfg.state_of(cfg.goal);
        for (int a = 0; a < kGridActions; ++a) {
            CHECK(g.transition(g.pair(goal, a), cfg.sink_state()) == 1.0);
            CHECK(g.transition(g.pair(cfg.sink_state(), a), cfg.sink_state()) == 1.0);
            CHECK(g.rewards[0](cfg.sink_state(), a) == 0.0);
        }
    }
}

TEST_CASE("river cells off the bridges are never occupied") {
    const GridworldConfig cfg = GridworldConfig::default_map();
    const Cmdp g = build_gridworld(cfg);
    std::mt19937_64 rng(3);
    const int horizon = static_cast<int>(std::ceil(std::log(1e-10) / std::log(cfg.gamma)));
    for (int trial = 0; trial < 3; ++trial) {
        const Policy pi = trial == 0 ? Policy::uniform(g.n_states, 4) : fixture::random_policy(rng, g.n_states, 4);
        const Matrix rho = oracle::truncated_occupation(g, pi, horizon);
        for (const Cell& c : cfg.river) {
            if (cfg.is_bridge(c)) continue;
            CHECK(rho.row(cfg.state_of(c)).sum() == 0.0);
        }
    }
}

TEST_CASE("slip spreads mass over the four moves") {
    GridworldConfig cfg = GridworldConfig::default_map();
    cfg.slip_prob = 0.2;
    const Cmdp g = build_gridworld(cfg);
    CHECK(validate(g).ok());
    const int s = cfg.state_of({5, 1});
    const Eigen::RowVectorXd row = g.transition.row(g.pair(s, static_cast<int>(Move::Right)));
    CHECK(row(cfg.state_of({5, 2})) == doctest::Approx(0.85));
    CHECK(row(cfg.state_of({4, 1})) == doctest::Approx(0.05));
}

TEST_CASE("every valid small configuration builds a valid model") {
    int built = 0;
    for (int w = 3; w <= 5; ++w) {
        for (int h = 2; h <= 4; ++h) {
            for (double slip : {0.0, 0.3}) {
                GridworldConfig cfg;
                cfg.width = w;
                cfg.height = h;
                cfg.start = {0, 0};
                cfg.goal = {0, w - 1};
                cfg.river.clear();
                for (int r = 0; r < h; ++r) cfg.river.push_back({r, w / 2});
                cfg.safe_bridge = {{h - 1, w / 2}};
                cfg.unsafe_bridge = {{0, w / 2}};
                cfg.slip_prob = slip;
                REQUIRE(validate_config(cfg).empty());
                CHECK(validate(build_gridworld(cfg)).ok());
                ++built;
            }
        }
    }
    CHECK(built == 18);
}

TEST_CASE("invalid configurations are rejected") {
    GridworldConfig cfg = GridworldConfig::default_map();
    cfg.unsafe_bridge = cfg.safe_bridge;
    CHECK_FALSE(validate_config(cfg).empty());

    cfg = GridworldConfig::default_map();
    cfg.river.clear();
    cfg.safe_bridge.clear();
    cfg.unsafe_bridge.clear();
    CHECK_FALSE(validate_config(cfg).empty());

    cfg = GridworldConfig::default_map();
    cfg.slip_prob = 1.0;
    CHECK_FALSE(validate_config(cfg).empty());
    CHECK_THROWS_AS(build_gridworld(cfg), std::invalid_argument);
}

TEST_CASE("build is deterministic") {
    const Cmdp a = build_gridworld(GridworldConfig::default_map());
    const Cmdp b = build_gridworld(GridworldConfig::default_map());
    CHECK(a.transition == b.transition);
    CHECK(a.rewards[0] == b.rewards[0]);
    CHECK(a.rewards[1] == b.rewards[1]);
    CHECK(a.initial_dist == b.initial_dist);
}

TEST_CASE("greedy path follows the argmax and stops on revisits") {
    const GridworldConfig cfg = GridworldConfig::default_map();
    const int n = cfg.n_cells() + 1;
    std::vector<int> right(n, static_cast<int>(Move::Right));
    const auto path = greedy_path(cfg, Policy::deterministic(right, 4));
    CHECK(path.back() == cfg.goal);
    CHECK(path.size() == 8);
    CHECK(path_visits(path, cfg.unsafe_bridge));
    CHECK_FALSE(path_visits(path, cfg.safe_bridge));

    std::vector<int> up(n, static_cast<int>(Move::Up));
    const auto stuck = greedy_path(cfg, Policy::deterministic(up, 4));
    CHECK(stuck.size() < 10);
}

}  // TEST_SUITE
