#include "smdp/bellman.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace smdp;

namespace {

PolicyTable random_policy(const AugGrid& grid, const SmdpModel& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PolicyTable f;
    f.grid = grid;
    f.n_states = model.num_states();
    f.choice.resize(static_cast<std::size_t>(f.n_states) * grid.W() * grid.L());
    for (int i = 0; i < f.n_states; ++i) {
        std::uniform_int_distribution<int> pick(0, model.num_actions(i) - 1);
        for (int wi = 0; wi < grid.W(); ++wi)
            for (int li = 0; li < grid.L(); ++li) f.at(i, wi, li) = pick(rng);
    }
    return f;
}

} // namespace

TEST_CASE("zero cost makes U(lambda) a fixed point of L") {
    auto m = test::zero_cost(test::load_fixture("maintenance.json").model);
    const auto g = build_grid(m, 8, 8, 1e-2);
    const auto quad = build_quadrature(m, 16);
    for (const auto& u : {Utility::linear(), Utility::log1p()}) {
        auto v = make_table(g, 2, [&](int, double, double lam) { return u.eval(lam); });
        for (int i = 0; i < 2; ++i)
            for (int a = 0; a < m.num_actions(i); ++a)
                for (int li = 0; li < g.L(); ++li)
                    CHECK(apply_L(v, m, quad, u, i, 0.7, g.lam_nodes[li], a) ==
                          doctest::Approx(u.eval(g.lam_nodes[li])).epsilon(1e-12));
    }
}

TEST_CASE("single deterministic atom gives the closed-form update") {
    // C=1, alpha=1, w=1, sojourn ln 2: lambda update is (C/alpha) w (1 - 1/2)
    auto m = test::single_state_model(std::log(2.0), 1.0, 1.0);
    const auto g = build_grid(m, 8, 8, 1e-2);
    const auto quad = build_quadrature(m, 16);
    auto v = make_table(g, 1, [](int, double, double lam) { return lam; });
    CHECK(apply_L(v, m, quad, Utility::linear(), 0, 1.0, 0.0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("apply_L matches a Monte Carlo one-step average") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 32, 32, 1e-3);
    const auto quad = build_quadrature(m, 256);
    const auto u = Utility::log1p();
    auto v = make_table(g, 2, [&](int, double w, double lam) {
        return u.eval(0.5 * w * m.lambda_max() + lam); // smooth member of the bracket
    });

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const long n_samples = 1000000;
    for (const auto& [i, a, w, lam] :
         {std::tuple{0, 0, 1.0, 0.0}, std::tuple{1, 1, 0.6, 0.8}, std::tuple{0, 1, 0.3, 1.5}}) {
        std::vector<double> draws(n_samples);
        for (long k = 0; k < n_samples; ++k) {
            // direct kernel sampling, independent of the quadrature route
            double uj = unif(rng), cum = 0;
            int j = 0;
            for (int jj = 0; jj < m.num_states(); ++jj) {
                cum += m.transition[i][a][jj];
                if (uj <= cum) {
                    j = jj;
                    break;
                }
            }
            const double s =
                m.sojourn[i][a][j].quantile(std::clamp(unif(rng), 1e-12, 1.0 - 1e-12));
            const double e = std::exp(-m.alpha * s);
            draws[k] = interpolate(v, j, w * e, lam + (m.cost[i][a] / m.alpha) * w * (1 - e));
        }
        double mean = 0;
        for (double d : draws) mean += d;
        mean /= n_samples;
        double var = 0;
        for (double d : draws) var += (d - mean) * (d - mean);
        const double se = std::sqrt(var / (n_samples - 1) / n_samples);
        const double quad_value = apply_L(v, m, quad, u, i, w, lam, a);
        CHECK(std::abs(quad_value - mean) <= 3 * se + 1e-5);
    }
}

TEST_CASE("policy operator maps the bracket into itself") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 12, 12, 1e-3);
    const auto quad = build_quadrature(m, 24);
    const auto u = Utility::exponential(1.0);
    const auto f = random_policy(g, m, 99);
    auto lower = make_table(g, 2, [&](int, double, double lam) { return u.eval(lam); });
    auto upper = make_table(g, 2, [&](int, double w, double lam) {
        return u.eval(w * m.lambda_max() + lam);
    });
    const auto t_lower = apply_Tf(lower, m, quad, u, f);
    const auto t_upper = apply_Tf(upper, m, quad, u, f);
    for (std::size_t k = 0; k < lower.values.size(); ++k) {
        CHECK(t_lower.values[k] >= lower.values[k] - 1e-12); // costs only add
        CHECK(t_upper.values[k] <= upper.values[k] + 1e-12); // T vbar <= vbar
    }
    CHECK(bracketing_violation(t_lower, u, m) <= 1e-12);
    CHECK(bracketing_violation(t_upper, u, m) <= 1e-12);
}

TEST_CASE("constant cost: iterating the policy operator approaches U(c/alpha)") {
    const auto m = test::const_cost_model(1.0, 0.5);
    const auto g = build_grid(m, 48, 48, 1e-3);
    const auto quad = build_quadrature(m, 48);
    const auto f = constant_policy(g, m, {0, 0});
    auto v = make_table(g, 2, [](int, double, double lam) { return lam; });
    double prev = v.at(0, 0, 0);
    for (int n = 0; n < 60; ++n) {
        v = apply_Tf(v, m, quad, Utility::linear(), f);
        CHECK(v.at(0, 0, 0) >= prev - 1e-12); // monotone climb at the origin
        prev = v.at(0, 0, 0);
    }
    CHECK(v.at(0, 0, 0) == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("apply_T equals apply_Tf when every action set is a singleton") {
    const auto m = test::const_cost_model(0.8, 0.5);
    const auto g = build_grid(m, 10, 10, 1e-2);
    const auto quad = build_quadrature(m, 16);
    auto v = make_table(g, 2, [](int, double w, double lam) { return lam + w; });
    const auto [tv, policy] = apply_T(v, m, quad, Utility::linear());
    const auto tf = apply_Tf(v, m, quad, Utility::linear(), constant_policy(g, m, {0, 0}));
    CHECK(tv.values == tf.values);
    for (int c : policy.choice) CHECK(c == 0);
}

TEST_CASE("cheaper action dominates under identical kernels") {
    auto m = test::load_fixture("tiny2x2.json").model;
    const auto g = build_grid(m, 10, 10, 1e-2);
    const auto quad = build_quadrature(m, 16);
    auto v = make_table(g, 2, [](int, double, double lam) { return lam; });
    const auto [tv, policy] = apply_T(v, m, quad, Utility::linear());
    for (int wi = 0; wi < g.W(); ++wi)
        for (int li = 0; li < g.L(); ++li) {
            CHECK(policy.at(0, wi, li) == 0); // cost 0.4 vs 0.9
            CHECK(policy.at(1, wi, li) == 1); // cost 0.8 vs 0.2
        }
}

TEST_CASE("argmin ties break to the lowest action index") {
    // actions 1 and 2 are identical and strictly better than action 0
    SmdpModel m;
    m.states = {"s"};
    m.actions = {{"a0", "a1", "a2"}};
    m.transition = {{{1.0}, {1.0}, {1.0}}};
    m.sojourn = {{{SojournDist::deterministic(1.0)},
                  {SojournDist::deterministic(1.0)},
                  {SojournDist::deterministic(1.0)}}};
    m.cost = {{0.9, 0.2, 0.2}};
    m.c_bar = 1.0;
    m.alpha = 1.0;
    const auto g = build_grid(m, 6, 6, 1e-2);
    const auto quad = build_quadrature(m, 4);
    auto v = make_table(g, 1, [](int, double, double lam) { return lam; });
    const auto [tv, policy] = apply_T(v, m, quad, Utility::linear());
    for (int c : policy.choice) CHECK(c == 1);
}

TEST_CASE("operators are monotone") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 10, 10, 1e-2);
    const auto quad = build_quadrature(m, 16);
    const auto f = random_policy(g, m, 7);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> bump(0.0, 0.5);
    auto v1 = make_table(g, 2, [](int, double w, double lam) { return lam + 0.3 * w; });
    auto v2 = v1;
    for (auto& x : v2.values) x += bump(rng);
    const auto t1 = apply_T(v1, m, quad, Utility::linear()).first;
    const auto t2 = apply_T(v2, m, quad, Utility::linear()).first;
    const auto tf1 = apply_Tf(v1, m, quad, Utility::linear(), f);
    const auto tf2 = apply_Tf(v2, m, quad, Utility::linear(), f);
    for (std::size_t k = 0; k < t1.values.size(); ++k) {
        CHECK(t1.values[k] <= t2.values[k] + 1e-12);
        CHECK(tf1.values[k] <= tf2.values[k] + 1e-12);
    }
}

TEST_CASE("apply_T lower-bounds apply_Tf for every policy") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 10, 10, 1e-2);
    const auto quad = build_quadrature(m, 16);
    auto v = make_table(g, 2, [](int, double w, double lam) { return lam * lam + w; });
    const auto tv = apply_T(v, m, quad, Utility::power(2.0)).first;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto tf = apply_Tf(v, m, quad, Utility::power(2.0), random_policy(g, m, seed));
        for (std::size_t k = 0; k < tv.values.size(); ++k)
            CHECK(tv.values[k] <= tf.values[k] + 1e-12);
    }
}

TEST_CASE("results are bit-identical across thread counts") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 16, 16, 1e-3);
    const auto quad = build_quadrature(m, 32);
    auto v = make_table(g, 2, [](int i, double w, double lam) { return lam + w * (i + 1); });
    const auto serial = apply_T(v, m, quad, Utility::log1p(), 1);
    const auto parallel = apply_T(v, m, quad, Utility::log1p(), 3);
    CHECK(serial.first.values == parallel.first.values);
    CHECK(serial.second.choice == parallel.second.choice);
}
