#include "smdp/simulate.hpp"

#include "smdp/solver_infinite.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace smdp;

namespace {

std::vector<PolicyTable> only_policy(const SmdpModel& m, const AugGrid& g) {
    return {constant_policy(g, m, std::vector<int>(m.num_states(), 0))};
}

} // namespace

TEST_CASE("deterministic sojourns produce arithmetic jump times") {
    const auto m = test::single_state_model(0.7, 1.0, 1.0);
    const auto g = build_grid(m, 6, 6, 1e-2);
    const auto traj = sample_trajectory(m, only_policy(m, g), 0, 8, 42);
    for (int n = 0; n <= 8; ++n)
        CHECK(traj.jump_times[n] == doctest::Approx(0.7 * n).epsilon(1e-12));
}

TEST_CASE("zero cost accumulates nothing") {
    const auto m = test::zero_cost(test::load_fixture("maintenance.json").model);
    const auto g = build_grid(m, 6, 6, 1e-2);
    const auto traj = sample_trajectory(m, only_policy(m, g), 0, 20, 1);
    for (double c : traj.accum_cost) CHECK(c == 0.0);
}

TEST_CASE("empirical one-jump Laplace transform matches beta/(beta+alpha)") {
    auto m = test::single_state_model(1.0, 1.0, 1.0);
    m.sojourn[0][0][0] = SojournDist::exponential(2.0);
    const auto g = build_grid(m, 6, 6, 1e-2);
    const auto policy = only_policy(m, g);
    const long n = 1000000;
    std::vector<double> draws(n);
    for (long k = 0; k < n; ++k) {
        const auto traj = sample_trajectory(m, policy, 0, 1, 7, k);
        draws[k] = std::exp(-m.alpha * traj.jump_times[1]);
    }
    double mean = 0;
    for (double d : draws) mean += d;
    mean /= n;
    double var = 0;
    for (double d : draws) var += (d - mean) * (d - mean);
    const double se = std::sqrt(var / (n - 1) / n);
    CHECK(std::abs(mean - 2.0 / 3.0) <= 3 * se);
}

TEST_CASE("cost increments follow the closed form and respect the global bound") {
    const auto file = test::load_fixture("maintenance.json");
    const auto& m = file.model;
    const auto g = build_grid(m, 16, 16, 1e-3);
    const auto traj = sample_trajectory(m, only_policy(m, g), 0, 30, 17);
    for (int n = 1; n <= 30; ++n) {
        const int i = traj.states[n - 1];
        const int a = traj.actions[n - 1];
        const double t_prev = traj.jump_times[n - 1];
        const double dt = traj.jump_times[n] - t_prev;
        const double expected = std::exp(-m.alpha * t_prev) * (m.cost[i][a] / m.alpha) *
                                (1 - std::exp(-m.alpha * dt));
        CHECK(traj.accum_cost[n] - traj.accum_cost[n - 1] ==
              doctest::Approx(expected).epsilon(1e-10));
        CHECK(traj.accum_cost[n] >= traj.accum_cost[n - 1]);
        CHECK(traj.accum_cost[n] <=
              m.lambda_max() * (1 - std::exp(-m.alpha * traj.jump_times[n])) + 1e-12);
    }
}

TEST_CASE("a continuation stays inside the pathwise bracket of its prefix") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 16, 16, 1e-3);
    const auto policy = only_policy(m, g);
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto prefix = sample_trajectory(m, policy, 0, 10, 5, k);
        const auto longer = sample_trajectory(m, policy, 0, 40, 5, k);
        // same stream: the first 10 jumps agree
        for (int n = 0; n <= 10; ++n)
            CHECK(longer.jump_times[n] == prefix.jump_times[n]);
        const double lo = prefix.accum_cost.back();
        const double hi =
            lo + std::exp(-m.alpha * prefix.jump_times.back()) * m.lambda_max();
        CHECK(longer.accum_cost.back() >= lo - 1e-12);
        CHECK(longer.accum_cost.back() <= hi + 1e-12);
    }
}

TEST_CASE("trajectories are reproducible and estimates thread-count independent") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 16, 16, 1e-3);
    const auto policy = only_policy(m, g);
    const auto t1 = sample_trajectory(m, policy, 0, 12, 99, 4);
    const auto t2 = sample_trajectory(m, policy, 0, 12, 99, 4);
    CHECK(t1.jump_times == t2.jump_times);
    CHECK(t1.states == t2.states);
    const auto t3 = sample_trajectory(m, policy, 0, 12, 99, 5);
    CHECK(t1.jump_times != t3.jump_times);

    const auto u = Utility::log1p();
    const auto e1 = estimate_value(m, u, policy, 0, 15, true, 4000, 31, 1);
    const auto e3 = estimate_value(m, u, policy, 0, 15, true, 4000, 31, 3);
    CHECK(e1.mean == e3.mean);
    CHECK(e1.bracket_hi == e3.bracket_hi);
    CHECK(e1.se == e3.se);
}

TEST_CASE("zero cost estimate is exactly U(0) with zero width") {
    const auto m = test::zero_cost(test::const_cost_model(1.0, 0.5));
    const auto g = build_grid(m, 6, 6, 1e-2);
    const auto est = estimate_value(m, Utility::log1p(), only_policy(m, g), 0, 5, false, 100, 0);
    CHECK(est.mean == doctest::Approx(0.0));
    CHECK(est.se == doctest::Approx(0.0));
}

TEST_CASE("constant-cost bracket closes on U(c/alpha) as the horizon grows") {
    const auto m = test::const_cost_model(1.0, 0.5);
    const auto g = build_grid(m, 8, 8, 1e-2);
    const auto cert = certify_assumption1(m, default_certificate_delta(m));
    const double rho = contraction_base(cert, m.alpha);
    const int n_jumps = 40;
    const auto est =
        estimate_value(m, Utility::linear(), only_policy(m, g), 0, n_jumps, true, 20000, 11);
    CHECK(est.bracket_lo <= 2.0 + 1e-9);
    CHECK(est.bracket_hi >= 2.0 - 1e-9);
    CHECK(est.bracket_hi - est.bracket_lo <=
          std::pow(rho, n_jumps) * m.lambda_max() + 3 * (est.bracket_lo_se + est.bracket_hi_se));
}

TEST_CASE("jump times grow linearly: no explosion at desk scale") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 8, 8, 1e-2);
    const auto cert = certify_assumption1(m, default_certificate_delta(m));
    const auto policy = only_policy(m, g);
    double mean_rate = 0;
    const int n_traj = 500, n_jumps = 50;
    for (int k = 0; k < n_traj; ++k) {
        const auto traj = sample_trajectory(m, policy, 0, n_jumps, 123, k);
        mean_rate += traj.jump_times.back() / n_jumps;
    }
    mean_rate /= n_traj;
    CHECK(mean_rate >= cert.delta * cert.epsilon); // stochastic lower bound, in the mean
}

TEST_CASE("default truncation depth scales with the certificate") {
    const auto m = test::const_cost_model(1.0, 0.5);
    const auto cert = certify_assumption1(m, default_certificate_delta(m));
    const auto u = Utility::linear();
    const int n_tight = default_truncation_depth(u, m, cert, 1e-4);
    const int n_loose = default_truncation_depth(u, m, cert, 1e-2);
    CHECK(n_loose < n_tight);
    CHECK(error_bound(u, m, cert, n_tight, 1.0, 0.0) <= 1e-4);
    CHECK(error_bound(u, m, cert, n_tight - 1, 1.0, 0.0) > 1e-4);
}

TEST_CASE("nearest node lookup") {
    const auto m = test::const_cost_model(1.0, 0.5);
    const auto g = build_grid(m, 9, 11, 1e-2);
    for (int wi = 0; wi < g.W(); ++wi)
        for (int li = 0; li < g.L(); ++li) {
            const auto [qw, ql] = nearest_node(g, g.w_nodes[wi], g.lam_nodes[li]);
            CHECK(qw == wi);
            CHECK(ql == li);
        }
    // beyond the grid: clamps to the edges
    CHECK(nearest_node(g, 1e-5, -1.0) == std::pair<int, int>{g.W() - 1, 0});
    CHECK(nearest_node(g, 1.0, 99.0) == std::pair<int, int>{0, g.L() - 1});
}

TEST_CASE("markov policy sequences shorter than the horizon are rejected") {
    const auto m = test::load_fixture("maintenance.json").model;
    const auto g = build_grid(m, 6, 6, 1e-2);
    std::vector<PolicyTable> two(2, constant_policy(g, m, {0, 0}));
    CHECK_THROWS_AS(sample_trajectory(m, two, 0, 3, 0), std::invalid_argument);
    CHECK_NOTHROW(sample_trajectory(m, two, 0, 2, 0));
}
