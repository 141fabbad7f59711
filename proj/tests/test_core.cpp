#include <catch2/catch_amalgamated.hpp>

#include "persuade/core.hpp"
#include "persuade/rng.hpp"
#include "persuade/sim.hpp"

#include "oracles.hpp"

using namespace persuade;

namespace {

Instance canonical() { return make_example_basic(); }

SignalingScheme direct_from_rows(std::vector<std::vector<double>> rows) {
    SignalingScheme pi(rows.size(), rows[0].size(), /*direct=*/true);
    for (std::size_t w = 0; w < rows.size(); ++w)
        for (std::size_t s = 0; s < rows[w].size(); ++s) pi.at(w, s) = rows[w][s];
    return pi;
}

}  // namespace

TEST_CASE("posterior update") {
    Belief prior{0.7, 0.3};

    SECTION("uninformative scheme leaves the prior unchanged") {
        auto pi = SignalingScheme::uninformative(2, 2, false);
        Belief post = posterior_update(prior, pi, 0);
        CHECK(post[0] == Catch::Approx(0.7));
        CHECK(post[1] == Catch::Approx(0.3));
    }

    SECTION("full revelation yields point masses") {
        auto pi = SignalingScheme::full_revelation(2);
        Belief post = posterior_update(prior, pi, 1);
        CHECK(post[0] == Catch::Approx(0.0));
        CHECK(post[1] == Catch::Approx(1.0));
    }

    SECTION("asymmetric scheme, checked by hand") {
        // pi(s1|state1)=1, pi(s1|state0)=3/7 -> posterior (0.5, 0.5) at s1
        SignalingScheme pi(2, 2, false);
        pi.at(0, 1) = 3.0 / 7.0;
        pi.at(0, 0) = 4.0 / 7.0;
        pi.at(1, 1) = 1.0;
        Belief post = posterior_update(prior, pi, 1);
        CHECK(post[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(post[1] == Catch::Approx(0.5).margin(1e-12));
        Belief byhand = oracles::hand_bayes(prior, pi, 1);
        CHECK(post[0] == Catch::Approx(byhand[0]).margin(1e-15));
    }

    SECTION("zero-probability signal is rejected") {
        SignalingScheme pi(2, 2, false);
        pi.at(0, 0) = 1.0;
        pi.at(1, 0) = 1.0;
        CHECK_THROWS_AS(posterior_update(prior, pi, 1), ZeroProbabilitySignal);
    }
}

TEST_CASE("posterior properties on random inputs") {
    Rng rng(20240811);
    int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        std::size_t n = 2 + rng.uniform_index(3);
        std::size_t m = 2 + rng.uniform_index(3);
        Belief prior = random_belief(rng, n);
        if (prior.min_mass() < 1e-4) continue;
        SignalingScheme pi(n, m, false);
        for (std::size_t w = 0; w < n; ++w) {
            Belief row = random_belief(rng, m);
            for (std::size_t s = 0; s < m; ++s) pi.at(w, s) = row[s];
        }
        // validity + Bayes plausibility
        Belief avg(std::vector<double>(n, 0.0));
        for (std::size_t s = 0; s < m; ++s) {
            double ps = signal_probability(prior, pi, s);
            if (ps <= 1e-15) continue;
            Belief post = posterior_update(prior, pi, s);
            REQUIRE(post.valid());
            for (std::size_t w = 0; w < n; ++w) avg[w] += ps * post[w];
        }
        for (std::size_t w = 0; w < n; ++w)
            REQUIRE(avg[w] == Catch::Approx(prior[w]).margin(1e-9));
    }
}

TEST_CASE("posterior contraction bound") {
    // || mu_s - mu'_s ||_1 <= (2/p0) || mu - mu' ||_1 whenever min(mu) >= p0
    Rng rng(7);
    int checked = 0;
    while (checked < 10000) {
        std::size_t n = 2 + rng.uniform_index(3);
        Belief mu = random_belief(rng, n);
        double p0 = mu.min_mass();
        if (p0 < 0.02) continue;
        Belief mu2 = random_belief(rng, n);
        SignalingScheme pi(n, 3, false);
        for (std::size_t w = 0; w < n; ++w) {
            Belief row = random_belief(rng, 3);
            for (std::size_t s = 0; s < 3; ++s) pi.at(w, s) = row[s];
        }
        for (std::size_t s = 0; s < 3; ++s) {
            if (signal_probability(mu, pi, s) <= 1e-12) continue;
            if (signal_probability(mu2, pi, s) <= 1e-12) continue;
            Belief a = posterior_update(mu, pi, s);
            Belief b = posterior_update(mu2, pi, s);
            REQUIRE(l1_distance(a, b) <= (2.0 / p0) * l1_distance(mu, mu2) + 1e-9);
        }
        ++checked;
    }
}

TEST_CASE("best response") {
    Instance inst = canonical();

    SECTION("point mass picks the dominant action") {
        CHECK(best_response(Belief{0.0, 1.0}, inst.v, TieRule::lowest_index) == 1);
    }
    SECTION("symmetric tie resolved sender-preferred") {
        CHECK(best_response(Belief{0.5, 0.5}, inst.v, TieRule::sender_preferred, &inst.u) == 1);
    }
    SECTION("prior favors acquittal") {
        CHECK(best_response(Belief{0.7, 0.3}, inst.v, TieRule::sender_preferred, &inst.u) == 0);
    }
    SECTION("recommendation kept only when tied-optimal") {
        CHECK(best_response(Belief{0.5, 0.5}, inst.v, TieRule::recommended_then_sender,
                            &inst.u, 0) == 0);
        CHECK(best_response(Belief{0.7, 0.3}, inst.v, TieRule::recommended_then_sender,
                            &inst.u, 1) == 0);
    }
}

TEST_CASE("best response is invariant to positive affine maps of v") {
    Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        std::size_t n = 2 + rng.uniform_index(3);
        std::size_t m = 2 + rng.uniform_index(4);
        Matrix v(m, n);
        for (double& x : v.a) x = rng.uniform01();
        Belief b = random_belief(rng, n);
        double alpha = 0.1 + 2.0 * rng.uniform01();
        double beta = rng.uniform(-1.0, 1.0);
        Matrix v2 = v;
        for (double& x : v2.a) x = alpha * x + beta;
        std::size_t a1 = best_response(b, v, TieRule::lowest_index);
        std::size_t a2 = best_response(b, v2, TieRule::lowest_index);
        // scaling shrinks/extends the tolerance window; compare exact argmax
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t w = 0; w < n; ++w) {
            e1 += b[w] * v(a1, w);
            e2 += b[w] * v(a2, w);
        }
        REQUIRE(e1 == Catch::Approx(e2).margin(1e-7));
    }
}

TEST_CASE("sender utility on the canonical instance") {
    Instance inst = canonical();
    SECTION("no information earns nothing") {
        auto pi = SignalingScheme::uninformative(2, 2, true);
        CHECK(sender_utility(inst, pi) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("full revelation converts the guilty mass") {
        auto pi = direct_from_rows({{1.0, 0.0}, {0.0, 1.0}});
        CHECK(sender_utility(inst, pi) == Catch::Approx(0.3).margin(1e-12));
    }
    SECTION("optimal scheme reaches 0.6") {
        auto pi = direct_from_rows({{4.0 / 7.0, 3.0 / 7.0}, {0.0, 1.0}});
        CHECK(sender_utility(inst, pi) == Catch::Approx(0.6).margin(1e-9));
    }
}

TEST_CASE("utility continuity when best responses agree") {
    Rng rng(123);
    int checked = 0;
    while (checked < 10000) {
        std::size_t n = 2 + rng.uniform_index(2);
        std::size_t m = 2 + rng.uniform_index(2);
        Instance inst;
        inst.state_count = n;
        inst.action_count = m;
        inst.u = Matrix(m, n);
        inst.v = Matrix(m, n);
        for (double& x : inst.u.a) x = rng.uniform01();
        for (double& x : inst.v.a) x = rng.uniform01();
        Belief mu1 = random_belief(rng, n);
        // nearby second prior so responses usually coincide
        Belief mu2 = mu1;
        for (std::size_t w = 0; w < n; ++w)
            mu2[w] = std::max(1e-6, mu1[w] + rng.uniform(-0.01, 0.01));
        renormalize(mu2);
        SignalingScheme pi(n, m, false);
        for (std::size_t w = 0; w < n; ++w) {
            Belief row = random_belief(rng, m);
            for (std::size_t s = 0; s < m; ++s) pi.at(w, s) = row[s];
        }
        bool same = true;
        for (std::size_t s = 0; s < m && same; ++s) {
            double p1 = signal_probability(mu1, pi, s);
            double p2 = signal_probability(mu2, pi, s);
            if (p1 <= 1e-13 || p2 <= 1e-13) {
                same = false;
                break;
            }
            std::size_t a1 = best_response(posterior_update(mu1, pi, s), inst.v,
                                           TieRule::lowest_index);
            std::size_t a2 = best_response(posterior_update(mu2, pi, s), inst.v,
                                           TieRule::lowest_index);
            same = (a1 == a2);
        }
        if (!same) continue;
        Instance i1 = inst, i2 = inst;
        i1.prior = mu1;
        i1.p0 = mu1.min_mass();
        i2.prior = mu2;
        i2.p0 = mu2.min_mass();
        double u1 = sender_utility(i1, pi, TieRule::lowest_index);
        double u2 = sender_utility(i2, pi, TieRule::lowest_index);
        REQUIRE(std::abs(u1 - u2) <= l1_distance(mu1, mu2) + 1e-9);
        ++checked;
    }
}

TEST_CASE("persuasiveness checks") {
    Instance inst = canonical();
    SECTION("optimal scheme is persuasive with a binding constraint") {
        auto pi = direct_from_rows({{4.0 / 7.0, 3.0 / 7.0}, {0.0, 1.0}});
        auto rep = is_persuasive(inst, pi, 1e-9);
        CHECK(rep.all);
        CHECK(std::abs(rep.min_margin[1]) <= 1e-12);
    }
    SECTION("always recommending conviction is not persuasive") {
        auto pi = direct_from_rows({{0.0, 1.0}, {0.0, 1.0}});
        auto rep = is_persuasive(inst, pi, 1e-9);
        CHECK_FALSE(rep.action_ok[1]);
        CHECK_FALSE(rep.all);
    }
    SECTION("revealing the state and recommending its best action is persuasive") {
        auto pi = direct_from_rows({{1.0, 0.0}, {0.0, 1.0}});
        CHECK(is_persuasive(inst, pi, 1e-9).all);
    }
    SECTION("non-direct schemes are rejected") {
        auto pi = SignalingScheme::full_revelation(2);
        CHECK_THROWS_AS(is_persuasive(inst, pi, 1e-9), NotDirect);
    }
}

TEST_CASE("margins of the canonical instance") {
    Instance inst = canonical();
    Margins m = compute_margins(inst);
    CHECK(m.G == Catch::Approx(0.5));
    CHECK(m.D == Catch::Approx(1.0));
    REQUIRE(m.distinguishable_pair.has_value());
    CHECK(m.distinguishable_pair->first == 0);
    CHECK(m.distinguishable_pair->second == 1);
    CHECK(m.optimal_action[0] == 0);
    CHECK(m.optimal_action[1] == 1);
    // LP witnesses agree with the 1-simplex grid oracle
    CHECK(m.D == Catch::Approx(oracles::dominance_grid_2state(inst.v, 1e-3)).margin(2e-3));
    CHECK(m.eta[1][1] == Catch::Approx(1.0).margin(1e-9));
    CHECK(m.eta[0][0] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("margins of the three-action hard instance peak at the middle belief") {
    Instance inst = make_hard_instance_general(0.05, 2);
    Margins m = compute_margins(inst);
    double eps_v = 1.0 / 80.0;
    CHECK(m.D == Catch::Approx(eps_v).margin(1e-9));
    // witness for the middle action sits at belief one half
    CHECK(m.eta[2][1] == Catch::Approx(0.5).margin(1e-6));
    CHECK(m.D == Catch::Approx(oracles::dominance_grid_2state(inst.v, 1e-3)).margin(2e-3));
}

TEST_CASE("margin violations are reported") {
    Instance inst = canonical();
    SECTION("duplicated action row breaks dominance") {
        // duplicate a nowhere-optimal action so uniqueness still holds
        Matrix v(4, 2), u(4, 2);
        v(0, 0) = 1.0;
        v(1, 1) = 1.0;
        v(2, 0) = v(2, 1) = 0.5;
        v(3, 0) = v(3, 1) = 0.5;
        CHECK_THROWS_AS(compute_margins(u, v, 0.25), AssumptionDViolated);
    }
    SECTION("non-unique optimal action breaks uniqueness") {
        Instance bad = inst;
        bad.v(0, 1) = 1.0;  // both actions optimal when guilty
        CHECK_THROWS_AS(compute_margins(bad), AssumptionGViolated);
    }
}

TEST_CASE("margin witnesses certify the dominance constant") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        RandomInstanceSpec spec;
        spec.n_states = 2 + rng.uniform_index(2);
        spec.n_actions = 2 + rng.uniform_index(2);
        Instance inst = make_random_instance(spec, 1000 + std::uint64_t(i));
        Margins m = compute_margins(inst);
        for (std::size_t a = 0; a < inst.action_count; ++a)
            REQUIRE(oracles::margin_at(inst.v, a, m.eta[a]) >= m.D - 1e-9);
    }
}
