#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "persuade/learners.hpp"
#include "persuade/sim.hpp"

using namespace persuade;

namespace {

// Deterministic driver: compress the wait for a target signal and answer with
// the receiver's exact best response at that signal's posterior.
void answer_at_signal(const Instance& inst, Learner& learner, std::size_t signal,
                      TieRule tie = TieRule::recommended_then_sender) {
    const SignalingScheme& pi = learner.propose();
    Belief post = posterior_update(inst.prior, pi, signal);
    std::size_t action = best_response(post, inst.v, tie, &inst.u,
                                       pi.direct ? std::optional<std::size_t>(signal)
                                                 : std::nullopt);
    learner.observe(signal, action, std::nullopt);
}

// Sampled driver: run the full protocol until `finished` or the cap.
template <typename L>
std::size_t drive_sampled(const Instance& inst, L& learner, std::uint64_t seed,
                          std::size_t cap) {
    Rng env = derive_stream(seed, "env");
    for (std::size_t t = 1; t <= cap; ++t) {
        const SignalingScheme& pi = learner.propose();
        StepOutcome s = environment_step(inst, pi, env, TieRule::recommended_then_sender);
        learner.observe(s.signal, s.action, std::nullopt);
        if (learner.finished()) return t;
    }
    return cap + 1;
}

double true_ratio(const Instance& inst, std::size_t w1, std::size_t w2) {
    return inst.prior[w1] / inst.prior[w2];
}

}  // namespace

TEST_CASE("ratio search walks the bracket as hand-simulated") {
    Instance inst = make_example_basic();
    Margins m = compute_margins(inst);
    RatioSearchLearner learner(inst.v, inst.p0, {0, 1}, 0.1, m.G);

    CHECK(learner.bracket_high() == Catch::Approx(8.0));  // 1/(G p0)
    std::vector<double> probes;
    std::vector<std::size_t> actions;
    while (!learner.finished()) {
        probes.push_back(learner.current_probe());
        const SignalingScheme& pi = learner.propose();
        Belief post = posterior_update(inst.prior, pi, 0);
        std::size_t action = best_response(post, inst.v, TieRule::recommended_then_sender,
                                           &inst.u, std::nullopt);
        actions.push_back(action);
        learner.observe(0, action, std::nullopt);
    }
    REQUIRE(probes.size() == 8);
    CHECK(probes[0] == Catch::Approx(4.0));
    CHECK(probes[1] == Catch::Approx(2.0));
    CHECK(probes[2] == Catch::Approx(3.0));
    CHECK(actions[0] == 1);  // convict
    CHECK(actions[1] == 0);  // acquit
    CHECK(actions[2] == 1);  // convict
    CHECK(learner.rho_hat() == Catch::Approx(2.3125));
    double ratio = 0.7 / 0.3;
    CHECK(learner.rho_hat() <= ratio);
    CHECK(ratio <= learner.rho_hat() + 0.1);
}

TEST_CASE("indifference threshold sits inside the initial bracket") {
    Instance inst = make_example_basic();
    Margins m = compute_margins(inst);
    double threshold = inst.prior[0] / inst.prior[1];  // pair (innocent, guilty)
    CHECK(threshold <= 1.0 / (m.G * inst.p0));
    // probing at the right edge of the bracket always draws the second
    // state's optimal action
    RatioSearchLearner probe(inst.v, inst.p0, {0, 1}, 1e-6, m.G);
    SignalingScheme edge(2, 2, false);
    edge.at(0, 0) = 1.0 / 8.0;  // ratio pi(s0|guilty)/pi(s0|innocent) = 1/(G p0)
    edge.at(0, 1) = 7.0 / 8.0;
    edge.at(1, 0) = 1.0;
    Belief post = posterior_update(inst.prior, edge, 0);
    CHECK(best_response(post, inst.v, TieRule::sender_preferred, &inst.u) == 1);
}

TEST_CASE("an interrupted ratio search reports a partial estimate") {
    Instance inst = make_example_basic();
    Margins m = compute_margins(inst);
    RatioSearchLearner learner(inst.v, inst.p0, {0, 1}, 1e-4, m.G);
    for (int k = 0; k < 3; ++k) answer_at_signal(inst, learner, 0);
    // horizon ends here: not finished, but the bracket already gives a lower bound
    CHECK_FALSE(learner.finished());
    CHECK(learner.rho_hat() == Catch::Approx(2.0));  // bracket [2, 3] after 4, 2, 3
    CHECK(learner.rho_hat() <= 0.7 / 0.3);
}

TEST_CASE("ratio search band and duration over random two-state instances") {
    double total_periods = 0.0;
    double total_budget = 0.0;
    for (int i = 0; i < 50; ++i) {
        RandomInstanceSpec spec;
        Instance inst = make_random_instance(spec, 5000 + std::uint64_t(i));
        Margins m = compute_margins(inst);
        double eps = 0.02 + 0.2 * double(i) / 50.0;
        RatioSearchLearner learner(inst.v, inst.p0, {0, 1}, eps, m.G);
        std::size_t used = drive_sampled(inst, learner, 777 + std::uint64_t(i), 200000);
        REQUIRE(used <= 200000);
        double ratio = true_ratio(inst, 0, 1);
        REQUIRE(learner.rho_hat() <= ratio + 1e-12);
        REQUIRE(ratio <= learner.rho_hat() + eps + 1e-12);
        total_periods += double(used);
        total_budget += (1.0 / inst.p0) * std::log2(1.0 / (m.G * m.G * inst.p0 * eps));
    }
    // expected-duration budget with 2x sampling slack
    CHECK(total_periods <= 2.0 * total_budget);
}

TEST_CASE("pair ratio estimation") {
    SECTION("distinguishable pairs delegate to the single search") {
        Instance inst = make_example_basic();
        Margins m = compute_margins(inst);
        AnyPairRatioLearner pair_learner(inst.v, inst.p0, {1, 0}, 0.05, m);
        RatioSearchLearner solo(inst.v, inst.p0, {1, 0}, 0.05, m.G);
        std::size_t used = drive_sampled(inst, pair_learner, 31, 100000);
        REQUIRE(used <= 100000);
        drive_sampled(inst, solo, 31, 100000);
        CHECK(pair_learner.rho_hat() == Catch::Approx(solo.rho_hat()).margin(1e-12));
    }

    SECTION("indistinguishable pairs are routed through an anchor state") {
        int done = 0;
        std::uint64_t seed = 0;
        while (done < 50) {
            RandomInstanceSpec spec;
            spec.n_states = 3;
            spec.n_actions = 2;
            Instance inst = make_random_instance(spec, 600 + seed);
            ++seed;
            Margins m = compute_margins(inst);
            // find a pair sharing an optimal action
            std::optional<std::pair<std::size_t, std::size_t>> same;
            for (std::size_t i = 0; i < 3 && !same; ++i)
                for (std::size_t j = i + 1; j < 3; ++j)
                    if (m.optimal_action[i] == m.optimal_action[j]) {
                        same = {{i, j}};
                        break;
                    }
            if (!same) continue;
            double eps = inst.p0 / 2.0;  // precondition boundary is accepted
            AnyPairRatioLearner learner(inst.v, inst.p0, *same, eps, m);
            std::size_t used = drive_sampled(inst, learner, 900 + seed, 400000);
            REQUIRE(used <= 400000);
            double ratio = true_ratio(inst, same->first, same->second);
            double band = 2.0 * eps / (inst.p0 * inst.p0);
            REQUIRE(std::abs(learner.rho_hat() - ratio) <= band + 1e-9);
            ++done;
        }
    }

    SECTION("accuracy beyond p0/2 is rejected") {
        Instance inst = make_example_basic();
        Margins m = compute_margins(inst);
        CHECK_THROWS_AS(AnyPairRatioLearner(inst.v, inst.p0, {0, 1}, inst.p0, m), Error);
    }
}

TEST_CASE("learn-then-robustify explores, reconstructs the prior, and exploits") {
    Instance inst = make_example_basic();
    std::size_t T = 10000;
    LearnThenRobustifyLearner learner(inst.u, inst.v, inst.p0, T);
    EpisodeTrace trace = run_episode(inst, learner, T, 2024, {});

    REQUIRE(learner.exploiting());
    double eps = learner.accuracy();
    CHECK(eps == Catch::Approx(std::pow(0.25, 5) * 1.0 / (42.0 * 2.0 * double(T))));
    const Belief& mu_hat = learner.estimated_prior();
    double band = 6.0 * 2.0 * eps / std::pow(inst.p0, 3);
    REQUIRE(l1_distance(mu_hat, inst.prior) <= band);
    // ratio against the reference state is within the pairwise band
    CHECK(mu_hat[1] / mu_hat[0] ==
          Catch::Approx(3.0 / 7.0).margin(2.0 * eps / (0.25 * 0.25)));

    Margins m = compute_margins(inst);
    double bound = ratio_learning_regret_bound(2, inst.p0, m.G, m.D, T);
    CHECK(trace.cumulative.back() <= bound);
    CHECK(learner.done().has_value());
}

TEST_CASE("learn-then-robustify on a shared-optimum instance has zero regret") {
    Instance inst;
    inst.state_count = 2;
    inst.action_count = 2;
    inst.prior = Belief{0.6, 0.4};
    inst.p0 = 0.4;
    inst.u = Matrix(2, 2);
    inst.v = Matrix(2, 2);
    inst.v(0, 0) = 0.9;
    inst.v(0, 1) = 0.8;
    inst.v(1, 0) = 0.1;
    inst.v(1, 1) = 0.2;
    inst.u(1, 0) = 1.0;
    inst.u(1, 1) = 1.0;
    LearnThenRobustifyLearner learner(inst.u, inst.v, inst.p0, 500);
    CHECK(learner.degenerate_no_pair());
    EpisodeTrace trace = run_episode(inst, learner, 500, 7, {});
    CHECK(std::abs(trace.cumulative.back()) <= 1e-9);
}

TEST_CASE("persuasiveness probe on the canonical instance") {
    Instance inst = make_example_basic();
    BinaryOrdering ord = order_states_binary(inst.u, inst.v);

    auto probe_verdict = [&](double m_val) {
        CheckPersLearner learner(scheme_from_strength(m_val, ord));
        while (!learner.resolved()) answer_at_signal(inst, learner, 1);
        return learner.verdict();
    };
    CHECK(probe_verdict(1.0));         // full revelation persuades
    CHECK_FALSE(probe_verdict(2.0));   // no information does not
    CHECK(probe_verdict(10.0 / 7.0));  // binding boundary accepted via recommendation
}

TEST_CASE("persuasiveness probe regret stays within its ceiling") {
    Instance inst = make_example_basic();
    BinaryOrdering ord = order_states_binary(inst.u, inst.v);
    BinaryOptimum opt = optimal_scheme_binary(inst.prior, inst.u, inst.v);
    double u_star = opt.value;

    Rng pick(55);
    std::vector<double> diffs;
    for (int call = 0; call < 200; ++call) {
        double m_val = 0.25 + 1.75 * pick.uniform01();
        SignalingScheme pi = scheme_from_strength(m_val, ord);
        double per_period = u_star - sender_utility(inst, pi);
        CheckPersLearner learner(pi);
        Rng env = derive_stream(4000 + std::uint64_t(call), "env");
        std::size_t used = 0;
        while (!learner.resolved() && used < 100000) {
            StepOutcome s = environment_step(inst, learner.propose(), env,
                                             TieRule::recommended_then_sender);
            learner.observe(s.signal, s.action, std::nullopt);
            ++used;
        }
        REQUIRE(learner.resolved());
        double regret = double(learner.periods_used()) * per_period;
        double ceiling = (m_val <= opt.m_star)
                             ? (opt.m_star - m_val) / (inst.p0 * m_val)
                             : opt.m_star / (inst.p0 * m_val);
        diffs.push_back(regret - ceiling);
    }
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= double(diffs.size());
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    double se = std::sqrt(var / double(diffs.size())) / std::sqrt(double(diffs.size()));
    CHECK(mean <= 3.0 * se);
}

TEST_CASE("strength search follows the hand-simulated probe sequence") {
    Instance inst = make_example_basic();
    std::size_t T = 100000;
    StrengthSearchLearner learner(inst.u, inst.v, T);

    std::vector<double> probes;
    probes.push_back(learner.current_probe_strength());
    for (int k = 0; k < 4; ++k) {
        answer_at_signal(inst, learner, 1);
        probes.push_back(learner.current_probe_strength());
    }
    REQUIRE(probes.size() == 5);
    CHECK(probes[0] == Catch::Approx(2.0));
    CHECK(probes[1] == Catch::Approx(1.0));
    CHECK(probes[2] == Catch::Approx(1.5));
    CHECK(probes[3] == Catch::Approx(1.125));
    CHECK(probes[4] == Catch::Approx(1.25));
}

TEST_CASE("strength search brackets the optimum") {
    for (int i = 0; i < 25; ++i) {
        RandomInstanceSpec spec;
        spec.binary = true;
        spec.n_states = 2 + std::size_t(i % 3);
        Instance inst = make_random_instance(spec, 2200 + std::uint64_t(i));
        BinaryOptimum opt = optimal_scheme_binary(inst.prior, inst.u, inst.v);
        std::size_t T = 2000;
        StrengthSearchLearner learner(inst.u, inst.v, T);
        run_episode(inst, learner, T, 100 + std::uint64_t(i), {});
        // the coarse phase always brackets the optimum within a factor two
        if (learner.phase1_exit_strength() > 0.0) {
            REQUIRE(learner.phase1_exit_strength() <= opt.m_star + 1e-9);
            REQUIRE(opt.m_star < 2.0 * learner.phase1_exit_strength() + 1e-9);
        }
        if (learner.exploiting()) {
            REQUIRE(learner.bracket_left() <= opt.m_star + 1e-9);
            REQUIRE(opt.m_star <= learner.bracket_right() + 1e-9);
            REQUIRE(learner.bracket_right() - learner.bracket_left() <=
                    1.0 / double(T) + 1e-12);
        }
    }
}

TEST_CASE("empirical baseline") {
    Instance inst = make_example_basic();
    std::size_t T = 2000;

    SECTION("requires state feedback") {
        BaselineEmpiricalLearner learner(inst.u, inst.v, inst.p0, T);
        CHECK_THROWS_AS(run_episode(inst, learner, 10, 1, SimOptions{}), IncompatibleLearner);
    }

    SECTION("starts uniform with the clamped radius") {
        BaselineEmpiricalLearner learner(inst.u, inst.v, inst.p0, T);
        learner.propose();
        Margins m = compute_margins(inst);
        CHECK(learner.current_radius() == Catch::Approx(inst.p0 * inst.p0 * m.D / 2.0));
        CHECK(learner.estimate()[0] == Catch::Approx(0.5));
    }

    SECTION("runs and tracks the empirical distribution") {
        BaselineEmpiricalLearner learner(inst.u, inst.v, inst.p0, T);
        SimOptions opts;
        opts.reveal_states = true;
        EpisodeTrace trace = run_episode(inst, learner, T, 99, opts);
        CHECK(l1_distance(learner.estimate(), inst.prior) < 0.15);
        CHECK(trace.cumulative.back() > 0.0);
    }

    SECTION("with the estimate frozen at the truth, regret shrinks with the radius") {
        Margins m = compute_margins(inst);
        auto [pi_star, u_star] = optimal_scheme_general(inst.prior, inst.u, inst.v);
        for (double eps : {1e-2, 1e-3, 1e-5}) {
            RobustificationParams params{eps, inst.p0, m.D, m.eta};
            SignalingScheme tilted = robustify(inst.prior, pi_star, params, inst.u, inst.v);
            double regret = u_star - sender_utility(inst, tilted);
            CHECK(regret <= 14.0 * eps / (inst.p0 * inst.p0 * m.D) + 1e-9);
        }
    }
}
