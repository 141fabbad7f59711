#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "persuade/core.hpp"
#include "persuade/errors.hpp"
#include "persuade/instance.hpp"
#include "persuade/learners.hpp"
#include "persuade/optimal.hpp"
#include "persuade/rng.hpp"

// Episode runner, regret accounting, instance generators (including the two
// hard families with closed-form optima), and the brute-force grid oracle.

namespace persuade {

struct SimOptions {
    TieRule tie = TieRule::recommended_then_sender;
    bool reveal_states = false;
};

struct PeriodRecord {
    std::size_t t = 0;  // 1-based period
    std::uint64_t scheme_fp = 0;
    std::uint32_t state = 0, signal = 0, action = 0;
    double instant_regret = 0.0;
    double realized_u = 0.0;  // diagnostic; regret uses the expected utility
};

struct EpisodeTrace {
    std::vector<PeriodRecord> records;
    std::vector<double> cumulative;
    double u_star = 0.0;
};

// Benchmark optimum for an instance: the greedy route for binary-action
// instances where the receiver leans to action 0 at the prior, the LP
// otherwise. The value is what regret is measured against.
inline std::pair<SignalingScheme, double> benchmark_optimum(const Instance& inst) {
    if (inst.action_count == 2) {
        bool sender_pref = true;
        for (std::size_t w = 0; w < inst.state_count && sender_pref; ++w)
            sender_pref = inst.u(1, w) > inst.u(0, w);
        double lean0 = 0.0;
        for (std::size_t w = 0; w < inst.state_count; ++w)
            lean0 += inst.prior[w] * (inst.v(0, w) - inst.v(1, w));
        if (sender_pref && lean0 > 0.0) {
            auto opt = optimal_scheme_binary(inst.prior, inst.u, inst.v);
            return {std::move(opt.scheme), opt.value};
        }
    }
    return optimal_scheme_general(inst.prior, inst.u, inst.v);
}

struct StepOutcome {
    std::size_t state = 0, signal = 0, action = 0;
};

// One period of the protocol: sample the state and signal, resolve the
// receiver's posterior best response.
inline StepOutcome environment_step(const Instance& inst, const SignalingScheme& pi,
                                    Rng& env, TieRule tie) {
    StepOutcome out;
    out.state = env.categorical(inst.prior.probs);
    out.signal = env.categorical(std::span<const double>(
        pi.cond.data() + out.state * pi.signal_count, pi.signal_count));
    Belief post(std::vector<double>(inst.state_count, 0.0));
    double p_sig = signal_probability(inst.prior, pi, out.signal);
    if (p_sig > 1e-300) {
        for (std::size_t w = 0; w < inst.state_count; ++w)
            post[w] = inst.prior[w] * pi(w, out.signal) / p_sig;
    } else {
        // Numerically invisible signal that still realized; the receiver can
        // only attribute it to the sampled state.
        post[out.state] = 1.0;
    }
    out.action = best_response(post, inst.v, tie, &inst.u,
                               pi.direct ? std::optional<std::size_t>(out.signal)
                                         : std::nullopt);
    return out;
}

inline EpisodeTrace run_episode(const Instance& inst, Learner& learner, std::size_t T,
                                std::uint64_t seed, const SimOptions& opts = {}) {
    if (learner.state_observing() && !opts.reveal_states)
        throw IncompatibleLearner("learner requires state feedback but the environment hides it");
    Rng env = derive_stream(seed, "env");

    EpisodeTrace trace;
    trace.records.reserve(T);
    trace.cumulative.reserve(T);
    trace.u_star = benchmark_optimum(inst).second;

    std::unordered_map<std::uint64_t, double> utility_memo;
    double running = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const SignalingScheme& pi = learner.propose();
        std::uint64_t fp = fingerprint(pi);
        auto it = utility_memo.find(fp);
        double expected_u;
        if (it != utility_memo.end()) {
            expected_u = it->second;
        } else {
            expected_u = sender_utility(inst, pi, opts.tie);
            utility_memo.emplace(fp, expected_u);
        }

        StepOutcome step = environment_step(inst, pi, env, opts.tie);
        learner.observe(step.signal, step.action,
                        (opts.reveal_states && learner.state_observing())
                            ? std::optional<std::size_t>(step.state)
                            : std::nullopt);

        PeriodRecord rec;
        rec.t = t;
        rec.scheme_fp = fp;
        rec.state = std::uint32_t(step.state);
        rec.signal = std::uint32_t(step.signal);
        rec.action = std::uint32_t(step.action);
        rec.instant_regret = trace.u_star - expected_u;
        rec.realized_u = inst.u(rec.action, rec.state);
        running += rec.instant_regret;
        trace.records.push_back(rec);
        trace.cumulative.push_back(running);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

// Canonical 2x2 fixture: two states, receiver matches the state, designer
// always wants action 1.
inline Instance make_example_basic() {
    Instance inst;
    inst.state_count = 2;
    inst.action_count = 2;
    inst.prior = Belief{0.7, 0.3};
    inst.p0 = 0.25;
    inst.u = Matrix(2, 2);
    inst.v = Matrix(2, 2);
    inst.v(0, 0) = 1.0;  // acquit when innocent
    inst.v(1, 1) = 1.0;  // convict when guilty
    inst.u(1, 0) = 1.0;
    inst.u(1, 1) = 1.0;
    inst.state_names = {"innocent", "guilty"};
    inst.action_names = {"acquit", "convict"};
    return inst;
}

struct RandomInstanceSpec {
    std::size_t n_states = 2;
    std::size_t n_actions = 2;
    bool binary = false;          // enforce designer preference + prior leaning to 0
    double min_prior = 0.1;       // full-support floor
    double min_margin = 0.05;     // floors for the uniqueness gap and dominance margin
    double min_lean = 0.05;       // floor on the prior's leaning toward action 0
    std::size_t budget = 10000;
};

inline Instance make_random_instance(const RandomInstanceSpec& spec, std::uint64_t seed) {
    if (spec.n_states > 8 || spec.n_actions > 8)
        throw UnsupportedShape("random instances are capped at 8 states / 8 actions");
    if (spec.binary && spec.n_actions != 2)
        throw UnsupportedShape("binary mode needs exactly 2 actions");
    Rng rng(derive_seed(seed, "gen_random"));
    const double mix = std::min(1.0, double(spec.n_states) * spec.min_prior);
    for (std::size_t attempt = 0; attempt < spec.budget; ++attempt) {
        Instance inst;
        inst.state_count = spec.n_states;
        inst.action_count = spec.n_actions;
        inst.u = Matrix(spec.n_actions, spec.n_states);
        inst.v = Matrix(spec.n_actions, spec.n_states);
        for (double& x : inst.u.a) x = rng.uniform01();
        for (double& x : inst.v.a) x = rng.uniform01();
        if (spec.binary) {
            // construct the designer preference instead of rejecting on it
            for (std::size_t w = 0; w < spec.n_states; ++w) {
                inst.u(0, w) = 0.45 * rng.uniform01();
                inst.u(1, w) = 0.5 + 0.5 * rng.uniform01();
            }
        }
        // full support by mixing toward uniform; keeps min mass >= min_prior
        Belief dir = random_belief(rng, spec.n_states);
        inst.prior = dir;
        for (std::size_t w = 0; w < spec.n_states; ++w)
            inst.prior[w] = (1.0 - mix) * dir[w] + mix / double(spec.n_states);
        inst.p0 = inst.prior.min_mass();
        if (spec.binary) {
            double lean0 = 0.0;
            for (std::size_t w = 0; w < spec.n_states; ++w)
                lean0 += inst.prior[w] * (inst.v(0, w) - inst.v(1, w));
            if (lean0 < spec.min_lean) continue;
        }
        try {
            Margins m = compute_margins(inst);
            if (m.G < spec.min_margin || m.D < spec.min_margin) continue;
            if (!m.distinguishable_pair) continue;
        } catch (const AssumptionViolation&) {
            continue;
        }
        return inst;
    }
    throw RejectionBudgetExceeded("no admissible random instance within the attempt budget");
}

// Two-state, three-action family with a narrow belief window where the
// designer's only rewarding action is optimal for the receiver. `kappa` is
// the grid step of admissible priors; the prior is the grid point at
// `prior_index` (mass of state 1).
struct HardGeneralParams {
    double p0 = 0.1;
    double kappa = 0.0;
    std::size_t grid_size = 0;  // K; the grid has K+1 points
    double eps_v = 0.0;
    std::vector<double> grid;
};

inline HardGeneralParams hard_general_params(double kappa) {
    HardGeneralParams p;
    p.kappa = kappa;
    if (!(kappa > 0.0)) throw InvalidGrid("grid step must be positive");
    double k_real = 2.0 * p.p0 / kappa;
    std::size_t K = std::size_t(std::llround(k_real));
    if (K == 0 || std::abs(double(K) * kappa - 2.0 * p.p0) > 1e-9)
        throw InvalidGrid("grid step must divide 2*p0 evenly");
    p.grid_size = K;
    p.eps_v = 1.0 / (20.0 * double(K));
    p.grid.resize(K + 1);
    for (std::size_t i = 0; i <= K; ++i) p.grid[i] = p.p0 + double(i) * kappa;
    return p;
}

inline Instance make_hard_instance_general(double kappa, std::size_t prior_index) {
    HardGeneralParams p = hard_general_params(kappa);
    if (prior_index >= p.grid.size()) throw InvalidGrid("prior index outside the grid");
    double gamma = p.grid[prior_index];
    Instance inst;
    inst.state_count = 2;
    inst.action_count = 3;
    inst.prior = Belief{1.0 - gamma, gamma};
    inst.p0 = p.p0;
    inst.u = Matrix(3, 2);
    inst.v = Matrix(3, 2);
    inst.v(0, 0) = 1.0;                  // action a: right when state 0
    inst.v(1, 1) = 1.0;                  // action b: right when state 1
    inst.v(2, 0) = 0.5 + p.eps_v;        // action c: safe middle
    inst.v(2, 1) = 0.5 + p.eps_v;
    inst.u(2, 0) = 1.0;                  // designer rewards only c
    inst.u(2, 1) = 1.0;
    inst.action_names = {"a", "b", "c"};
    return inst;
}

inline double hard_general_optimum(double kappa, std::size_t prior_index) {
    HardGeneralParams p = hard_general_params(kappa);
    if (prior_index >= p.grid.size()) throw InvalidGrid("prior index outside the grid");
    return 2.0 * p.grid[prior_index] / (1.0 - 2.0 * p.eps_v);
}

// Two-state, binary-action family mirroring posted-price search: the receiver
// almost surely sits in the reluctant state, the designer's optimal mixing
// probability in that state is exactly v_star. The receiver matrix is stored
// shifted into [0,1]; best responses are unaffected.
inline Instance make_hard_instance_binary(std::size_t T, double v_star) {
    if (T < 2) throw ConfigError("horizon must be at least 2");
    if (v_star < 0.0 || v_star > 1.0) throw ConfigError("valuation must lie in [0,1]");
    double eps = 1.0 / (double(T) * double(T) * double(T));
    Instance inst;
    inst.state_count = 2;
    inst.action_count = 2;
    double mass1 = eps * v_star / (1.0 + eps * v_star);
    inst.prior = Belief{1.0 - mass1, mass1};
    inst.p0 = mass1;
    inst.u = Matrix(2, 2);
    inst.v = Matrix(2, 2);
    inst.u(1, 0) = 1.0;
    inst.u(1, 1) = 1.0;
    // original v: v(0,.) = 0, v(1,0) = -eps, v(1,1) = 1; stored (x+eps)/(1+eps)
    inst.v(0, 0) = eps / (1.0 + eps);
    inst.v(0, 1) = eps / (1.0 + eps);
    inst.v(1, 0) = 0.0;
    inst.v(1, 1) = 1.0;
    inst.v_map_offset = eps;
    inst.v_map_scale = 1.0 + eps;
    return inst;
}

inline double hard_binary_optimum(std::size_t T, double v_star) {
    double eps = 1.0 / (double(T) * double(T) * double(T));
    return (1.0 + eps) * v_star / (1.0 + eps * v_star);
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

// Exhaustive scan over schemes at the given grid step: all two-signal schemes
// for two-state instances, the strength family for binary-action instances.
// Sender-preferred tie-breaking gives the upper envelope.
inline double oracle_grid_optimal(const Instance& inst, double step) {
    if (!(step > 0.0 && step < 1.0)) throw Error("grid step must lie in (0,1)");
    if (inst.state_count == 2) {
        const std::size_t steps = std::size_t(std::llround(1.0 / step));
        const std::size_t n_actions = inst.action_count;
        double best = 0.0;
        Belief post(std::vector<double>(2, 0.0));
        for (std::size_t i = 0; i <= steps; ++i) {
            double x = double(i) / double(steps);  // P(signal 0 | state 0)
            for (std::size_t j = 0; j <= steps; ++j) {
                double y = double(j) / double(steps);  // P(signal 0 | state 1)
                double total = 0.0;
                for (int sig = 0; sig < 2; ++sig) {
                    double c0 = sig == 0 ? x : 1.0 - x;
                    double c1 = sig == 0 ? y : 1.0 - y;
                    double ps = inst.prior[0] * c0 + inst.prior[1] * c1;
                    if (ps <= 1e-15) continue;
                    post[0] = inst.prior[0] * c0 / ps;
                    post[1] = inst.prior[1] * c1 / ps;
                    std::size_t a = best_response(post, inst.v, TieRule::sender_preferred,
                                                  &inst.u);
                    total += inst.prior[0] * c0 * inst.u(a, 0) +
                             inst.prior[1] * c1 * inst.u(a, 1);
                    (void)n_actions;
                }
                best = std::max(best, total);
            }
        }
        return best;
    }
    if (inst.action_count == 2) {
        BinaryOrdering ord = order_states_binary(inst.u, inst.v);
        const double n = double(inst.state_count);
        const std::size_t steps = std::size_t(std::llround(n / step));
        double best = 0.0;
        for (std::size_t i = 0; i <= steps; ++i) {
            double m = n * double(i) / double(steps);
            SignalingScheme pi = scheme_from_strength(m, ord);
            best = std::max(best, sender_utility(inst, pi, TieRule::sender_preferred));
        }
        return best;
    }
    throw UnsupportedShape("grid oracle covers 2-state or binary-action instances");
}

// ---------------------------------------------------------------------------
// Closed-form regret ceilings
// ---------------------------------------------------------------------------

inline double ratio_learning_regret_bound(std::size_t n_states, double p0, double G,
                                          double D, std::size_t T) {
    double n = double(n_states);
    return (2.0 * n / p0) *
               std::log2(42.0 * n * double(T) / (G * G * std::pow(p0, 6) * D)) +
           2.0;
}

inline double strength_search_regret_bound(std::size_t n_states, double p0, std::size_t T) {
    double inner = std::log2(2.0 * double(n_states) * double(T));
    return (1.0 / p0) * (7.0 + 3.0 * std::log2(inner)) + 1.0;
}

}  // namespace persuade
