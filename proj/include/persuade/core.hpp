#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "persuade/belief.hpp"
#include "persuade/errors.hpp"
#include "persuade/instance.hpp"
#include "persuade/lp.hpp"

// Single-period primitives: Bayes updates, receiver best responses, designer
// utility, persuasiveness checks, and the derived margin constants.

namespace persuade {

// Absolute tolerance for persuasiveness-constraint checks.
inline constexpr double kMarginTol = 1e-9;
// Indifference window of the simulated receiver: wide enough to absorb the
// fp residue of binding constraints, narrow enough not to perturb searches.
inline constexpr double kTieTol = 1e-12;

inline double signal_probability(const Belief& prior, const SignalingScheme& pi,
                                 std::size_t signal) {
    double p = 0.0;
    for (std::size_t w = 0; w < prior.size(); ++w) p += prior[w] * pi(w, signal);
    return p;
}

inline Belief posterior_update(const Belief& prior, const SignalingScheme& pi,
                               std::size_t signal) {
    double p = signal_probability(prior, pi, signal);
    if (p <= 1e-15)
        throw ZeroProbabilitySignal("posterior undefined for a zero-probability signal");
    Belief post(std::vector<double>(prior.size(), 0.0));
    for (std::size_t w = 0; w < prior.size(); ++w)
        post[w] = prior[w] * pi(w, signal) / p;
    return post;
}

// Receiver-optimal action at `belief`. The argmax set is taken with the
// indifference window kTieTol; ties resolve per TieRule
// (recommended_then_sender keeps a recommendation whenever it sits in the
// argmax set).
inline std::size_t best_response(const Belief& belief, const Matrix& v, TieRule tie,
                                 const Matrix* u_for_ties = nullptr,
                                 std::optional<std::size_t> recommended = std::nullopt) {
    const std::size_t n_actions = v.rows;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> ev(n_actions, 0.0);
    for (std::size_t a = 0; a < n_actions; ++a) {
        double e = 0.0;
        for (std::size_t w = 0; w < v.cols; ++w) e += belief[w] * v(a, w);
        ev[a] = e;
        best = std::max(best, e);
    }
    auto in_argmax = [&](std::size_t a) { return ev[a] >= best - kTieTol; };

    if (tie == TieRule::recommended_then_sender && recommended && in_argmax(*recommended))
        return *recommended;
    if (tie == TieRule::lowest_index) {
        for (std::size_t a = 0; a < n_actions; ++a)
            if (in_argmax(a)) return a;
    }
    // sender_preferred (and the fallback of recommended_then_sender)
    std::size_t pick = 0;
    double pick_u = -1.0;
    bool found = false;
    for (std::size_t a = 0; a < n_actions; ++a) {
        if (!in_argmax(a)) continue;
        double su = 0.0;
        if (u_for_ties)
            for (std::size_t w = 0; w < v.cols; ++w) su += belief[w] * (*u_for_ties)(a, w);
        if (!found || su > pick_u + kTieTol) {
            pick = a;
            pick_u = su;
            found = true;
        }
    }
    return pick;
}

// Designer's expected utility of `pi` when the receiver holds the instance
// prior. Zero-probability signals contribute nothing.
inline double sender_utility(const Instance& inst, const SignalingScheme& pi,
                             TieRule tie = TieRule::recommended_then_sender) {
    double total = 0.0;
    for (std::size_t s = 0; s < pi.signal_count; ++s) {
        double ps = signal_probability(inst.prior, pi, s);
        if (ps <= 1e-15) continue;
        Belief post(std::vector<double>(inst.state_count, 0.0));
        for (std::size_t w = 0; w < inst.state_count; ++w)
            post[w] = inst.prior[w] * pi(w, s) / ps;
        std::size_t a = best_response(post, inst.v, tie, &inst.u,
                                      pi.direct ? std::optional<std::size_t>(s)
                                                : std::nullopt);
        for (std::size_t w = 0; w < inst.state_count; ++w)
            total += inst.prior[w] * pi(w, s) * inst.u(a, w);
    }
    return total;
}

struct PersuasivenessReport {
    std::vector<bool> action_ok;     // per recommended action
    std::vector<double> min_margin;  // most violated constraint per action
    bool all = true;
};

// Checks, for a direct scheme, that each recommendation is optimal for the
// receiver: sum_w mu(w) pi(a|w) [v(a,w) - v(a',w)] >= -tol for every rival a'.
inline PersuasivenessReport is_persuasive(const Instance& inst, const SignalingScheme& pi,
                                          double tol = kMarginTol) {
    if (!pi.direct || pi.signal_count != inst.action_count)
        throw NotDirect("persuasiveness is defined for direct schemes");
    PersuasivenessReport rep;
    rep.action_ok.assign(inst.action_count, true);
    rep.min_margin.assign(inst.action_count, 0.0);
    for (std::size_t a = 0; a < inst.action_count; ++a) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t a2 = 0; a2 < inst.action_count; ++a2) {
            if (a2 == a) continue;
            double g = 0.0;
            for (std::size_t w = 0; w < inst.state_count; ++w)
                g += inst.prior[w] * pi(w, a) * (inst.v(a, w) - inst.v(a2, w));
            worst = std::min(worst, g);
        }
        if (inst.action_count == 1) worst = 0.0;
        rep.min_margin[a] = worst;
        rep.action_ok[a] = worst >= -tol;
        rep.all = rep.all && rep.action_ok[a];
    }
    return rep;
}

// Derived margin constants of the public part (u, v, p0):
//  - optimal_action[w] and the uniqueness gap; G is half the raw minimum gap
//    so strict-inequality arguments keep slack,
//  - D and per-action witness beliefs eta_a via one small LP per action,
//  - the first state pair (in index order) with distinct optimal actions.
struct Margins {
    double G = 0.0;
    std::vector<std::size_t> optimal_action;
    double D = 0.0;
    std::vector<Belief> eta;
    std::optional<std::pair<std::size_t, std::size_t>> distinguishable_pair;
};

// The u and p0 arguments complete the public part of an instance; the margin
// constants themselves depend only on the receiver matrix.
inline Margins compute_margins(const Matrix& /*u*/, const Matrix& v, double /*p0*/) {
    const std::size_t n_actions = v.rows, n_states = v.cols;
    Margins m;
    m.optimal_action.assign(n_states, 0);
    double raw_gap = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < n_states; ++w) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < n_actions; ++a)
            if (v(a, w) > v(best, w)) best = a;
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n_actions; ++a)
            if (a != best) gap = std::min(gap, v(best, w) - v(a, w));
        if (n_actions == 1) gap = 1.0;
        if (gap <= 0.0)
            throw AssumptionGViolated("state has a non-unique receiver-optimal action");
        m.optimal_action[w] = best;
        raw_gap = std::min(raw_gap, gap);
    }
    m.G = raw_gap / 2.0;

    // Per-action LP: max t s.t. sum_w eta(w) [v(a,w)-v(a',w)] >= t for all
    // rivals, eta on the simplex. Variables: eta (n_states), then t (free).
    m.eta.resize(n_actions);
    m.D = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n_actions; ++a) {
        lp::LinearProgram prog(n_states + 1);
        prog.lower[n_states] = -lp::kInf;  // t may be negative when dominated
        prog.objective[n_states] = 1.0;
        for (std::size_t a2 = 0; a2 < n_actions; ++a2) {
            if (a2 == a) continue;
            std::vector<double> row(n_states + 1, 0.0);
            for (std::size_t w = 0; w < n_states; ++w) row[w] = v(a, w) - v(a2, w);
            row[n_states] = -1.0;
            prog.add_constraint(std::move(row), lp::Relation::ge, 0.0);
        }
        std::vector<double> simplex_row(n_states + 1, 0.0);
        for (std::size_t w = 0; w < n_states; ++w) simplex_row[w] = 1.0;
        prog.add_constraint(std::move(simplex_row), lp::Relation::eq, 1.0);
        auto sol = lp::solve(prog);
        if (sol.status != lp::LpStatus::optimal)
            throw NumericalFailure("margin LP did not solve");
        // Exact sign test: duplicated rows cancel to exact zeros, while a
        // genuinely undominated action keeps a strictly positive optimum
        // however small (the hard binary family sits at ~1e-15).
        if (n_actions > 1 && sol.objective_value <= 0.0)
            throw AssumptionDViolated("receiver has a weakly dominated action");
        Belief eta(std::vector<double>(sol.x.begin(), sol.x.begin() + n_states));
        renormalize(eta);
        m.eta[a] = std::move(eta);
        double t_a = (n_actions > 1) ? sol.objective_value : 1.0;
        m.D = std::min(m.D, t_a);
    }

    for (std::size_t i = 0; i + 1 < n_states && !m.distinguishable_pair; ++i)
        for (std::size_t j = i + 1; j < n_states; ++j)
            if (m.optimal_action[i] != m.optimal_action[j]) {
                m.distinguishable_pair = {i, j};
                break;
            }
    return m;
}

inline Margins compute_margins(const Instance& inst) {
    return compute_margins(inst.u, inst.v, inst.p0);
}

}  // namespace persuade
