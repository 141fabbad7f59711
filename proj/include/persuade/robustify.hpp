#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "persuade/core.hpp"
#include "persuade/errors.hpp"
#include "persuade/instance.hpp"
#include "persuade/lp.hpp"

// Converts a scheme that is persuasive for an estimated prior into a direct
// scheme persuasive for every prior in an l1-ball around the estimate, at a
// bounded utility cost: tilt each recommendation's induced belief toward the
// witness belief where that action wins by margin D, add a small chance of
// full state revelation to restore Bayes plausibility, then fold the
// revelation signals back into action recommendations.

namespace persuade {

struct RobustificationParams {
    double eps = 0.0;         // l1 ball radius
    double p0 = 0.0;          // prior mass lower bound
    double D = 0.0;           // dominance margin
    std::vector<Belief> eta;  // witness belief per action

    double delta() const { return eps <= 0.0 ? 0.0 : 2.0 * eps / (p0 * D); }
};

struct Decomposition {
    double y = 0.0;
    std::vector<double> chi;  // boundary belief; all-zero when y == 0
};

// Solves mu = (1-y) xi + y chi with the smallest feasible y; chi then has a
// zero component (it sits on the simplex boundary).
inline Decomposition decompose_small_y(const Belief& mu, const Belief& xi) {
    const std::size_t n = mu.size();
    Decomposition d;
    d.chi.assign(n, 0.0);
    double y = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
        if (!(xi[w] > 0.0)) throw DecompositionInfeasible("xi must be componentwise positive");
        y = std::max(y, 1.0 - mu[w] / xi[w]);
    }
    if (y <= 0.0) return d;  // mu == xi (componentwise >=); caller scales chi by y=0
    d.y = y;
    double sum = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
        double c = (mu[w] - (1.0 - y) * xi[w]) / y;
        if (c < -kMarginTol) throw DecompositionInfeasible("negative boundary component");
        d.chi[w] = std::max(c, 0.0);
        sum += d.chi[w];
    }
    for (std::size_t w = 0; w < n; ++w) d.chi[w] /= sum;
    return d;
}

inline SignalingScheme robustify(const Belief& mu_hat, const SignalingScheme& pi_hat,
                                 const RobustificationParams& params, const Matrix& u,
                                 const Matrix& v, double tol = kMarginTol) {
    const std::size_t n_states = v.cols, n_actions = v.rows;
    if (!pi_hat.direct || pi_hat.signal_count != n_actions)
        throw NotDirect("robustification takes a direct scheme");
    if (params.eps > params.p0 * params.p0 * params.D / 2.0 + 1e-12)
        throw PreconditionEpsTooLarge("ball radius exceeds p0^2 D / 2");
    if (mu_hat.min_mass() < params.p0 - kMarginTol)
        throw PriorSupportViolated("estimate must respect the prior mass lower bound");
    {
        Instance check;
        check.state_count = n_states;
        check.action_count = n_actions;
        check.prior = mu_hat;
        check.u = u;
        check.v = v;
        check.p0 = params.p0;
        if (!is_persuasive(check, pi_hat, tol).all)
            throw NotPersuasiveInput("input scheme is not persuasive for the estimate");
    }

    const double delta = params.delta();

    // Tilted posterior per positive-probability recommendation.
    std::vector<double> p_sig(n_actions, 0.0);
    std::vector<Belief> xi_a(n_actions);
    Belief xi(std::vector<double>(n_states, 0.0));
    for (std::size_t a = 0; a < n_actions; ++a) {
        p_sig[a] = signal_probability(mu_hat, pi_hat, a);
        if (p_sig[a] <= 1e-15) {
            p_sig[a] = 0.0;
            continue;
        }
        Belief post = posterior_update(mu_hat, pi_hat, a);
        Belief mix(std::vector<double>(n_states, 0.0));
        for (std::size_t w = 0; w < n_states; ++w)
            mix[w] = (1.0 - delta) * post[w] + delta * params.eta[a][w];
        for (std::size_t w = 0; w < n_states; ++w) xi[w] += p_sig[a] * mix[w];
        xi_a[a] = std::move(mix);
    }

    Decomposition dec = decompose_small_y(mu_hat, xi);

    // Coalesced direct scheme: recommendation mass plus the revelation mass of
    // each state folded into that state's receiver-optimal action.
    SignalingScheme out(n_states, n_actions, /*direct=*/true);
    for (std::size_t w = 0; w < n_states; ++w) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            if (p_sig[a] <= 0.0) continue;
            out.at(w, a) = (1.0 - dec.y) * p_sig[a] * xi_a[a][w] / mu_hat[w];
        }
        if (dec.y > 0.0 && dec.chi[w] > 0.0) {
            Belief point = Belief::point_mass(n_states, w);
            std::size_t a_w = best_response(point, v, TieRule::sender_preferred, &u);
            out.at(w, a_w) += dec.y * dec.chi[w] / mu_hat[w];
        }
    }
    out.renormalize_rows();
    return out;
}

// Deterministic probes of the l1 ball around mu_hat: pairwise +/- eps/2
// coordinate shifts plus uniform random directions, all kept inside the
// simplex. Used by the sampled ball-persuasiveness check.
template <typename RngT>
std::vector<Belief> sample_ball(const Belief& center, double eps, std::size_t count,
                                RngT& rng) {
    const std::size_t n = center.size();
    std::vector<Belief> pts;
    pts.push_back(center);
    for (std::size_t i = 0; i < n && pts.size() < count; ++i) {
        for (std::size_t j = 0; j < n && pts.size() < count; ++j) {
            if (i == j) continue;
            Belief b = center;
            double step = std::min(eps / 2.0, std::min(center[j], 1.0 - center[i]));
            b[i] += step;
            b[j] -= step;
            pts.push_back(std::move(b));
        }
    }
    std::size_t attempts = 0;
    while (pts.size() < count && attempts++ < 100 * count) {
        Belief dir = random_belief(rng, n);
        double shift = 1.0 / double(n);
        double norm = 0.0;
        for (std::size_t w = 0; w < n; ++w) norm += std::abs(dir[w] - shift);
        double scale = (norm > 0.0) ? rng.uniform01() * eps / norm : 0.0;
        Belief b = center;
        bool ok = true;
        for (std::size_t w = 0; w < n; ++w) {
            b[w] += scale * (dir[w] - shift);
            if (b[w] < 0.0) ok = false;
        }
        if (ok) pts.push_back(std::move(b));
    }
    return pts;
}

// Exact check that `pi` stays persuasive over the whole ball: for each action
// pair, minimize the persuasiveness margin over {mu in simplex, ||mu -
// center||_1 <= eps}. Returns the worst margin found.
inline double ball_persuasiveness_margin_exact(const Belief& center, double eps,
                                               const SignalingScheme& pi, const Matrix& v) {
    const std::size_t n = v.cols, m = v.rows;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t a2 = 0; a2 < m; ++a2) {
            if (a2 == a) continue;
            // Variables: d+ (n), d- (n); mu = center + d+ - d-.
            lp::LinearProgram prog(2 * n);
            for (std::size_t w = 0; w < n; ++w) {
                double c = pi(w, a) * (v(a, w) - v(a2, w));
                prog.objective[w] = -c;      // minimize => maximize negation
                prog.objective[n + w] = c;
            }
            std::vector<double> ball_row(2 * n, 1.0);
            prog.add_constraint(std::move(ball_row), lp::Relation::le, eps);
            std::vector<double> mass_row(2 * n, 0.0);
            for (std::size_t w = 0; w < n; ++w) {
                mass_row[w] = 1.0;
                mass_row[n + w] = -1.0;
            }
            prog.add_constraint(std::move(mass_row), lp::Relation::eq, 0.0);
            for (std::size_t w = 0; w < n; ++w) {
                std::vector<double> nn(2 * n, 0.0);
                nn[w] = -1.0;
                nn[n + w] = 1.0;
                prog.add_constraint(std::move(nn), lp::Relation::le, center[w]);
            }
            auto sol = lp::solve(prog);
            if (sol.status != lp::LpStatus::optimal)
                throw NumericalFailure("ball margin LP did not solve");
            double base = 0.0;
            for (std::size_t w = 0; w < n; ++w)
                base += center[w] * pi(w, a) * (v(a, w) - v(a2, w));
            worst = std::min(worst, base - sol.objective_value);
        }
    }
    return worst;
}

}  // namespace persuade
