#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "persuade/core.hpp"
#include "persuade/errors.hpp"
#include "persuade/instance.hpp"
#include "persuade/lp.hpp"

// Optimal signaling schemes for a known prior: the general LP over direct
// persuasive schemes, and the binary-action greedy (fractional knapsack)
// route with its strength-parameterized scheme family.

namespace persuade {

// max sum_{w,a} mu(w) pi(a|w) u(a,w)
// s.t. sum_w mu(w) pi(a|w) (v(a,w) - v(a',w)) >= 0  for all a, a' != a
//      rows of pi stochastic.
inline std::pair<SignalingScheme, double> optimal_scheme_general(const Belief& prior,
                                                                 const Matrix& u,
                                                                 const Matrix& v) {
    const std::size_t n_states = v.cols, n_actions = v.rows;
    auto var = [&](std::size_t w, std::size_t a) { return w * n_actions + a; };
    lp::LinearProgram prog(n_states * n_actions);
    for (std::size_t w = 0; w < n_states; ++w)
        for (std::size_t a = 0; a < n_actions; ++a)
            prog.objective[var(w, a)] = prior[w] * u(a, w);
    for (std::size_t a = 0; a < n_actions; ++a) {
        for (std::size_t a2 = 0; a2 < n_actions; ++a2) {
            if (a2 == a) continue;
            std::vector<double> row(prog.num_vars(), 0.0);
            for (std::size_t w = 0; w < n_states; ++w)
                row[var(w, a)] = prior[w] * (v(a, w) - v(a2, w));
            prog.add_constraint(std::move(row), lp::Relation::ge, 0.0);
        }
    }
    for (std::size_t w = 0; w < n_states; ++w) {
        std::vector<double> row(prog.num_vars(), 0.0);
        for (std::size_t a = 0; a < n_actions; ++a) row[var(w, a)] = 1.0;
        prog.add_constraint(std::move(row), lp::Relation::eq, 1.0);
    }
    auto sol = lp::solve(prog);
    if (sol.status != lp::LpStatus::optimal)
        throw NumericalFailure("optimal-scheme LP did not solve");
    SignalingScheme pi(n_states, n_actions, /*direct=*/true);
    for (std::size_t w = 0; w < n_states; ++w)
        for (std::size_t a = 0; a < n_actions; ++a) pi.at(w, a) = sol.x[var(w, a)];
    pi.renormalize_rows();
    return {std::move(pi), sol.objective_value};
}

// Binary-action state order: the states where the receiver weakly prefers
// action 1 come first (in index order), then the rest sorted by decreasing
// value-per-weight (u(1,w)-u(0,w)) / (v(0,w)-v(1,w)), ties by index.
struct BinaryOrdering {
    std::vector<std::size_t> order;
    std::size_t n_minus = 0;
};

inline BinaryOrdering order_states_binary(const Matrix& u, const Matrix& v) {
    if (u.rows != 2 || v.rows != 2) throw UnsupportedShape("binary ordering needs 2 actions");
    const std::size_t n = v.cols;
    for (std::size_t w = 0; w < n; ++w)
        if (!(u(1, w) > u(0, w)))
            throw SenderPreferenceViolated("designer must strictly prefer action 1 in every state");
    BinaryOrdering ord;
    std::vector<std::size_t> plus;
    for (std::size_t w = 0; w < n; ++w) {
        if (v(0, w) - v(1, w) <= 0.0)
            ord.order.push_back(w);
        else
            plus.push_back(w);
    }
    ord.n_minus = ord.order.size();
    auto ratio = [&](std::size_t w) {
        return (u(1, w) - u(0, w)) / (v(0, w) - v(1, w));
    };
    std::stable_sort(plus.begin(), plus.end(), [&](std::size_t x, std::size_t y) {
        return ratio(x) > ratio(y);
    });
    ord.order.insert(ord.order.end(), plus.begin(), plus.end());
    return ord;
}

struct BinaryOptimum {
    SignalingScheme scheme;       // direct, signals {0,1}, original state indexing
    std::size_t threshold_state;  // position in the ordering
    double m_star;                // total conditional probability of signal 1
    double value;                 // designer utility of the scheme
};

// Greedy fractional-knapsack solution of the binary-action program: recommend
// action 1 outright where the receiver already prefers it, then spend the
// persuasiveness budget on the best value-per-weight states.
inline BinaryOptimum optimal_scheme_binary(const Belief& prior, const Matrix& u,
                                           const Matrix& v) {
    BinaryOrdering ord = order_states_binary(u, v);
    const std::size_t n = v.cols;
    auto weight = [&](std::size_t w) { return prior[w] * (v(0, w) - v(1, w)); };
    double total = 0.0, weight_scale = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
        total += weight(w);
        weight_scale = std::max(weight_scale, std::abs(weight(w)));
    }
    if (!(total > 0.0))
        throw PriorPrefersAction1(
            "receiver already prefers action 1 at the prior; no information is optimal");

    std::vector<double> p1(n, 0.0);  // by ordering position
    double cum = 0.0;
    std::size_t tpos = n;
    for (std::size_t k = 0; k < n; ++k) {
        double wk = weight(ord.order[k]);
        if (cum + wk > 0.0) {
            tpos = k;
            break;
        }
        p1[k] = 1.0;
        cum += wk;
    }
    if (tpos == n) throw NumericalFailure("knapsack walk found no threshold");
    std::size_t k = tpos;
    const double negligible = 1e-12 * weight_scale;
    while (k < n) {
        double wk = weight(ord.order[k]);
        if (wk >= negligible && wk > 0.0) {
            p1[k] = std::clamp(-cum / wk, 0.0, 1.0);
            tpos = k;
            break;
        }
        p1[k] = 0.0;  // degenerate zero-weight item; threshold advances
        ++k;
    }
    if (k == n) tpos = n - 1;

    BinaryOptimum out;
    out.scheme = SignalingScheme(n, 2, /*direct=*/true);
    out.m_star = 0.0;
    out.value = 0.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        std::size_t w = ord.order[pos];
        out.scheme.at(w, 1) = p1[pos];
        out.scheme.at(w, 0) = 1.0 - p1[pos];
        out.m_star += p1[pos];
        out.value += prior[w] * (p1[pos] * u(1, w) + (1.0 - p1[pos]) * u(0, w));
    }
    out.threshold_state = tpos;
    return out;
}

// The scheme with persuasion strength M in the given state order: signal 1
// with probability 1 at the first floor(M) states, the fraction at the next,
// and 0 after.
inline SignalingScheme scheme_from_strength(double m, const BinaryOrdering& ord) {
    const std::size_t n = ord.order.size();
    if (m < -1e-12 || m > double(n) + 1e-12)
        throw StrengthOutOfRange("persuasion strength must lie in [0, |states|]");
    m = std::clamp(m, 0.0, double(n));
    SignalingScheme pi(n, 2, /*direct=*/true);
    double whole = std::floor(m);
    for (std::size_t pos = 0; pos < n; ++pos) {
        double p;
        if (double(pos) < whole)
            p = 1.0;
        else if (double(pos) == whole)
            p = m - whole;
        else
            p = 0.0;
        std::size_t w = ord.order[pos];
        pi.at(w, 1) = p;
        pi.at(w, 0) = 1.0 - p;
    }
    return pi;
}

inline double strength_of(const SignalingScheme& pi) {
    if (!pi.direct || pi.signal_count != 2)
        throw NotDirect("persuasion strength is defined for direct binary-action schemes");
    double m = 0.0;
    for (std::size_t w = 0; w < pi.state_count; ++w) m += pi(w, 1);
    return m;
}

}  // namespace persuade
