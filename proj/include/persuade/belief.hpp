#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "persuade/errors.hpp"

namespace persuade {

inline constexpr double kSimplexTol = 1e-9;

// A probability distribution over states.
struct Belief {
    std::vector<double> probs;

    Belief() = default;
    explicit Belief(std::vector<double> p) : probs(std::move(p)) {}
    Belief(std::initializer_list<double> p) : probs(p) {}

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
    double& operator[](std::size_t i) { return probs[i]; }

    double min_mass() const {
        double m = 1.0;
        for (double p : probs) m = std::min(m, p);
        return m;
    }

    bool valid(double tol = kSimplexTol) const {
        if (probs.empty()) return false;
        double sum = 0.0;
        for (double p : probs) {
            if (p < -tol) return false;
            sum += p;
        }
        return std::abs(sum - 1.0) <= tol;
    }

    static Belief uniform(std::size_t n) {
        return Belief(std::vector<double>(n, 1.0 / double(n)));
    }

    static Belief point_mass(std::size_t n, std::size_t state) {
        Belief b(std::vector<double>(n, 0.0));
        b[state] = 1.0;
        return b;
    }
};

inline double l1_distance(const Belief& a, const Belief& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

// Rescales so the entries sum to exactly 1 (guards accumulated fp drift).
inline void renormalize(Belief& b) {
    double sum = 0.0;
    for (double& p : b.probs) {
        if (p < 0.0) p = 0.0;
        sum += p;
    }
    if (sum <= 0.0) throw Error("renormalize: zero-mass belief");
    for (double& p : b.probs) p /= sum;
}

// Projection onto {mu : min mu >= p0} in l1: lifts deficient entries to p0 and
// takes the added mass out of the surplus entries proportionally to their
// surplus, so no entry drops below p0. Returns the projected belief and the
// l1 distance moved.
inline std::pair<Belief, double> project_to_min_mass(const Belief& b, double p0) {
    const std::size_t n = b.size();
    if (p0 * double(n) > 1.0 + kSimplexTol)
        throw Error("project_to_min_mass: p0 infeasible for state count");
    double deficit = 0.0, surplus = 0.0;
    for (double p : b.probs) {
        if (p < p0)
            deficit += p0 - p;
        else
            surplus += p - p0;
    }
    if (deficit == 0.0) return {b, 0.0};
    Belief out = b;
    const double shrink = deficit / surplus;
    for (double& p : out.probs) {
        if (p < p0)
            p = p0;
        else
            p = p0 + (p - p0) * (1.0 - shrink);
    }
    return {out, 2.0 * deficit};
}

// Uniform sample from the simplex (exponential spacings).
template <typename RngT>
Belief random_belief(RngT& rng, std::size_t n) {
    Belief b(std::vector<double>(n, 0.0));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform01();
        b[i] = -std::log(1.0 - u + 1e-300);
        sum += b[i];
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= sum;
    return b;
}

}  // namespace persuade
