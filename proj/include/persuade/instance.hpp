#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "persuade/belief.hpp"
#include "persuade/errors.hpp"

namespace persuade {

// Dense row-major matrix; utility matrices are [action x state].
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), a(r * c, fill) {}

    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
};

enum class TieRule {
    sender_preferred,
    lowest_index,
    recommended_then_sender,
};

inline std::string to_string(TieRule t) {
    switch (t) {
        case TieRule::sender_preferred: return "sender_preferred";
        case TieRule::lowest_index: return "lowest_index";
        case TieRule::recommended_then_sender: return "recommended_then_sender";
    }
    return "?";
}

inline TieRule tie_rule_from_string(const std::string& s) {
    if (s == "sender_preferred") return TieRule::sender_preferred;
    if (s == "lowest_index") return TieRule::lowest_index;
    if (s == "recommended_then_sender") return TieRule::recommended_then_sender;
    throw ConfigError("unknown tie rule: " + s);
}

// Conditional signal distribution pi(s|state), one row per state. When
// `direct` the signals index actions (signal = recommendation).
struct SignalingScheme {
    std::size_t state_count = 0;
    std::size_t signal_count = 0;
    bool direct = false;
    std::vector<double> cond;  // row-major [state][signal]

    SignalingScheme() = default;
    SignalingScheme(std::size_t states, std::size_t signals, bool is_direct)
        : state_count(states),
          signal_count(signals),
          direct(is_direct),
          cond(states * signals, 0.0) {}

    double operator()(std::size_t state, std::size_t signal) const {
        return cond[state * signal_count + signal];
    }
    double& at(std::size_t state, std::size_t signal) {
        return cond[state * signal_count + signal];
    }

    bool rows_valid(double tol = kSimplexTol) const {
        for (std::size_t w = 0; w < state_count; ++w) {
            double sum = 0.0;
            for (std::size_t s = 0; s < signal_count; ++s) {
                double p = (*this)(w, s);
                if (p < -tol) return false;
                sum += p;
            }
            if (std::abs(sum - 1.0) > tol) return false;
        }
        return true;
    }

    void renormalize_rows() {
        for (std::size_t w = 0; w < state_count; ++w) {
            double sum = 0.0;
            for (std::size_t s = 0; s < signal_count; ++s) {
                double& p = cond[w * signal_count + s];
                if (p < 0.0) p = 0.0;
                sum += p;
            }
            if (sum <= 0.0) throw Error("scheme row with zero mass");
            for (std::size_t s = 0; s < signal_count; ++s)
                cond[w * signal_count + s] /= sum;
        }
    }

    // Same signal distribution in every state; reveals nothing.
    static SignalingScheme uninformative(std::size_t states, std::size_t signals,
                                         bool is_direct, std::size_t on_signal = 0) {
        SignalingScheme pi(states, signals, is_direct);
        for (std::size_t w = 0; w < states; ++w) pi.at(w, on_signal) = 1.0;
        return pi;
    }

    // Signal = state identity (non-direct unless signals happen to be actions).
    static SignalingScheme full_revelation(std::size_t states) {
        SignalingScheme pi(states, states, false);
        for (std::size_t w = 0; w < states; ++w) pi.at(w, w) = 1.0;
        return pi;
    }
};

inline std::uint64_t fingerprint(const SignalingScheme& pi) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    std::uint64_t dims[3] = {pi.state_count, pi.signal_count, pi.direct ? 1u : 0u};
    mix(dims, sizeof(dims));
    mix(pi.cond.data(), pi.cond.size() * sizeof(double));
    return h;
}

// The single-period game: states, actions, both utility matrices in [0,1],
// the hidden true prior, and the public lower bound p0 on prior mass.
struct Instance {
    std::size_t state_count = 0;
    std::size_t action_count = 0;
    Belief prior;    // hidden from learners
    Matrix u;        // designer utility   [action x state]
    Matrix v;        // receiver utility   [action x state]
    double p0 = 0.0; // public: min prior mass >= p0 > 0

    // Optional record of an affine receiver-utility normalization
    // stored_v = (original_v + v_map_offset) / v_map_scale.
    double v_map_offset = 0.0;
    double v_map_scale = 1.0;

    std::vector<std::string> state_names;   // optional labels
    std::vector<std::string> action_names;  // optional labels
};

inline void validate_instance(const Instance& inst) {
    if (inst.state_count == 0 || inst.action_count == 0)
        throw ConfigError("instance needs at least one state and one action");
    if (!inst.prior.valid() || inst.prior.size() != inst.state_count)
        throw ConfigError("instance prior is not a distribution over the states");
    if (!(inst.p0 > 0.0) || inst.prior.min_mass() < inst.p0 - kSimplexTol)
        throw PriorSupportViolated("prior must have full support with min mass >= p0 > 0");
    auto check_range = [](const Matrix& m, const char* name) {
        for (double x : m.a)
            if (x < -kSimplexTol || x > 1.0 + kSimplexTol)
                throw ConfigError(std::string(name) + " entries must lie in [0,1]");
    };
    if (inst.u.rows != inst.action_count || inst.u.cols != inst.state_count ||
        inst.v.rows != inst.action_count || inst.v.cols != inst.state_count)
        throw ConfigError("utility matrices must be [action x state]");
    check_range(inst.u, "u");
    check_range(inst.v, "v");
}

}  // namespace persuade
