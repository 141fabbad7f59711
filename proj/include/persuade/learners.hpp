#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "persuade/core.hpp"
#include "persuade/errors.hpp"
#include "persuade/instance.hpp"
#include "persuade/optimal.hpp"
#include "persuade/rng.hpp"
#include "persuade/robustify.hpp"

// Learning strategies behind a uniform propose/observe contract. A learner
// proposes the scheme for the current period; the episode runner samples the
// state and signal, resolves the receiver's action, and feeds the outcome
// back through observe(). done() reports the final scheme once a learner has
// switched to exploitation.

namespace persuade {

class Learner {
public:
    virtual ~Learner() = default;
    virtual const SignalingScheme& propose() = 0;
    virtual void observe(std::size_t signal, std::size_t action,
                         std::optional<std::size_t> state) = 0;
    virtual std::optional<SignalingScheme> done() const { return std::nullopt; }
    virtual bool state_observing() const { return false; }
    virtual std::string name() const = 0;
};

// Benchmark achiever: plays the optimal scheme for the true prior.
class OracleLearner : public Learner {
public:
    OracleLearner(const Instance& inst, TieRule /*tie*/ = TieRule::recommended_then_sender) {
        scheme_ = benchmark_scheme(inst);
    }

    static SignalingScheme benchmark_scheme(const Instance& inst) {
        if (inst.action_count == 2) {
            bool sender_pref = true;
            for (std::size_t w = 0; w < inst.state_count && sender_pref; ++w)
                sender_pref = inst.u(1, w) > inst.u(0, w);
            double lean0 = 0.0;
            for (std::size_t w = 0; w < inst.state_count; ++w)
                lean0 += inst.prior[w] * (inst.v(0, w) - inst.v(1, w));
            if (sender_pref && lean0 > 0.0)
                return optimal_scheme_binary(inst.prior, inst.u, inst.v).scheme;
        }
        return optimal_scheme_general(inst.prior, inst.u, inst.v).first;
    }

    const SignalingScheme& propose() override { return scheme_; }
    void observe(std::size_t, std::size_t, std::optional<std::size_t>) override {}
    std::optional<SignalingScheme> done() const override { return scheme_; }
    std::string name() const override { return "oracle"; }

private:
    SignalingScheme scheme_;
};

// Reveals nothing; the receiver acts on the prior every period.
class NeverInformLearner : public Learner {
public:
    NeverInformLearner(std::size_t n_states, std::size_t n_actions)
        : scheme_(SignalingScheme::uninformative(n_states, n_actions, /*direct=*/true)) {}
    const SignalingScheme& propose() override { return scheme_; }
    void observe(std::size_t, std::size_t, std::optional<std::size_t>) override {}
    std::optional<SignalingScheme> done() const override { return scheme_; }
    std::string name() const override { return "never_inform"; }

private:
    SignalingScheme scheme_;
};

// Bisection on the signaling ratio for two states with distinct
// receiver-optimal actions. Each probe scheme concentrates one signal on the
// target pair with a chosen conditional ratio; the receiver's action at that
// signal tells the learner on which side of the indifference threshold the
// true ratio lies. The terminal output estimates prior(first)/prior(second).
class RatioSearchLearner : public Learner {
public:
    RatioSearchLearner(const Matrix& v, double p0, std::pair<std::size_t, std::size_t> pair,
                       double accuracy, double margin_g)
        : v_(v),
          state_count_(v.cols),
          pair_(pair),
          accuracy_(accuracy),
          g_(margin_g) {
        if (!(accuracy > 0.0)) throw Error("ratio search accuracy must be positive");
        ell_ = 0.0;
        r_ = 1.0 / (margin_g * p0);
        a1_ = argmax_action(pair.first);
        a_tilde_ = argmax_action(pair.second);
        if (a1_ == a_tilde_)
            throw NoDistinguishablePair("ratio search needs states with distinct optimal actions");
        if (r_ - ell_ <= accuracy_ * g_)
            finish();
        else
            next_probe();
    }

    const SignalingScheme& propose() override {
        return finished_ ? idle_scheme() : probe_;
    }

    void observe(std::size_t signal, std::size_t action, std::optional<std::size_t>) override {
        if (finished_ || signal != 0) return;  // signal 0 is the probe signal
        ++probes_answered_;
        if (action == a1_) {
            ell_ = q_;
        } else {
            r_ = q_;
            a_tilde_ = action;
        }
        if (r_ - ell_ <= accuracy_ * g_)
            finish();
        else
            next_probe();
    }

    bool finished() const { return finished_; }
    std::size_t probes_answered() const { return probes_answered_; }
    double current_probe() const { return q_; }

    // Ratio estimate from the current bracket; final once finished().
    double rho_hat() const {
        double num = v_(a_tilde_, pair_.second) - v_(a1_, pair_.second);
        double den = v_(a1_, pair_.first) - v_(a_tilde_, pair_.first);
        return ell_ * num / den;
    }

    double bracket_low() const { return ell_; }
    double bracket_high() const { return r_; }
    std::string name() const override { return "alg1"; }

private:
    std::size_t argmax_action(std::size_t w) const {
        std::size_t best = 0;
        for (std::size_t a = 1; a < v_.rows; ++a)
            if (v_(a, w) > v_(best, w)) best = a;
        return best;
    }

    void next_probe() {
        q_ = 0.5 * (ell_ + r_);
        probe_ = SignalingScheme(state_count_, 2, /*direct=*/false);
        double on_first, on_second;  // conditional mass of the probe signal
        if (q_ <= 1.0) {
            on_first = 1.0;
            on_second = q_;
        } else {
            on_first = 1.0 / q_;
            on_second = 1.0;
        }
        for (std::size_t w = 0; w < state_count_; ++w) {
            double p0sig = 0.0;
            if (w == pair_.first) p0sig = on_first;
            if (w == pair_.second) p0sig = on_second;
            probe_.at(w, 0) = p0sig;
            probe_.at(w, 1) = 1.0 - p0sig;
        }
    }

    void finish() { finished_ = true; }

    const SignalingScheme& idle_scheme() {
        if (idle_.state_count == 0)
            idle_ = SignalingScheme::uninformative(state_count_, 2, /*direct=*/false);
        return idle_;
    }

    const Matrix& v_;
    std::size_t state_count_;
    std::pair<std::size_t, std::size_t> pair_;
    double accuracy_, g_;
    double ell_ = 0.0, r_ = 0.0, q_ = 0.0;
    std::size_t a1_ = 0, a_tilde_ = 0;
    std::size_t probes_answered_ = 0;
    bool finished_ = false;
    SignalingScheme probe_, idle_;
};

// Ratio estimate for an arbitrary state pair: delegate when the pair is
// distinguishable, otherwise route both states through a common member of the
// distinguishable pair and divide the two estimates.
class AnyPairRatioLearner : public Learner {
public:
    AnyPairRatioLearner(const Matrix& v, double p0,
                        std::pair<std::size_t, std::size_t> pair, double accuracy,
                        const Margins& margins)
        : pair_(pair) {
        if (accuracy > p0 / 2.0 + 1e-15)
            throw Error("pair-ratio accuracy must not exceed p0/2");
        const auto& act = margins.optimal_action;
        if (act[pair.first] != act[pair.second]) {
            first_ = std::make_unique<RatioSearchLearner>(v, p0, pair, accuracy, margins.G);
            return;
        }
        if (!margins.distinguishable_pair)
            throw NoDistinguishablePair("no state pair with distinct optimal actions");
        auto [d1, d2] = *margins.distinguishable_pair;
        std::size_t k = (act[d1] != act[pair.first]) ? d1 : d2;
        if (act[k] == act[pair.first])
            throw NoDistinguishablePair("no anchor state distinguishable from the pair");
        first_ = std::make_unique<RatioSearchLearner>(
            v, p0, std::make_pair(pair.first, k), accuracy, margins.G);
        second_ = std::make_unique<RatioSearchLearner>(
            v, p0, std::make_pair(pair.second, k), accuracy, margins.G);
    }

    const SignalingScheme& propose() override { return active().propose(); }

    void observe(std::size_t signal, std::size_t action,
                 std::optional<std::size_t> state) override {
        active().observe(signal, action, state);
    }

    bool finished() const {
        return first_->finished() && (!second_ || second_->finished());
    }

    double rho_hat() const {
        if (!second_) return first_->rho_hat();
        double denom = std::max(second_->rho_hat(), 1e-300);
        return first_->rho_hat() / denom;
    }

    std::string name() const override { return "alg2"; }

private:
    RatioSearchLearner& active() {
        if (!first_->finished() || !second_) return *first_;
        return *second_;
    }

    std::pair<std::size_t, std::size_t> pair_;
    std::unique_ptr<RatioSearchLearner> first_;
    std::unique_ptr<RatioSearchLearner> second_;
};

struct LearnRobustifyOptions {
    int eps_exponent = 5;         // exponent of p0 in the accuracy choice
    bool exact_ball_check = false;
};

// Full exploration/exploitation strategy for general instances: estimate
// every prior ratio against a reference state by action feedback, rebuild the
// prior estimate, robustify the optimal scheme for it, and play that scheme
// for the remaining periods.
class LearnThenRobustifyLearner : public Learner {
public:
    LearnThenRobustifyLearner(const Matrix& u, const Matrix& v, double p0, std::size_t T,
                              LearnRobustifyOptions opts = {})
        : u_(u), v_(v), p0_(p0), horizon_(T), opts_(opts) {
        n_ = v.cols;
        // A shared receiver-optimal action across all states pins the receiver
        // to it at every posterior; any scheme is then optimal. Detect that
        // before the dominance computation, which such instances always fail.
        bool shared_optimum = true;
        {
            std::size_t first = 0;
            for (std::size_t w = 0; w < n_; ++w) {
                std::size_t best = 0;
                for (std::size_t a = 1; a < v.rows; ++a)
                    if (v(a, w) > v(best, w)) best = a;
                if (w == 0)
                    first = best;
                else
                    shared_optimum = shared_optimum && (best == first);
            }
        }
        if (shared_optimum && v.rows > 1) {
            degenerate_no_pair_ = true;
            exploit_ = SignalingScheme::uninformative(n_, u.rows, /*direct=*/true);
            exploiting_ = true;
            return;
        }
        margins_ = compute_margins(u, v, p0);
        if (!margins_.distinguishable_pair) {
            degenerate_no_pair_ = true;
            exploit_ = SignalingScheme::uninformative(n_, u.rows, /*direct=*/true);
            exploiting_ = true;
            return;
        }
        eps_ = std::pow(p0, double(opts.eps_exponent)) * margins_.D /
               (42.0 * double(n_) * double(T));
        eps_ = std::min(eps_, p0 / 2.0);
        for (std::size_t i = 1; i < n_; ++i)
            stages_.push_back(std::make_unique<AnyPairRatioLearner>(
                v_, p0, std::make_pair(i, std::size_t{0}), eps_, margins_));
        if (stages_.empty()) begin_exploitation();  // single-state instance
    }

    const SignalingScheme& propose() override {
        if (exploiting_) return exploit_;
        return stages_[stage_]->propose();
    }

    void observe(std::size_t signal, std::size_t action,
                 std::optional<std::size_t> state) override {
        if (exploiting_) return;
        ++exploration_periods_;
        stages_[stage_]->observe(signal, action, state);
        while (stage_ < stages_.size() && stages_[stage_]->finished()) ++stage_;
        if (stage_ == stages_.size()) begin_exploitation();
    }

    std::optional<SignalingScheme> done() const override {
        if (exploiting_) return exploit_;
        return std::nullopt;
    }

    std::string name() const override { return "alg3"; }

    bool exploiting() const { return exploiting_; }
    bool degenerate_no_pair() const { return degenerate_no_pair_; }
    double accuracy() const { return eps_; }
    const Belief& estimated_prior() const { return mu_hat_; }
    double ball_radius() const { return ball_radius_; }
    std::size_t exploration_periods() const { return exploration_periods_; }

private:
    void begin_exploitation() {
        std::vector<double> ratios;
        ratios.reserve(stages_.size());
        double sum = 0.0;
        for (const auto& s : stages_) {
            double r = std::max(s->rho_hat(), 0.0);
            ratios.push_back(r);
            sum += r;
        }
        Belief mu(std::vector<double>(n_, 0.0));
        mu[0] = 1.0 / (1.0 + sum);
        for (std::size_t i = 1; i < n_; ++i) mu[i] = ratios[i - 1] * mu[0];
        mu_hat_ = mu;
        auto [projected, moved] = project_to_min_mass(mu, p0_);
        double ball = 6.0 * double(n_) * eps_ / std::pow(p0_, 3) + moved;
        ball_radius_ = std::min(ball, p0_ * p0_ * margins_.D / 2.0);
        auto [pi_hat, value] = optimal_scheme_general(projected, u_, v_);
        (void)value;
        RobustificationParams params{ball_radius_, p0_, margins_.D, margins_.eta};
        exploit_ = robustify(projected, pi_hat, params, u_, v_);
        if (opts_.exact_ball_check && n_ <= 4) {
            double worst = ball_persuasiveness_margin_exact(projected, ball_radius_,
                                                            exploit_, v_);
            if (worst < -kMarginTol)
                throw Error("robustified scheme failed the exact ball check");
        }
        mu_hat_projected_ = std::move(projected);
        exploiting_ = true;
    }

    Matrix u_;
    Matrix v_;
    double p0_;
    std::size_t horizon_;
    LearnRobustifyOptions opts_;
    Margins margins_;
    std::size_t n_ = 0;
    double eps_ = 0.0;
    std::vector<std::unique_ptr<AnyPairRatioLearner>> stages_;
    std::size_t stage_ = 0;
    bool exploiting_ = false;
    bool degenerate_no_pair_ = false;
    Belief mu_hat_, mu_hat_projected_;
    double ball_radius_ = 0.0;
    std::size_t exploration_periods_ = 0;
    SignalingScheme exploit_;

public:
    const Belief& estimated_prior_projected() const { return mu_hat_projected_; }
};

// One persuasiveness probe: play the strength-M scheme until its
// recommendation signal realizes, then read the receiver's verdict.
class CheckPersLearner : public Learner {
public:
    explicit CheckPersLearner(SignalingScheme scheme) : scheme_(std::move(scheme)) {}

    const SignalingScheme& propose() override { return scheme_; }

    void observe(std::size_t signal, std::size_t action, std::optional<std::size_t>) override {
        if (resolved_) return;
        ++periods_used_;
        if (signal == 1) {
            resolved_ = true;
            persuasive_ = (action == 1);
        }
    }

    bool resolved() const { return resolved_; }
    bool verdict() const { return persuasive_; }
    std::size_t periods_used() const { return periods_used_; }
    std::string name() const override { return "checkpers"; }

private:
    SignalingScheme scheme_;
    bool resolved_ = false;
    bool persuasive_ = false;
    std::size_t periods_used_ = 0;
};

// Binary-action strength search: halve the strength until a probe is
// persuasive (bracketing the optimum within a factor 2), then repeatedly
// linear-scan shrinking sub-intervals until the bracket is 1/T wide, and
// exploit the left endpoint.
class StrengthSearchLearner : public Learner {
public:
    StrengthSearchLearner(const Matrix& u, const Matrix& v, std::size_t T)
        : horizon_(double(T)) {
        ordering_ = order_states_binary(u, v);
        n_ = double(v.cols);
        m_low_ = n_;
        set_probe(m_low_);
    }

    const SignalingScheme& propose() override { return scheme_; }

    void observe(std::size_t signal, std::size_t action, std::optional<std::size_t>) override {
        if (phase_ == Phase::exploit || signal != 1) return;
        bool persuasive = (action == 1);
        if (phase_ == Phase::coarse) {
            if (!persuasive) {
                m_low_ /= 2.0;
                set_probe(m_low_);
            } else {
                phase1_exit_ = m_low_;
                left_ = m_low_;
                right_ = std::min(2.0 * m_low_, n_);
                begin_scan_round();
            }
            return;
        }
        // refining scan
        if (persuasive) {
            ++scan_i_;
            set_probe(std::min(left_ + double(scan_i_) * step_, n_));
        } else {
            right_ = left_ + double(scan_i_) * step_;
            left_ = left_ + double(scan_i_ - 1) * step_;
            begin_scan_round();
        }
    }

    std::optional<SignalingScheme> done() const override {
        if (phase_ == Phase::exploit) return scheme_;
        return std::nullopt;
    }

    std::string name() const override { return "alg5"; }

    bool exploiting() const { return phase_ == Phase::exploit; }
    double bracket_left() const { return left_; }
    double bracket_right() const { return right_; }
    double phase1_exit_strength() const { return phase1_exit_; }
    double current_probe_strength() const { return probe_m_; }
    std::size_t probes_built() const { return probes_built_; }

private:
    enum class Phase { coarse, refine, exploit };

    void begin_scan_round() {
        if (right_ - left_ <= 1.0 / horizon_) {
            phase_ = Phase::exploit;
            set_probe(left_);
            return;
        }
        phase_ = Phase::refine;
        step_ = (right_ - left_) * (right_ - left_) / (2.0 * left_);
        scan_i_ = 1;
        set_probe(std::min(left_ + step_, n_));
    }

    void set_probe(double m) {
        probe_m_ = m;
        scheme_ = scheme_from_strength(m, ordering_);
        ++probes_built_;
    }

    BinaryOrdering ordering_;
    double n_ = 0.0, horizon_ = 0.0;
    Phase phase_ = Phase::coarse;
    double m_low_ = 0.0, left_ = 0.0, right_ = 0.0, step_ = 0.0;
    double probe_m_ = 0.0, phase1_exit_ = 0.0;
    std::size_t scan_i_ = 0, probes_built_ = 0;
    SignalingScheme scheme_;
};

struct BaselineOptions {
    std::size_t recompute_every = 1;
    bool exact_ball_check = false;
};

// State-observing baseline: robustified optimal scheme for the running
// empirical state distribution, with a confidence radius shrinking like
// sqrt(log T / t).
class BaselineEmpiricalLearner : public Learner {
public:
    BaselineEmpiricalLearner(const Matrix& u, const Matrix& v, double p0, std::size_t T,
                             BaselineOptions opts = {})
        : u_(u), v_(v), p0_(p0), horizon_(T), opts_(opts) {
        margins_ = compute_margins(u, v, p0);
        counts_.assign(v.cols, 0.0);
        rebuild();
    }

    const SignalingScheme& propose() override {
        if (stale_ >= opts_.recompute_every) rebuild();
        return scheme_;
    }

    void observe(std::size_t, std::size_t, std::optional<std::size_t> state) override {
        if (!state) throw IncompatibleLearner("empirical baseline requires state feedback");
        counts_[*state] += 1.0;
        ++n_obs_;
        ++stale_;
    }

    bool state_observing() const override { return true; }
    std::string name() const override { return "baseline_empirical"; }

    double current_radius() const { return radius_; }
    const Belief& estimate() const { return mu_hat_; }

private:
    void rebuild() {
        const std::size_t n = v_.cols;
        Belief mu(std::vector<double>(n, 0.0));
        for (std::size_t w = 0; w < n; ++w)
            mu[w] = (counts_[w] + 1.0) / (double(n_obs_) + double(n));
        double eps_max = p0_ * p0_ * margins_.D / 2.0;
        double radius = eps_max;
        if (n_obs_ > 0) {
            double hoeffding = std::sqrt(2.0 * double(n) * std::log(2.0 * double(horizon_)) /
                                         double(n_obs_));
            radius = std::min(eps_max, hoeffding);
        }
        auto [projected, moved] = project_to_min_mass(mu, p0_);
        (void)moved;
        auto [pi_hat, value] = optimal_scheme_general(projected, u_, v_);
        (void)value;
        RobustificationParams params{radius, p0_, margins_.D, margins_.eta};
        scheme_ = robustify(projected, pi_hat, params, u_, v_);
        if (opts_.exact_ball_check && n <= 4) {
            double worst = ball_persuasiveness_margin_exact(projected, radius, scheme_, v_);
            if (worst < -kMarginTol)
                throw Error("robustified scheme failed the exact ball check");
        }
        mu_hat_ = std::move(projected);
        radius_ = radius;
        stale_ = 0;
    }

    Matrix u_;
    Matrix v_;
    double p0_;
    std::size_t horizon_;
    BaselineOptions opts_;
    Margins margins_;
    std::vector<double> counts_;
    std::size_t n_obs_ = 0, stale_ = 0;
    Belief mu_hat_;
    double radius_ = 0.0;
    SignalingScheme scheme_;
};

}  // namespace persuade
