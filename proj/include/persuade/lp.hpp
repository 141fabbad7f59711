#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "persuade/errors.hpp"

// Small dense linear programs solved by two-phase simplex with Bland's
// anti-cycling rule. Every program in this library has a few dozen variables
// at most, so no sparsity or factorization machinery.

namespace persuade::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasTol = 1e-8;
inline constexpr double kPivotTol = 1e-11;
inline constexpr double kCostTol = 1e-9;

enum class Relation { le, ge, eq };

struct Constraint {
    std::vector<double> a;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

struct LinearProgram {
    std::vector<double> objective;  // maximized
    std::vector<Constraint> constraints;
    std::vector<double> lower;  // default 0
    std::vector<double> upper;  // default +inf

    explicit LinearProgram(std::size_t n_vars = 0)
        : objective(n_vars, 0.0), lower(n_vars, 0.0), upper(n_vars, kInf) {}

    std::size_t num_vars() const { return objective.size(); }

    void add_constraint(std::vector<double> coeffs, Relation rel, double rhs) {
        constraints.push_back({std::move(coeffs), rel, rhs});
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective_value = 0.0;
};

namespace detail {

// Tableau simplex over maximize c'y, A y (<=,=) b with y >= 0, b >= 0 after
// sign normalization. Column layout: structural | slack | artificial.
class Simplex {
public:
    Simplex(std::size_t m, std::size_t n) : m_(m), n_(n), t_(m, std::vector<double>(n + 1, 0.0)) {}

    std::vector<std::vector<double>>& rows() { return t_; }
    std::vector<std::size_t>& basis() { return basis_; }

    // Maximizes cost over the current feasible tableau; returns false on
    // unbounded. `allowed` marks columns eligible to enter.
    bool run(const std::vector<double>& cost, const std::vector<bool>& allowed,
             double& objective) {
        // reduced costs maintained in z_
        z_.assign(n_ + 1, 0.0);
        for (std::size_t j = 0; j <= n_; ++j) {
            double val = (j < n_) ? -cost[j] : 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                double cb = cost[basis_[i]];
                if (cb != 0.0) val += cb * t_[i][j];
            }
            z_[j] = val;
        }
        // z_[j] = c_B B^-1 A_j - c_j ; optimal when all >= 0.
        std::size_t iter_cap = 2000 * (m_ + n_ + 1);
        for (std::size_t iter = 0; iter < iter_cap; ++iter) {
            // Bland: smallest-index improving column.
            std::size_t enter = n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (allowed[j] && z_[j] < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == n_) {
                objective = z_[n_];
                return true;
            }
            // Ratio test; Bland tie-break on smallest basis variable index.
            std::size_t leave = m_;
            double best_ratio = kInf;
            for (std::size_t i = 0; i < m_; ++i) {
                double aij = t_[i][enter];
                if (aij > kPivotTol) {
                    double ratio = t_[i][n_] / aij;
                    if (ratio < best_ratio - 1e-12 ||
                        (ratio < best_ratio + 1e-12 &&
                         (leave == m_ || basis_[i] < basis_[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == m_) {
                // No admissible pivot. Distinguish a genuinely empty column
                // from one blocked by the pivot tolerance.
                double col_max = 0.0;
                for (std::size_t i = 0; i < m_; ++i)
                    col_max = std::max(col_max, t_[i][enter]);
                if (col_max > kPivotTol * 1e-2)
                    throw NumericalFailure("simplex pivot below tolerance prevents progress");
                return false;  // unbounded direction
            }
            pivot(leave, enter, cost);
        }
        throw NumericalFailure("simplex iteration cap reached");
    }

    void pivot(std::size_t r, std::size_t c, const std::vector<double>& cost) {
        double piv = t_[r][c];
        for (double& x : t_[r]) x /= piv;
        t_[r][c] = 1.0;  // exact
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double f = t_[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) t_[i][j] -= f * t_[r][j];
            t_[i][c] = 0.0;
        }
        double zf = z_[c];
        if (zf != 0.0) {
            for (std::size_t j = 0; j <= n_; ++j) z_[j] -= zf * t_[r][j];
            z_[c] = 0.0;
        }
        basis_[r] = c;
        (void)cost;
    }

    std::size_t m_, n_;
    std::vector<std::vector<double>> t_;
    std::vector<std::size_t> basis_;
    std::vector<double> z_;
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& prob) {
    const std::size_t n_orig = prob.num_vars();
    if (n_orig == 0) throw Error("lp: no variables");
    for (const auto& c : prob.constraints)
        if (c.a.size() != n_orig) throw Error("lp: constraint arity mismatch");

    // Substitute bounded variables so every solver variable is >= 0.
    // col j of the solver maps back via x = sign*y + shift (or a split pair).
    struct VarMap {
        std::size_t col;           // first solver column
        bool split;                // x = y+ - y-  (columns col, col+1)
        double sign;               // +1 / -1
        double shift;
    };
    std::vector<VarMap> vmap(n_orig);
    std::size_t n_std = 0;
    std::vector<double> extra_upper;  // per structural var: finite range or inf
    for (std::size_t j = 0; j < n_orig; ++j) {
        double lo = prob.lower[j], up = prob.upper[j];
        if (lo > up) return {LpStatus::infeasible, {}, 0.0};
        if (std::isfinite(lo)) {
            vmap[j] = {n_std, false, +1.0, lo};
            extra_upper.push_back(std::isfinite(up) ? up - lo : kInf);
            n_std += 1;
        } else if (std::isfinite(up)) {
            vmap[j] = {n_std, false, -1.0, up};
            extra_upper.push_back(kInf);
            n_std += 1;
        } else {
            vmap[j] = {n_std, true, +1.0, 0.0};
            extra_upper.push_back(kInf);
            extra_upper.push_back(kInf);
            n_std += 2;
        }
    }

    // Assemble rows: user constraints plus finite-range bound rows.
    struct Row {
        std::vector<double> a;
        Relation rel;
        double rhs;
    };
    std::vector<Row> rows;
    rows.reserve(prob.constraints.size() + n_std);
    auto expand = [&](const std::vector<double>& coeffs) {
        std::vector<double> out(n_std, 0.0);
        for (std::size_t j = 0; j < n_orig; ++j) {
            double c = coeffs[j];
            if (c == 0.0) continue;
            const auto& vm = vmap[j];
            if (vm.split) {
                out[vm.col] += c;
                out[vm.col + 1] -= c;
            } else {
                out[vm.col] += c * vm.sign;
            }
        }
        return out;
    };
    for (const auto& c : prob.constraints) {
        double shift = 0.0;
        for (std::size_t j = 0; j < n_orig; ++j) shift += c.a[j] * vmap[j].shift;
        rows.push_back({expand(c.a), c.rel, c.rhs - shift});
    }
    for (std::size_t k = 0; k < n_std; ++k) {
        if (std::isfinite(extra_upper[k]) && extra_upper[k] < kInf) {
            std::vector<double> a(n_std, 0.0);
            a[k] = 1.0;
            rows.push_back({std::move(a), Relation::le, extra_upper[k]});
        }
    }

    // Row equilibration keeps pivots O(1) even when a model's coefficients
    // are uniformly tiny (the scaling cancels in the solution).
    for (auto& r : rows) {
        double mx = std::abs(r.rhs);
        for (double x : r.a) mx = std::max(mx, std::abs(x));
        if (mx > 0.0 && (mx < 1e-3 || mx > 1e3)) {
            for (double& x : r.a) x /= mx;
            r.rhs /= mx;
        }
    }

    // Normalize signs so every rhs >= 0, then attach slack/artificials.
    const std::size_t m = rows.size();
    std::size_t n_slack = 0, n_art = 0;
    for (auto& r : rows) {
        if (r.rhs < 0.0) {
            for (double& x : r.a) x = -x;
            r.rhs = -r.rhs;
            r.rel = (r.rel == Relation::le)   ? Relation::ge
                    : (r.rel == Relation::ge) ? Relation::le
                                              : Relation::eq;
        }
        if (r.rel != Relation::eq) ++n_slack;
        if (r.rel != Relation::le) ++n_art;
    }
    const std::size_t n_total = n_std + n_slack + n_art;
    detail::Simplex sx(m, n_total);
    sx.basis().assign(m, 0);
    std::size_t slack_at = n_std, art_at = n_std + n_slack;
    std::vector<bool> is_artificial(n_total, false);
    for (std::size_t i = 0; i < m; ++i) {
        auto& t = sx.rows()[i];
        for (std::size_t j = 0; j < n_std; ++j) t[j] = rows[i].a[j];
        t[n_total] = rows[i].rhs;
        if (rows[i].rel == Relation::le) {
            t[slack_at] = 1.0;
            sx.basis()[i] = slack_at++;
        } else if (rows[i].rel == Relation::ge) {
            t[slack_at] = -1.0;
            ++slack_at;
            t[art_at] = 1.0;
            is_artificial[art_at] = true;
            sx.basis()[i] = art_at++;
        } else {
            t[art_at] = 1.0;
            is_artificial[art_at] = true;
            sx.basis()[i] = art_at++;
        }
    }

    std::vector<bool> allowed(n_total, true);
    double obj = 0.0;

    if (n_art > 0) {
        // Phase 1: drive sum of artificials to zero.
        std::vector<double> cost1(n_total, 0.0);
        for (std::size_t j = 0; j < n_total; ++j)
            if (is_artificial[j]) cost1[j] = -1.0;
        if (!sx.run(cost1, allowed, obj))
            throw NumericalFailure("phase-1 reported unbounded");
        if (obj < -kFeasTol) return {LpStatus::infeasible, {}, 0.0};
        // Remove artificials from the basis where possible.
        for (std::size_t i = 0; i < m; ++i) {
            if (!is_artificial[sx.basis()[i]]) continue;
            std::size_t col = n_total;
            for (std::size_t j = 0; j < n_std + n_slack; ++j) {
                if (std::abs(sx.rows()[i][j]) > kPivotTol) {
                    col = j;
                    break;
                }
            }
            if (col < n_total) sx.pivot(i, col, cost1);
            // else: redundant row; the artificial stays basic at level 0.
        }
        for (std::size_t j = 0; j < n_total; ++j)
            if (is_artificial[j]) allowed[j] = false;
    }

    // Phase 2.
    std::vector<double> cost2(n_total, 0.0);
    for (std::size_t j = 0; j < n_orig; ++j) {
        const auto& vm = vmap[j];
        double c = prob.objective[j];
        if (vm.split) {
            cost2[vm.col] += c;
            cost2[vm.col + 1] -= c;
        } else {
            cost2[vm.col] += c * vm.sign;
        }
    }
    if (!sx.run(cost2, allowed, obj)) return {LpStatus::unbounded, {}, 0.0};

    std::vector<double> y(n_total, 0.0);
    for (std::size_t i = 0; i < m; ++i) y[sx.basis()[i]] = sx.rows()[i][n_total];
    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.x.assign(n_orig, 0.0);
    for (std::size_t j = 0; j < n_orig; ++j) {
        const auto& vm = vmap[j];
        double val = vm.split ? (y[vm.col] - y[vm.col + 1]) : vm.sign * y[vm.col];
        sol.x[j] = val + vm.shift;
    }
    sol.objective_value = 0.0;
    for (std::size_t j = 0; j < n_orig; ++j)
        sol.objective_value += prob.objective[j] * sol.x[j];
    return sol;
}

}  // namespace persuade::lp
