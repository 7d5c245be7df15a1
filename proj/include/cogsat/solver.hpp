// Copyright 2026 the cogsat-ra authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <optional>

#include "cogsat/assignment.hpp"
#include "cogsat/core.hpp"

namespace cogsat {

// ---------------------------------------------------------------------------
// The relaxed resource-allocation kernel shared by every strategy.
//
// After relaxing the binary assignment to [0,1] and substituting X = A.P, the
// problem is concave:
//
//   max  sum_{k,m} A_km log2(1 + g_km X_km / A_km)        (perspective form)
//        + sum c_extra_km X_km - (c/2) sum_lm (I_lm(X) - r_lm)^2
//   s.t. rows of A are unit-sum        (one subband per SU)
//        beam columns of A are unit-sum (one SU per beam per subband)
//        0 <= X <= p_max A             (power box through the substitution)
//        sum_k f_klm X_km <= t_lm      (interference-temperature caps)
//
// Solved by projected gradient ascent; the projection onto the constraint
// intersection runs Dykstra's alternating scheme over the row simplices, the
// beam-column simplices, the per-entry (A,X) wedges and the cap halfspaces.
// Inter-beam interference is not part of the objective here.
// ---------------------------------------------------------------------------

struct SolverOptions {
    double tol = 1e-6;             // stationarity residual target
    int max_iters = 5000;
    double feas_tol = 1e-8;        // audit tolerance downstream
    double smoothing_eps = 1e-9;   // eps in (A+eps)log2(1+gX/(A+eps))
    double dykstra_tol = 1e-12;    // per-sweep movement threshold
    int dykstra_max_sweeps = 4000;
};

struct RaProblem {
    std::vector<int> scope;               // SU ids behind local rows (caller bookkeeping)
    std::vector<std::vector<int>> beams;  // local row indices per beam, each of size M
    int n_subbands = 0;                   // M
    double p_max = 0.0;
    Tensor2 gain_sat;    // S x M, gain toward the SU's own beam
    Tensor3 gain_pu;     // S x L x M
    Tensor2 thresholds;  // L x M
    Tensor2 extra_linear;         // S x M linear objective term on X; empty = none
    double prox_weight = 0.0;     // c in the quadratic interference penalty
    Tensor2 prox_target;          // L x M targets r; used when prox_weight > 0

    int rows() const { return gain_sat.rows(); }
    int pus() const { return thresholds.rows(); }

    void validate() const {
        const int m = n_subbands;
        if (m < 1) throw ValidationError("problem: n_subbands must be >= 1");
        if (p_max <= 0.0) throw ValidationError("problem: p_max must be > 0");
        if (beams.empty()) throw ValidationError("problem: scope must contain whole beams");
        const int s = static_cast<int>(beams.size()) * m;
        std::vector<char> seen(s, 0);
        for (const auto& blk : beams) {
            if (static_cast<int>(blk.size()) != m)
                throw ValidationError("problem: each beam must hold exactly M rows");
            for (int r : blk) {
                if (r < 0 || r >= s || seen[r])
                    throw ValidationError("problem: beam rows must partition the scope");
                seen[r] = 1;
            }
        }
        if (gain_sat.rows() != s || gain_sat.cols() != m)
            throw ValidationError("problem: gain_sat shape mismatch");
        if (gain_pu.dim0() != s || gain_pu.dim2() != m)
            throw ValidationError("problem: gain_pu shape mismatch");
        if (thresholds.rows() != gain_pu.dim1() || thresholds.cols() != m)
            throw ValidationError("problem: thresholds shape mismatch");
        for (double t : thresholds.data())
            if (!std::isfinite(t) || t < 0.0)
                throw ValidationError("problem: thresholds must be finite and >= 0");
        if (extra_linear.size() && (extra_linear.rows() != s || extra_linear.cols() != m))
            throw ValidationError("problem: extra_linear shape mismatch");
        if (prox_weight < 0.0) throw ValidationError("problem: prox_weight must be >= 0");
        if (prox_weight > 0.0 && (prox_target.rows() != thresholds.rows() ||
                                  prox_target.cols() != m))
            throw ValidationError("problem: prox_target shape mismatch");
    }
};

struct RelaxedSolution {
    Tensor2 a_frac;  // S x M in [0,1]
    Tensor2 x;       // S x M, X = A.P
    double objective_value = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct Allocation {
    Tensor2i a;  // S x M binary
    Tensor2 p;   // S x M, zero wherever a is zero
};

/// Non-convergence after max_iters; carries the best iterate found.
struct SolverError : Error {
    SolverError(const std::string& msg, RelaxedSolution best_iterate)
        : Error(msg), best(std::move(best_iterate)) {}
    RelaxedSolution best;
};

// ---------------------------------------------------------------------------
// Objective and gradient (public: the tests difference them numerically)
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr double kLn2 = 0.6931471805599453;

inline void interference_of_x(const RaProblem& prob, const Tensor2& x, Tensor2& out) {
    const int s = prob.rows(), l_count = prob.pus(), m_count = prob.n_subbands;
    out.fill(0.0);
    for (int i = 0; i < s; ++i)
        for (int l = 0; l < l_count; ++l)
            for (int m = 0; m < m_count; ++m)
                out(l, m) += prob.gain_pu(i, l, m) * std::max(x(i, m), 0.0);
}
}  // namespace detail

/// Smoothed relaxed objective (rate term + linear term - quadratic penalty).
inline double relaxed_objective(const RaProblem& prob, const Tensor2& a, const Tensor2& x,
                                double eps) {
    const int s = prob.rows(), m_count = prob.n_subbands;
    double val = 0.0;
    for (int i = 0; i < s; ++i)
        for (int m = 0; m < m_count; ++m) {
            const double ae = a(i, m) + eps;
            const double xe = std::max(x(i, m), 0.0);
            const double u = prob.gain_sat(i, m) * xe / ae;
            val += ae * std::log2(1.0 + u);
            if (prob.extra_linear.size()) val += prob.extra_linear(i, m) * xe;
        }
    if (prob.prox_weight > 0.0) {
        Tensor2 inter(prob.pus(), m_count);
        detail::interference_of_x(prob, x, inter);
        for (int l = 0; l < prob.pus(); ++l)
            for (int m = 0; m < m_count; ++m) {
                const double d = inter(l, m) - prob.prox_target(l, m);
                val -= 0.5 * prob.prox_weight * d * d;
            }
    }
    return val;
}

/// Analytic gradient of relaxed_objective; returns the objective value.
inline double relaxed_gradient(const RaProblem& prob, const Tensor2& a, const Tensor2& x,
                               double eps, Tensor2& grad_a, Tensor2& grad_x) {
    const int s = prob.rows(), l_count = prob.pus(), m_count = prob.n_subbands;
    double val = 0.0;
    Tensor2 inter;
    if (prob.prox_weight > 0.0) {
        inter = Tensor2(l_count, m_count);
        detail::interference_of_x(prob, x, inter);
    }
    for (int i = 0; i < s; ++i)
        for (int m = 0; m < m_count; ++m) {
            const double g = prob.gain_sat(i, m);
            const double ae = a(i, m) + eps;
            const double xe = std::max(x(i, m), 0.0);
            const double u = g * xe / ae;
            const double log_term = std::log2(1.0 + u);
            val += ae * log_term;
            grad_a(i, m) = log_term - u / ((1.0 + u) * detail::kLn2);
            grad_x(i, m) = g / ((1.0 + u) * detail::kLn2);
            if (prob.extra_linear.size()) {
                val += prob.extra_linear(i, m) * xe;
                grad_x(i, m) += prob.extra_linear(i, m);
            }
            if (prob.prox_weight > 0.0) {
                double acc = 0.0;
                for (int l = 0; l < l_count; ++l)
                    acc += prob.gain_pu(i, l, m) * (inter(l, m) - prob.prox_target(l, m));
                grad_x(i, m) -= prob.prox_weight * acc;
            }
        }
    if (prob.prox_weight > 0.0)
        for (int l = 0; l < l_count; ++l)
            for (int m = 0; m < m_count; ++m) {
                const double d = inter(l, m) - prob.prox_target(l, m);
                val -= 0.5 * prob.prox_weight * d * d;
            }
    return val;
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

namespace detail {

// Euclidean projection onto the probability simplex {v >= 0, sum v = 1}.
inline void project_simplex(double* v, int n, std::vector<double>& sorted) {
    sorted.assign(v, v + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0, tau = 0.0;
    int support = 0;
    for (int j = 0; j < n; ++j) {
        cumsum += sorted[j];
        const double cand = (cumsum - 1.0) / (j + 1);
        if (sorted[j] - cand > 0.0) {
            tau = cand;
            support = j + 1;
        }
    }
    (void)support;
    for (int j = 0; j < n; ++j) v[j] = std::max(v[j] - tau, 0.0);
}

// Projection onto the wedge {(a,x): x >= 0, x <= p_max a}.
inline void project_wedge(double& a, double& x, double p_max) {
    if (x >= 0.0 && x <= p_max * a) return;
    if (x < 0.0) {
        // For x below the floor the nearest point lies on the x = 0 ray.
        double ax = a + p_max * x;
        if (ax <= 0.0 && a < 0.0) {
            a = 0.0;
            x = 0.0;
        } else {
            x = 0.0;
            if (a < 0.0) a = 0.0;
        }
        return;
    }
    double t = (a + p_max * x) / (1.0 + p_max * p_max);
    if (t < 0.0) t = 0.0;
    a = t;
    x = p_max * t;
}

// One cap halfspace sum_i coef_i * x(row_i, m) <= rhs, pre-pruned to rows with
// nonzero gain. Dykstra corrections stay parallel to coef, so one scalar per
// halfspace suffices.
struct Halfspace {
    int m = 0;
    std::vector<std::pair<int, double>> coef;  // (local row, gain)
    double rhs = 0.0;
    double norm2 = 0.0;
};

inline std::vector<Halfspace> build_halfspaces(const RaProblem& prob) {
    std::vector<Halfspace> out;
    const int s = prob.rows();
    for (int l = 0; l < prob.pus(); ++l)
        for (int m = 0; m < prob.n_subbands; ++m) {
            Halfspace h;
            h.m = m;
            h.rhs = prob.thresholds(l, m);
            double reach = 0.0;
            for (int i = 0; i < s; ++i) {
                const double f = prob.gain_pu(i, l, m);
                if (f > 0.0) {
                    h.coef.emplace_back(i, f);
                    h.norm2 += f * f;
                    reach += f * prob.p_max;
                }
            }
            // keep only caps that some feasible X could actually hit
            if (!h.coef.empty() && reach > h.rhs) out.push_back(std::move(h));
        }
    return out;
}

// Dykstra projection onto the intersection of all relaxed-problem constraints.
// Buffers are owned here and reused across calls within one solve.
class RelaxedProjector {
  public:
    void init(const RaProblem& prob, const SolverOptions& opt) {
        prob_ = &prob;
        opt_ = &opt;
        const int s = prob.rows(), m = prob.n_subbands;
        halfspaces_ = build_halfspaces(prob);
        e_row_ = Tensor2(s, m);
        e_col_ = Tensor2(s, m);
        e_wa_ = Tensor2(s, m);
        e_wx_ = Tensor2(s, m);
        e_half_.assign(halfspaces_.size(), 0.0);
        buf_.resize(std::max(m, static_cast<int>(prob.beams.size())));
        sorted_.reserve(m);
    }

    void project(Tensor2& a, Tensor2& x) {
        const int s = prob_->rows(), m_count = prob_->n_subbands;
        e_row_.fill(0.0);
        e_col_.fill(0.0);
        e_wa_.fill(0.0);
        e_wx_.fill(0.0);
        std::fill(e_half_.begin(), e_half_.end(), 0.0);

        for (int sweep = 0; sweep < opt_->dykstra_max_sweeps; ++sweep) {
            double moved = 0.0;

            for (int i = 0; i < s; ++i) {  // row simplices
                for (int m = 0; m < m_count; ++m) buf_[m] = a(i, m) + e_row_(i, m);
                double* w = buf_.data();
                std::vector<double> pre(w, w + m_count);
                project_simplex(w, m_count, sorted_);
                for (int m = 0; m < m_count; ++m) {
                    e_row_(i, m) = pre[m] - w[m];
                    moved = std::max(moved, std::abs(a(i, m) - w[m]));
                    a(i, m) = w[m];
                }
            }

            for (size_t b = 0; b < prob_->beams.size(); ++b) {  // beam-column simplices
                const auto& blk = prob_->beams[b];
                for (int m = 0; m < m_count; ++m) {
                    for (size_t r = 0; r < blk.size(); ++r)
                        buf_[r] = a(blk[r], m) + e_col_(blk[r], m);
                    double* w = buf_.data();
                    std::vector<double> pre(w, w + blk.size());
                    project_simplex(w, static_cast<int>(blk.size()), sorted_);
                    for (size_t r = 0; r < blk.size(); ++r) {
                        e_col_(blk[r], m) = pre[r] - w[r];
                        moved = std::max(moved, std::abs(a(blk[r], m) - w[r]));
                        a(blk[r], m) = w[r];
                    }
                }
            }

            for (int i = 0; i < s; ++i)  // wedges
                for (int m = 0; m < m_count; ++m) {
                    double wa = a(i, m) + e_wa_(i, m);
                    double wx = x(i, m) + e_wx_(i, m);
                    const double pa = wa, px = wx;
                    project_wedge(wa, wx, prob_->p_max);
                    e_wa_(i, m) = pa - wa;
                    e_wx_(i, m) = px - wx;
                    moved = std::max(moved, std::abs(a(i, m) - wa));
                    moved = std::max(moved, std::abs(x(i, m) - wx));
                    a(i, m) = wa;
                    x(i, m) = wx;
                }

            for (size_t h = 0; h < halfspaces_.size(); ++h) {  // cap halfspaces
                const Halfspace& hs = halfspaces_[h];
                double dot = e_half_[h] * hs.norm2;
                for (const auto& [row, f] : hs.coef) dot += f * x(row, hs.m);
                double lambda = 0.0;
                if (dot > hs.rhs) lambda = (dot - hs.rhs) / hs.norm2;
                const double shift = e_half_[h] - lambda;
                if (shift != 0.0) {
                    for (const auto& [row, f] : hs.coef) {
                        const double nx = x(row, hs.m) + shift * f;
                        moved = std::max(moved, std::abs(nx - x(row, hs.m)));
                        x(row, hs.m) = nx;
                    }
                }
                e_half_[h] = lambda;
            }

            if (moved <= opt_->dykstra_tol && sweep > 0) break;
        }
        // scrub Dykstra-level residue
        for (double& v : x.data())
            if (v < 0.0) v = 0.0;
        for (double& v : a.data()) v = std::min(std::max(v, 0.0), 1.0);
    }

  private:
    const RaProblem* prob_ = nullptr;
    const SolverOptions* opt_ = nullptr;
    std::vector<Halfspace> halfspaces_;
    Tensor2 e_row_, e_col_, e_wa_, e_wx_;
    std::vector<double> e_half_;
    std::vector<double> buf_;
    std::vector<double> sorted_;
};

}  // namespace detail

/// Project an arbitrary (a_frac, x) pair onto the relaxed feasible set.
inline void project_feasible(const RaProblem& prob, Tensor2& a, Tensor2& x,
                             const SolverOptions& opt = {}) {
    detail::RelaxedProjector proj;
    proj.init(prob, opt);
    proj.project(a, x);
}

// ---------------------------------------------------------------------------
// solve_relaxed: projected gradient ascent with backtracking line search
// ---------------------------------------------------------------------------

inline RelaxedSolution solve_relaxed(const RaProblem& prob, const SolverOptions& opt = {},
                                     const RelaxedSolution* warm = nullptr) {
    prob.validate();
    const int s = prob.rows(), m_count = prob.n_subbands;
    const double eps = opt.smoothing_eps;

    detail::RelaxedProjector proj;
    proj.init(prob, opt);

    Tensor2 a(s, m_count, 1.0 / m_count), x(s, m_count, 0.0);
    if (warm && warm->a_frac.rows() == s && warm->a_frac.cols() == m_count) {
        a = warm->a_frac;
        x = warm->x;
    }
    proj.project(a, x);

    Tensor2 ga(s, m_count), gx(s, m_count), ta(s, m_count), tx(s, m_count);
    double obj = relaxed_objective(prob, a, x, eps);
    double step = 1.0;
    bool converged = false;
    int iters_done = 0;
    int stall = 0;

    auto stationarity = [&]() {
        relaxed_gradient(prob, a, x, eps, ga, gx);
        double gmax = 0.0;
        for (double v : ga.data()) gmax = std::max(gmax, std::abs(v));
        for (double v : gx.data()) gmax = std::max(gmax, std::abs(v));
        ta = a;
        tx = x;
        for (size_t i = 0; i < ta.data().size(); ++i) ta.data()[i] += ga.data()[i];
        for (size_t i = 0; i < tx.data().size(); ++i) tx.data()[i] += gx.data()[i];
        proj.project(ta, tx);
        double r = 0.0;
        for (size_t i = 0; i < ta.data().size(); ++i)
            r = std::max(r, std::abs(ta.data()[i] - a.data()[i]));
        for (size_t i = 0; i < tx.data().size(); ++i)
            r = std::max(r, std::abs(tx.data()[i] - x.data()[i]));
        return r / (1.0 + gmax);
    };

    for (int it = 1; it <= opt.max_iters; ++it) {
        iters_done = it;
        relaxed_gradient(prob, a, x, eps, ga, gx);

        bool accepted = false;
        double tobj = obj;
        for (int ls = 0; ls < 60; ++ls) {
            for (size_t i = 0; i < ta.data().size(); ++i)
                ta.data()[i] = a.data()[i] + step * ga.data()[i];
            for (size_t i = 0; i < tx.data().size(); ++i)
                tx.data()[i] = x.data()[i] + step * gx.data()[i];
            proj.project(ta, tx);
            tobj = relaxed_objective(prob, ta, tx, eps);
            double inner = 0.0;
            for (size_t i = 0; i < ta.data().size(); ++i)
                inner += ga.data()[i] * (ta.data()[i] - a.data()[i]);
            for (size_t i = 0; i < tx.data().size(); ++i)
                inner += gx.data()[i] * (tx.data()[i] - x.data()[i]);
            if (tobj >= obj + 1e-4 * inner) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = stationarity() <= opt.tol;
            break;
        }

        double move = 0.0;
        for (size_t i = 0; i < ta.data().size(); ++i)
            move = std::max(move, std::abs(ta.data()[i] - a.data()[i]));
        for (size_t i = 0; i < tx.data().size(); ++i)
            move = std::max(move, std::abs(tx.data()[i] - x.data()[i]));
        a = ta;
        x = tx;
        obj = tobj;
        stall = (move <= 1e-13 * (1.0 + std::abs(obj))) ? stall + 1 : 0;
        step = std::min(step * 1.6, 1e8);

        if (stall >= 3 || it % 10 == 0) {
            if (stationarity() <= opt.tol) {
                converged = true;
                break;
            }
            if (stall >= 3) break;
        }
    }

    RelaxedSolution out;
    out.a_frac = a;
    out.x = x;
    out.objective_value = relaxed_objective(prob, a, x, eps);
    out.iterations = iters_done;
    out.converged = converged;
    if (!converged) {
        const double r = stationarity();
        if (r <= opt.tol) {
            out.converged = true;
        } else {
            throw SolverError("solve_relaxed: stationarity residual " + std::to_string(r) +
                                  " above tolerance after " + std::to_string(iters_done) +
                                  " iterations",
                              out);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rounding: per-beam maximum-weight perfect matching on a_frac weights
// ---------------------------------------------------------------------------

inline Tensor2i round_assignment(const RelaxedSolution& rs, const RaProblem& prob) {
    const int s = prob.rows(), m_count = prob.n_subbands;
    Tensor2i a(s, m_count, 0);
    std::vector<double> w(static_cast<size_t>(m_count) * m_count);
    for (const auto& blk : prob.beams) {
        for (int r = 0; r < m_count; ++r)
            for (int m = 0; m < m_count; ++m)
                w[static_cast<size_t>(r) * m_count + m] = rs.a_frac(blk[r], m);
        const std::vector<int> match = lex_max_weight_matching(w, m_count);
        for (int r = 0; r < m_count; ++r) a(blk[r], match[r]) = 1;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Power-only solve with the assignment fixed
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> assigned_subband(const Tensor2i& a, const RaProblem& prob) {
    const int s = prob.rows(), m_count = prob.n_subbands;
    if (a.rows() != s || a.cols() != m_count)
        throw ValidationError("power solve: assignment shape mismatch");
    std::vector<int> m_of(s, -1);
    for (int i = 0; i < s; ++i) {
        int count = 0;
        for (int m = 0; m < m_count; ++m)
            if (a(i, m) != 0) {
                if (a(i, m) != 1) throw ValidationError("power solve: assignment must be 0/1");
                m_of[i] = m;
                ++count;
            }
        if (count != 1)
            throw ValidationError("power solve: each SU needs exactly one subband");
    }
    for (const auto& blk : prob.beams) {
        std::vector<int> hits(m_count, 0);
        for (int r : blk) hits[m_of[r]] += 1;
        for (int m = 0; m < m_count; ++m)
            if (hits[m] != 1)
                throw ValidationError("power solve: each beam subband needs exactly one SU");
    }
    return m_of;
}

struct PowerEval {
    double value = 0.0;
    std::vector<double> grad;
};

inline double power_objective_grad(const RaProblem& prob, const std::vector<int>& m_of,
                                   const std::vector<double>& p, std::vector<double>* grad) {
    const int s = prob.rows(), l_count = prob.pus();
    double val = 0.0;
    Tensor2 inter;
    if (prob.prox_weight > 0.0) {
        inter = Tensor2(l_count, prob.n_subbands);
        for (int i = 0; i < s; ++i)
            for (int l = 0; l < l_count; ++l)
                inter(l, m_of[i]) += prob.gain_pu(i, l, m_of[i]) * p[i];
    }
    for (int i = 0; i < s; ++i) {
        const int m = m_of[i];
        const double g = prob.gain_sat(i, m);
        val += std::log2(1.0 + g * p[i]);
        double gr = g / ((1.0 + g * p[i]) * kLn2);
        if (prob.extra_linear.size()) {
            val += prob.extra_linear(i, m) * p[i];
            gr += prob.extra_linear(i, m);
        }
        if (prob.prox_weight > 0.0) {
            double acc = 0.0;
            for (int l = 0; l < l_count; ++l)
                acc += prob.gain_pu(i, l, m) * (inter(l, m) - prob.prox_target(l, m));
            gr -= prob.prox_weight * acc;
        }
        if (grad) (*grad)[i] = gr;
    }
    if (prob.prox_weight > 0.0)
        for (int l = 0; l < l_count; ++l)
            for (int m = 0; m < prob.n_subbands; ++m) {
                const double d = inter(l, m) - prob.prox_target(l, m);
                val -= 0.5 * prob.prox_weight * d * d;
            }
    return val;
}

// Dykstra over the [0,p_max] box and the active cap halfspaces in p-space.
class PowerProjector {
  public:
    void init(const RaProblem& prob, const std::vector<int>& m_of, const SolverOptions& opt) {
        prob_ = &prob;
        opt_ = &opt;
        const int s = prob.rows();
        halfspaces_.clear();
        for (int l = 0; l < prob.pus(); ++l)
            for (int m = 0; m < prob.n_subbands; ++m) {
                Halfspace h;
                h.m = m;
                h.rhs = prob.thresholds(l, m);
                double reach = 0.0;
                for (int i = 0; i < s; ++i)
                    if (m_of[i] == m) {
                        const double f = prob.gain_pu(i, l, m);
                        if (f > 0.0) {
                            h.coef.emplace_back(i, f);
                            h.norm2 += f * f;
                            reach += f * prob.p_max;
                        }
                    }
                if (!h.coef.empty() && reach > h.rhs) halfspaces_.push_back(std::move(h));
            }
        e_box_.assign(s, 0.0);
        e_half_.assign(halfspaces_.size(), 0.0);
    }

    void project(std::vector<double>& p) {
        std::fill(e_box_.begin(), e_box_.end(), 0.0);
        std::fill(e_half_.begin(), e_half_.end(), 0.0);
        for (int sweep = 0; sweep < opt_->dykstra_max_sweeps; ++sweep) {
            double moved = 0.0;
            for (size_t i = 0; i < p.size(); ++i) {
                const double w = p[i] + e_box_[i];
                const double np = std::min(std::max(w, 0.0), prob_->p_max);
                e_box_[i] = w - np;
                moved = std::max(moved, std::abs(np - p[i]));
                p[i] = np;
            }
            for (size_t h = 0; h < halfspaces_.size(); ++h) {
                const Halfspace& hs = halfspaces_[h];
                double dot = e_half_[h] * hs.norm2;
                for (const auto& [row, f] : hs.coef) dot += f * p[row];
                double lambda = 0.0;
                if (dot > hs.rhs) lambda = (dot - hs.rhs) / hs.norm2;
                const double shift = e_half_[h] - lambda;
                if (shift != 0.0)
                    for (const auto& [row, f] : hs.coef) {
                        const double np = p[row] + shift * f;
                        moved = std::max(moved, std::abs(np - p[row]));
                        p[row] = np;
                    }
                e_half_[h] = lambda;
            }
            if (moved <= opt_->dykstra_tol && sweep > 0) break;
        }
        for (double& v : p) v = std::min(std::max(v, 0.0), prob_->p_max);
    }

  private:
    const RaProblem* prob_ = nullptr;
    const SolverOptions* opt_ = nullptr;
    std::vector<Halfspace> halfspaces_;
    std::vector<double> e_box_, e_half_;
};

}  // namespace detail

/// Exact cap enforcement: scale all powers by min(1, min_lm t_lm / I_lm).
inline void enforce_interference_caps(const RaProblem& prob, const std::vector<int>& m_of,
                                      std::vector<double>& p) {
    const int s = prob.rows();
    double scale = 1.0;
    for (int l = 0; l < prob.pus(); ++l)
        for (int m = 0; m < prob.n_subbands; ++m) {
            double inter = 0.0;
            for (int i = 0; i < s; ++i)
                if (m_of[i] == m) inter += prob.gain_pu(i, l, m) * p[i];
            if (inter > prob.thresholds(l, m)) {
                scale = std::min(scale, inter > 0.0 ? prob.thresholds(l, m) / inter : 1.0);
            }
        }
    if (scale < 1.0)
        for (double& v : p) v *= scale;
}

inline Allocation solve_power_given_assignment(const Tensor2i& a, const RaProblem& prob,
                                               const SolverOptions& opt = {},
                                               const std::vector<double>* warm = nullptr) {
    prob.validate();
    const int s = prob.rows(), m_count = prob.n_subbands;
    const std::vector<int> m_of = detail::assigned_subband(a, prob);

    detail::PowerProjector proj;
    proj.init(prob, m_of, opt);

    std::vector<double> p(s, 0.0);
    if (warm && static_cast<int>(warm->size()) == s) p = *warm;
    proj.project(p);

    std::vector<double> grad(s), tp(s);
    double obj = detail::power_objective_grad(prob, m_of, p, nullptr);
    double step = 1.0;
    bool converged = false;
    int iters_done = 0;
    int stall = 0;

    auto stationarity = [&]() {
        detail::power_objective_grad(prob, m_of, p, &grad);
        double gmax = 0.0;
        for (double v : grad) gmax = std::max(gmax, std::abs(v));
        tp = p;
        for (int i = 0; i < s; ++i) tp[i] += grad[i];
        proj.project(tp);
        double r = 0.0;
        for (int i = 0; i < s; ++i) r = std::max(r, std::abs(tp[i] - p[i]));
        return r / (1.0 + gmax);
    };

    for (int it = 1; it <= opt.max_iters; ++it) {
        iters_done = it;
        detail::power_objective_grad(prob, m_of, p, &grad);
        bool accepted = false;
        double tobj = obj;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < s; ++i) tp[i] = p[i] + step * grad[i];
            proj.project(tp);
            tobj = detail::power_objective_grad(prob, m_of, tp, nullptr);
            double inner = 0.0;
            for (int i = 0; i < s; ++i) inner += grad[i] * (tp[i] - p[i]);
            if (tobj >= obj + 1e-4 * inner) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = stationarity() <= opt.tol;
            break;
        }
        double move = 0.0;
        for (int i = 0; i < s; ++i) move = std::max(move, std::abs(tp[i] - p[i]));
        p = tp;
        obj = tobj;
        stall = (move <= 1e-13 * (1.0 + std::abs(obj))) ? stall + 1 : 0;
        step = std::min(step * 1.6, 1e8);
        if (stall >= 3 || it % 10 == 0) {
            if (stationarity() <= opt.tol) {
                converged = true;
                break;
            }
            if (stall >= 3) break;
        }
    }
    if (!converged && stationarity() > opt.tol) {
        RelaxedSolution best;
        best.x = Tensor2(s, m_count, 0.0);
        best.a_frac = Tensor2(s, m_count, 0.0);
        for (int i = 0; i < s; ++i) {
            best.a_frac(i, m_of[i]) = 1.0;
            best.x(i, m_of[i]) = p[i];
        }
        best.iterations = iters_done;
        throw SolverError("solve_power_given_assignment: no convergence", best);
    }

    enforce_interference_caps(prob, m_of, p);

    Allocation out;
    out.a = a;
    out.p = Tensor2(s, m_count, 0.0);
    for (int i = 0; i < s; ++i) out.p(i, m_of[i]) = p[i];
    return out;
}

/// relax -> round -> power pipeline used by every strategy.
struct PipelineResult {
    Allocation alloc;
    RelaxedSolution relaxed;
};

inline PipelineResult solve_round_resolve(const RaProblem& prob, const SolverOptions& opt = {},
                                          const RelaxedSolution* warm = nullptr) {
    PipelineResult out;
    out.relaxed = solve_relaxed(prob, opt, warm);
    const Tensor2i a = round_assignment(out.relaxed, prob);
    const std::vector<int> m_of = detail::assigned_subband(a, prob);
    std::vector<double> warm_p(prob.rows(), 0.0);
    for (int i = 0; i < prob.rows(); ++i) {
        const double af = out.relaxed.a_frac(i, m_of[i]);
        warm_p[i] = std::min(prob.p_max, out.relaxed.x(i, m_of[i]) / std::max(af, 0.25));
    }
    out.alloc = solve_power_given_assignment(a, prob, opt, &warm_p);
    return out;
}

}  // namespace cogsat
