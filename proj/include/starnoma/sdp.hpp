// SPDX-License-Identifier: Apache-2.0
//
// starnoma: STAR-RIS assisted uplink NOMA total-power minimization toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Dense linear SDP solver: linear objective over real symmetric PSD blocks
// plus nonnegative scalar variables, under linear equality and inequality
// constraints. Primal-dual path following with Nesterov-Todd scaling and a
// Mehrotra-style corrector; inequalities are absorbed via slack scalars.

#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starnoma/common.hpp"

namespace starnoma {

enum class SdpStatus { optimal, infeasible, max_iter };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::infeasible: return "infeasible";
        default: return "max-iter";
    }
}

/// Linear functional over the variable tuple (PSD blocks, nonneg scalars).
/// A 0x0 block matrix or empty scalar vector contributes nothing.
struct SdpTerm {
    std::vector<Mat> blocks;
    Vec scalars;
};

struct SdpConstraint {
    SdpTerm lhs;
    double rhs = 0.0;
};

struct SdpProblem {
    std::vector<int> block_dims;
    int n_scalars = 0;
    SdpTerm objective;
    std::vector<SdpConstraint> equalities;    // <lhs, x> == rhs
    std::vector<SdpConstraint> inequalities;  // <lhs, x> <= rhs

    SdpTerm zero_term() const {
        SdpTerm t;
        t.blocks.resize(block_dims.size());
        for (std::size_t b = 0; b < block_dims.size(); ++b)
            t.blocks[b] = Mat::Zero(block_dims[b], block_dims[b]);
        t.scalars = Vec::Zero(n_scalars);
        return t;
    }
};

struct SdpOptions {
    double rel_gap_tol = 1e-6;
    double feas_tol = 1e-7;
    int max_iters = 100;
    double step_scale = 0.98;
    double kkt_reg = 1e-9;
    double kkt_reg_retry = 1e-7;
    bool keep_trace = false;
};

struct SdpIterateStats {
    double primal_obj, dual_obj, mu, primal_res, dual_res;
};

struct SdpSolution {
    std::vector<Mat> blocks;
    Vec scalars;
    double objective = std::numeric_limits<double>::quiet_NaN();
    SdpStatus status = SdpStatus::max_iter;
    int iterations = 0;
    double primal_residual = std::numeric_limits<double>::infinity();
    double dual_residual = std::numeric_limits<double>::infinity();
    double rel_gap = std::numeric_limits<double>::infinity();
    Vec eq_duals, ineq_duals;
    std::vector<SdpIterateStats> trace;
};

namespace detail {

struct CoeffBlock {
    enum class Kind { zero, diag, dense };
    Kind kind = Kind::zero;
    Mat dense;
    std::vector<std::pair<int, double>> diag;  // (index, value)
};

inline CoeffBlock classify_block(const Mat& a, int dim) {
    CoeffBlock cb;
    if (a.size() == 0) return cb;
    if (a.rows() != dim || a.cols() != dim)
        throw std::invalid_argument("sdp: coefficient block dimension mismatch");
    double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("sdp: coefficient block is not symmetric");
    bool diagonal = true;
    for (int j = 0; j < dim && diagonal; ++j)
        for (int i = 0; i < dim; ++i)
            if (i != j && a(i, j) != 0.0) {
                diagonal = false;
                break;
            }
    if (diagonal) {
        for (int i = 0; i < dim; ++i)
            if (a(i, i) != 0.0) cb.diag.emplace_back(i, a(i, i));
        cb.kind = cb.diag.empty() ? CoeffBlock::Kind::zero : CoeffBlock::Kind::diag;
    } else {
        cb.kind = CoeffBlock::Kind::dense;
        cb.dense = 0.5 * (a + a.transpose());
    }
    return cb;
}

inline double coeff_inner(const CoeffBlock& cb, const Mat& x) {
    switch (cb.kind) {
        case CoeffBlock::Kind::zero: return 0.0;
        case CoeffBlock::Kind::diag: {
            double v = 0.0;
            for (auto& [i, val] : cb.diag) v += val * x(i, i);
            return v;
        }
        default: return (cb.dense.array() * x.array()).sum();
    }
}

inline void coeff_axpy(const CoeffBlock& cb, double alpha, Mat& out) {
    switch (cb.kind) {
        case CoeffBlock::Kind::zero: return;
        case CoeffBlock::Kind::diag:
            for (auto& [i, val] : cb.diag) out(i, i) += alpha * val;
            return;
        default: out.noalias() += alpha * cb.dense;
    }
}

class SdpIpm {
  public:
    SdpIpm(const SdpProblem& prob, const SdpOptions& opts) : opts_(opts) {
        nb_ = static_cast<int>(prob.block_dims.size());
        dims_ = prob.block_dims;
        for (int d : dims_)
            if (d < 1 || d > 128) throw std::invalid_argument("sdp: block dims must be in [1,128]");
        if (prob.n_scalars < 0) throw std::invalid_argument("sdp: negative scalar count");
        n_eq_ = static_cast<int>(prob.equalities.size());
        n_ineq_ = static_cast<int>(prob.inequalities.size());
        m_ = n_eq_ + n_ineq_;
        if (m_ == 0) throw std::invalid_argument("sdp: at least one constraint required");
        p_ = prob.n_scalars + n_ineq_;

        auto check_scalars = [&](const Vec& s) {
            if (s.size() != 0 && s.size() != prob.n_scalars)
                throw std::invalid_argument("sdp: scalar coefficient length mismatch");
        };
        auto check_term = [&](const SdpTerm& t) {
            if (!t.blocks.empty() && static_cast<int>(t.blocks.size()) != nb_)
                throw std::invalid_argument("sdp: term block count mismatch");
            check_scalars(t.scalars);
        };

        // Objective.
        check_term(prob.objective);
        C_.resize(nb_);
        for (int b = 0; b < nb_; ++b) {
            const Mat* src = prob.objective.blocks.empty() ? nullptr : &prob.objective.blocks[b];
            if (src == nullptr || src->size() == 0)
                C_[b] = Mat::Zero(dims_[b], dims_[b]);
            else {
                if (src->rows() != dims_[b] || src->cols() != dims_[b])
                    throw std::invalid_argument("sdp: objective block dimension mismatch");
                C_[b] = 0.5 * (*src + src->transpose());
            }
        }
        c_lp_ = Vec::Zero(p_);
        if (prob.objective.scalars.size() != 0)
            c_lp_.head(prob.n_scalars) = prob.objective.scalars;

        // Constraints; inequality j gets slack variable n_scalars + j.
        A_.resize(m_);
        A_lp_ = Mat::Zero(m_, p_);
        b_ = Vec::Zero(m_);
        for (int j = 0; j < m_; ++j) {
            const SdpConstraint& con =
                j < n_eq_ ? prob.equalities[j] : prob.inequalities[j - n_eq_];
            check_term(con.lhs);
            A_[j].resize(nb_);
            for (int b = 0; b < nb_; ++b)
                A_[j][b] = con.lhs.blocks.empty() ? CoeffBlock{}
                                                  : classify_block(con.lhs.blocks[b], dims_[b]);
            if (con.lhs.scalars.size() != 0) A_lp_.row(j).head(prob.n_scalars) = con.lhs.scalars;
            if (j >= n_eq_) A_lp_(j, prob.n_scalars + (j - n_eq_)) = 1.0;
            b_(j) = con.rhs;
        }

        nu_ = p_;
        for (int d : dims_) nu_ += d;

        c_norm_ = c_lp_.norm();
        for (auto& cb : C_) c_norm_ = std::hypot(c_norm_, cb.norm());
        b_norm_ = b_.norm();
        n_scalars_ = prob.n_scalars;
    }

    SdpSolution run() {
        init_point();
        SdpSolution sol;
        std::vector<Mat> T(nb_);
        int iter = 0;
        for (; iter <= opts_.max_iters; ++iter) {
            Vec r_p = b_ - apply_A(X_, x_lp_);
            std::vector<Mat> R_d(nb_);
            Vec rd_lp;
            dual_residual(R_d, rd_lp);

            double pobj = primal_obj();
            double dobj = b_.dot(y_);
            double gap_abs = std::abs(pobj - dobj);
            double rel_gap = gap_abs / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));
            double pres = r_p.norm() / (1.0 + b_norm_);
            double dres = residual_norm(R_d, rd_lp) / (1.0 + c_norm_);
            if (opts_.keep_trace) sol.trace.push_back({pobj, dobj, mu(), pres, dres});

            if (pres <= opts_.feas_tol && dres <= opts_.feas_tol && rel_gap <= opts_.rel_gap_tol) {
                sol.status = SdpStatus::optimal;
                finish(sol, iter, pobj, pres, dres, rel_gap);
                return sol;
            }
            // Farkas-style divergence: an exploding dual objective with the
            // iterate ray nearly satisfying At(y) + S = 0 certifies primal
            // infeasibility.
            if (dobj > 1e9 * (1.0 + c_norm_)) {
                sol.status = SdpStatus::infeasible;
                finish(sol, iter, pobj, pres, dres, rel_gap);
                return sol;
            }
            if (iter == opts_.max_iters) break;

            compute_nt_scaling();
            assemble_schur();

            // Predictor (affine) pass.
            std::vector<Mat> rc_b(nb_);
            for (int b = 0; b < nb_; ++b) rc_b[b] = -X_[b];
            Vec rc_lp = -x_lp_;
            Direction aff = solve_direction(rc_b, rc_lp, r_p, R_d, rd_lp);
            double ap_aff = primal_step(aff);
            double ad_aff = dual_step(aff);

            double mu_now = mu();
            double mu_aff = complementarity_after(aff, ap_aff, ad_aff) / nu_;
            double sigma = std::pow(std::max(0.0, mu_aff) / mu_now, 3.0);
            sigma = std::min(std::max(sigma, 1e-8), 0.999);

            // Corrector pass in the scaled space.
            for (int b = 0; b < nb_; ++b) {
                Mat dXsc = Ginv_[b] * aff.dX[b] * Ginv_[b].transpose();
                Mat dSsc = G_[b].transpose() * aff.dS[b] * G_[b];
                Mat prod = dXsc * dSsc;
                Mat rsc = -0.5 * (prod + prod.transpose());
                const Vec& lam = lam_[b];
                for (int i = 0; i < dims_[b]; ++i) rsc(i, i) += sigma * mu_now - lam(i) * lam(i);
                Mat t(dims_[b], dims_[b]);
                for (int j2 = 0; j2 < dims_[b]; ++j2)
                    for (int i2 = 0; i2 < dims_[b]; ++i2)
                        t(i2, j2) = 2.0 * rsc(i2, j2) / (lam(i2) + lam(j2));
                rc_b[b] = G_[b] * t * G_[b].transpose();
                rc_b[b] = 0.5 * (rc_b[b] + rc_b[b].transpose()).eval();
            }
            for (int i = 0; i < p_; ++i) {
                double dxsc = aff.dx(i) / w_lp_(i);
                double dssc = w_lp_(i) * aff.ds(i);
                double rsc = sigma * mu_now - lam_lp_(i) * lam_lp_(i) - dxsc * dssc;
                rc_lp(i) = w_lp_(i) * rsc / lam_lp_(i);
            }
            Direction dir = solve_direction(rc_b, rc_lp, r_p, R_d, rd_lp);
            double ap = primal_step(dir);
            double ad = dual_step(dir);

            for (int b = 0; b < nb_; ++b) {
                X_[b] += ap * dir.dX[b];
                X_[b] = 0.5 * (X_[b] + X_[b].transpose()).eval();
                S_[b] += ad * dir.dS[b];
                S_[b] = 0.5 * (S_[b] + S_[b].transpose()).eval();
            }
            x_lp_ += ap * dir.dx;
            s_lp_ += ad * dir.ds;
            y_ += ad * dir.dy;
        }
        sol.status = SdpStatus::max_iter;
        Vec r_p = b_ - apply_A(X_, x_lp_);
        std::vector<Mat> R_d(nb_);
        Vec rd_lp;
        dual_residual(R_d, rd_lp);
        double pobj = primal_obj();
        double dobj = b_.dot(y_);
        finish(sol, iter, pobj, r_p.norm() / (1.0 + b_norm_),
               residual_norm(R_d, rd_lp) / (1.0 + c_norm_),
               std::abs(pobj - dobj) / (1.0 + std::max(std::abs(pobj), std::abs(dobj))));
        return sol;
    }

  private:
    struct Direction {
        std::vector<Mat> dX, dS;
        Vec dx, ds, dy;
    };

    void init_point() {
        double tau = std::max(1.0, b_.size() ? b_.cwiseAbs().maxCoeff() : 1.0);
        X_.resize(nb_);
        S_.resize(nb_);
        for (int b = 0; b < nb_; ++b) {
            X_[b] = tau * Mat::Identity(dims_[b], dims_[b]);
            S_[b] = std::max(1.0, c_norm_) * Mat::Identity(dims_[b], dims_[b]);
        }
        x_lp_ = Vec::Constant(p_, tau);
        s_lp_ = Vec::Constant(p_, std::max(1.0, c_norm_));
        y_ = Vec::Zero(m_);
    }

    double mu() const {
        double dot = x_lp_.dot(s_lp_);
        for (int b = 0; b < nb_; ++b) dot += (X_[b].array() * S_[b].array()).sum();
        return dot / nu_;
    }

    double primal_obj() const {
        double v = c_lp_.dot(x_lp_);
        for (int b = 0; b < nb_; ++b) v += (C_[b].array() * X_[b].array()).sum();
        return v;
    }

    Vec apply_A(const std::vector<Mat>& Xb, const Vec& xlp) const {
        Vec out = A_lp_ * xlp;
        for (int j = 0; j < m_; ++j)
            for (int b = 0; b < nb_; ++b) out(j) += coeff_inner(A_[j][b], Xb[b]);
        return out;
    }

    void apply_At(const Vec& y, std::vector<Mat>& out_b, Vec& out_lp) const {
        out_b.resize(nb_);
        for (int b = 0; b < nb_; ++b) out_b[b] = Mat::Zero(dims_[b], dims_[b]);
        for (int j = 0; j < m_; ++j)
            if (y(j) != 0.0)
                for (int b = 0; b < nb_; ++b) coeff_axpy(A_[j][b], y(j), out_b[b]);
        out_lp = A_lp_.transpose() * y;
    }

    void dual_residual(std::vector<Mat>& R_d, Vec& rd_lp) const {
        std::vector<Mat> aty;
        Vec aty_lp;
        apply_At(y_, aty, aty_lp);
        R_d.resize(nb_);
        for (int b = 0; b < nb_; ++b) R_d[b] = C_[b] - aty[b] - S_[b];
        rd_lp = c_lp_ - aty_lp - s_lp_;
    }

    static double residual_norm(const std::vector<Mat>& R_d, const Vec& rd_lp) {
        double v = rd_lp.squaredNorm();
        for (auto& r : R_d) v += r.squaredNorm();
        return std::sqrt(v);
    }

    void compute_nt_scaling() {
        G_.resize(nb_);
        Ginv_.resize(nb_);
        Wnt_.resize(nb_);
        lam_.resize(nb_);
        Lx_.resize(nb_);
        for (int b = 0; b < nb_; ++b) {
            Eigen::LLT<Mat> lltx(X_[b]);
            if (lltx.info() != Eigen::Success) lltx.compute(regularized(X_[b]));
            Lx_[b] = lltx.matrixL();
            Mat inner = Lx_[b].transpose() * S_[b] * Lx_[b];
            inner = 0.5 * (inner + inner.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Mat> es(inner);
            Vec d = es.eigenvalues().cwiseMax(1e-300);
            Vec dq = d.array().pow(0.25).matrix();
            G_[b] = Lx_[b] * es.eigenvectors() * dq.cwiseInverse().asDiagonal();
            Mat linv = Lx_[b].template triangularView<Eigen::Lower>().solve(
                Mat::Identity(dims_[b], dims_[b]));
            Ginv_[b] = dq.asDiagonal() * es.eigenvectors().transpose() * linv;
            Wnt_[b] = G_[b] * G_[b].transpose();
            lam_[b] = d.array().sqrt().matrix();
        }
        w_lp_ = (x_lp_.array() / s_lp_.array()).sqrt().matrix();
        lam_lp_ = (x_lp_.array() * s_lp_.array()).sqrt().matrix();
    }

    static Mat regularized(const Mat& x) {
        double bump = 1e-12 * (1.0 + x.diagonal().cwiseAbs().maxCoeff());
        return x + bump * Mat::Identity(x.rows(), x.cols());
    }

    void assemble_schur() {
        Mat M = Mat::Zero(m_, m_);
        for (int b = 0; b < nb_; ++b) {
            std::vector<int> dense_idx, diag_idx;
            for (int j = 0; j < m_; ++j) {
                if (A_[j][b].kind == CoeffBlock::Kind::dense) dense_idx.push_back(j);
                else if (A_[j][b].kind == CoeffBlock::Kind::diag) diag_idx.push_back(j);
            }
            const Mat& W = Wnt_[b];
            for (int j : dense_idx) {
                Mat T = W * A_[j][b].dense * W;
                for (int k : dense_idx)
                    if (k <= j) M(j, k) += (A_[k][b].dense.array() * T.array()).sum();
                for (int k : diag_idx) {
                    double v = 0.0;
                    for (auto& [i, val] : A_[k][b].diag) v += val * T(i, i);
                    if (k <= j) M(j, k) += v;
                    else M(k, j) += v;
                }
            }
            for (std::size_t a = 0; a < diag_idx.size(); ++a)
                for (std::size_t c = 0; c <= a; ++c) {
                    int j = diag_idx[a], k = diag_idx[c];
                    double v = 0.0;
                    for (auto& [i1, v1] : A_[j][b].diag)
                        for (auto& [i2, v2] : A_[k][b].diag) v += v1 * v2 * W(i1, i2) * W(i1, i2);
                    M(std::max(j, k), std::min(j, k)) += v;
                }
        }
        if (p_ > 0)
            M.noalias() += A_lp_ * w_lp_.array().square().matrix().asDiagonal() * A_lp_.transpose();
        M = M.selfadjointView<Eigen::Lower>();
        M.diagonal().array() += opts_.kkt_reg;
        kkt_.compute(M);
        if (kkt_.info() != Eigen::Success) {
            M.diagonal().array() += opts_.kkt_reg_retry - opts_.kkt_reg;
            kkt_.compute(M);
            if (kkt_.info() != Eigen::Success)
                throw std::runtime_error("sdp: KKT system singular after regularization retries");
        }
    }

    // Solves  A(dX) = r_p,  At(dy) + dS = R_d,  dX + H(dS) = Rc.
    Direction solve_direction(const std::vector<Mat>& rc_b, const Vec& rc_lp, const Vec& r_p,
                              const std::vector<Mat>& R_d, const Vec& rd_lp) {
        std::vector<Mat> t_b(nb_);
        for (int b = 0; b < nb_; ++b) t_b[b] = rc_b[b] - Wnt_[b] * R_d[b] * Wnt_[b];
        Vec t_lp = rc_lp - (w_lp_.array().square() * rd_lp.array()).matrix();
        Vec rhs = r_p - apply_A(t_b, t_lp);
        Direction dir;
        dir.dy = kkt_.solve(rhs);
        std::vector<Mat> aty;
        Vec aty_lp;
        apply_At(dir.dy, aty, aty_lp);
        dir.dS.resize(nb_);
        dir.dX.resize(nb_);
        for (int b = 0; b < nb_; ++b) {
            dir.dS[b] = R_d[b] - aty[b];
            dir.dS[b] = 0.5 * (dir.dS[b] + dir.dS[b].transpose()).eval();
            dir.dX[b] = rc_b[b] - Wnt_[b] * dir.dS[b] * Wnt_[b];
            dir.dX[b] = 0.5 * (dir.dX[b] + dir.dX[b].transpose()).eval();
        }
        dir.ds = rd_lp - aty_lp;
        dir.dx = rc_lp - (w_lp_.array().square() * dir.ds.array()).matrix();
        return dir;
    }

    // Largest step in [0, cap] keeping Z + a dZ positive definite, probed by
    // Cholesky bisection.
    double max_step_psd(const Mat& Z, const Mat& dZ) const {
        double cap = 1.0 / opts_.step_scale;
        auto pd = [&](double a) {
            Mat trial = Z + a * dZ;
            trial = 0.5 * (trial + trial.transpose()).eval();
            return Eigen::LLT<Mat>(trial).info() == Eigen::Success;
        };
        if (pd(cap)) return cap;
        double lo = 0.0, hi = cap;
        for (int it = 0; it < 10; ++it) {
            double mid = 0.5 * (lo + hi);
            (pd(mid) ? lo : hi) = mid;
        }
        return lo;
    }

    static double max_step_nonneg(const Vec& z, const Vec& dz, double cap) {
        double a = cap;
        for (int i = 0; i < z.size(); ++i)
            if (dz(i) < 0.0) a = std::min(a, -z(i) / dz(i));
        return a;
    }

    double primal_step(const Direction& d) const {
        double a = 1.0 / opts_.step_scale;
        for (int b = 0; b < nb_; ++b) a = std::min(a, max_step_psd(X_[b], d.dX[b]));
        a = max_step_nonneg(x_lp_, d.dx, a);
        return std::min(1.0, opts_.step_scale * a);
    }

    double dual_step(const Direction& d) const {
        double a = 1.0 / opts_.step_scale;
        for (int b = 0; b < nb_; ++b) a = std::min(a, max_step_psd(S_[b], d.dS[b]));
        a = max_step_nonneg(s_lp_, d.ds, a);
        return std::min(1.0, opts_.step_scale * a);
    }

    double complementarity_after(const Direction& d, double ap, double ad) const {
        double dot = (x_lp_ + ap * d.dx).dot(s_lp_ + ad * d.ds);
        for (int b = 0; b < nb_; ++b)
            dot += ((X_[b] + ap * d.dX[b]).array() * (S_[b] + ad * d.dS[b]).array()).sum();
        return dot;
    }

    void finish(SdpSolution& sol, int iters, double pobj, double pres, double dres,
                double rel_gap) const {
        sol.blocks = X_;
        sol.scalars = x_lp_.head(n_scalars_);
        sol.objective = pobj;
        sol.iterations = iters;
        sol.primal_residual = pres;
        sol.dual_residual = dres;
        sol.rel_gap = rel_gap;
        sol.eq_duals = y_.head(n_eq_);
        sol.ineq_duals = y_.tail(n_ineq_);
    }

    SdpOptions opts_;
    int nb_ = 0, m_ = 0, p_ = 0, n_eq_ = 0, n_ineq_ = 0, n_scalars_ = 0;
    double nu_ = 0.0, b_norm_ = 0.0, c_norm_ = 0.0;
    std::vector<int> dims_;
    std::vector<std::vector<CoeffBlock>> A_;
    Mat A_lp_;
    Vec b_;
    std::vector<Mat> C_;
    Vec c_lp_;

    std::vector<Mat> X_, S_, G_, Ginv_, Wnt_, Lx_;
    std::vector<Vec> lam_;
    Vec x_lp_, s_lp_, y_, w_lp_, lam_lp_;
    Eigen::LLT<Mat> kkt_;
};

}  // namespace detail

/// Solves a dense linear SDP. Deterministic for identical inputs; returns an
/// explicit infeasible/max-iter status instead of guessing.
inline SdpSolution solve_sdp(const SdpProblem& prob, const SdpOptions& opts = {}) {
    detail::SdpIpm ipm(prob, opts);
    return ipm.run();
}

/// Real symmetric embedding [Re -Im; Im Re] of a Hermitian matrix. The
/// embedding's eigenvalues are those of H with doubled multiplicity.
inline Mat embed_hermitian(const CMat& H) {
    const auto n = H.rows();
    if (H.cols() != n) throw std::invalid_argument("embed_hermitian: matrix must be square");
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + H.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("embed_hermitian: input is not Hermitian");
    CMat Hh = 0.5 * (H + H.adjoint());
    Mat out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = Hh.real();
    out.bottomRightCorner(n, n) = Hh.real();
    out.topRightCorner(n, n) = -Hh.imag();
    out.bottomLeftCorner(n, n) = Hh.imag();
    return out;
}

/// Inverse of embed_hermitian with structure averaging. Throws if the input
/// is further than `tol` (relative) from the embedding structure.
inline CMat extract_complex(const Mat& X, double tol = 1e-6) {
    const auto n2 = X.rows();
    if (X.cols() != n2 || n2 % 2 != 0)
        throw std::invalid_argument("extract_complex: matrix must be square with even dimension");
    const auto n = n2 / 2;
    Mat x11 = X.topLeftCorner(n, n);
    Mat x22 = X.bottomRightCorner(n, n);
    Mat x21 = X.bottomLeftCorner(n, n);
    double scale = 1.0 + X.norm();
    if ((x11 - x22).norm() > tol * scale || (x21 + x21.transpose()).norm() > tol * scale)
        throw std::invalid_argument("extract_complex: embedding structure violated beyond tolerance");
    Mat re = 0.5 * (x11 + x22);
    re = 0.5 * (re + re.transpose()).eval();
    Mat x12 = X.topRightCorner(n, n);
    Mat im = 0.25 * ((x21 - x21.transpose()) + (x12.transpose() - x12));
    return re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
}

/// Text dump of a problem for offline inspection: block sizes, flattened
/// coefficient triplets (upper triangle) and right-hand sides.
inline void dump_sdp_problem(const SdpProblem& p, std::ostream& os) {
    auto write_term = [&](const SdpTerm& t) {
        for (std::size_t b = 0; b < t.blocks.size(); ++b) {
            const Mat& a = t.blocks[b];
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                for (Eigen::Index i = 0; i <= j; ++i)
                    if (a(i, j) != 0.0) {
                        char buf[96];
                        std::snprintf(buf, sizeof(buf), "  block %zu %ld %ld %.17g\n", b,
                                      static_cast<long>(i), static_cast<long>(j), a(i, j));
                        os << buf;
                    }
        }
        for (Eigen::Index i = 0; i < t.scalars.size(); ++i)
            if (t.scalars(i) != 0.0) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "  scalar %ld %.17g\n", static_cast<long>(i),
                              t.scalars(i));
                os << buf;
            }
    };
    os << "sdp-problem v1\n";
    os << "blocks " << p.block_dims.size() << "\n";
    os << "block_dims";
    for (int d : p.block_dims) os << " " << d;
    os << "\n";
    os << "scalars " << p.n_scalars << "\n";
    os << "objective\n";
    write_term(p.objective);
    os << "eq " << p.equalities.size() << "\n";
    for (std::size_t j = 0; j < p.equalities.size(); ++j) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "constraint %zu rhs %.17g\n", j, p.equalities[j].rhs);
        os << buf;
        write_term(p.equalities[j].lhs);
    }
    os << "ineq " << p.inequalities.size() << "\n";
    for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "constraint %zu rhs %.17g\n", j, p.inequalities[j].rhs);
        os << buf;
        write_term(p.inequalities[j].lhs);
    }
}

inline void dump_sdp_problem(const SdpProblem& p, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dump_sdp_problem: cannot open " + path);
    dump_sdp_problem(p, os);
}

}  // namespace starnoma
