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
// Penalty-based alternating optimization for total-power minimization:
// penalized rank-one SDP steps for the surface and receive beamformers,
// closed-form power allocation, and the one-dimensional time-slot search.

#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "starnoma/channel.hpp"
#include "starnoma/common.hpp"
#include "starnoma/model.hpp"
#include "starnoma/sdp.hpp"
#include "starnoma/system_config.hpp"

namespace starnoma {

/// Penalty-loop controls: initial factor, shrink rate, the rank-one
/// constraint-violation target and the inner objective tolerance.
struct PenaltyOptions {
    double mu_init = 10.0;
    double delta = 0.5;
    double eps_violation = 1e-6;
    double eps_inner = 1e-5;
    int max_outer = 30;
    int max_inner = 30;

    void validate() const {
        if (!(mu_init > 0.0)) throw std::invalid_argument("penalty: mu_init must be > 0");
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("penalty: delta must be in (0,1)");
        if (!(eps_violation > 0.0))
            throw std::invalid_argument("penalty: eps_violation must be > 0");
        if (max_outer < 1 || max_inner < 1)
            throw std::invalid_argument("penalty: iteration caps must be >= 1");
    }
};

struct AltOpOptions {
    double outer_tol = 1e-3;
    int max_alt_iters = 50;
    int lambda_grid_points = 200;
    double lambda_guard = 1e-3;

    void validate() const {
        if (!(outer_tol > 0.0)) throw std::invalid_argument("altop: outer_tol must be > 0");
        if (lambda_grid_points < 2)
            throw std::invalid_argument("altop: lambda_grid_points must be >= 2");
        if (max_alt_iters < 1) throw std::invalid_argument("altop: max_alt_iters must be >= 1");
        if (!(lambda_guard >= 0.0)) throw std::invalid_argument("altop: lambda_guard must be >= 0");
    }
};

/// One outer-iteration snapshot for convergence plots.
struct TraceRecord {
    int iteration = 0;           // consecutive from 1
    double total_power_w = 0.0;
    double psum_r_w = 0.0;
    double psum_t_w = 0.0;
    double lambda_r = 0.0;
    double max_violation = 0.0;  // worst trace-minus-spectral gap this iteration
    double wall_ms = 0.0;
};

/// SINR threshold 2^(R/lambda) - 1 a user must reach for its minimum rate.
inline double qos_coefficient(double r_min_bits, double lambda_q) {
    if (!(lambda_q > 0.0) || lambda_q > 1.0)
        throw std::invalid_argument("qos_coefficient: lambda must be in (0,1]");
    if (!(r_min_bits > 0.0)) throw std::invalid_argument("qos_coefficient: rate must be > 0");
    return std::exp2(r_min_bits / lambda_q) - 1.0;
}

inline Vec qos_coefficients(const Vec& r_min_bits, double lambda_q) {
    Vec r(r_min_bits.size());
    for (int k = 0; k < r.size(); ++k) r(k) = qos_coefficient(r_min_bits(k), lambda_q);
    return r;
}

/// Closed-form minimum powers under successive decoding: back-substitution
/// from the last-decoded user upward. Every user's rate lands exactly on its
/// QoS target. Gains and outputs are indexed by decoding position.
inline Vec optimal_powers(const Mat& gains, const Vec& qos_coeffs, double sigma2) {
    const int kq = static_cast<int>(qos_coeffs.size());
    if (gains.rows() != kq || gains.cols() != kq)
        throw std::invalid_argument("optimal_powers: gain matrix shape mismatch");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("optimal_powers: sigma2 must be > 0");
    Vec p(kq);
    for (int k = kq - 1; k >= 0; --k) {
        if (!(gains(k, k) > 0.0))
            throw infeasible_error("power allocation", "nonpositive own-channel gain");
        double interference = 0.0;
        for (int j = k + 1; j < kq; ++j) interference += p(j) * gains(j, k);
        p(k) = qos_coeffs(k) * (interference + sigma2) / gains(k, k);
    }
    return p;
}

/// Minimum feasible sum power at a given time fraction with the normalized
/// power split held fixed; nullopt when the fraction cannot support the QoS
/// targets (infeasibility is a value here, not a fault).
inline std::optional<double> psum_min_of_lambda(double lambda_q, const Vec& p_bar,
                                                const Mat& gains, const Vec& r_min_bits,
                                                double sigma2) {
    if (!(lambda_q > 0.0) || lambda_q > 1.0) return std::nullopt;
    const int kq = static_cast<int>(p_bar.size());
    double worst = 0.0;
    for (int k = 0; k < kq; ++k) {
        double r = qos_coefficient(r_min_bits(k), lambda_q);
        if (!std::isfinite(r)) return std::nullopt;
        double denom = p_bar(k) * gains(k, k) / r;
        for (int j = k + 1; j < kq; ++j) denom -= p_bar(j) * gains(j, k);
        if (!(denom > 0.0)) return std::nullopt;
        worst = std::max(worst, sigma2 / denom);
    }
    return worst;
}

namespace detail {

// max_k R^min_k / Rtilde_k with Rtilde the interference-limited rate; the
// last-decoded user has empty interference, hence ratio zero.
inline double side_min_fraction(const Vec& p_bar, const Mat& gains, const Vec& r_min_bits) {
    const int kq = static_cast<int>(p_bar.size());
    double worst = 0.0;
    for (int k = 0; k < kq; ++k) {
        double interference = 0.0;
        for (int j = k + 1; j < kq; ++j) interference += p_bar(j) * gains(j, k);
        if (interference <= 0.0) continue;  // ratio 0
        double own = p_bar(k) * gains(k, k);
        if (!(own > 0.0)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, r_min_bits(k) / std::log2(1.0 + own / interference));
    }
    return worst;
}

}  // namespace detail

struct LambdaBounds {
    double lambda_min = 0.0;
    double lambda_max = 1.0;
};

/// Feasible band for the reflection-period fraction given both sides' gains
/// and normalized powers.
inline LambdaBounds lambda_bounds(const Vec& p_bar_r, const Mat& gains_r, const Vec& r_min_r,
                                  const Vec& p_bar_t, const Mat& gains_t, const Vec& r_min_t) {
    return {detail::side_min_fraction(p_bar_r, gains_r, r_min_r),
            1.0 - detail::side_min_fraction(p_bar_t, gains_t, r_min_t)};
}

class time_slot_infeasible : public infeasible_error {
  public:
    time_slot_infeasible(double lambda_min, double lambda_max, const std::string& what)
        : infeasible_error("time slot", what), lambda_min_(lambda_min), lambda_max_(lambda_max) {}
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }

  private:
    double lambda_min_, lambda_max_;
};

struct TimeSlotResult {
    double lambda_r = 0.5;
    double psum_r_w = 0.0;
    double psum_t_w = 0.0;
    double total() const { return psum_r_w + psum_t_w; }
};

/// Grid search of the separable time-slot objective over the feasible band;
/// ties resolve to the smaller fraction.
inline TimeSlotResult time_slot_search(const Vec& p_bar_r, const Mat& gains_r, const Vec& r_min_r,
                                       const Vec& p_bar_t, const Mat& gains_t, const Vec& r_min_t,
                                       double sigma2, const AltOpOptions& opts) {
    opts.validate();
    LambdaBounds lb = lambda_bounds(p_bar_r, gains_r, r_min_r, p_bar_t, gains_t, r_min_t);
    double lo = lb.lambda_min + opts.lambda_guard;
    if (!(lo < lb.lambda_max)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "empty feasible interval [%.9g, %.9g]", lb.lambda_min,
                      lb.lambda_max);
        throw time_slot_infeasible(lb.lambda_min, lb.lambda_max, buf);
    }
    const int n = opts.lambda_grid_points;
    TimeSlotResult best;
    bool found = false;
    for (int i = 0; i < n; ++i) {
        double lam = lo + (lb.lambda_max - lo) * i / (n - 1);
        auto pr = psum_min_of_lambda(lam, p_bar_r, gains_r, r_min_r, sigma2);
        auto pt = psum_min_of_lambda(1.0 - lam, p_bar_t, gains_t, r_min_t, sigma2);
        if (!pr || !pt) continue;
        if (!found || *pr + *pt < best.total()) {
            best = {lam, *pr, *pt};
            found = true;
        }
    }
    if (!found)
        throw time_slot_infeasible(lb.lambda_min, lb.lambda_max,
                                   "no feasible grid point in the lambda band");
    return best;
}

struct BeamformingStepResult {
    CMat V;              // relaxed lifted matrix, PSD with unit diagonal
    CVec v;              // extracted unit-modulus vector, first entry at phase 0
    double p_sum_w = 0.0;
    double violation = 0.0;        // trace minus spectral norm at the returned V
    bool penalty_converged = false;
    bool kept_incumbent = false;   // candidate was worse, incoming point returned
    int sdp_solves = 0;
};

struct ReceiveStepResult {
    std::vector<CMat> W;
    std::vector<CVec> w;  // unit l2-norm principal eigenvectors
    double p_sum_w = 0.0;
    double max_violation = 0.0;
    bool penalty_converged = false;
    bool kept_incumbent = false;
    int sdp_solves = 0;
};

namespace detail {

inline CVec principal_eigvec(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
    return es.eigenvectors().col(h.rows() - 1);
}

inline double trace_minus_spectral(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
    return es.eigenvalues().sum() - es.eigenvalues()(h.rows() - 1);
}

inline CVec extract_unit_modulus(const CMat& V) {
    CVec u = principal_eigvec(V);
    const auto m = u.size();
    CVec v(m);
    for (Eigen::Index i = 0; i < m; ++i)
        v(i) = std::abs(u(i)) > 1e-12 ? u(i) / std::abs(u(i)) : cplx(1.0, 0.0);
    v *= std::conj(v(0));  // canonical representative: first entry at phase 0
    return v;
}

// Adds 0.5 * weight * embed(G) so that <coeff, embed(V)> = weight * Tr(G V).
inline void add_hermitian_coeff(Mat& block, const CMat& g, double weight) {
    block += 0.5 * weight * embed_hermitian(g);
}

inline Mat gains_from_v(const std::vector<std::vector<CMat>>& g_q, const CMat& V) {
    const int kq = static_cast<int>(g_q.size());
    Mat h(kq, kq);
    for (int j = 0; j < kq; ++j)
        for (int k = 0; k < kq; ++k) h(j, k) = std::max((g_q[j][k] * V).trace().real(), 0.0);
    return h;
}

inline Mat gains_from_w(const std::vector<CMat>& b, const std::vector<CMat>& w) {
    const int kq = static_cast<int>(b.size());
    Mat h(kq, kq);
    for (int j = 0; j < kq; ++j)
        for (int k = 0; k < kq; ++k) h(j, k) = std::max((b[j] * w[k]).trace().real(), 0.0);
    return h;
}

}  // namespace detail

/// One surface-beamforming update (reflection or transmission side): solves
/// the penalized unit-diagonal SDP until the rank-one violation drops below
/// eps_violation. The returned sum power never exceeds the value at the
/// incoming point; if the penalty loop lands on a worse point the incoming
/// one is kept and flagged.
inline BeamformingStepResult star_beamforming_step(
    const ChannelRealization& chan, Side q, const std::vector<int>& order,
    const std::vector<CMat>& w_fixed, const Vec& p_bar, double lambda_q, const Vec& r_min_bits,
    double sigma2, const CMat& v_init, const PenaltyOptions& opts,
    const SdpOptions& sdp_opts = {}) {
    opts.validate();
    const int kq = static_cast<int>(order.size());
    const int m_elems = static_cast<int>(chan.f_matrix.cols());

    // G[j][k] = A_j^H W_k A_j: H_{j,k} = Tr(V G[j][k]), linear in V.
    std::vector<std::vector<CMat>> G(kq, std::vector<CMat>(kq));
    for (int j = 0; j < kq; ++j) {
        const CMat& a = chan.a(q, order[j]);
        for (int k = 0; k < kq; ++k) G[j][k] = a.adjoint() * w_fixed[k] * a;
    }

    auto psum_at = [&](const CMat& V) {
        return psum_min_of_lambda(lambda_q, p_bar, detail::gains_from_v(G, V), r_min_bits, sigma2);
    };
    std::optional<double> p_in = psum_at(v_init);

    Vec r = qos_coefficients(r_min_bits, lambda_q);
    Mat h_in = detail::gains_from_v(G, v_init);
    double scale = h_in.diagonal().maxCoeff();
    if (!(scale > 0.0))
        throw infeasible_error(std::string("star beamforming side ") + side_name(q),
                               "all own-channel gains vanish at the incoming point");

    SdpProblem prob;
    prob.block_dims = {2 * m_elems};
    prob.n_scalars = 1;
    for (int i = 0; i < m_elems; ++i) {
        SdpConstraint con;
        con.lhs = prob.zero_term();
        con.lhs.blocks[0](i, i) = 0.5;
        con.lhs.blocks[0](m_elems + i, m_elems + i) = 0.5;
        con.rhs = 1.0;
        prob.equalities.push_back(std::move(con));
    }
    for (int k = 0; k < kq; ++k) {
        CMat qk = (p_bar(k) / scale) * G[k][k];
        for (int j = k + 1; j < kq; ++j) qk -= (r(k) * p_bar(j) / scale) * G[j][k];
        SdpConstraint con;
        con.lhs = prob.zero_term();
        detail::add_hermitian_coeff(con.lhs.blocks[0], qk, -1.0);
        con.lhs.scalars(0) = r(k);
        con.rhs = 0.0;
        prob.inequalities.push_back(std::move(con));
    }
    for (int k = 0; k + 1 < kq; ++k) {
        SdpConstraint con;
        con.lhs = prob.zero_term();
        detail::add_hermitian_coeff(con.lhs.blocks[0], (G[k][k] - G[k + 1][k + 1]) / scale, -1.0);
        con.rhs = 0.0;
        prob.inequalities.push_back(std::move(con));
    }

    BeamformingStepResult res;
    CMat v_cur = 0.5 * (v_init + v_init.adjoint());
    double mu = opts.mu_init;
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        double prev_obj = std::numeric_limits<double>::quiet_NaN();
        for (int inner = 0; inner < opts.max_inner; ++inner) {
            CVec e = detail::principal_eigvec(v_cur);
            prob.objective = prob.zero_term();
            prob.objective.blocks[0] = (0.5 / mu) * Mat::Identity(2 * m_elems, 2 * m_elems);
            detail::add_hermitian_coeff(prob.objective.blocks[0], CMat(e * e.adjoint()),
                                        -1.0 / mu);
            prob.objective.scalars(0) = -1.0;
            SdpSolution sol = solve_sdp(prob, sdp_opts);
            ++res.sdp_solves;
            if (sol.status == SdpStatus::infeasible)
                throw infeasible_error(std::string("star beamforming side ") + side_name(q),
                                       "SDP subproblem infeasible");
            v_cur = extract_complex(sol.blocks[0], 1e-3);
            if (inner > 0 && std::abs(sol.objective - prev_obj) <=
                                 opts.eps_inner * (1.0 + std::abs(sol.objective)))
                break;
            prev_obj = sol.objective;
        }
        res.violation = detail::trace_minus_spectral(v_cur);
        if (res.violation <= opts.eps_violation) {
            res.penalty_converged = true;
            break;
        }
        mu *= opts.delta;
    }

    std::optional<double> p_new = psum_at(v_cur);
    if (!p_new || (p_in && *p_new > *p_in)) {
        v_cur = 0.5 * (v_init + v_init.adjoint());
        p_new = p_in;
        res.violation = detail::trace_minus_spectral(v_cur);
        res.penalty_converged = res.violation <= opts.eps_violation;
        res.kept_incumbent = true;
    }
    if (!p_new)
        throw infeasible_error(std::string("star beamforming side ") + side_name(q),
                               "incoming point infeasible for the current time slot");
    res.V = v_cur;
    res.v = detail::extract_unit_modulus(v_cur);
    res.p_sum_w = *p_new;
    return res;
}

/// One receive-beamforming update: per-user trace-one blocks with summed
/// rank-one penalties, otherwise the same machinery as the surface step.
inline ReceiveStepResult receive_beamforming_step(
    const ChannelRealization& chan, Side q, const std::vector<int>& order, const CMat& v_fixed,
    const Vec& p_bar, double lambda_q, const Vec& r_min_bits, double sigma2,
    const std::vector<CMat>& w_init, const PenaltyOptions& opts, const SdpOptions& sdp_opts = {}) {
    opts.validate();
    const int kq = static_cast<int>(order.size());
    const int nt = static_cast<int>(chan.f_matrix.rows());

    // B[j] = A_j V A_j^H: H_{j,k} = Tr(B_j W_k), linear in each W_k.
    std::vector<CMat> B(kq);
    for (int j = 0; j < kq; ++j) {
        const CMat& a = chan.a(q, order[j]);
        B[j] = a * v_fixed * a.adjoint();
    }

    auto psum_at = [&](const std::vector<CMat>& w) {
        return psum_min_of_lambda(lambda_q, p_bar, detail::gains_from_w(B, w), r_min_bits, sigma2);
    };
    std::optional<double> p_in = psum_at(w_init);

    Vec r = qos_coefficients(r_min_bits, lambda_q);
    Mat h_in = detail::gains_from_w(B, w_init);
    double scale = h_in.diagonal().maxCoeff();
    if (!(scale > 0.0))
        throw infeasible_error(std::string("receive beamforming side ") + side_name(q),
                               "all own-channel gains vanish at the incoming point");

    SdpProblem prob;
    prob.block_dims.assign(kq, 2 * nt);
    prob.n_scalars = 1;
    for (int k = 0; k < kq; ++k) {
        SdpConstraint con;
        con.lhs = prob.zero_term();
        con.lhs.blocks[k] = 0.5 * Mat::Identity(2 * nt, 2 * nt);
        con.rhs = 1.0;
        prob.equalities.push_back(std::move(con));
    }
    for (int k = 0; k < kq; ++k) {
        CMat qk = (p_bar(k) / scale) * B[k];
        for (int j = k + 1; j < kq; ++j) qk -= (r(k) * p_bar(j) / scale) * B[j];
        SdpConstraint con;
        con.lhs = prob.zero_term();
        detail::add_hermitian_coeff(con.lhs.blocks[k], qk, -1.0);
        con.lhs.scalars(0) = r(k);
        con.rhs = 0.0;
        prob.inequalities.push_back(std::move(con));
    }
    for (int k = 0; k + 1 < kq; ++k) {
        SdpConstraint con;
        con.lhs = prob.zero_term();
        detail::add_hermitian_coeff(con.lhs.blocks[k], B[k] / scale, -1.0);
        detail::add_hermitian_coeff(con.lhs.blocks[k + 1], B[k + 1] / scale, 1.0);
        con.rhs = 0.0;
        prob.inequalities.push_back(std::move(con));
    }

    ReceiveStepResult res;
    std::vector<CMat> w_cur(kq);
    for (int k = 0; k < kq; ++k) w_cur[k] = 0.5 * (w_init[k] + w_init[k].adjoint());
    double mu = opts.mu_init;
    auto worst_violation = [&]() {
        double v = 0.0;
        for (auto& w : w_cur) v = std::max(v, detail::trace_minus_spectral(w));
        return v;
    };
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        double prev_obj = std::numeric_limits<double>::quiet_NaN();
        for (int inner = 0; inner < opts.max_inner; ++inner) {
            prob.objective = prob.zero_term();
            for (int k = 0; k < kq; ++k) {
                CVec e = detail::principal_eigvec(w_cur[k]);
                prob.objective.blocks[k] = (0.5 / mu) * Mat::Identity(2 * nt, 2 * nt);
                detail::add_hermitian_coeff(prob.objective.blocks[k], CMat(e * e.adjoint()),
                                            -1.0 / mu);
            }
            prob.objective.scalars(0) = -1.0;
            SdpSolution sol = solve_sdp(prob, sdp_opts);
            ++res.sdp_solves;
            if (sol.status == SdpStatus::infeasible)
                throw infeasible_error(std::string("receive beamforming side ") + side_name(q),
                                       "SDP subproblem infeasible");
            for (int k = 0; k < kq; ++k) w_cur[k] = extract_complex(sol.blocks[k], 1e-3);
            if (inner > 0 && std::abs(sol.objective - prev_obj) <=
                                 opts.eps_inner * (1.0 + std::abs(sol.objective)))
                break;
            prev_obj = sol.objective;
        }
        res.max_violation = worst_violation();
        if (res.max_violation <= opts.eps_violation) {
            res.penalty_converged = true;
            break;
        }
        mu *= opts.delta;
    }

    std::optional<double> p_new = psum_at(w_cur);
    if (!p_new || (p_in && *p_new > *p_in)) {
        for (int k = 0; k < kq; ++k) w_cur[k] = 0.5 * (w_init[k] + w_init[k].adjoint());
        p_new = p_in;
        res.max_violation = worst_violation();
        res.penalty_converged = res.max_violation <= opts.eps_violation;
        res.kept_incumbent = true;
    }
    if (!p_new)
        throw infeasible_error(std::string("receive beamforming side ") + side_name(q),
                               "incoming point infeasible for the current time slot");
    res.W = w_cur;
    res.w.resize(kq);
    for (int k = 0; k < kq; ++k) {
        CVec u = detail::principal_eigvec(w_cur[k]);
        res.w[k] = u / u.norm();
    }
    res.p_sum_w = *p_new;
    return res;
}

struct PAltOpResult {
    Solution solution;
    std::vector<TraceRecord> trace;
    bool converged = false;
};

namespace detail {

struct AltOpMode {
    std::optional<double> pinned_lambda;  // skip the time-slot update
    bool pin_v_all_ones = false;          // skip the surface update
};

inline std::vector<int> identity_order(int n) {
    std::vector<int> o(n);
    std::iota(o.begin(), o.end(), 0);
    return o;
}

inline PAltOpResult p_altop_impl(const ChannelRealization& chan, const SystemConfig& cfg,
                                 const PenaltyOptions& popts, const AltOpOptions& aopts,
                                 const AltOpMode& mode, const Solution* init) {
    using clock = std::chrono::steady_clock;
    cfg.validate();
    popts.validate();
    aopts.validate();
    const double sigma2 = cfg.noise_watts();
    const int m_elems = cfg.n_elements;

    std::array<CMat, 2> V;
    std::array<std::vector<CMat>, 2> W;
    std::array<Vec, 2> p_bar, r_min;
    std::array<std::vector<int>, 2> order;
    std::array<CVec, 2> v_vec;
    std::array<std::vector<CVec>, 2> w_vec;
    double lambda_r;

    for (Side q : kSides) {
        const auto& qos = cfg.qos_bits(q);
        r_min[side_index(q)] = Eigen::Map<const Vec>(qos.data(), qos.size());
    }

    if (init != nullptr) {
        for (Side q : kSides) {
            int iq = side_index(q);
            V[iq] = init->big_v[iq];
            W[iq] = init->big_w[iq];
            v_vec[iq] = init->v[iq];
            w_vec[iq] = init->w[iq];
            p_bar[iq] = init->normalized_powers[iq];
            order[iq] = init->decoding_order[iq];
            // QoS targets follow the decoding permutation.
            Vec perm(order[iq].size());
            for (std::size_t k = 0; k < order[iq].size(); ++k)
                perm(k) = r_min[iq](order[iq][k]);
            r_min[iq] = perm;
        }
        lambda_r = init->lambda_r;
    } else {
        std::mt19937_64 prng(mix_seed(cfg.rng_seed, 0x616c74));
        std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
        for (Side q : kSides) {
            int iq = side_index(q);
            int kq = cfg.n_users(q);
            CVec v0(m_elems);
            if (mode.pin_v_all_ones)
                v0.setOnes();
            else
                for (int i = 0; i < m_elems; ++i) v0(i) = std::polar(1.0, unif(prng));
            V[iq] = v0 * v0.adjoint();
            v_vec[iq] = v0;
            std::vector<CMat> w0(kq);
            std::vector<CVec> w0v(kq);
            for (int k = 0; k < kq; ++k) {
                CVec h = chan.a(q, k) * v0;  // combined channel, MRT receive
                double n = h.norm();
                CVec wk = n > 0.0 ? CVec(h / n) : CVec(CVec::Unit(cfg.n_antennas, 0));
                w0v[k] = wk;
                w0[k] = wk * wk.adjoint();
            }
            order[iq] = initial_decoding_order(chan, q, V[iq], w0);
            // Reindex the per-user state by decoding position.
            W[iq].resize(kq);
            w_vec[iq].resize(kq);
            Vec perm(kq);
            for (int k = 0; k < kq; ++k) {
                W[iq][k] = w0[order[iq][k]];
                w_vec[iq][k] = w0v[order[iq][k]];
                perm(k) = r_min[iq](order[iq][k]);
            }
            r_min[iq] = perm;
            p_bar[iq] = Vec::Constant(kq, 1.0 / kq);
        }
        lambda_r = 0.5;  // provisional; replaced by the search below
    }

    auto gains_of = [&](Side q) {
        return effective_gain_matrix(chan, q, V[side_index(q)], W[side_index(q)],
                                     order[side_index(q)]);
    };
    auto psum_pair_at = [&](double lam, const Mat& hr, const Mat& ht)
        -> std::optional<std::pair<double, double>> {
        auto pr = psum_min_of_lambda(lam, p_bar[0], hr, r_min[0], sigma2);
        auto pt = psum_min_of_lambda(1.0 - lam, p_bar[1], ht, r_min[1], sigma2);
        if (!pr || !pt) return std::nullopt;
        return std::make_pair(*pr, *pt);
    };

    Mat h_r = gains_of(Side::R), h_t = gains_of(Side::T);
    double psum_r, psum_t;
    if (mode.pinned_lambda) {
        lambda_r = *mode.pinned_lambda;
        auto p0 = psum_pair_at(lambda_r, h_r, h_t);
        if (!p0)
            throw infeasible_error("pinned time slot",
                                   "QoS targets infeasible at the pinned lambda");
        psum_r = p0->first;
        psum_t = p0->second;
    } else if (init != nullptr) {
        auto p0 = psum_pair_at(lambda_r, h_r, h_t);
        if (!p0) throw infeasible_error("initial point", "provided solution is infeasible");
        psum_r = p0->first;
        psum_t = p0->second;
    } else {
        TimeSlotResult ts = time_slot_search(p_bar[0], h_r, r_min[0], p_bar[1], h_t, r_min[1],
                                             sigma2, aopts);
        lambda_r = ts.lambda_r;
        psum_r = ts.psum_r_w;
        psum_t = ts.psum_t_w;
    }

    PAltOpResult out;
    double prev_total = psum_r + psum_t;
    const double mono_slack = 1e-6;
    auto check_monotone = [&](double before, double after, const char* stage) {
        if (after > before * (1.0 + mono_slack))
            throw internal_error(std::string("non-monotone ") + stage +
                                 " update beyond tolerance; check solver tolerances");
    };

    for (int iter = 1; iter <= aopts.max_alt_iters; ++iter) {
        auto t0 = clock::now();
        double stage_total = prev_total;

        if (!mode.pinned_lambda) {
            // Candidate set: grid winner, the incumbent fraction, and the
            // midpoint (keeps near-symmetric ties deterministic).
            double best_lam = lambda_r;
            auto best = psum_pair_at(lambda_r, h_r, h_t);
            try {
                TimeSlotResult ts = time_slot_search(p_bar[0], h_r, r_min[0], p_bar[1], h_t,
                                                     r_min[1], sigma2, aopts);
                if (!best || ts.total() < best->first + best->second) {
                    best_lam = ts.lambda_r;
                    best = std::make_pair(ts.psum_r_w, ts.psum_t_w);
                }
            } catch (const time_slot_infeasible&) {
                if (!best) throw;
            }
            if (auto mid = psum_pair_at(0.5, h_r, h_t);
                mid && (!best || mid->first + mid->second < best->first + best->second))
                best = mid, best_lam = 0.5;
            lambda_r = best_lam;
            psum_r = best->first;
            psum_t = best->second;
            check_monotone(stage_total, psum_r + psum_t, "time-slot");
            stage_total = psum_r + psum_t;
        }

        double violation = 0.0;
        if (!mode.pin_v_all_ones) {
            for (Side q : kSides) {
                int iq = side_index(q);
                double lam_q = q == Side::R ? lambda_r : 1.0 - lambda_r;
                BeamformingStepResult r = star_beamforming_step(
                    chan, q, order[iq], W[iq], p_bar[iq], lam_q, r_min[iq], sigma2, V[iq], popts);
                V[iq] = r.V;
                v_vec[iq] = r.v;
                (q == Side::R ? psum_r : psum_t) = r.p_sum_w;
                violation = std::max(violation, r.violation);
            }
            check_monotone(stage_total, psum_r + psum_t, "surface-beamforming");
            stage_total = psum_r + psum_t;
        }

        for (Side q : kSides) {
            int iq = side_index(q);
            double lam_q = q == Side::R ? lambda_r : 1.0 - lambda_r;
            ReceiveStepResult r = receive_beamforming_step(
                chan, q, order[iq], V[iq], p_bar[iq], lam_q, r_min[iq], sigma2, W[iq], popts);
            W[iq] = r.W;
            w_vec[iq] = r.w;
            (q == Side::R ? psum_r : psum_t) = r.p_sum_w;
            violation = std::max(violation, r.max_violation);
        }
        check_monotone(stage_total, psum_r + psum_t, "receive-beamforming");
        stage_total = psum_r + psum_t;

        h_r = gains_of(Side::R);
        h_t = gains_of(Side::T);
        for (Side q : kSides) {
            int iq = side_index(q);
            double lam_q = q == Side::R ? lambda_r : 1.0 - lambda_r;
            Vec p = optimal_powers(iq == 0 ? h_r : h_t, qos_coefficients(r_min[iq], lam_q),
                                   sigma2);
            double total = p.sum();
            p_bar[iq] = p / total;
            (q == Side::R ? psum_r : psum_t) = total;
        }
        double total = psum_r + psum_t;
        check_monotone(stage_total, total, "power");

        double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        out.trace.push_back({iter, total, psum_r, psum_t, lambda_r, violation, ms});

        if (std::abs(prev_total - total) <= aopts.outer_tol * std::max(prev_total, 1e-300)) {
            prev_total = total;
            out.converged = true;
            break;
        }
        prev_total = total;
    }

    // Final solution at the extracted rank-one beamformers; powers are
    // re-derived so every QoS constraint holds exactly.
    Solution& s = out.solution;
    s.lambda_r = lambda_r;
    for (Side q : kSides) {
        int iq = side_index(q);
        int kq = static_cast<int>(order[iq].size());
        s.v[iq] = v_vec[iq];
        s.big_v[iq] = V[iq];
        s.w[iq] = w_vec[iq];
        s.big_w[iq] = W[iq];
        s.decoding_order[iq] = order[iq];
        CMat vv = v_vec[iq] * v_vec[iq].adjoint();
        std::vector<CMat> ww(kq);
        for (int k = 0; k < kq; ++k) ww[k] = w_vec[iq][k] * w_vec[iq][k].adjoint();
        Mat h_vec = effective_gain_matrix(chan, q, vv, ww, order[iq]);
        double lam_q = q == Side::R ? lambda_r : 1.0 - lambda_r;
        Vec p = optimal_powers(h_vec, qos_coefficients(r_min[iq], lam_q), sigma2);
        s.powers[iq] = p;
        s.p_sum[iq] = p.sum();
        s.normalized_powers[iq] = p / p.sum();
        // Defensive audit: the closed form pins every rate to its target.
        RateReport rep = sinr_and_rate(h_vec, p, sigma2, lam_q, identity_order(kq));
        for (int k = 0; k < kq; ++k)
            if (std::abs(rep.rates(k) - r_min[iq](k)) > 1e-6 * (1.0 + r_min[iq](k)))
                throw internal_error("final QoS audit failed");
    }
    return out;
}

}  // namespace detail

/// Full alternating optimization: time slot, surface beamforming, receive
/// beamforming and closed-form powers, repeated until the total-power
/// objective settles. The objective trace is nonincreasing by construction.
inline PAltOpResult p_altop(const ChannelRealization& chan, const SystemConfig& cfg,
                            const PenaltyOptions& popts = {}, const AltOpOptions& aopts = {},
                            const Solution* init = nullptr) {
    return detail::p_altop_impl(chan, cfg, popts, aopts, {}, init);
}

}  // namespace starnoma
